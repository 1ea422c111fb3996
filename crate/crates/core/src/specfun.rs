//! Gamma, log-gamma and digamma for complex arguments.
//!
//! `ln_gamma` uses the Lanczos approximation with Godfrey's coefficients
//! (g = 607/128, 15 terms) in the right half-plane `Re z >= 1/2` and the
//! reflection formula elsewhere. The returned logarithm is the analytic
//! continuation of the real log-gamma function off the negative real axis,
//! so its imaginary part is not confined to `(-pi, pi]`.
//!
//! `digamma` shifts the argument by the recurrence until `Re z >= 10` and
//! sums the asymptotic series; reflection handles `Re z < 1/2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const LN_PI: f64 = 1.144_729_885_849_400_2;

const LANCZOS_SHIFT: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

/// Bernoulli numbers B_2k / (2k) for k = 1..=8, used by the digamma tail.
const DIGAMMA_TAIL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

fn check_pole(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::PoleOfGamma(z));
    }
    Ok(())
}

/// sin(pi x) with exact zeros at the integers.
fn sinpi_real(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    // r in [-1, 1]
    if r.abs() <= 0.25 {
        (PI * r).sin()
    } else if r > 0.75 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.75 {
        -(PI * (1.0 + r)).sin()
    } else if r > 0.0 {
        (PI * (0.5 - r)).cos()
    } else {
        -(PI * (0.5 + r)).cos()
    }
}

fn cospi_real(x: f64) -> f64 {
    sinpi_real(x + 0.5)
}

/// sin(pi z) evaluated with argument reduction on the real part.
pub fn sinpi(z: Complex64) -> Complex64 {
    let y = PI * z.im;
    Complex64::new(sinpi_real(z.re) * y.cosh(), cospi_real(z.re) * y.sinh())
}

fn cospi(z: Complex64) -> Complex64 {
    let y = PI * z.im;
    Complex64::new(cospi_real(z.re) * y.cosh(), -sinpi_real(z.re) * y.sinh())
}

fn ln_gamma_right(z: Complex64) -> Complex64 {
    let t = z + LANCZOS_SHIFT;
    let mut ser = Complex64::new(LANCZOS_C0, 0.0);
    let mut y = z;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    (z + 0.5) * t.ln() - t + (SQRT_2PI * ser / z).ln()
}

/// Principal log-gamma.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re >= 0.5 {
        return Ok(ln_gamma_right(z));
    }
    // ln G(z) = ln pi - ln sin(pi z) - ln G(1 - z), with the 2 pi i jumps
    // of the principal logarithms removed so the result stays continuous.
    let branch = (2.0 * PI).copysign(z.im) * (0.5 * z.re + 0.25).floor();
    let value = Complex64::new(LN_PI, 0.0) - sinpi(z).ln() - ln_gamma_right(1.0 - z);
    Ok(value + Complex64::new(0.0, branch))
}

/// The gamma function.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re >= 0.5 {
        return Ok(ln_gamma_right(z).exp());
    }
    Ok(PI / (sinpi(z) * ln_gamma_right(1.0 - z).exp()))
}

/// The psi function, d/dz ln G(z).
pub fn digamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re < 0.5 {
        // psi(z) = psi(1 - z) - pi cot(pi z)
        let cot = cospi(z) / sinpi(z);
        return Ok(digamma_right(1.0 - z) - PI * cot);
    }
    Ok(digamma_right(z))
}

fn digamma_right(mut z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < 10.0 || z.norm_sqr() < 100.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut pow = inv2;
    let mut tail = Complex64::new(0.0, 0.0);
    for c in DIGAMMA_TAIL {
        tail += c * pow;
        pow *= inv2;
    }
    acc + z.ln() - 0.5 / z - tail
}
