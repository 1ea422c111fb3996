//! Asymptotic formulae for `u` and the Hamiltonian as `tau -> 0` and
//! `tau -> infinity` along the real and imaginary rays, parametrised by
//! points of the monodromy manifold; fitting of the large-`tau` form to
//! numerical trajectories and the end-to-end connection check.
//!
//! Rays are labelled by `eps1`: on the real axis `tau = |tau| exp(i pi eps1)`
//! (`eps1 = 0, +-1`), on the imaginary axis `tau = |tau| exp(i pi eps1 / 2)`
//! (`eps1 = +-1`). Every evaluator takes `|tau|`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monodromy::MonodromyPoint;
use crate::ode::{self, SolutionState, Trajectory};
use crate::params::{real_cbrt, EquationParams};
use crate::specfun;
use crate::{c64, I};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
/// Relative tolerance for the exact conditions (`g21 = 0`, `s00 = 2i`, ...).
const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Real,
    Imaginary,
}

impl Axis {
    fn check_eps1(self, eps1: i8) -> Result<()> {
        let ok = match self {
            Axis::Real => matches!(eps1, -1..=1),
            Axis::Imaginary => matches!(eps1, -1 | 1),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("eps1 = {eps1} is not a ray label on the {self:?} axis")))
        }
    }

    /// `arg tau` on the ray.
    pub fn ray_arg(self, eps1: i8) -> f64 {
        match self {
            Axis::Real => PI * f64::from(eps1),
            Axis::Imaginary => 0.5 * PI * f64::from(eps1),
        }
    }

    /// Unit vector of the ray, exact for the six rays used.
    pub fn direction(self, eps1: i8) -> Complex64 {
        match (self, eps1) {
            (Axis::Real, 0) => c64(1.0, 0.0),
            (Axis::Real, _) => c64(-1.0, 0.0),
            (Axis::Imaginary, e) => c64(0.0, f64::from(e)),
        }
    }

    /// Overall factor in front of the large-`tau` formulae: `1` on the real
    /// axis, `(-1)^{(1+eps1)/2} i` on the imaginary one.
    fn outer(self, eps1: i8) -> Complex64 {
        match self {
            Axis::Real => c64(1.0, 0.0),
            Axis::Imaginary => {
                if eps1 == 1 {
                    -I
                } else {
                    I
                }
            }
        }
    }
}

fn sign_pow(e: i8) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `theta(tau) = 3 sqrt(3) |eps b|^{1/3} |tau|^{2/3}`.
pub fn theta(s: f64, params: &EquationParams) -> f64 {
    3.0 * SQRT_3 * params.eb().abs().cbrt() * s.cbrt().powi(2)
}

fn scale_of(z: &[Complex64]) -> f64 {
    z.iter().map(|w| w.norm()).fold(1.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Special {
    None,
    G21Zero,
    G12Zero,
}

/// Parameters of the large-`tau` asymptotics on one ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeTauChart {
    pub nu_plus_1: Complex64,
    /// `g12/g22` of the mapped point; absent for the special charts.
    pub omega: Option<Complex64>,
    pub z: Option<Complex64>,
    pub eps1: i8,
    pub axis: Axis,
    pub params: EquationParams,
    pub special: Special,
    /// `a` and `s00` of the original point.
    pub a: Complex64,
    pub s00: Complex64,
}

fn large_from_image(
    img: &MonodromyPoint,
    pt: &MonodromyPoint,
    eps1: i8,
    axis: Axis,
    params: &EquationParams,
) -> Result<LargeTauChart> {
    let (g11, g12, g21, g22) = (img.g11, img.g12, img.g21, img.g22);
    let scale = scale_of(&[g11, g12, g21, g22]);
    let unit_product = (g11 * g22 - 1.0).norm() <= EXACT_TOL * scale * scale;
    let mut chart = LargeTauChart {
        nu_plus_1: c64(0.0, 0.0),
        omega: None,
        z: None,
        eps1,
        axis,
        params: *params,
        special: Special::None,
        a: pt.a,
        s00: pt.s00,
    };
    if unit_product && g21.norm() <= EXACT_TOL * scale {
        chart.special = Special::G21Zero;
        return Ok(chart);
    }
    if unit_product && g12.norm() <= EXACT_TOL * scale {
        chart.special = Special::G12Zero;
        return Ok(chart);
    }
    if [g11, g12, g21, g22].iter().any(|g| g.norm() <= EXACT_TOL * scale) {
        return Err(Error::ConditionViolation(
            "a connection-matrix entry vanishes but no special chart applies".into(),
        ));
    }
    let nu1 = I / (2.0 * PI) * (g11 * g22).ln();
    if nu1.re.abs() >= 1.0 / 6.0 {
        return Err(Error::ConditionViolation(format!(
            "|Re(nu + 1)| = {} is not below 1/6",
            nu1.re.abs()
        )));
    }
    if nu1.norm() == 0.0 {
        return Err(Error::DegenerateChart("nu + 1 = 0 with no vanishing entry".into()));
    }
    let omega = g12 / g22;
    let sigma = params.sigma();
    let lg = specfun::ln_gamma(nu1)?;
    // The imaginary constant and the (nu + 1) phase are fixed by integration:
    // i pi / 2 + (i pi / 2)(nu + 1), not -i pi / 2 - (3 i pi / 2)(nu + 1).
    let z = 0.5 * (2.0 * PI).ln() + I * PI / 2.0 + 0.5 * PI * I * nu1
        + sigma * I * pt.a * (2.0 + SQRT_3).ln()
        + nu1 * 12f64.ln()
        - (omega.ln() + 0.5 * nu1.ln() + lg);
    chart.nu_plus_1 = nu1;
    chart.omega = Some(omega);
    chart.z = Some(z);
    Ok(chart)
}

/// Chart for `tau -> infinity` along the real ray `eps1`, built from the
/// image of `pt` under the sector map.
pub fn large_tau_chart(pt: &MonodromyPoint, eps1: i8, params: &EquationParams) -> Result<LargeTauChart> {
    Axis::Real.check_eps1(eps1)?;
    let img = pt.apply_f(eps1, params.eps2)?;
    large_from_image(&img, pt, eps1, Axis::Real, params)
}

/// The same on the imaginary ray, from the hatted map.
pub fn large_tau_chart_imag(pt: &MonodromyPoint, eps1: i8, params: &EquationParams) -> Result<LargeTauChart> {
    Axis::Imaginary.check_eps1(eps1)?;
    let img = pt.apply_fhat(eps1, params.eps2)?;
    large_from_image(&img, pt, eps1, Axis::Imaginary, params)
}

impl LargeTauChart {
    /// `eps sqrt|eps b| / 3^{1/4}` times the sign carried inside the bracket.
    fn amplitude(&self) -> f64 {
        let inner = match self.axis {
            Axis::Real => sign_pow(self.eps1),
            Axis::Imaginary => 1.0,
        };
        inner * self.params.eps_f() * self.params.eb().abs().sqrt() / 3f64.powf(0.25)
    }

    /// Non-oscillating part of the bracket, `eps (eps b)^{2/3} tau^{1/3} / 2`,
    /// with the real cube root of the signed `tau` on the real axis and of
    /// `|tau|` on the imaginary one.
    pub fn algebraic_part(&self, s: f64) -> f64 {
        let t13 = match self.axis {
            Axis::Real => real_cbrt(sign_pow(self.eps1) * s),
            Axis::Imaginary => s.cbrt(),
        };
        self.params.eps_f() * self.params.eb_two_thirds() * t13 / 2.0
    }

    /// Oscillating part of the bracket for the special charts.
    fn special_term(&self, s: f64) -> Complex64 {
        let p = &self.params;
        let sigma = p.sigma();
        let th = theta(s, p);
        let coeff = sign_pow(self.eps1) * p.eps_f() * p.eb().abs().sqrt() * (self.s00 - I * (-sigma * PI * self.a).exp())
            / (2.0 * SQRT_2 * 3f64.powf(0.25) * PI.sqrt());
        let ratio = (SQRT_3 - 1.0) / (SQRT_3 + 1.0);
        match self.special {
            Special::G21Zero => coeff * (sigma * I * self.a * ratio.ln()).exp() * (-I * (th - PI / 4.0)).exp(),
            Special::G12Zero => coeff * (-sigma * I * self.a * ratio.ln()).exp() * (I * (th + 0.75 * PI)).exp(),
            Special::None => c64(0.0, 0.0),
        }
    }

    /// The bracketed expression, i.e. `u` without the axis factor.
    pub fn kernel(&self, s: f64) -> Result<Complex64> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameters("|tau| must be positive".into()));
        }
        match self.special {
            Special::None => {
                let (nu1, z) = (self.nu_plus_1, self.z.ok_or_else(|| Error::DegenerateChart("missing z".into()))?);
                let th = theta(s, &self.params);
                let w = I * th + nu1 * th.ln() + z;
                let osc = nu1.sqrt() * (0.75 * PI * I).exp() * w.cosh();
                Ok(self.amplitude() * ((th / 12.0).sqrt() + osc))
            }
            _ => Ok(c64(self.algebraic_part(s), 0.0) + self.special_term(s)),
        }
    }

    pub fn u(&self, s: f64) -> Result<Complex64> {
        Ok(self.axis.outer(self.eps1) * self.kernel(s)?)
    }

    /// The Hamiltonian, all three displayed terms.
    pub fn hamiltonian(&self, s: f64) -> Result<Complex64> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameters("|tau| must be positive".into()));
        }
        let p = &self.params;
        let shift = self.a - p.sigma() * I / 2.0;
        let eb13 = p.eb().abs().cbrt();
        let tau = s * self.axis.direction(self.eps1);
        let (t13, tm13) = match self.axis {
            Axis::Real => {
                let c = real_cbrt(sign_pow(self.eps1) * s);
                (c, 1.0 / c)
            }
            Axis::Imaginary => (s.cbrt(), 1.0 / s.cbrt()),
        };
        let bracket = 3.0 * p.eb_two_thirds() * t13
            + 2.0 * eb13 * tm13 * (shift - 2.0 * SQRT_3 * I * self.nu_plus_1)
            + shift * shift / (2.0 * tau);
        Ok(self.axis.outer(self.eps1) * bracket)
    }
}

pub fn u_large(chart: &LargeTauChart, s: f64) -> Result<Complex64> {
    chart.u(s)
}

pub fn h_large(chart: &LargeTauChart, s: f64) -> Result<Complex64> {
    chart.hamiltonian(s)
}

/// `p(z1, z2)` of the small-`tau` formulae, evaluated through log-gamma.
pub fn p_factor(z1: Complex64, z2: Complex64, params: &EquationParams) -> Result<Complex64> {
    let base = (params.eb().abs() / 32.0).ln() + I * PI / 2.0;
    let lg = 2.0 * (specfun::ln_gamma(0.5 - z2)? - specfun::ln_gamma(1.0 + z2)?)
        + specfun::ln_gamma(1.0 + z2 + I * z1 / 2.0)?;
    let tan = specfun::sinpi(z2) / specfun::sinpi(z2 + 0.5);
    if tan.norm() == 0.0 {
        return Err(Error::DegenerateChart("tan(pi z2) = 0".into()));
    }
    Ok((z2 * base + lg).exp() / tan)
}

/// `Q(z) = 4 psi(1) - psi(i z / 2) + ln 2 - ln|eps b|`.
pub fn q_factor(z: Complex64, params: &EquationParams) -> Result<Complex64> {
    let psi1 = specfun::digamma(c64(1.0, 0.0))?;
    Ok(4.0 * psi1 - specfun::digamma(I * z / 2.0)? + 2f64.ln() - params.eb().abs().ln())
}

fn chi(first: Complex64, second: Complex64, z: Complex64) -> Complex64 {
    let q = (I * PI / 4.0).exp();
    first * (I * PI * z).exp() * q + second * (-I * PI * z).exp() / q
}

/// Parameters of the small-`tau` asymptotics on one ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallTauChart {
    pub rho: Complex64,
    /// `p(s a, rho)`, `p(s a, -rho)`, `p(-s a, rho)`, `p(-s a, -rho)`, `s = (-1)^eps2`.
    pub p_vals: [Complex64; 4],
    /// `chi1` at `rho`, `-rho` (at `0` twice in log mode).
    pub chi1_vals: [Complex64; 2],
    pub chi2_vals: [Complex64; 2],
    pub eps1: i8,
    pub axis: Axis,
    pub params: EquationParams,
    pub a: Complex64,
    pub log_mode: bool,
    /// `Q(s a)`, `Q(-s a)` in log mode.
    pub q_vals: Option<[Complex64; 2]>,
    /// Constant and `ln|tau|` coefficients of the two brackets in log mode:
    /// `a2`, `b2` for the first, then the same for the second.
    pub a2: Option<Complex64>,
    pub b2: Option<Complex64>,
    pub c2: Option<Complex64>,
    pub d2: Option<Complex64>,
}

fn small_from_image(
    img: &MonodromyPoint,
    pt: &MonodromyPoint,
    eps1: i8,
    axis: Axis,
    params: &EquationParams,
    rho: Option<Complex64>,
) -> Result<SmallTauChart> {
    let a = pt.a;
    if a.im.abs() >= 1.0 {
        return Err(Error::ConditionViolation(format!("|Im a| = {} is not below 1", a.im.abs())));
    }
    let (g11, g12, g21, g22) = (img.g11, img.g12, img.g21, img.g22);
    if (g11 * g22).norm() <= EXACT_TOL * scale_of(&[g11, g22]).powi(2) {
        return Err(Error::ConditionViolation("g11 g22 = 0 on the mapped point".into()));
    }
    let sigma = params.sigma();
    let sa = sigma * a;
    let log_mode = (pt.s00 - 2.0 * I).norm() <= EXACT_TOL * scale_of(&[pt.s00]);
    let mut chart = SmallTauChart {
        rho: c64(0.0, 0.0),
        p_vals: [c64(0.0, 0.0); 4],
        chi1_vals: [c64(0.0, 0.0); 2],
        chi2_vals: [c64(0.0, 0.0); 2],
        eps1,
        axis,
        params: *params,
        a,
        log_mode,
        q_vals: None,
        a2: None,
        b2: None,
        c2: None,
        d2: None,
    };
    if log_mode {
        if a.norm() == 0.0 {
            return Err(Error::ConditionViolation("s00 = 2i requires a != 0".into()));
        }
        let zero = c64(0.0, 0.0);
        let (x1, x2) = (chi(g11, g21, zero), chi(g12, g22, zero));
        let q = [q_factor(sa, params)?, q_factor(-sa, params)?];
        let e = (I * PI / 4.0).exp();
        chart.chi1_vals = [x1; 2];
        chart.chi2_vals = [x2; 2];
        chart.q_vals = Some(q);
        chart.a2 = Some(x1 * (1.0 - sigma * I * a / 2.0 * q[0]) + sigma * PI * a / 4.0 * (g21 / e - 3.0 * g11 * e));
        chart.b2 = Some(sigma * I * a * x1);
        chart.c2 = Some(x2 * (1.0 + sigma * I * a / 2.0 * q[1]) + sigma * PI * a / 4.0 * (g12 * e - 3.0 * g22 / e));
        chart.d2 = Some(-sigma * I * a * x2);
        return Ok(chart);
    }
    let canonical = pt.rho();
    let rho = match rho {
        None => canonical,
        Some(r) => {
            if (r - canonical).norm() > 1e-12 && (r + canonical).norm() > 1e-12 {
                return Err(Error::InvalidParameters(format!("rho = {r} does not solve the cosine relation")));
            }
            r
        }
    };
    if rho.norm() == 0.0 {
        return Err(Error::ConditionViolation("rho = 0 with s00 != 2i".into()));
    }
    if rho.re.abs() >= 0.5 - EXACT_TOL {
        return Err(Error::ConditionViolation(format!("|Re rho| = {} is not below 1/2", rho.re.abs())));
    }
    chart.rho = rho;
    chart.p_vals = [
        p_factor(sa, rho, params)?,
        p_factor(sa, -rho, params)?,
        p_factor(-sa, rho, params)?,
        p_factor(-sa, -rho, params)?,
    ];
    chart.chi1_vals = [chi(g11, g21, rho), chi(g11, g21, -rho)];
    chart.chi2_vals = [chi(g12, g22, rho), chi(g12, g22, -rho)];
    Ok(chart)
}

/// Chart for `tau -> 0` along the real ray `eps1`: the generic form when
/// `rho != 0`, the logarithmic form when `s00 = 2i`.
pub fn small_tau_chart(pt: &MonodromyPoint, eps1: i8, params: &EquationParams) -> Result<SmallTauChart> {
    Axis::Real.check_eps1(eps1)?;
    let img = pt.apply_f(eps1, params.eps2)?;
    small_from_image(&img, pt, eps1, Axis::Real, params, None)
}

/// As [`small_tau_chart`] with an explicit representative of `+-rho`.
pub fn small_tau_chart_with_rho(
    pt: &MonodromyPoint,
    eps1: i8,
    params: &EquationParams,
    rho: Complex64,
) -> Result<SmallTauChart> {
    Axis::Real.check_eps1(eps1)?;
    let img = pt.apply_f(eps1, params.eps2)?;
    small_from_image(&img, pt, eps1, Axis::Real, params, Some(rho))
}

pub fn small_tau_chart_imag(pt: &MonodromyPoint, eps1: i8, params: &EquationParams) -> Result<SmallTauChart> {
    Axis::Imaginary.check_eps1(eps1)?;
    let img = pt.apply_fhat(eps1, params.eps2)?;
    small_from_image(&img, pt, eps1, Axis::Imaginary, params, None)
}

impl SmallTauChart {
    fn sigma(&self) -> f64 {
        self.params.sigma()
    }

    fn tau(&self, s: f64) -> Complex64 {
        s * self.axis.direction(self.eps1)
    }

    /// `(X+, X-)` of the first bracket and `(Y+, Y-)` of the second.
    fn terms(&self, s: f64) -> ([Complex64; 2], [Complex64; 2]) {
        let r = self.rho;
        let up = (2.0 * r * s.ln()).exp();
        let down = (-2.0 * r * s.ln()).exp();
        let [p1, p2, p3, p4] = self.p_vals;
        let x = [p1 * self.chi1_vals[0] * up, p2 * self.chi1_vals[1] * down];
        let y = [
            p3 * (-I * PI * r).exp() * self.chi2_vals[0] * up,
            p4 * (I * PI * r).exp() * self.chi2_vals[1] * down,
        ];
        (x, y)
    }

    fn prefactor(&self) -> Complex64 {
        let sigma = self.sigma();
        if self.log_mode {
            sigma * self.params.b * (sigma * PI * self.a / 2.0).exp() / (2.0 * self.a * (PI * self.a / 2.0).sinh())
        } else {
            sigma * self.params.b / (16.0 * PI) * (sigma * PI * self.a / 2.0).exp()
        }
    }

    /// `u` and `du/dtau` at `|tau| = s`.
    pub fn u_with_derivative(&self, s: f64) -> Result<(Complex64, Complex64)> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameters("|tau| must be positive".into()));
        }
        let tau = self.tau(s);
        let c = self.prefactor();
        let (p1, dp1, p2, dp2) = if self.log_mode {
            let l = s.ln();
            let (a2, b2, c2, d2) = (self.a2.unwrap(), self.b2.unwrap(), self.c2.unwrap(), self.d2.unwrap());
            (a2 + b2 * l, b2 / tau, c2 + d2 * l, d2 / tau)
        } else {
            let (x, y) = self.terms(s);
            let k = 2.0 * self.rho / tau;
            (x[0] + x[1], k * (x[0] - x[1]), y[0] + y[1], k * (y[0] - y[1]))
        };
        let u = c * tau * p1 * p2;
        let du = c * p1 * p2 + c * tau * (dp1 * p2 + p1 * dp2);
        Ok((u, du))
    }

    pub fn u(&self, s: f64) -> Result<Complex64> {
        Ok(self.u_with_derivative(s)?.0)
    }

    /// Same expression with `tau` replaced by `|tau|` in the linear factor.
    pub fn kernel(&self, s: f64) -> Result<Complex64> {
        Ok(self.u(s)? / self.axis.direction(self.eps1))
    }

    fn base_exponent(&self) -> Complex64 {
        let a = self.a;
        let mut e = a * (a - self.sigma() * I) + 0.25;
        if !self.log_mode {
            e += 8.0 * self.rho * self.rho;
        }
        e
    }

    pub fn hamiltonian(&self, s: f64) -> Result<Complex64> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameters("|tau| must be positive".into()));
        }
        let tau = self.tau(s);
        let ratio = if self.log_mode {
            let (a2, b2) = (self.a2.unwrap(), self.b2.unwrap());
            b2 / (a2 + b2 * s.ln())
        } else {
            let (x, _) = self.terms(s);
            2.0 * self.rho * (x[0] - x[1]) / (x[0] + x[1])
        };
        Ok(ratio / tau + self.base_exponent() / (2.0 * tau))
    }

    /// Leading `tau`-function behaviour up to the undetermined constant
    /// `konst`; its logarithmic derivative is [`Self::hamiltonian`].
    pub fn tau_function(&self, s: f64, konst: Complex64) -> Result<Complex64> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameters("|tau| must be positive".into()));
        }
        let ln_tau = c64(s.ln(), self.axis.ray_arg(self.eps1));
        let power = (0.5 * self.base_exponent() * ln_tau).exp();
        let bracket = if self.log_mode {
            self.a2.unwrap() + self.b2.unwrap() * s.ln()
        } else {
            let (x, _) = self.terms(s);
            x[0] + x[1]
        };
        Ok(konst * power * bracket)
    }
}

pub fn u_small(chart: &SmallTauChart, s: f64) -> Result<Complex64> {
    chart.u(s)
}

pub fn h_small(chart: &SmallTauChart, s: f64) -> Result<Complex64> {
    chart.hamiltonian(s)
}

pub fn tau_function_asymptotic(chart: &SmallTauChart, s: f64, konst: Complex64) -> Result<Complex64> {
    chart.tau_function(s, konst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Large,
    Small,
}

/// `u` on the imaginary ray `eps1` in either regime.
pub fn u_imag(pt: &MonodromyPoint, eps1: i8, params: &EquationParams, s: f64, regime: Regime) -> Result<Complex64> {
    match regime {
        Regime::Large => large_tau_chart_imag(pt, eps1, params)?.u(s),
        Regime::Small => small_tau_chart_imag(pt, eps1, params)?.u(s),
    }
}

/// Residuals of the four identities expressing `omega(+-1, 0)` and
/// `nu(+-1, 0)` through `omega = omega(0, 0)`, `nu = nu(0, 0)` and `a`.
/// The exponentials `exp(-2 pi i (nu + 1))` are `g11 g22` exactly, so no
/// logarithm branch enters.
pub fn remark31_residuals(pt: &MonodromyPoint) -> Result<[f64; 4]> {
    let mut omegas = Vec::with_capacity(3);
    let mut prods = Vec::with_capacity(3);
    for eps1 in [0, 1, -1] {
        let img = pt.apply_f(eps1, 0)?;
        if img.g22.norm() == 0.0 {
            return Err(Error::ConditionViolation(format!("g22 vanishes on the image for eps1 = {eps1}")));
        }
        omegas.push(img.g12 / img.g22);
        prods.push(img.g11 * img.g22);
    }
    let (w, w1, wm) = (omegas[0], omegas[1], omegas[2]);
    // e^{2 pi i (nu + 1)} = 1 / (g11 g22).
    let e = 1.0 / prods[0];
    let ema = (-PI * pt.a).exp();
    Ok([
        (w1 - (w + (I * ema + 1.0 / w) * e)).norm(),
        (prods[1] - (-w * (w / e + I * ema))).norm(),
        // Holds with the opposite sign of the exponent: exp(-2 pi i (nu + 1)) = g11 g22.
        (wm - w * prods[0] / (prods[0] - 1.0 - I * w * ema)).norm(),
        (prods[2] - (1.0 - e) * (1.0 - 1.0 / e + I * w * ema) / (w * w)).norm(),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub samples: usize,
    pub iterations: usize,
    /// Root-mean-square of the complex residual after the fit.
    pub rms_residual: f64,
    /// Largest modulus of the data after removing the algebraic part.
    pub oscillation_amplitude: f64,
    /// Least-squares coefficient of `tau^{1/3}` (`u / tau^{1/3}` on average).
    pub leading_coefficient: Complex64,
    /// Condition number of the Gauss-Newton matrix at the solution.
    pub condition: f64,
    /// No oscillation present: the data look like a special chart.
    pub special_candidate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub nu_plus_1: Option<Complex64>,
    /// Reduced to `Im z` in `(-pi, pi]`.
    pub z: Option<Complex64>,
    pub diagnostics: FitDiagnostics,
}

/// Reduces `z` modulo `2 pi i`.
pub fn reduce_z(z: Complex64) -> Complex64 {
    let tp = 2.0 * PI;
    let mut im = z.im - tp * (z.im / tp).round();
    if im <= -PI {
        im += tp;
    }
    c64(z.re, im)
}

/// Below this relative amplitude the trajectory is treated as non-oscillating.
const SPECIAL_AMPLITUDE: f64 = 1e-8;

/// Axis and `eps1` of a trajectory's ray.
fn ray_of(dir: Complex64) -> Result<(Axis, i8)> {
    if dir.im.abs() < 1e-12 {
        Ok((Axis::Real, if dir.re > 0.0 { 0 } else { 1 }))
    } else if dir.re.abs() < 1e-12 {
        Ok((Axis::Imaginary, if dir.im > 0.0 { 1 } else { -1 }))
    } else {
        Err(Error::InvalidParameters("fits need a real or imaginary ray".into()))
    }
}

/// Fits the large-`tau` form (correction term dropped) to a trajectory for
/// `nu + 1` and `z`: a fixed-point iteration on the linear projection onto
/// `theta^{+-nu} e^{+-i theta}` gives the start, damped Gauss-Newton on the
/// real and imaginary parts refines it.
pub fn fit_large_tau(traj: &Trajectory, params: &EquationParams) -> Result<FitResult> {
    let n = traj.samples.len();
    if n < 8 {
        return Err(Error::InvalidParameters("fit needs at least 8 samples".into()));
    }
    let (axis, eps1) = ray_of(traj.dir)?;
    let proto = LargeTauChart {
        nu_plus_1: c64(0.0, 0.0),
        omega: None,
        z: None,
        eps1,
        axis,
        params: *params,
        special: Special::None,
        a: traj.a,
        s00: c64(0.0, 0.0),
    };
    let outer = axis.outer(eps1);
    let amp = proto.amplitude() * (0.75 * PI * I).exp();
    let s: Vec<f64> = traj.s_values();
    let th: Vec<f64> = s.iter().map(|&x| theta(x, params)).collect();
    let ln_th: Vec<f64> = th.iter().map(|t| t.ln()).collect();
    // Normalised oscillating part: sqrt(nu) cosh(i theta + nu ln theta + z).
    let data: Vec<Complex64> = traj
        .samples
        .iter()
        .zip(&s)
        .map(|(st, &x)| (st.u / outer - proto.algebraic_part(x)) / amp)
        .collect();
    let mut lead_num = c64(0.0, 0.0);
    let mut lead_den = 0.0;
    for (st, &x) in traj.samples.iter().zip(&s) {
        let t13 = proto.algebraic_part(x) / (params.eps_f() * params.eb_two_thirds() / 2.0);
        lead_num += st.u / outer * t13;
        lead_den += t13 * t13;
    }
    let leading_coefficient = lead_num / lead_den;
    let oscillation_amplitude = data.iter().map(|d| (d * amp).norm()).fold(0.0, f64::max);
    let scale = proto.algebraic_part(s[n - 1]).abs().max(1e-300);
    let mut diagnostics = FitDiagnostics {
        samples: n,
        iterations: 0,
        rms_residual: 0.0,
        oscillation_amplitude,
        leading_coefficient,
        condition: f64::NAN,
        special_candidate: false,
    };
    if oscillation_amplitude < SPECIAL_AMPLITUDE * scale {
        diagnostics.special_candidate = true;
        diagnostics.rms_residual = oscillation_amplitude;
        diagnostics.condition = 0.0;
        return Ok(FitResult { nu_plus_1: None, z: None, diagnostics });
    }

    // Linear projection for a frozen nu: data ~ c+ th^nu e^{i th} + c- th^-nu e^{-i th},
    // and c+ c- = nu / 4 closes the iteration.
    let project = |nu: Complex64| -> Result<(Complex64, Complex64)> {
        let mut m = Matrix2::<Complex64>::zeros();
        let mut rhs = Vector2::<Complex64>::zeros();
        for k in 0..n {
            let e1 = (nu * ln_th[k] + I * th[k]).exp();
            let e2 = (-nu * ln_th[k] - I * th[k]).exp();
            let row = [e1, e2];
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] += row[i].conj() * row[j];
                }
                rhs[i] += row[i].conj() * data[k];
            }
        }
        let sol = m.lu().solve(&rhs).ok_or(Error::SingularMatrix("fit projection"))?;
        Ok((sol[0], sol[1]))
    };
    let mut nu = c64(0.0, 0.0);
    let mut cp = c64(0.0, 0.0);
    for it in 0..200 {
        let (p, m) = project(nu)?;
        cp = p;
        let next = 4.0 * p * m;
        let step = next - nu;
        nu += 0.5 * step;
        diagnostics.iterations = it + 1;
        if step.norm() < 1e-13 {
            break;
        }
    }
    if nu.norm() == 0.0 {
        return Err(Error::NonConvergence("nu + 1 collapsed to zero".into()));
    }
    let mut z = (2.0 * cp / nu.sqrt()).ln();

    let model = |nu: Complex64, z: Complex64, k: usize| -> (Complex64, Complex64, Complex64) {
        let w = I * th[k] + nu * ln_th[k] + z;
        let (ch, sh) = (w.cosh(), w.sinh());
        let r = nu.sqrt();
        let val = r * ch;
        let d_nu = ch / (2.0 * r) + r * sh * ln_th[k];
        let d_z = r * sh;
        (val, d_nu, d_z)
    };
    let cost = |nu: Complex64, z: Complex64| -> f64 { (0..n).map(|k| (model(nu, z, k).0 - data[k]).norm_sqr()).sum() };
    let mut lambda = 1e-3;
    let mut current = cost(nu, z);
    let mut jtj = Matrix4::<f64>::zeros();
    for it in 0..100 {
        jtj = Matrix4::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for k in 0..n {
            let (val, dn, dz) = model(nu, z, k);
            let r = val - data[k];
            // Columns: d/dRe nu, d/dIm nu, d/dRe z, d/dIm z, each complex.
            let cols = [dn, I * dn, dz, I * dz];
            for i in 0..4 {
                jtr[i] += cols[i].re * r.re + cols[i].im * r.im;
                for j in 0..4 {
                    jtj[(i, j)] += cols[i].re * cols[j].re + cols[i].im * cols[j].im;
                }
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for i in 0..4 {
                damped[(i, i)] *= 1.0 + lambda;
            }
            let step = damped.lu().solve(&(-jtr)).ok_or(Error::SingularMatrix("fit normal equations"))?;
            let (nn, nz) = (nu + c64(step[0], step[1]), z + c64(step[2], step[3]));
            let trial = cost(nn, nz);
            if trial <= current {
                let small = step.norm() < 1e-14 * (1.0 + nu.norm() + z.norm());
                nu = nn;
                z = nz;
                let gain = current - trial;
                current = trial;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if small || gain <= 1e-15 * current.max(1e-300) {
                    diagnostics.iterations += it + 1;
                    return finish(nu, z, current, n, amp, &jtj, diagnostics);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            diagnostics.iterations += it + 1;
            return finish(nu, z, current, n, amp, &jtj, diagnostics);
        }
    }
    diagnostics.iterations += 100;
    finish(nu, z, current, n, amp, &jtj, diagnostics)
}

fn finish(
    nu: Complex64,
    z: Complex64,
    cost: f64,
    n: usize,
    amp: Complex64,
    jtj: &Matrix4<f64>,
    mut diagnostics: FitDiagnostics,
) -> Result<FitResult> {
    if !nu.is_finite() || !z.is_finite() {
        return Err(Error::NonConvergence("fit produced non-finite parameters".into()));
    }
    diagnostics.rms_residual = (cost / n as f64).sqrt() * amp.norm();
    let sv = jtj.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    diagnostics.condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Ok(FitResult { nu_plus_1: Some(nu), z: Some(reduce_z(z)), diagnostics })
}

/// Sample points `|tau|` for a fit ending at `tau1`: uniform in `theta`,
/// spanning the largest whole number of periods `2 pi` that fits in
/// `[window tau1, tau1]`, so that the dropped higher harmonics average out.
pub fn fit_window(tau1: f64, window: f64, samples: usize, params: &EquationParams) -> Vec<f64> {
    let th1 = theta(tau1, params);
    let th0 = theta(window * tau1, params);
    let periods = ((th1 - th0) / (2.0 * PI)).floor().max(1.0);
    let start = th1 - 2.0 * PI * periods;
    let k = 3.0 * SQRT_3 * params.eb().abs().cbrt();
    (0..samples)
        .map(|j| {
            let th = start + (th1 - start) * j as f64 / (samples - 1) as f64;
            (th / k).powf(1.5)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Ray label (real axis).
    pub eps1: i8,
    pub tol: f64,
    /// Samples per fit window; see [`fit_window`].
    pub samples: usize,
    pub window: f64,
    /// Extra seeding points and end points for the convergence table; the
    /// main `(tau0, tau1)` is always included.
    pub tau0_list: Vec<f64>,
    pub tau1_list: Vec<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { eps1: 0, tol: 1e-11, samples: 1500, window: 0.5, tau0_list: Vec::new(), tau1_list: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub nu_plus_1: Complex64,
    pub z: Option<Complex64>,
    pub special: Special,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsErrors {
    pub nu_plus_1: Option<f64>,
    /// Modulo `2 pi i`.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub tau0: f64,
    pub tau1: f64,
    pub err_nu: Option<f64>,
    pub err_z: Option<f64>,
    pub oscillation_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub predicted: Prediction,
    pub fitted: FitResult,
    pub abs_errors: AbsErrors,
    pub convergence_table: Vec<ConvergenceRow>,
}

fn z_distance(a: Complex64, b: Complex64) -> f64 {
    reduce_z(a - b).norm()
}

fn errors(pred: &Prediction, fit: &FitResult) -> AbsErrors {
    let nu = match (pred.special, fit.nu_plus_1) {
        (Special::None, Some(f)) => Some((f - pred.nu_plus_1).norm()),
        (Special::None, None) => None,
        // A special prediction is matched by a non-oscillating trajectory.
        (_, None) => Some(0.0),
        (_, Some(f)) => Some(f.norm()),
    };
    let z = match (pred.z, fit.z) {
        (Some(p), Some(f)) => Some(z_distance(p, f)),
        _ => None,
    };
    AbsErrors { nu_plus_1: nu, z }
}

/// Seeds the solution at `|tau| = tau0` from the small-`tau` chart (value
/// and analytic derivative), integrates to `tau1` and fits the large-`tau`
/// chart on a window ending at `tau1` ([`fit_window`]); repeats over the convergence grid.
pub fn verify_connection(
    pt: &MonodromyPoint,
    params: &EquationParams,
    tau0: f64,
    tau1: f64,
    options: &VerifyOptions,
) -> Result<ConnectionReport> {
    if !(tau0 > 0.0 && tau1 > tau0) {
        return Err(Error::InvalidParameters("need 0 < tau0 < tau1".into()));
    }
    if !(options.window > 0.0 && options.window < 1.0) {
        return Err(Error::InvalidParameters("window fraction must lie in (0, 1)".into()));
    }
    if options.samples < 8 {
        return Err(Error::InvalidParameters("at least 8 fit samples".into()));
    }
    let eps1 = options.eps1;
    let large = large_tau_chart(pt, eps1, params)?;
    let small = small_tau_chart(pt, eps1, params)?;
    let predicted = Prediction { nu_plus_1: large.nu_plus_1, z: large.z, special: large.special };

    let mut tau0s = options.tau0_list.clone();
    tau0s.push(tau0);
    tau0s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    tau0s.dedup();
    let mut tau1s = options.tau1_list.clone();
    tau1s.push(tau1);
    tau1s.sort_by(|x, y| x.partial_cmp(y).unwrap());
    tau1s.dedup();
    if tau0s.iter().chain(&tau1s).any(|t| !(*t > 0.0)) || tau0s[0] >= options.window * tau1s[0] {
        return Err(Error::InvalidParameters("convergence grid must satisfy 0 < tau0 < window tau1".into()));
    }

    let dir = Axis::Real.direction(eps1);
    let m = options.samples;
    let windows: Vec<Vec<f64>> = tau1s.iter().map(|&t1| fit_window(t1, options.window, m, params)).collect();
    let mut outputs: Vec<f64> = windows.iter().flatten().copied().collect();
    outputs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    outputs.dedup();

    let mut table = Vec::new();
    let mut main = None;
    for &t0 in &tau0s {
        let (u, du) = small.u_with_derivative(t0)?;
        let seed = SolutionState::new(dir * t0, u, du);
        let traj = ode::integrate_ray(&seed, pt.a, params, *tau1s.last().unwrap(), options.tol, &outputs)?;
        for (t1, window) in tau1s.iter().zip(&windows) {
            let samples: Vec<SolutionState> = traj
                .samples
                .iter()
                .filter(|st| {
                    let x = st.tau.norm();
                    x >= window[0] * (1.0 - 1e-14) && x <= window[m - 1] * (1.0 + 1e-14)
                })
                .copied()
                .collect();
            let sub = Trajectory { params: *params, a: pt.a, dir, samples, hamiltonian: Vec::new() };
            let fit = fit_large_tau(&sub, params)?;
            let e = errors(&predicted, &fit);
            table.push(ConvergenceRow {
                tau0: t0,
                tau1: *t1,
                err_nu: e.nu_plus_1,
                err_z: e.z,
                oscillation_amplitude: fit.diagnostics.oscillation_amplitude,
            });
            if t0 == tau0 && *t1 == tau1 {
                main = Some((fit, e));
            }
        }
    }
    let (fitted, abs_errors) = main.expect("main grid point is always evaluated");
    Ok(ConnectionReport { predicted, fitted, abs_errors, convergence_table: table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::Branch;

    fn unit() -> EquationParams {
        EquationParams::new(1, 1.0).unwrap()
    }

    fn identity_point() -> MonodromyPoint {
        let one = c64(1.0, 0.0);
        let zero = c64(0.0, 0.0);
        MonodromyPoint::from_branch(zero, Branch::Generic { g11: one, g12: zero, g21: zero, g22: one }).unwrap()
    }

    /// Branch-1 point with prescribed `nu + 1` (through `g11 g22`).
    pub(crate) fn point_with_nu(a: Complex64, nu1: Complex64, g11: Complex64, g12: Complex64) -> MonodromyPoint {
        let prod = (-2.0 * PI * I * nu1).exp();
        let g22 = prod / g11;
        let g21 = (prod - 1.0) / g12;
        MonodromyPoint::from_branch(a, Branch::Generic { g11, g12, g21, g22 }).unwrap()
    }

    #[test]
    fn theta_and_algebraic_part() {
        assert!((theta(1.0, &unit()) - 3.0 * SQRT_3).abs() < 1e-15);
        let ch = large_tau_chart(&identity_point(), 0, &unit()).unwrap();
        assert_eq!(ch.special, Special::G21Zero);
        assert_eq!(ch.nu_plus_1, c64(0.0, 0.0));
        assert!((ch.algebraic_part(1000.0) - 5.0).abs() < 1e-12);
        // The oscillating coefficient vanishes: pure algebraic solution.
        for s in [3.0, 50.0, 1e4] {
            assert!((ch.u(s).unwrap() - s.cbrt() / 2.0).norm() < 1e-14);
        }
        let h = ch.hamiltonian(1.0).unwrap();
        assert!((h - c64(2.875, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn generic_large_chart_definitions() {
        let nu1 = c64(0.0, 0.1);
        let pt = point_with_nu(c64(0.1, 0.05), nu1, c64(1.2, 0.3), c64(0.4, -0.7));
        let ch = large_tau_chart(&pt, 0, &unit()).unwrap();
        assert!((ch.nu_plus_1 - nu1).norm() < 1e-14);
        assert_eq!(ch.special, Special::None);
        // Non-oscillating part of the generic form equals the algebraic part.
        let s = 123.0;
        let amp = ch.amplitude() * (theta(s, &unit()) / 12.0).sqrt();
        assert!((amp - ch.algebraic_part(s)).abs() < 1e-12);
        let bad = point_with_nu(c64(0.0, 0.0), c64(0.4, 0.0), c64(1.0, 0.0), c64(0.3, 0.2));
        assert!(matches!(large_tau_chart(&bad, 0, &unit()), Err(Error::ConditionViolation(_))));
        // H grows like tau^{1/3}.
        let r = ch.hamiltonian(8e8).unwrap() / ch.hamiltonian(1e8).unwrap();
        assert!((r - 2.0).norm() < 1e-5);
    }

    #[test]
    fn small_chart_examples() {
        let p = unit();
        let ch = small_tau_chart(&identity_point(), 0, &p).unwrap();
        assert!((ch.rho - c64(1.0 / 6.0, 0.0)).norm() < 1e-14);
        let want = (I * PI / 6.0).exp() * (I * PI / 4.0).exp();
        assert!((ch.chi1_vals[0] - want).norm() < 1e-14);
        // u / tau^{1/3} settles as tau -> 0 when rho = 1/6.
        let r1 = ch.u(1e-8).unwrap() / 1e-8f64.cbrt();
        let r2 = ch.u(1e-10).unwrap() / 1e-10f64.cbrt();
        assert!((r1 - r2).norm() < 1e-2 * r2.norm());

        let mut log = identity_point();
        log.s00 = 2.0 * I;
        log.a = c64(0.0, 0.5);
        let lc = small_tau_chart(&log, 0, &EquationParams::new(1, 2.0).unwrap()).unwrap();
        assert!(lc.log_mode && lc.a2.is_some());
        let q = lc.q_vals.unwrap()[1];
        let want = 4.0 * specfun::digamma(c64(1.0, 0.0)).unwrap() - specfun::digamma(c64(0.25, 0.0)).unwrap();
        assert!((q - want).norm() < 1e-12);

        let mut edge = identity_point();
        edge.s00 = -2.0 * I;
        assert!(matches!(small_tau_chart(&edge, 0, &p), Err(Error::ConditionViolation(_))));
    }

    #[test]
    fn small_chart_symmetric_in_rho() {
        let pt = point_with_nu(c64(0.2, -0.1), c64(0.02, 0.03), c64(0.9, 0.4), c64(0.5, 0.5));
        let p = unit();
        let c1 = small_tau_chart(&pt, 0, &p).unwrap();
        let c2 = small_tau_chart_with_rho(&pt, 0, &p, -c1.rho).unwrap();
        for s in [1e-4, 0.02, 0.3] {
            assert_eq!(c1.u(s).unwrap(), c2.u(s).unwrap());
            assert_eq!(c1.hamiltonian(s).unwrap(), c2.hamiltonian(s).unwrap());
        }
    }

    #[test]
    fn small_chart_derivative_and_tau_function() {
        let pt = point_with_nu(c64(0.2, -0.1), c64(0.02, 0.03), c64(0.9, 0.4), c64(0.5, 0.5));
        let p = unit();
        for eps1 in [0, 1] {
            let ch = small_tau_chart(&pt, eps1, &p).unwrap();
            let s = 0.01;
            let h = 1e-5 * s;
            let dir = Axis::Real.direction(eps1);
            let fd = (ch.u(s + h).unwrap() - ch.u(s - h).unwrap()) / (2.0 * h * dir);
            let (_, du) = ch.u_with_derivative(s).unwrap();
            assert!((fd - du).norm() < 1e-7 * du.norm());
            let k = c64(0.7, 0.2);
            let dl = ((ch.tau_function(s + h, k).unwrap()).ln() - (ch.tau_function(s - h, k).unwrap()).ln()) / (2.0 * h * dir);
            assert!((dl - ch.hamiltonian(s).unwrap()).norm() < 1e-6 * dl.norm());
            let t2 = ch.tau_function(s, 2.0 * k).unwrap() / ch.tau_function(s, k).unwrap();
            assert!((t2 - 2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn small_chart_seed_solves_equation_to_leading_order() {
        // Seeding at tau0 and integrating a short way must agree with the
        // chart evaluated there up to the dropped O(tau^delta) terms.
        let pt = point_with_nu(c64(0.1, 0.05), c64(0.01, -0.02), c64(1.1, -0.2), c64(0.6, 0.3));
        let p = unit();
        let ch = small_tau_chart(&pt, 0, &p).unwrap();
        let mut last = f64::INFINITY;
        for t0 in [1e-3, 1e-4, 1e-5] {
            let (u, du) = ch.u_with_derivative(t0).unwrap();
            let traj = ode::integrate_ray(&SolutionState::new(c64(t0, 0.0), u, du), pt.a, &p, 10.0 * t0, 1e-12, &[10.0 * t0]).unwrap();
            let rel = (traj.samples[0].u - ch.u(10.0 * t0).unwrap()).norm() / traj.samples[0].u.norm();
            assert!(rel < last, "relative defect must shrink with tau0");
            last = rel;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn sector_identities() {
        let pt = point_with_nu(c64(0.15, 0.1), c64(0.03, -0.02), c64(0.8, 0.5), c64(-0.6, 0.9));
        let r = remark31_residuals(&pt).unwrap();
        for x in r {
            assert!(x < 1e-10, "{r:?}");
        }
        let mut off = pt;
        off.g12 += 1e-3;
        let r = remark31_residuals(&off).unwrap();
        assert!(r.iter().cloned().fold(0.0, f64::max) > 1e-5);
    }

    #[test]
    fn fit_recovers_synthetic_chart() {
        let p = unit();
        let pt = point_with_nu(c64(0.1, 0.0), c64(0.03, 0.02), c64(1.0, 0.2), c64(0.5, -0.4));
        let ch = large_tau_chart(&pt, 0, &p).unwrap();
        let samples: Vec<SolutionState> = (0..400)
            .map(|k| {
                let s = 200.0 + 200.0 * k as f64 / 399.0;
                SolutionState::new(c64(s, 0.0), ch.u(s).unwrap(), c64(0.0, 0.0))
            })
            .collect();
        let traj = Trajectory { params: p, a: pt.a, dir: c64(1.0, 0.0), samples, hamiltonian: vec![] };
        let fit = fit_large_tau(&traj, &p).unwrap();
        assert!((fit.nu_plus_1.unwrap() - ch.nu_plus_1).norm() < 1e-8);
        assert!(z_distance(fit.z.unwrap(), ch.z.unwrap()) < 1e-8);
    }

    #[test]
    fn fit_flags_algebraic_solution() {
        let p = unit();
        let samples: Vec<SolutionState> = (0..100)
            .map(|k| {
                let s = 50.0 + k as f64;
                let (u, du) = ode::algebraic_solution(s, &p);
                SolutionState::new(c64(s, 0.0), c64(u, 0.0), c64(du, 0.0))
            })
            .collect();
        let traj = Trajectory { params: p, a: c64(0.0, 0.0), dir: c64(1.0, 0.0), samples, hamiltonian: vec![] };
        let fit = fit_large_tau(&traj, &p).unwrap();
        assert!(fit.diagnostics.special_candidate);
        assert!(fit.diagnostics.oscillation_amplitude < 1e-10);
        assert!((fit.diagnostics.leading_coefficient - 0.5).norm() < 1e-12);
    }

    #[test]
    fn imaginary_axis_prefactors() {
        let p = unit();
        let pt = point_with_nu(c64(0.0, 0.0), c64(0.02, 0.01), c64(1.0, 0.3), c64(0.4, 0.2));
        for eps1 in [1, -1] {
            if let Ok(ch) = large_tau_chart_imag(&pt, eps1, &p) {
                let r = ch.u(300.0).unwrap() / ch.kernel(300.0).unwrap();
                assert!(r == I || r == -I);
            }
            let sc = small_tau_chart_imag(&pt, eps1, &p).unwrap();
            let r = sc.u(0.01).unwrap() / sc.kernel(0.01).unwrap();
            assert_eq!(r, f64::from(eps1) * I);
        }
    }
}
