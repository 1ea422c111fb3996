//! Points of the manifold of monodromy data and the group actions on it.
//!
//! A point is the 8-tuple `(a, s00, s0inf, s1inf, g11, g12, g21, g22)`:
//! the formal-monodromy parameter, the three independent Stokes multipliers
//! and the entries of the connection matrix `G`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::{c64, I};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyPoint {
    pub a: Complex64,
    pub s00: Complex64,
    pub s0inf: Complex64,
    pub s1inf: Complex64,
    pub g11: Complex64,
    pub g12: Complex64,
    pub g21: Complex64,
    pub g22: Complex64,
}

/// Free parameters of the three branch parametrisations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// `g11 g22 != 0`; the whole connection matrix (unit determinant).
    Generic { g11: Complex64, g12: Complex64, g21: Complex64, g22: Complex64 },
    /// `g11 = 0`.
    G11Zero { s00: Complex64, g22: Complex64 },
    /// `g22 = 0`.
    G22Zero { s00: Complex64, g11: Complex64 },
}

impl Branch {
    pub fn index(&self) -> u8 {
        match self {
            Branch::Generic { .. } => 1,
            Branch::G11Zero { .. } => 2,
            Branch::G22Zero { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LieKind {
    /// `tau -> tau exp(-i pi p)`.
    NegateTau,
    /// `a -> -a`.
    NegateA,
    /// `tau -> -i l tau`.
    RotateTau,
}

fn ex(x: Complex64) -> Complex64 {
    x.exp()
}

/// `exp(k pi a)`.
fn epa(k: f64, a: Complex64) -> Complex64 {
    ex(k * PI * a)
}

const TOL_DET: f64 = 1e-12;

impl MonodromyPoint {
    pub fn g(&self) -> Mat2 {
        linalg::mat(self.g11, self.g12, self.g21, self.g22)
    }

    fn with_g(mut self, g: &Mat2) -> Self {
        self.g11 = g[(0, 0)];
        self.g12 = g[(0, 1)];
        self.g21 = g[(1, 0)];
        self.g22 = g[(1, 1)];
        self
    }

    /// Builds a point from one of the branch parametrisations.
    pub fn from_branch(a: Complex64, branch: Branch) -> Result<Self> {
        match branch {
            Branch::Generic { g11, g12, g21, g22 } => {
                if g11 == Complex64::new(0.0, 0.0) || g22 == Complex64::new(0.0, 0.0) {
                    return Err(Error::InvalidParameters("branch 1 needs g11*g22 != 0".into()));
                }
                let det = g11 * g22 - g12 * g21;
                if (det - 1.0).norm() > TOL_DET {
                    return Err(Error::InvalidParameters(format!(
                        "branch 1 needs det G = 1, got {det}"
                    )));
                }
                // The s1inf expression is the one forced by the fourth defining
                // relation; it reduces to (g12 - i g22)/g11 at a = 0.
                let s0inf = -(g21 + I * g11 * epa(1.0, a)) / g22;
                let s1inf = epa(-2.0, a) * (g12 - I * g22 * epa(1.0, a)) / g11;
                let s00 = I * epa(-1.0, a) / (g11 * g22) + g12 / g22 - g21 / g11;
                Ok(Self { a, s00, s0inf, s1inf, g11, g12, g21, g22 })
            }
            Branch::G11Zero { s00, g22 } => {
                if g22.norm() == 0.0 {
                    return Err(Error::InvalidParameters("branch 2 needs g22 != 0".into()));
                }
                let bracket = 1.0 + epa(2.0, a) + I * s00 * epa(1.0, a);
                Ok(Self {
                    a,
                    s00,
                    s0inf: -I * epa(-1.0, a) / (g22 * g22),
                    s1inf: -I * g22 * g22 * bracket * epa(-1.0, a),
                    g11: c64(0.0, 0.0),
                    g12: I * g22 * epa(1.0, a),
                    g21: I * epa(-1.0, a) / g22,
                    g22,
                })
            }
            Branch::G22Zero { s00, g11 } => {
                if g11.norm() == 0.0 {
                    return Err(Error::InvalidParameters("branch 3 needs g11 != 0".into()));
                }
                let bracket = 1.0 + epa(2.0, a) + I * s00 * epa(1.0, a);
                Ok(Self {
                    a,
                    s00,
                    s0inf: -I * g11 * g11 * bracket * epa(1.0, a),
                    s1inf: -I * epa(-3.0, a) / (g11 * g11),
                    g11,
                    g12: -I * epa(-1.0, a) / g11,
                    g21: -I * epa(1.0, a) * g11,
                    g22: c64(0.0, 0.0),
                })
            }
        }
    }

    /// Absolute residuals of the five defining relations, `det G - 1` last.
    pub fn manifold_residual(&self) -> [f64; 5] {
        let Self { a, s00, s0inf, s1inf, g11, g12, g21, g22 } = *self;
        [
            (s0inf * s1inf + 1.0 + epa(-2.0, a) + I * s00 * epa(-1.0, a)).norm(),
            (g22 * g21 - g11 * g12 + s00 * g11 * g22 - I * epa(-1.0, a)).norm(),
            (g11 * g11 - g21 * g21 - s00 * g11 * g21 - I * epa(-1.0, a) * s0inf).norm(),
            (g22 * g22 - g12 * g12 + s00 * g12 * g22 - I * epa(1.0, a) * s1inf).norm(),
            (g11 * g22 - g12 * g21 - 1.0).norm(),
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.manifold_residual().into_iter().fold(0.0, f64::max)
    }

    /// `cos(2 pi rho)` from the Stokes multiplier at the origin.
    pub fn cos_2pi_rho(&self) -> Complex64 {
        -I * self.s00 / 2.0
    }

    /// The same quantity from the Stokes multipliers at infinity.
    pub fn cos_2pi_rho_inf(&self) -> Complex64 {
        (PI * self.a).cosh() + 0.5 * self.s0inf * self.s1inf * epa(1.0, self.a)
    }

    /// Canonical `rho`: `Re rho` in `[0, 1/2]`, `Im rho >= 0` when `Re rho = 0`.
    pub fn rho(&self) -> Complex64 {
        canonical_rho(self.cos_2pi_rho().acos() / (2.0 * PI))
    }

    /// Stokes multiplier `s_k` at infinity for any integer `k`. Even indices
    /// are lower-triangular, odd ones upper-triangular; two steps conjugate
    /// by `exp(-pi(a - i/2) sigma3)` and flip the sign with `sigma3`.
    pub fn s_inf(&self, k: i64) -> Complex64 {
        let m = k.div_euclid(2) as f64;
        if k.rem_euclid(2) == 0 {
            self.s0inf * epa(2.0 * m, self.a)
        } else {
            self.s1inf * epa(-2.0 * m, self.a)
        }
    }

    pub fn stokes_inf(&self, k: i64) -> Mat2 {
        if k.rem_euclid(2) == 0 {
            linalg::lower(self.s_inf(k))
        } else {
            linalg::upper(self.s_inf(k))
        }
    }

    /// Stokes matrices at the origin have period two and the same multiplier.
    pub fn stokes_zero(&self, k: i64) -> Mat2 {
        if k.rem_euclid(2) == 0 {
            linalg::upper(self.s00)
        } else {
            linalg::lower(self.s00)
        }
    }

    fn formal_monodromy(&self, scale: f64) -> Mat2 {
        linalg::exp_sigma3(-scale * PI * (self.a - I / 2.0))
    }

    pub fn m_inf(&self) -> Mat2 {
        self.stokes_inf(0)
            * self.stokes_inf(1)
            * self.stokes_inf(2)
            * self.stokes_inf(3)
            * self.formal_monodromy(2.0)
    }

    pub fn m_zero(&self) -> Mat2 {
        self.stokes_zero(0) * self.stokes_zero(1)
    }

    /// `S0inf S1inf sigma3 exp(-pi(a - i/2) sigma3)`, whose square is `M^inf`.
    pub fn half_m_inf(&self) -> Mat2 {
        self.stokes_inf(0) * self.stokes_inf(1) * linalg::sigma3() * self.formal_monodromy(1.0)
    }

    pub fn stokes_structure(&self, k_min: i64, k_max: i64) -> StokesSet {
        let ks: Vec<i64> = (k_min..=k_max).collect();
        StokesSet {
            k_min,
            inf: ks.iter().map(|&k| self.stokes_inf(k)).collect(),
            zero: ks.iter().map(|&k| self.stokes_zero(k)).collect(),
            m_inf: self.m_inf(),
            m_zero: self.m_zero(),
        }
    }

    /// Max-norm residuals of the cyclic and semi-cyclic relations.
    pub fn cyclic_residuals(&self) -> Result<(f64, f64)> {
        let g = self.g();
        let cyclic = g * self.m_inf() - self.m_zero() * g;
        let gi = linalg::inverse(&g, "connection matrix")?;
        let semi = gi * self.stokes_zero(0) * linalg::sigma1() * g - self.half_m_inf();
        Ok((linalg::max_norm(&cyclic), linalg::max_norm(&semi)))
    }

    /// The auxiliary maps `F_{eps1,eps2}`. `s00` is fixed and `a` becomes
    /// `(-1)^eps2 a`; the exponentials in the item formulas are evaluated at
    /// the image value of `a`, which is what keeps the image on the manifold.
    pub fn apply_f(&self, eps1: i8, eps2: i8) -> Result<Self> {
        check_sign(eps1, true, "eps1")?;
        check_sign(eps2, true, "eps2")?;
        let Self { s00, s0inf: s0, s1inf: s1, g11, g12, g21, g22, .. } = *self;
        let a = if eps2 == 0 { self.a } else { -self.a };
        let e = |k: f64| epa(k, a);
        let (s0n, s1n, h11, h12, h21, h22) = match (eps1, eps2) {
            (0, 0) => (s0, s1, g11, g12, g21, g22),
            (0, -1) => (
                s1 * e(-1.0),
                s0 * e(-1.0),
                -g22 * e(-0.5),
                -(g21 + s0 * g22) * e(0.5),
                -(g12 - s00 * g22) * e(-0.5),
                -(g11 - s00 * g21 + (g12 - s00 * g22) * s0) * e(0.5),
            ),
            (0, 1) => (
                s1 * e(-1.0),
                s0 * e(-1.0),
                -I * g12 * e(-0.5),
                -I * (g11 + s0 * g12) * e(0.5),
                -I * g22 * e(-0.5),
                -I * (g21 + s0 * g22) * e(0.5),
            ),
            (-1, 0) => (
                -s0 * e(-1.0),
                -s1 * e(1.0),
                g21 * e(-0.5),
                -g22 * e(0.5),
                (g11 - s00 * g21) * e(-0.5),
                -(g12 - s00 * g22) * e(0.5),
            ),
            (-1, -1) => {
                let t = g12 - s00 * g22;
                let w = g22 - t * s00;
                (
                    -s1,
                    -s0 * e(-2.0),
                    t,
                    -g11 + s00 * g21 - t * s0,
                    w,
                    -g21 + (g11 - s00 * g21) * s00 - w * s0,
                )
            }
            (-1, 1) => (
                -s1,
                -s0 * e(-2.0),
                I * g22,
                -I * (g21 + s0 * g22),
                I * (g12 - s00 * g22),
                -I * (g11 - s00 * g21 + (g12 - s00 * g22) * s0),
            ),
            (1, 0) => (
                -s0 * e(1.0),
                -s1 * e(-1.0),
                (g21 + s00 * g11) * e(0.5),
                -(g22 + s00 * g12) * e(-0.5),
                g11 * e(0.5),
                -g12 * e(-0.5),
            ),
            (1, -1) => (
                -s1 * e(-2.0),
                -s0,
                g12 * e(-1.0),
                -(g11 + s0 * g12) * e(1.0),
                g22 * e(-1.0),
                -(g21 + s0 * g22) * e(1.0),
            ),
            (1, 1) => {
                let t = g22 + s00 * g12;
                (
                    -s1 * e(-2.0),
                    -s0,
                    I * t * e(-1.0),
                    -I * (g21 + s00 * g11 + t * s0) * e(1.0),
                    // Not displayed with the other entries; fixed by det G = 1.
                    I * g12 * e(-1.0),
                    -I * (g11 + s0 * g12) * e(1.0),
                )
            }
            _ => unreachable!(),
        };
        Ok(Self { a, s00, s0inf: s0n, s1inf: s1n, g11: h11, g12: h12, g21: h21, g22: h22 })
    }

    /// The maps `F^_{eps1,eps2}` used on the imaginary axis. For `eps2 = 0`
    /// the image carries `-a` and the formulas are evaluated there, as for
    /// `apply_f`; otherwise `a` is unchanged.
    pub fn apply_fhat(&self, eps1: i8, eps2: i8) -> Result<Self> {
        check_sign(eps1, false, "eps1")?;
        check_sign(eps2, true, "eps2")?;
        let Self { s00, s0inf: s0, s1inf: s1, g11, g12, g21, g22, .. } = *self;
        let a = if eps2 == 0 { -self.a } else { self.a };
        let e = |k: f64| epa(k, a);
        let (s0n, s1n, h11, h12, h21, h22) = match (eps1, eps2) {
            (-1, 0) => (
                s1 * e(-1.5),
                s0 * e(-0.5),
                -g22 * e(-0.75),
                -(g21 + s0 * g22) * e(0.75),
                -(g12 - s00 * g22) * e(-0.75),
                -(g11 + s0 * g12 - (g21 + s0 * g22) * s00) * e(0.75),
            ),
            (-1, -1) => (
                s0 * e(-0.5),
                s1 * e(0.5),
                -I * g21 * e(-0.25),
                -I * g22 * e(0.25),
                -I * (g11 - s00 * g21) * e(-0.25),
                -I * (g12 - s00 * g22) * e(0.25),
            ),
            (-1, 1) => (
                s0 * e(-0.5),
                s1 * e(0.5),
                g11 * e(-0.25),
                g12 * e(0.25),
                g21 * e(-0.25),
                g22 * e(0.25),
            ),
            (1, 0) => (
                s1 * e(-0.5),
                s0 * e(-1.5),
                -I * g12 * e(-0.25),
                -I * (g11 + s0 * g12) * e(0.25),
                -I * g22 * e(-0.25),
                -I * (g21 + s0 * g22) * e(0.25),
            ),
            (1, -1) => (
                s0 * e(0.5),
                s1 * e(-0.5),
                g11 * e(0.25),
                g12 * e(-0.25),
                g21 * e(0.25),
                g22 * e(-0.25),
            ),
            (1, 1) => (
                s0 * e(0.5),
                s1 * e(-0.5),
                I * (g21 + s00 * g11) * e(0.25),
                I * (g22 + s00 * g12) * e(-0.25),
                I * g11 * e(0.25),
                I * g12 * e(-0.25),
            ),
            _ => unreachable!(),
        };
        Ok(Self { a, s00, s0inf: s0n, s1inf: s1n, g11: h11, g12: h12, g21: h21, g22: h22 })
    }

    /// Action of the Backlund transformation: `up` sends `a` to `a - i`.
    pub fn backlund(&self, direction: Direction) -> Self {
        let (da, sg) = match direction {
            Direction::Up => (-I, I),
            Direction::Down => (I, -I),
        };
        Self {
            a: self.a + da,
            s00: -self.s00,
            s0inf: self.s0inf,
            s1inf: self.s1inf,
            g11: sg * self.g11,
            g12: sg * self.g12,
            g21: -sg * self.g21,
            g22: -sg * self.g22,
        }
    }

    /// Action of the Lie-point symmetries. The relations express the old
    /// connection matrix as `G_o = L G_n R`; this solves for `G_n`.
    pub fn lie_point(&self, kind: LieKind, p: i8, l: i8) -> Result<Self> {
        check_sign(p, false, "p")?;
        check_sign(l, false, "l")?;
        let (pf, lf) = (f64::from(p), f64::from(l));
        let a = self.a;
        let mut new = *self;
        let (left, right) = match kind {
            LieKind::NegateTau => {
                let k = i64::from(p + l);
                let c = lf * PI * (a - I);
                new.s0inf = self.s_inf(k) * ex(-c);
                new.s1inf = self.s_inf(k + 1) * ex(c);
                let s0 = new.stokes_zero(0);
                let tail = linalg::exp_sigma3(-pf * I * PI / 4.0)
                    * linalg::exp_sigma3(pf * PI / 2.0 * (a - I / 2.0));
                let right = linalg::inverse(&tail, "formal monodromy")?;
                let left = if p == 1 {
                    linalg::sigma1() * linalg::inverse(&s0, "S0_0")? * -I
                } else {
                    s0 * linalg::sigma1() * I
                };
                (left, right)
            }
            LieKind::NegateA => {
                let an = -a;
                new.a = an;
                let k = i64::from(l);
                new.s0inf = self.s_inf(k) * ex(-an * PI * lf);
                new.s1inf = self.s_inf(k + 1) * ex(an * PI * lf);
                let e = linalg::exp_sigma3(PI * (an - I / 2.0));
                let w = e
                    * linalg::sigma3()
                    * linalg::inverse(&new.stokes_inf(1), "S1inf")?
                    * linalg::sigma3()
                    * linalg::inverse(&e, "formal monodromy")?;
                let right = w * linalg::exp_sigma3(an * PI / 2.0) * linalg::sigma1();
                let left = if p == 1 {
                    linalg::identity() * I
                } else {
                    -(new.stokes_zero(0) * linalg::sigma1())
                };
                (left, right)
            }
            LieKind::RotateTau => {
                new.s0inf = self.s0inf * ex(PI * lf * a / 2.0);
                new.s1inf = self.s1inf * ex(-PI * lf * a / 2.0);
                let s0 = new.stokes_zero(0);
                match (p, l) {
                    (-1, -1) => (s0 * linalg::sigma1() * I, linalg::exp_sigma3(PI * a / 4.0)),
                    (-1, 1) => (linalg::identity(), linalg::exp_sigma3(-PI * a / 4.0)),
                    (1, -1) => (linalg::identity(), linalg::exp_sigma3(PI * a / 4.0)),
                    _ => (
                        linalg::sigma1() * linalg::inverse(&s0, "S0_0")? * -I,
                        linalg::exp_sigma3(-PI * a / 4.0),
                    ),
                }
            }
        };
        let g = linalg::inverse(&left, "left factor")?
            * self.g()
            * linalg::inverse(&right, "right factor")?;
        Ok(new.with_g(&g))
    }
}

fn check_sign(v: i8, zero_ok: bool, name: &str) -> Result<()> {
    if v == 1 || v == -1 || (zero_ok && v == 0) {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} = {v} out of range")))
    }
}

pub(crate) fn canonical_rho(r: Complex64) -> Complex64 {
    let mut r = r;
    if r.re < 0.0 {
        r = -r;
    }
    if r.re.abs() < 1e-15 && r.im < 0.0 {
        r = c64(0.0, -r.im);
    }
    r
}

/// Stokes and monodromy matrices over a window of indices.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesSet {
    pub k_min: i64,
    pub inf: Vec<Mat2>,
    pub zero: Vec<Mat2>,
    pub m_inf: Mat2,
    pub m_zero: Mat2,
}

impl StokesSet {
    pub fn inf_at(&self, k: i64) -> Option<&Mat2> {
        usize::try_from(k - self.k_min).ok().and_then(|i| self.inf.get(i))
    }
}
