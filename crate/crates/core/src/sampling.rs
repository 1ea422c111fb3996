//! Seeded random points of the monodromy manifold.
//!
//! Points are built through [`MonodromyPoint::from_branch`] from free
//! parameters drawn uniformly in boxes, then rejection-filtered.
//! Branch 1 is generated from `(a, nu + 1, g11, g12)` with
//! `g22 = exp(-2 pi i (nu + 1)) / g11`, `g21 = (g11 g22 - 1) / g12`, so that
//! bounds on `nu + 1` cost nothing; branches 2 and 3 from `(a, s00, g)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::error::{Error, Result};
use crate::monodromy::{Branch, MonodromyPoint};
use crate::params::EquationParams;
use crate::{c64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Generic,
    G11Zero,
    G22Zero,
}

impl BranchKind {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Self::Generic),
            2 => Ok(Self::G11Zero),
            3 => Ok(Self::G22Zero),
            _ => Err(Error::InvalidParameters(format!("branch {k} is not 1, 2 or 3"))),
        }
    }
}

/// Half-widths of the sampling boxes (real and imaginary parts sampled
/// independently) and a lower bound on the modulus of divisor entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub a_re: f64,
    pub a_im: f64,
    pub nu_re: f64,
    pub nu_im: f64,
    pub entry: f64,
    pub s00: f64,
    pub min_modulus: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self { a_re: 0.5, a_im: 0.5, nu_re: 0.16, nu_im: 0.16, entry: 1.2, s00: 2.0, min_modulus: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub sample_box: SampleBox,
    pub max_abs_a: Option<f64>,
    /// Bounds on `nu + 1 = (i / 2 pi) ln(g11 g22)`, taken on the image for
    /// the ray in `charts` when given, on the point itself otherwise.
    pub max_abs_nu: Option<f64>,
    pub max_abs_re_nu: Option<f64>,
    pub max_abs_re_rho: Option<f64>,
    /// Require valid small- and large-`tau` charts on this real ray.
    pub charts: Option<(EquationParams, i8)>,
    pub max_attempts: usize,
}

impl Default for Constraints {
    fn default() -> Self {
        Self {
            sample_box: SampleBox::default(),
            max_abs_a: None,
            max_abs_nu: None,
            max_abs_re_nu: None,
            max_abs_re_rho: None,
            charts: None,
            max_attempts: 1_000_000,
        }
    }
}

impl Constraints {
    /// Points on which the connection check is meaningful: both charts
    /// valid on the positive real ray, `|nu + 1| <= max_nu`.
    pub fn connection(params: EquationParams, max_nu: f64, max_re_rho: f64) -> Self {
        Self {
            sample_box: SampleBox { a_re: 0.3, a_im: 0.3, nu_re: max_nu, nu_im: max_nu, ..SampleBox::default() },
            max_abs_nu: Some(max_nu),
            max_abs_re_rho: Some(max_re_rho),
            charts: Some((params, 0)),
            ..Self::default()
        }
    }

    fn accepts(&self, pt: &MonodromyPoint) -> bool {
        if pt.max_residual() > 1e-10 {
            return false;
        }
        if self.max_abs_a.is_some_and(|m| pt.a.norm() > m) {
            return false;
        }
        if self.max_abs_nu.is_some() || self.max_abs_re_nu.is_some() {
            let prod = match &self.charts {
                Some((params, eps1)) => match pt.apply_f(*eps1, params.eps2) {
                    Ok(img) => img.g11 * img.g22,
                    Err(_) => return false,
                },
                None => pt.g11 * pt.g22,
            };
            if prod.norm() == 0.0 {
                return false;
            }
            let nu = I / (2.0 * PI) * prod.ln();
            if self.max_abs_nu.is_some_and(|m| nu.norm() > m) || self.max_abs_re_nu.is_some_and(|m| nu.re.abs() >= m) {
                return false;
            }
        }
        if self.max_abs_re_rho.is_some_and(|m| pt.rho().re.abs() > m) {
            return false;
        }
        if let Some((params, eps1)) = &self.charts {
            if asymptotics::small_tau_chart(pt, *eps1, params).is_err()
                || asymptotics::large_tau_chart(pt, *eps1, params).is_err()
            {
                return false;
            }
        }
        true
    }
}

fn uniform(rng: &mut ChaCha8Rng, re: f64, im: f64) -> Complex64 {
    let x = if re > 0.0 { rng.gen_range(-re..=re) } else { 0.0 };
    let y = if im > 0.0 { rng.gen_range(-im..=im) } else { 0.0 };
    c64(x, y)
}

fn entry(rng: &mut ChaCha8Rng, b: &SampleBox) -> Option<Complex64> {
    let g = uniform(rng, b.entry, b.entry);
    (g.norm() >= b.min_modulus).then_some(g)
}

fn draw(rng: &mut ChaCha8Rng, kind: BranchKind, b: &SampleBox) -> Option<MonodromyPoint> {
    let a = uniform(rng, b.a_re, b.a_im);
    let branch = match kind {
        BranchKind::Generic => {
            let nu = uniform(rng, b.nu_re, b.nu_im);
            let g11 = entry(rng, b)?;
            let g12 = entry(rng, b)?;
            let prod = (-2.0 * PI * I * nu).exp();
            Branch::Generic { g11, g12, g21: (prod - 1.0) / g12, g22: prod / g11 }
        }
        BranchKind::G11Zero => Branch::G11Zero { s00: uniform(rng, b.s00, b.s00), g22: entry(rng, b)? },
        BranchKind::G22Zero => Branch::G22Zero { s00: uniform(rng, b.s00, b.s00), g11: entry(rng, b)? },
    };
    MonodromyPoint::from_branch(a, branch).ok()
}

/// `count` points of the given branch satisfying `constraints`; the same
/// seed always yields the same list.
pub fn sample_manifold(seed: u64, count: usize, kind: BranchKind, constraints: &Constraints) -> Result<Vec<MonodromyPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == constraints.max_attempts {
            return Err(Error::RejectionExhausted { attempts, accepted: out.len(), requested: count });
        }
        attempts += 1;
        if let Some(pt) = draw(&mut rng, kind, &constraints.sample_box) {
            if constraints.accepts(&pt) {
                out.push(pt);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_on_manifold() {
        let c = Constraints { max_abs_re_nu: Some(1.0 / 6.0), ..Constraints::default() };
        let x = sample_manifold(7, 200, BranchKind::Generic, &c).unwrap();
        assert_eq!(x, sample_manifold(7, 200, BranchKind::Generic, &c).unwrap());
        assert_ne!(x, sample_manifold(8, 200, BranchKind::Generic, &c).unwrap());
        assert!(x.iter().all(|p| p.max_residual() < 1e-10));
        for kind in [BranchKind::G11Zero, BranchKind::G22Zero] {
            let y = sample_manifold(1, 50, kind, &Constraints::default()).unwrap();
            assert!(y.iter().all(|p| p.max_residual() < 1e-10));
        }
        assert!(sample_manifold(1, 0, BranchKind::Generic, &c).unwrap().is_empty());
    }

    #[test]
    fn exhaustion_is_reported() {
        let c = Constraints { max_abs_a: Some(0.0), max_attempts: 100, ..Constraints::default() };
        match sample_manifold(3, 5, BranchKind::Generic, &c) {
            Err(Error::RejectionExhausted { attempts: 100, accepted: 0, requested: 5 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn connection_points_have_both_charts() {
        let p = EquationParams::new(1, 1.0).unwrap();
        let pts = sample_manifold(11, 10, BranchKind::Generic, &Constraints::connection(p, 0.08, 0.2)).unwrap();
        for pt in &pts {
            let ch = asymptotics::large_tau_chart(pt, 0, &p).unwrap();
            assert!(ch.nu_plus_1.norm() <= 0.08 + 1e-12);
            assert!(pt.rho().re.abs() <= 0.2);
            asymptotics::small_tau_chart(pt, 0, &p).unwrap();
        }
    }
}
