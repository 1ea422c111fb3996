//! Sweeps over many manifold points. Per-point work is sequential; with the
//! `parallel` feature the points are distributed over the rayon pool,
//! otherwise [`Mode::Parallel`] falls back to a plain loop. Output order
//! always follows input order, so both modes give identical results.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{self, ConnectionReport, VerifyOptions};
use crate::error::Result;
use crate::monodromy::{Direction, LieKind, MonodromyPoint};
use crate::params::EquationParams;
use crate::sampling::{self, BranchKind, Constraints};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sequential,
    Parallel,
}

impl Default for Mode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Mode::Parallel
        } else {
            Mode::Sequential
        }
    }
}

/// Order-preserving map in the requested mode.
pub fn map<T, R, F>(items: &[T], mode: Mode, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Mode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum GroupAction {
    F { eps1: i8, eps2: i8 },
    FHat { eps1: i8, eps2: i8 },
    Backlund { direction: Direction },
    LiePoint { kind: LieKind, p: i8, l: i8 },
}

impl GroupAction {
    pub fn apply(&self, pt: &MonodromyPoint) -> Result<MonodromyPoint> {
        match *self {
            GroupAction::F { eps1, eps2 } => pt.apply_f(eps1, eps2),
            GroupAction::FHat { eps1, eps2 } => pt.apply_fhat(eps1, eps2),
            GroupAction::Backlund { direction } => Ok(pt.backlund(direction)),
            GroupAction::LiePoint { kind, p, l } => pt.lie_point(kind, p, l),
        }
    }
}

/// The 9 sector maps, 6 hatted maps, both Backlund directions and the three
/// Lie-point actions for every `(p, l)`.
pub fn all_group_actions() -> Vec<GroupAction> {
    let mut v = Vec::new();
    for eps1 in -1..=1 {
        for eps2 in -1..=1 {
            v.push(GroupAction::F { eps1, eps2 });
            if eps1 != 0 {
                v.push(GroupAction::FHat { eps1, eps2 });
            }
        }
    }
    v.push(GroupAction::Backlund { direction: Direction::Up });
    v.push(GroupAction::Backlund { direction: Direction::Down });
    for kind in [LieKind::NegateTau, LieKind::NegateA, LieKind::RotateTau] {
        for p in [-1, 1] {
            for l in [-1, 1] {
                v.push(GroupAction::LiePoint { kind, p, l });
            }
        }
    }
    v
}

/// Largest manifold residual of the images of each point under `actions`.
pub fn group_action_sweep(points: &[MonodromyPoint], actions: &[GroupAction], mode: Mode) -> Result<Vec<f64>> {
    map(points, mode, |pt| {
        actions
            .iter()
            .try_fold(0.0f64, |m, act| Ok(m.max(act.apply(pt)?.max_residual())))
    })
    .into_iter()
    .collect()
}

/// Per-point consistency checks that do not involve integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub max_residual: f64,
    /// `|det - 1|` over the Stokes and connection matrices.
    pub det_defect: f64,
    /// `|cos 2 pi rho - cos 2 pi rho_inf|`.
    pub cos_rho_defect: f64,
    /// Residuals of the semi-cyclic and cyclic relations.
    pub cyclic: Option<(f64, f64)>,
}

pub fn manifold_checks(points: &[MonodromyPoint], mode: Mode) -> Vec<PointCheck> {
    map(points, mode, |pt| {
        let mut det_defect = (crate::linalg::det(&pt.g()) - 1.0).norm();
        for k in -2..=2 {
            det_defect = det_defect
                .max((crate::linalg::det(&pt.stokes_inf(k)) - 1.0).norm())
                .max((crate::linalg::det(&pt.stokes_zero(k)) - 1.0).norm());
        }
        PointCheck {
            max_residual: pt.max_residual(),
            det_defect,
            cos_rho_defect: (pt.cos_2pi_rho() - pt.cos_2pi_rho_inf()).norm(),
            cyclic: pt.cyclic_residuals().ok(),
        }
    })
}

/// Independent sampling streams, one per seed.
pub fn sample_streams(
    seeds: &[u64],
    per_seed: usize,
    kind: BranchKind,
    constraints: &Constraints,
    mode: Mode,
) -> Result<Vec<MonodromyPoint>> {
    let chunks: Result<Vec<_>> = map(seeds, mode, |&s| sampling::sample_manifold(s, per_seed, kind, constraints))
        .into_iter()
        .collect();
    Ok(chunks?.into_iter().flatten().collect())
}

pub fn verify_connections(
    points: &[MonodromyPoint],
    params: &EquationParams,
    tau0: f64,
    tau1: f64,
    options: &VerifyOptions,
    mode: Mode,
) -> Vec<Result<ConnectionReport>> {
    map(points, mode, |pt| asymptotics::verify_connection(pt, params, tau0, tau1, options))
}
