//! Backlund transformations of solutions, the ladder `u_n` at
//! `a = a0 - i n`, the lattice relations satisfied by `v_n = u_n / tau`,
//! and the Lie-point symmetries acting on solutions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monodromy::{Direction, LieKind};
use crate::ode::{self, SolutionState};
use crate::params::EquationParams;
use crate::{c64, I};

/// One Backlund step. `Up` maps `a` to `a - i`, `Down` to `a + i`; the new
/// derivative is obtained analytically, using the equation for `u''`.
pub fn backlund_step(
    state: &SolutionState,
    a: Complex64,
    params: &EquationParams,
    direction: Direction,
) -> Result<(SolutionState, Complex64)> {
    let SolutionState { tau, u, du, .. } = *state;
    let dd = ode::ddu(tau, u, du, a, params)?;
    let b = params.b;
    let k = -I * params.eb() / 8.0;
    let (sg, shift, a1) = match direction {
        Direction::Up => (-1.0, 1.0, a - I),
        Direction::Down => (1.0, -1.0, a + I),
    };
    let c = 2.0 * a * I + shift;
    let n = tau * (sg * du + I * b) + c * u;
    let dn = sg * du + I * b + tau * sg * dd + c * du;
    let u1 = k * n / (u * u);
    let du1 = k * (dn / (u * u) - 2.0 * n * du / (u * u * u));
    if u1.norm() == 0.0 || !u1.is_finite() {
        return Err(Error::Singularity { what: "Backlund image u = 0", tau });
    }
    Ok((SolutionState::new(tau, u1, du1), a1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub n: i64,
    pub a_n: Complex64,
    pub state: SolutionState,
    pub v: Complex64,
}

impl LadderEntry {
    /// `v_n'` from `u_n'`.
    pub fn dv(&self) -> Complex64 {
        let tau = self.state.tau;
        self.state.du / tau - self.state.u / (tau * tau)
    }
}

/// Entries `n = 0..=n_max` obtained by repeated up-steps from the seed.
pub fn ladder(seed: &SolutionState, a0: Complex64, params: &EquationParams, n_max: usize) -> Result<Vec<LadderEntry>> {
    ladder_range(seed, a0, params, 0, n_max as i64)
}

/// Entries `n_min..=n_max` around the seed (which sits at `n = 0`); negative
/// `n` come from down-steps. `a_n` is formed as `a0 - i n` directly so it
/// carries no rounding drift.
pub fn ladder_range(
    seed: &SolutionState,
    a0: Complex64,
    params: &EquationParams,
    n_min: i64,
    n_max: i64,
) -> Result<Vec<LadderEntry>> {
    if n_min > 0 || n_max < 0 {
        return Err(Error::InvalidParameters("ladder range must contain n = 0".into()));
    }
    let tau = seed.tau;
    let a_at = |n: i64| a0 - I * n as f64;
    let entry = |n: i64, st: SolutionState| LadderEntry { n, a_n: a_at(n), state: st, v: st.u / tau };
    let walk = |dir: Direction, count: i64, sign: i64| -> Result<Vec<LadderEntry>> {
        let mut st = *seed;
        let mut out = Vec::new();
        for k in 1..=count {
            let n = sign * k;
            st = backlund_step(&st, a_at(n - sign), params, dir)
                .map_err(|e| Error::LadderBreakdown { n, reason: e.to_string() })?
                .0;
            out.push(entry(n, st));
        }
        Ok(out)
    };
    let mut out = walk(Direction::Down, -n_min, -1)?;
    out.reverse();
    out.push(entry(0, *seed));
    out.extend(walk(Direction::Up, n_max, 1)?);
    Ok(out)
}

/// Exact state of the algebraic solution (`a = 0`) on the positive axis.
pub fn algebraic_seed(tau: f64, params: &EquationParams) -> SolutionState {
    let (u, du) = ode::algebraic_solution(tau, params);
    SolutionState::new(c64(tau, 0.0), c64(u, 0.0), c64(du, 0.0))
}

/// Ladders of `seed(tau)` at the nodes `tau + k h`, `k = -2..=2`, and the
/// residual of the equation for every `u_n`: `u_n''` is the central
/// difference of the analytic `u_n'`, so only one derivative is numeric.
pub fn ladder_equation_residuals<F>(
    seed: F,
    tau: Complex64,
    a0: Complex64,
    params: &EquationParams,
    n_max: usize,
    h: f64,
) -> Result<Vec<(i64, f64)>>
where
    F: Fn(Complex64) -> Result<SolutionState>,
{
    let dir = tau / tau.norm();
    let nodes: Vec<Vec<LadderEntry>> = (-2..=2)
        .map(|k| ladder(&seed(tau + dir * (f64::from(k) * h))?, a0, params, n_max))
        .collect::<Result<_>>()?;
    (0..=n_max)
        .map(|n| {
            let du: Vec<Complex64> = nodes.iter().map(|l| l[n].state.du).collect();
            let dd = ode::fd5(&du, h).0 / dir;
            let mid = &nodes[2][n];
            let want = ode::ddu(tau, mid.state.u, mid.state.du, mid.a_n, params)?;
            Ok((mid.n, (dd - want).norm()))
        })
        .collect()
}

/// One row of a ladder dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRecord {
    pub n: i64,
    pub a_n: Complex64,
    pub tau: Complex64,
    pub u: Complex64,
    pub du: Complex64,
    pub v: Complex64,
    /// `v_{n+1} v_n`; absent for the last entry.
    pub g: Option<Complex64>,
    pub f: Option<Complex64>,
}

pub fn ladder_records(ladder: &[LadderEntry], params: &EquationParams) -> Vec<LadderRecord> {
    ladder
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let tau = e.state.tau;
            let g = ladder.get(k + 1).map(|next| next.v * e.v);
            LadderRecord {
                n: e.n,
                a_n: e.a_n,
                tau,
                u: e.state.u,
                du: e.state.du,
                v: e.v,
                g,
                f: g.map(|g| 2.0 * tau * tau / (I * params.eb()) * g),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lattice {
    /// Volterra (Kac-van Moerbeke) form:
    /// `(i eps b / 4) v_n' = tau v_n^2 (v_{n+1} - v_{n-1})`.
    Km,
    /// `v_n^2 (v_{n+1} + v_{n-1}) = (eps b / 4 tau^2)(b + 2(a0 - i n) v_n)`.
    Dp,
    /// Toda chain for `R_n = g_n g_{n+1}` with `g_n = v_{n+1} v_n`, in the
    /// time `s` with `d/ds = (i eps b / 4 tau) d/dtau`:
    /// `(ln R_n)_ss = R_{n+2} + R_{n-2} - 2 R_n`.
    Toda,
    /// `2 f_n (f_{n+1} + f_n + i a0 + n + 1)(f_n + f_{n-1} + i a0 + n) = i eps b tau^2`
    /// with `f_n = (2 tau^2 / (i eps b)) g_n`.
    FRec,
}

fn nonzero(z: Complex64, n: i64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        Err(Error::LatticeDivision(n))
    } else {
        Ok(z)
    }
}

/// `v_{n+1}` predicted from `v_{n-1}`, `v_n` and `v_n'` by the Volterra
/// relation.
pub fn km_next(prev: &LadderEntry, cur: &LadderEntry, params: &EquationParams) -> Result<Complex64> {
    let v = nonzero(cur.v, cur.n)?;
    Ok(prev.v + I * params.eb() / 4.0 * cur.dv() / (cur.state.tau * v * v))
}

/// Residuals `(n, |lhs - rhs|)` for every `n` the ladder supports. The Toda
/// relation needs ladders at `tau - h` and `tau + h` along the same ray
/// (`neighbours`), built from the same solution; the others ignore them.
pub fn lattice_residuals(
    ladder: &[LadderEntry],
    a0: Complex64,
    params: &EquationParams,
    which: Lattice,
    neighbours: Option<(&[LadderEntry], &[LadderEntry], f64)>,
) -> Result<Vec<(i64, f64)>> {
    let eb = params.eb();
    let c = I * eb / 4.0;
    let len = ladder.len();
    let tau = match ladder.first() {
        Some(e) => e.state.tau,
        None => return Ok(Vec::new()),
    };
    let g = |l: &[LadderEntry], k: usize| l[k + 1].v * l[k].v;
    let mut out = Vec::new();
    match which {
        Lattice::Km | Lattice::Dp => {
            for k in 1..len.saturating_sub(1) {
                let (prev, cur, next) = (&ladder[k - 1], &ladder[k], &ladder[k + 1]);
                let n = cur.n;
                let r = if which == Lattice::Km {
                    next.v - km_next(prev, cur, params)?
                } else {
                    cur.v * cur.v * (next.v + prev.v)
                        - eb / (4.0 * tau * tau) * (params.b + 2.0 * (a0 - I * n as f64) * cur.v)
                };
                out.push((n, r.norm()));
            }
        }
        Lattice::FRec => {
            let scale = 2.0 * tau * tau / (I * eb);
            let f = |k: usize| scale * g(ladder, k);
            for k in 1..len.saturating_sub(2) {
                let n = ladder[k].n as f64;
                let ia0 = I * a0;
                let lhs = 2.0 * f(k) * (f(k + 1) + f(k) + (ia0 + n + 1.0)) * (f(k) + f(k - 1) + (ia0 + n));
                out.push((ladder[k].n, (lhs - I * eb * tau * tau).norm()));
            }
        }
        Lattice::Toda => {
            let (lo, hi, h) = neighbours.ok_or_else(|| {
                Error::InvalidParameters("Toda residual needs ladders at tau -+ h".into())
            })?;
            if lo.len() != len || hi.len() != len {
                return Err(Error::InvalidParameters("Toda neighbour ladders differ in length".into()));
            }
            let dir = tau / tau.norm();
            let r = |l: &[LadderEntry], k: usize| g(l, k) * g(l, k + 1);
            // R_k needs entries k..=k+2; the chain couples k-2..=k+2.
            for k in 2..len.saturating_sub(4) {
                let n = ladder[k].n;
                let rs = [r(lo, k), r(ladder, k), r(hi, k)];
                for z in rs {
                    nonzero(z, n)?;
                }
                let l = rs.map(|z| z.ln());
                // Keep the three logarithms on one branch.
                let unwrap = |d: Complex64| {
                    let tp = 2.0 * std::f64::consts::PI;
                    Complex64::new(d.re, d.im - tp * (d.im / tp).round())
                };
                let dm = unwrap(l[1] - l[0]);
                let dp = unwrap(l[2] - l[1]);
                let d1 = (dm + dp) / (2.0 * h * dir);
                let d2 = (dp - dm) / (h * h * dir * dir);
                let lhs = c * c * (d2 / (tau * tau) - d1 / (tau * tau * tau));
                let lap = r(ladder, k + 2) + r(ladder, k - 2) - 2.0 * r(ladder, k);
                out.push((n, (lhs - lap).norm()));
            }
        }
    }
    Ok(out)
}

/// How `(eps, b)` are relabelled under `a -> -a`: either `eps` or `b`
/// absorbs the factor `exp(-i pi p) = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relabel {
    FlipEps,
    FlipB,
}

/// Image of a solution under a Lie-point symmetry. Returns the new state,
/// parameter `a` and equation parameters.
pub fn lie_point_solution(
    state: &SolutionState,
    a: Complex64,
    params: &EquationParams,
    kind: LieKind,
    p: i8,
    l: i8,
    relabel: Relabel,
) -> Result<(SolutionState, Complex64, EquationParams)> {
    if !matches!(p, 1 | -1) || !matches!(l, 1 | -1) {
        return Err(Error::InvalidParameters("p and l must be +1 or -1".into()));
    }
    let SolutionState { tau, u, du, phi } = *state;
    let new = match kind {
        LieKind::NegateTau => {
            // u_n(tau_n) = -u_o(tau_o) with tau_n = -tau_o.
            let st = SolutionState { tau: -tau, u: -u, du, phi };
            (st, a, *params)
        }
        LieKind::NegateA => {
            let (eps, b) = match relabel {
                Relabel::FlipEps => (-params.eps, params.b),
                Relabel::FlipB => (params.eps, -params.b),
            };
            let np = EquationParams::new(eps, b)?;
            let k = f64::from(params.eps * np.eps);
            (SolutionState { tau, u: k * u, du: k * du, phi }, -a, np)
        }
        LieKind::RotateTau => {
            // tau_n = -i l tau_o, u_n = i eps_o eps_n l u_o, eps b -> -eps b.
            let lf = f64::from(l);
            let (eps, b) = match relabel {
                Relabel::FlipEps => (-params.eps, params.b),
                Relabel::FlipB => (params.eps, -params.b),
            };
            let np = EquationParams::new(eps, b)?;
            let k = I * f64::from(params.eps * np.eps) * lf;
            let dtau = -I * lf;
            let st = SolutionState { tau: dtau * tau, u: k * u, du: k * du / dtau, phi };
            (st, a, np)
        }
    };
    Ok(new)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> EquationParams {
        EquationParams::new(1, 1.0).unwrap()
    }

    #[test]
    fn first_step_closed_form() {
        for tau in [0.5, 1.0, 3.7] {
            let (st, a1) = backlund_step(&algebraic_seed(tau, &unit()), c64(0.0, 0.0), &unit(), Direction::Up).unwrap();
            let t13 = f64::cbrt(tau);
            let want = c64(t13 / 2.0, -1.0 / (6.0 * t13));
            assert!((st.u - want).norm() < 1e-12);
            let dwant = c64(1.0 / (6.0 * t13 * t13), 1.0 / (18.0 * t13 * tau));
            assert!((st.du - dwant).norm() < 1e-12);
            assert_eq!(a1, -I);
        }
    }

    #[test]
    fn down_inverts_up() {
        let st = SolutionState::new(c64(1.2, 0.0), c64(0.7, 0.3), c64(-0.2, 0.4));
        let a = c64(0.3, -0.2);
        let (up, a1) = backlund_step(&st, a, &unit(), Direction::Up).unwrap();
        let (back, a2) = backlund_step(&up, a1, &unit(), Direction::Down).unwrap();
        assert!((back.u - st.u).norm() < 1e-12 && (back.du - st.du).norm() < 1e-12);
        assert!((a2 - a).norm() < 1e-15);
        let zero = SolutionState::new(c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0));
        assert!(backlund_step(&zero, a, &unit(), Direction::Up).is_err());
    }

    fn alg(tau: Complex64) -> Result<SolutionState> {
        Ok(algebraic_seed(tau.re, &unit()))
    }

    #[test]
    fn algebraic_ladder_solves_equation() {
        for tau in [0.5, 1.0, 2.3, 5.0] {
            let r = ladder_equation_residuals(alg, c64(tau, 0.0), c64(0.0, 0.0), &unit(), 5, 1e-3 * tau).unwrap();
            for (n, x) in r {
                assert!(x < 1e-8, "tau {tau} n {n}: {x}");
            }
        }
    }

    #[test]
    fn lattices_on_algebraic_ladder() {
        let p = unit();
        let a0 = c64(0.0, 0.0);
        let tau = 1.0;
        let h = 1e-4 * tau;
        let mk = |t: f64| ladder_range(&algebraic_seed(t, &p), a0, &p, -2, 5).unwrap();
        let (lo, mid, hi) = (mk(tau - h), mk(tau), mk(tau + h));
        for (which, tol) in [(Lattice::Km, 1e-8), (Lattice::Dp, 1e-8), (Lattice::FRec, 1e-6), (Lattice::Toda, 1e-5)] {
            let r = lattice_residuals(&mid, a0, &p, which, Some((&lo, &hi, h))).unwrap();
            assert!(!r.is_empty());
            for (n, x) in r {
                assert!(x < tol, "{which:?} n {n}: {x}");
            }
        }
        let rec = ladder_records(&mid, &p);
        assert!(rec[7].g.is_none() && rec[0].f.is_some());
        assert_eq!(mid[0].n, -2);
        assert_eq!(mid[2].state, algebraic_seed(tau, &p));
    }

    fn image_residual(kind: LieKind, l: i8, relabel: Relabel) -> f64 {
        let p = EquationParams::new(1, 1.0).unwrap();
        let zero = c64(0.0, 0.0);
        let map = |tau_o: f64| lie_point_solution(&algebraic_seed(tau_o, &p), zero, &p, kind, 1, l, relabel).unwrap();
        let (probe, _, np) = map(1.5);
        // Recover tau_o from tau_n: every map is linear in tau.
        let scale = probe.tau / 1.5;
        let seed = |t: Complex64| Ok(map((t / scale).re).0);
        let r = ladder_equation_residuals(seed, probe.tau, zero, &np, 0, 1e-3).unwrap();
        r[0].1
    }

    #[test]
    fn lie_images_solve_equation() {
        for relabel in [Relabel::FlipEps, Relabel::FlipB] {
            for l in [1, -1] {
                assert!(image_residual(LieKind::RotateTau, l, relabel) < 1e-10);
            }
            assert!(image_residual(LieKind::NegateA, 1, relabel) < 1e-10);
        }
        assert!(image_residual(LieKind::NegateTau, 1, Relabel::FlipEps) < 1e-10);
    }

    #[test]
    fn km_predicts_next_rung() {
        let p = unit();
        let l = ladder(&algebraic_seed(1.7, &p), c64(0.0, 0.0), &p, 4).unwrap();
        for k in 1..4 {
            assert!((km_next(&l[k - 1], &l[k], &p).unwrap() - l[k + 1].v).norm() < 1e-12);
        }
    }

    #[test]
    fn negate_tau_round_trip() {
        let st = SolutionState::new(c64(1.5, 0.0), c64(0.4, 0.1), c64(0.2, -0.3));
        let (once, a1, p1) = lie_point_solution(&st, c64(0.2, 0.0), &unit(), LieKind::NegateTau, 1, 1, Relabel::FlipEps).unwrap();
        let (twice, _, _) = lie_point_solution(&once, a1, &p1, LieKind::NegateTau, -1, 1, Relabel::FlipEps).unwrap();
        assert_eq!(twice, st);
    }
}
