//! Integration of the equation along rays `tau = s * dir`, `s > 0`, and the
//! Hamiltonian quantities attached to a solution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::EquationParams;
use crate::{c64, I};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionState {
    pub tau: Complex64,
    pub u: Complex64,
    pub du: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Complex64>,
}

impl SolutionState {
    pub fn new(tau: Complex64, u: Complex64, du: Complex64) -> Self {
        Self { tau, u, du, phi: None }
    }

    pub fn with_phi(mut self, phi: Complex64) -> Self {
        self.phi = Some(phi);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: EquationParams,
    pub a: Complex64,
    /// Unit vector fixing the ray.
    pub dir: Complex64,
    pub samples: Vec<SolutionState>,
    pub hamiltonian: Vec<Complex64>,
}

impl Trajectory {
    pub fn s_values(&self) -> Vec<f64> {
        self.samples.iter().map(|st| st.tau.norm()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSplit {
    pub h: Complex64,
    pub h0: Complex64,
    pub hinf: Complex64,
}

/// The functions of the isomonodromy system, with the square root of `-AB`
/// carried explicitly (it is fixed by `u`, not by the principal branch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub root: Complex64,
}

fn singular(what: &'static str, tau: Complex64) -> Error {
    Error::Singularity { what, tau }
}

fn check_state(tau: Complex64, u: Complex64) -> Result<()> {
    if tau.norm() == 0.0 {
        return Err(singular("tau = 0", tau));
    }
    if u.norm() == 0.0 {
        return Err(singular("u = 0", tau));
    }
    Ok(())
}

/// Second derivative from the equation.
pub fn ddu(tau: Complex64, u: Complex64, du: Complex64, a: Complex64, params: &EquationParams) -> Result<Complex64> {
    check_state(tau, u)?;
    let (eps, b) = (params.eps_f(), params.b);
    Ok(du * du / u - du / tau + (-8.0 * eps * u * u + 2.0 * a * b) / tau + b * b / u)
}

/// Returns `(u', u'')`.
pub fn dp3_rhs(state: &SolutionState, a: Complex64, params: &EquationParams) -> Result<(Complex64, Complex64)> {
    Ok((state.du, ddu(state.tau, state.u, state.du, a, params)?))
}

// Dormand-Prince 5(4) tableau and the coefficients of its dense output.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;

type Vector<const N: usize> = [Complex64; N];

fn axpy<const N: usize>(y: &Vector<N>, h: f64, terms: &[(f64, &Vector<N>)]) -> Vector<N> {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Adaptive Dormand-Prince integration of `y' = f(s, y)` from `s0` to `s1`
/// (either direction). `outputs` must be monotone in the direction of
/// integration; `emit` receives dense-output values there, or every accepted
/// step when `outputs` is empty. Errors from `f` abort the integration.
pub(crate) fn dopri5<const N: usize>(
    mut f: impl FnMut(f64, &Vector<N>) -> Result<Vector<N>>,
    s0: f64,
    y0: Vector<N>,
    s1: f64,
    tol: f64,
    outputs: &[f64],
    mut emit: impl FnMut(f64, &Vector<N>),
) -> Result<Vector<N>> {
    let sign = if s1 >= s0 { 1.0 } else { -1.0 };
    let span = (s1 - s0).abs();
    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, &y)?;
    let mut h = sign * (1e-3 * span).min(1e-2 * s0.abs().max(1e-3));
    let mut next_out = 0;
    let every_step = outputs.is_empty();
    if every_step {
        emit(s, &y);
    }
    while next_out < outputs.len() && (outputs[next_out] - s0) * sign <= 0.0 {
        emit(outputs[next_out], &y);
        next_out += 1;
    }
    let mut rejected = false;
    for _ in 0..MAX_STEPS {
        if (s1 - s) * sign <= 0.0 {
            break;
        }
        if (s + h - s1) * sign > 0.0 {
            h = s1 - s;
        }
        if h.abs() < 1e-14 * s.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                tau: c64(s, 0.0),
                reason: "step size underflow".into(),
            });
        }
        let stages = (|| -> Result<_> {
            let k2 = f(s + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = f(s + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(s + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = f(s + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
            let k6 = f(
                s + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(s + h, &y_new)?;
            Ok((k2, k3, k4, k5, k6, k7, y_new))
        })();
        let (k3, k4, k5, k6, k7, y_new) = match stages {
            Ok((_, k3, k4, k5, k6, k7, y_new)) => (k3, k4, k5, k6, k7, y_new),
            // A singular stage is treated as a failed step: shrink and retry.
            Err(_) => {
                h *= 0.25;
                rejected = true;
                continue;
            }
        };
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol + tol * y[i].norm().max(y_new[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            rejected = true;
            continue;
        }
        if err <= 1.0 {
            let s_new = s + h;
            if every_step {
                emit(s_new, &y_new);
            } else {
                // Dense output on [s, s_new].
                while next_out < outputs.len() && (outputs[next_out] - s_new) * sign <= 0.0 {
                    let theta = (outputs[next_out] - s) / h;
                    let mut yo = [c64(0.0, 0.0); N];
                    for i in 0..N {
                        let r1 = y[i];
                        let r2 = y_new[i] - y[i];
                        let r3 = h * k1[i] - r2;
                        let r4 = r2 - h * k7[i] - r3;
                        let r5 = h
                            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                        yo[i] = r1 + theta * (r2 + (1.0 - theta) * (r3 + theta * (r4 + (1.0 - theta) * r5)));
                    }
                    emit(outputs[next_out], &yo);
                    next_out += 1;
                }
            }
            s = s_new;
            y = y_new;
            k1 = k7;
            let mut fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            if rejected {
                fac = fac.min(1.0);
            }
            rejected = false;
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected = true;
        }
    }
    if (s1 - s) * sign > 0.0 {
        return Err(Error::IntegrationFailure {
            tau: c64(s, 0.0),
            reason: format!("step budget of {MAX_STEPS} exhausted"),
        });
    }
    Ok(y)
}

/// Integrates the equation (and `phi` when present) along the ray through
/// `initial.tau` up to `|tau| = s_end`. With an empty `outputs` every
/// accepted step is recorded; otherwise dense output at those `|tau|`.
pub fn integrate_ray(
    initial: &SolutionState,
    a: Complex64,
    params: &EquationParams,
    s_end: f64,
    tol: f64,
    outputs: &[f64],
) -> Result<Trajectory> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::InvalidParameters(format!("tolerance {tol} outside [1e-13, 1e-6]")));
    }
    let s0 = initial.tau.norm();
    if s0 == 0.0 || !(s_end > 0.0) {
        return Err(Error::InvalidParameters("ray endpoints must be nonzero".into()));
    }
    check_state(initial.tau, initial.u)?;
    let dir = initial.tau / s0;
    let with_phi = initial.phi.is_some();
    let b = params.b;
    let rhs = |s: f64, y: &Vector<3>| -> Result<Vector<3>> {
        let tau = dir * s;
        let (u, du) = (y[0], y[1]);
        let dd = ddu(tau, u, du, a, params)?;
        let dphi = if with_phi { 2.0 * a / tau + b / u } else { c64(0.0, 0.0) };
        Ok([dir * du, dir * dd, dir * dphi])
    };
    let y0 = [initial.u, initial.du, initial.phi.unwrap_or_default()];
    let mut samples = Vec::new();
    let result = dopri5(rhs, s0, y0, s_end, tol, outputs, |s, y| {
        let mut st = SolutionState::new(dir * s, y[0], y[1]);
        if with_phi {
            st.phi = Some(y[2]);
        }
        samples.push(st);
    });
    if let Err(Error::IntegrationFailure { tau, reason }) = result {
        // Report the location on the ray, not the raw parameter.
        return Err(Error::IntegrationFailure { tau: dir * tau.re, reason });
    }
    result?;
    let hamiltonian = samples
        .iter()
        .map(|st| hamiltonian_u(st, a, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { params: *params, a, dir, samples, hamiltonian })
}

/// `a i + 1/2`.
fn alpha(a: Complex64) -> Complex64 {
    a * I + 0.5
}

/// Hamiltonian in terms of `u` and `u'`.
pub fn hamiltonian_u(state: &SolutionState, a: Complex64, params: &EquationParams) -> Result<Complex64> {
    let SolutionState { tau, u, du, .. } = *state;
    check_state(tau, u)?;
    let b = params.b;
    let m = a - I / 2.0;
    Ok(m * b / u + m * m / (2.0 * tau) + tau / (4.0 * u * u) * (du * du + b * b) + 4.0 * params.eps_f() * u)
}

/// Canonical momentum conjugate to `q = u` for the Hamiltonian with label `eps1`.
pub fn p_from_u(state: &SolutionState, a: Complex64, params: &EquationParams, eps1: i8) -> Result<Complex64> {
    let SolutionState { tau, u, du, .. } = *state;
    check_state(tau, u)?;
    Ok(tau * (du - I * params.b) / (2.0 * u * u) + alpha(a) * f64::from(eps1) / u)
}

pub fn hamiltonian_pq(p: Complex64, q: Complex64, tau: Complex64, a: Complex64, params: &EquationParams, eps1: i8) -> Complex64 {
    let al = alpha(a);
    let e1 = f64::from(eps1);
    p * p * q * q / tau - 2.0 * e1 * p * q * al / tau + 4.0 * params.eps_f() * q + I * params.b * p + al * al / (2.0 * tau)
}

/// Explicit `tau`-derivative of the Hamiltonian at fixed `(p, q)`.
pub fn hamiltonian_pq_dtau(p: Complex64, q: Complex64, tau: Complex64, a: Complex64, eps1: i8) -> Complex64 {
    let al = alpha(a);
    let pq = p * q;
    -(pq * pq - 2.0 * f64::from(eps1) * pq * al + al * al / 2.0) / (tau * tau)
}

/// Hamilton's equations: `(dp/dtau, dq/dtau)`.
pub fn hamiltonian_system_rhs(
    p: Complex64,
    q: Complex64,
    tau: Complex64,
    a: Complex64,
    params: &EquationParams,
    eps1: i8,
) -> (Complex64, Complex64) {
    let al = alpha(a);
    let e1 = f64::from(eps1);
    let dh_dp = 2.0 * p * q * q / tau - 2.0 * e1 * q * al / tau + I * params.b;
    let dh_dq = 2.0 * p * p * q / tau - 2.0 * e1 * p * al / tau + 4.0 * params.eps_f();
    (-dh_dq, dh_dp)
}

/// Integrates Hamilton's equations along the ray through `tau0`; returns
/// `(tau, p, q)` at the requested `|tau|` values.
pub fn integrate_hamiltonian(
    p0: Complex64,
    q0: Complex64,
    tau0: Complex64,
    a: Complex64,
    params: &EquationParams,
    eps1: i8,
    outputs: &[f64],
    tol: f64,
) -> Result<Vec<(Complex64, Complex64, Complex64)>> {
    let s0 = tau0.norm();
    let dir = tau0 / s0;
    let s_end = *outputs.last().ok_or_else(|| Error::InvalidParameters("no output points".into()))?;
    let mut out = Vec::with_capacity(outputs.len());
    dopri5(
        |s, y: &Vector<2>| {
            let (dp, dq) = hamiltonian_system_rhs(y[0], y[1], dir * s, a, params, eps1);
            Ok([dir * dp, dir * dq])
        },
        s0,
        [p0, q0],
        s_end,
        tol,
        outputs,
        |s, y| out.push((dir * s, y[0], y[1])),
    )?;
    Ok(out)
}

/// `(sigma, f)` built from the `eps1 = -1` momentum.
pub fn sigma_and_f(state: &SolutionState, a: Complex64, params: &EquationParams) -> Result<(Complex64, Complex64)> {
    let e1 = -1.0;
    let p = p_from_u(state, a, params, -1)?;
    let q = state.u;
    let pq = p * q;
    let shift = e1 * (alpha(a) - e1 / 2.0);
    let sigma = (pq - shift).powi(2) + state.tau * (4.0 * params.eps_f() * q + I * params.b * p);
    Ok((sigma, pq / 2.0))
}

/// Residual of the second-order equation satisfied by `f`, given `f, f', f''`.
pub fn f_ode_residual(tau: Complex64, f: [Complex64; 3], a: Complex64, params: &EquationParams) -> Complex64 {
    let eb = params.eb();
    let e1 = -1.0;
    let [f0, f1, f2] = f;
    tau * tau * (f2 + 4.0 * I * eb).powi(2) - (4.0 * f0 - e1 * (2.0 * I * a + 1.0)).powi(2) * (f1 * f1 + 8.0 * I * eb * f0)
}

/// Residual of the sigma-form equation, given `sigma, sigma', sigma''`. The
/// sign of the `32 i eps b tau` term is the one satisfied by solutions.
pub fn sigma_ode_residual(tau: Complex64, s: [Complex64; 3], a: Complex64, params: &EquationParams) -> Complex64 {
    let eb = params.eb();
    let e1 = -1.0;
    let [s0, s1, s2] = s;
    let coef = (1.0 - e1) / 2.0 - a * I * e1;
    (tau * s2 - s1).powi(2) - 2.0 * (2.0 * s0 - tau * s1) * s1 * s1 - 32.0 * I * eb * tau * (coef * s1 + 2.0 * I * eb * tau)
}

/// `(A, B, C, D)` of the isomonodromy system from `(u, u', phi)`.
pub fn to_abcd(state: &SolutionState, a: Complex64, params: &EquationParams) -> Result<Abcd> {
    let SolutionState { tau, u, du, phi } = *state;
    let phi = phi.ok_or_else(|| Error::InvalidParameters("to_abcd needs phi".into()))?;
    check_state(tau, u)?;
    let eps = params.eps_f();
    let dphi = 2.0 * a / tau + params.b / u;
    let w = u / tau;
    let dw = du / tau - u / (tau * tau);
    let e = (I * phi).exp();
    let ea = w * e;
    let eb = -w / e;
    let da = (dw + I * w * dphi) * e;
    let db = -(dw - I * w * dphi) / e;
    let k = eps * tau / (4.0 * u);
    Ok(Abcd { a: ea, b: eb, c: k * da, d: -k * db, root: eps * u / tau })
}

impl Abcd {
    pub fn u(&self, tau: Complex64, params: &EquationParams) -> Complex64 {
        params.eps_f() * tau * self.root
    }
}

/// Hamiltonian from `(A, B, C, D)` and its split into the parts at zero and
/// infinity (their difference is `-(a - i/2)^2/(2 tau)`).
pub fn hamiltonian_abcd(x: &Abcd, tau: Complex64, a: Complex64, params: &EquationParams) -> Result<HamiltonianSplit> {
    if (x.a * x.b).norm() == 0.0 {
        return Err(singular("AB = 0", tau));
    }
    let Abcd { a: ca, b: cb, c: cc, d: cd, root } = *x;
    let t = alpha(a) + 2.0 * tau * ca * cd / root;
    let h = t * t / (2.0 * tau) + 4.0 * tau * root - I * params.eps_f() * params.b * cd / cb + 2.0 * tau * cc * cd
        + ca * cd / root;
    let m = a - I / 2.0;
    let diff = -m * m / (2.0 * tau);
    Ok(HamiltonianSplit { h, h0: (h + diff) / 2.0, hinf: (h - diff) / 2.0 })
}

/// Residuals of the five equations of the isomonodromy system, given the
/// functions and their derivatives `(A', B', C', D', root')`.
pub fn abcd_system_residual(x: &Abcd, dx: &Abcd, tau: Complex64, a: Complex64) -> [f64; 5] {
    [
        (dx.a - 4.0 * x.c * x.root).norm(),
        (dx.b + 4.0 * x.d * x.root).norm(),
        (x.c + tau * dx.c - (2.0 * a * I * x.c - 2.0 * tau * x.a)).norm(),
        (x.d + tau * dx.d - (-2.0 * a * I * x.d + 2.0 * tau * x.b)).norm(),
        (dx.root - 2.0 * (x.a * x.d - x.b * x.c)).norm(),
    ]
}

/// Fourth-order central differences on five equally spaced values.
pub fn fd5(v: &[Complex64], h: f64) -> (Complex64, Complex64) {
    let d1 = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h);
    let d2 = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
    (d1, d2)
}

/// Finite-difference residual of the equation for samples `u` taken at
/// `tau = dir * s` with equally spaced `s`. Returns the max over the points
/// that carry a full five-point stencil.
pub fn residual_on_grid(s: &[f64], u: &[Complex64], dir: Complex64, a: Complex64, params: &EquationParams) -> Result<f64> {
    if s.len() < 5 || s.len() != u.len() {
        return Err(Error::InvalidParameters("need at least 5 paired samples".into()));
    }
    let h = s[1] - s[0];
    let mut worst: f64 = 0.0;
    for i in 2..s.len() - 2 {
        let (d1, d2) = fd5(&u[i - 2..=i + 2], h);
        let tau = dir * s[i];
        let du = d1 / dir;
        let rhs = ddu(tau, u[i], du, a, params)?;
        worst = worst.max((d2 / (dir * dir) - rhs).norm());
    }
    Ok(worst)
}

/// The algebraic solution `u = b^{2/3} tau^{1/3} / (2 eps)` for `a = 0`
/// on the positive real axis, with real cube roots.
pub fn algebraic_solution(tau: f64, params: &EquationParams) -> (f64, f64) {
    let b23 = params.b.cbrt().powi(2);
    let u = b23 * tau.cbrt() / (2.0 * params.eps_f());
    (u, u / (3.0 * tau))
}
