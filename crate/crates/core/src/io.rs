//! JSON and CSV artifacts.
//!
//! JSON goes through serde (complex numbers as `[re, im]`, doubles in their
//! shortest round-trip form). CSV trajectories carry 17 significant digits
//! per field.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::MonodromyPoint;
use crate::ode::{SolutionState, Trajectory};
use crate::params::EquationParams;
use crate::c64;

pub const TRAJECTORY_HEADER: [&str; 10] =
    ["tau_re", "tau_im", "u_re", "u_im", "du_re", "du_im", "phi_re", "phi_im", "H_re", "H_im"];

fn invalid(msg: impl std::fmt::Display) -> Error {
    Error::InvalidParameters(msg.to_string())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(invalid)
}

/// A point, or a list of points, from JSON text.
pub fn parse_points(text: &str) -> Result<Vec<MonodromyPoint>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| invalid(format!("bad point JSON: {e}")))?;
    let pts = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|p| vec![p])
    };
    pts.map_err(|e| invalid(format!("bad point JSON: {e}")))
}

/// `src` is inline JSON when it starts with `{` or `[`, a file path otherwise.
pub fn load_points(src: &str) -> Result<Vec<MonodromyPoint>> {
    let t = src.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        parse_points(t)
    } else {
        let text = std::fs::read_to_string(src).map_err(|e| invalid(format!("{src}: {e}")))?;
        parse_points(&text)
    }
}

pub fn load_point(src: &str) -> Result<MonodromyPoint> {
    let mut v = load_points(src)?;
    if v.len() != 1 {
        return Err(invalid(format!("expected one point, found {}", v.len())));
    }
    Ok(v.remove(0))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| invalid(format!("csv: {e}"));
    w.write_record(TRAJECTORY_HEADER).map_err(io)?;
    for (k, st) in traj.samples.iter().enumerate() {
        let h = traj.hamiltonian.get(k).copied();
        let mut row = vec![fmt(st.tau.re), fmt(st.tau.im), fmt(st.u.re), fmt(st.u.im), fmt(st.du.re), fmt(st.du.im)];
        for z in [st.phi, h] {
            match z {
                Some(z) => row.extend([fmt(z.re), fmt(z.im)]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| invalid(format!("csv: {e}")))?;
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory_csv`]; the ray is
/// taken from the first sample.
pub fn read_trajectory_csv<R: Read>(input: R, params: &EquationParams, a: Complex64) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| invalid(format!("csv: {e}")))?.clone();
    if headers.iter().ne(TRAJECTORY_HEADER) {
        return Err(invalid("unexpected trajectory CSV header"));
    }
    let mut samples = Vec::new();
    let mut hamiltonian = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| invalid(format!("csv: {e}")))?;
        let field = |i: usize| -> Result<Option<f64>> {
            let s = rec.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| invalid(format!("row {}: bad number {s:?}", line + 2)))
        };
        let pair = |i: usize| -> Result<Option<Complex64>> {
            Ok(match (field(i)?, field(i + 1)?) {
                (Some(x), Some(y)) => Some(c64(x, y)),
                _ => None,
            })
        };
        let need = |i: usize| pair(i)?.ok_or_else(|| invalid(format!("row {}: missing value", line + 2)));
        let mut st = SolutionState::new(need(0)?, need(2)?, need(4)?);
        st.phi = pair(6)?;
        samples.push(st);
        if let Some(h) = pair(8)? {
            hamiltonian.push(h);
        }
    }
    let first = samples.first().ok_or_else(|| invalid("empty trajectory"))?;
    let dir = first.tau / first.tau.norm();
    if hamiltonian.len() != samples.len() {
        hamiltonian.clear();
    }
    Ok(Trajectory { params: *params, a, dir, samples, hamiltonian })
}
