use std::f64::consts::PI;
use std::process::{Command, Output};

use dp3_core::asymptotics;
use dp3_core::monodromy::{Branch, MonodromyPoint};
use dp3_core::{Complex64, EquationParams};

fn dp3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dp3")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn point_with_nu(nu: Complex64) -> MonodromyPoint {
    let prod = (c(0.0, -2.0 * PI) * nu).exp();
    let (g11, g12) = (c(1.1, -0.2), c(0.6, 0.3));
    MonodromyPoint::from_branch(c(0.1, 0.05), Branch::Generic { g11, g12, g21: (prod - 1.0) / g12, g22: prod / g11 })
        .unwrap()
}

fn write_point(dir: &tempfile::TempDir, name: &str, pt: &MonodromyPoint) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(pt).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn check_branch_one_point() {
    let dir = tempfile::tempdir().unwrap();
    let pt = write_point(&dir, "pt.json", &point_with_nu(c(0.03, -0.02)));
    let o = dp3(&["monodromy", "check", "--point", &pt]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let res = v["residuals"].as_array().unwrap();
    assert_eq!(res.len(), 5);
    assert!(res.iter().all(|r| r.as_f64().unwrap() < 1e-10));
}

#[test]
fn off_manifold_point_fails_check() {
    let mut pt = point_with_nu(c(0.03, -0.02));
    pt.g12 += 0.1;
    let o = dp3(&["monodromy", "check", "--point", &serde_json::to_string(&pt).unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn eval_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let pt = point_with_nu(c(0.03, -0.02));
    let path = write_point(&dir, "pt.json", &pt);
    let o = dp3(&["eval", "u", "--regime", "small", "--tau", "0.01", "--point", &path, "--eps", "1", "--b", "1"]);
    assert!(o.status.success());
    let p = EquationParams::new(1, 1.0).unwrap();
    let want = asymptotics::small_tau_chart(&pt, 0, &p).unwrap().u(0.01).unwrap();
    assert_eq!(stdout(&o).trim(), serde_json::to_string(&want).unwrap());
    let back: Complex64 = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(back, want);

    let o = dp3(&["eval", "h", "--regime", "large", "--tau", "50,100", "--point", &path]);
    let got: Vec<Complex64> = serde_json::from_str(stdout(&o).trim()).unwrap();
    let ch = asymptotics::large_tau_chart(&pt, 0, &p).unwrap();
    assert_eq!(got, vec![ch.hamiltonian(50.0).unwrap(), ch.hamiltonian(100.0).unwrap()]);
}

#[test]
fn violated_large_tau_condition_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_point(&dir, "bad.json", &point_with_nu(c(0.4, 0.0)));
    let o = dp3(&["verify-connection", "--point", &bad, "--tau0", "0.02", "--tau1", "100"]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "condition_violation");
    assert!(o.stdout.is_empty());
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(dp3(&["ladder", "--eps", "2"]).status.code(), Some(2));
    assert_eq!(dp3(&["integrate", "--tau0", "1", "--tau1", "2", "--tol", "1e-3"]).status.code(), Some(2));
    assert_eq!(dp3(&["monodromy", "check", "--point", "/nonexistent/pt.json"]).status.code(), Some(2));
    assert_eq!(dp3(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn sampling_is_deterministic() {
    let a = dp3(&["monodromy", "sample", "--seed", "9", "--count", "5", "--branch", "2"]);
    let b = dp3(&["monodromy", "sample", "--seed", "9", "--count", "5", "--branch", "2"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let pts: Vec<MonodromyPoint> = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(pts.len(), 5);
    assert!(pts.iter().all(|p| p.g11 == c(0.0, 0.0) && p.max_residual() < 1e-10));
    let empty = dp3(&["monodromy", "sample", "--count", "0"]);
    assert!(empty.status.success());
    assert_eq!(stdout(&empty).trim(), "[]");
}

#[test]
fn map_round_trip() {
    let pt = serde_json::to_string(&point_with_nu(c(0.02, 0.01))).unwrap();
    let up = dp3(&["monodromy", "map", "--point", &pt, "--action", "backlund", "--direction", "up"]);
    assert!(up.status.success());
    let up_text = stdout(&up);
    let down = dp3(&["monodromy", "map", "--point", &up_text, "--action", "backlund", "--direction", "down"]);
    let back: MonodromyPoint = serde_json::from_slice(&down.stdout).unwrap();
    let orig: MonodromyPoint = serde_json::from_str(&pt).unwrap();
    assert!((back.a - orig.a).norm() < 1e-15 && back.g11 == orig.g11);
    let f = dp3(&["monodromy", "map", "--point", &pt, "--action", "f", "--eps1", "-1", "--eps2", "0"]);
    let img: MonodromyPoint = serde_json::from_slice(&f.stdout).unwrap();
    assert!(img.max_residual() < 1e-10);
}

#[test]
fn integrate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let csv_s = csv.to_str().unwrap();
    let o = dp3(&["integrate", "--tau0", "1", "--tau1", "400", "--samples", "4000", "-o", csv_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("tau_re,tau_im,u_re,u_im,du_re,du_im,phi_re,phi_im,H_re,H_im\n"));
    assert_eq!(text.lines().count(), 4001);
    // Only the tail is in the large-tau regime; cut the file down to it.
    let tail: Vec<&str> = text.lines().skip(2000).collect();
    let cut = dir.path().join("tail.csv");
    std::fs::write(&cut, format!("{}\n{}\n", text.lines().next().unwrap(), tail.join("\n"))).unwrap();
    let fit = dp3(&["fit", "--trajectory", cut.to_str().unwrap()]);
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    let v: serde_json::Value = serde_json::from_slice(&fit.stdout).unwrap();
    assert_eq!(v["diagnostics"]["special_candidate"], true);
    assert!(v["nu_plus_1"].is_null());
}

#[test]
fn ladder_and_lattice_dumps() {
    let o = dp3(&["ladder", "--tau", "1", "--n-max", "3"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.len(), 4);
    for k in ["n", "a_n", "tau", "u", "du", "v", "g", "f"] {
        assert!(rows[0].get(k).is_some(), "{k}");
    }
    assert_eq!(rows[1]["u"][0].as_f64().unwrap(), 0.5);
    assert!((rows[1]["u"][1].as_f64().unwrap() + 1.0 / 6.0).abs() < 1e-15);

    for which in ["km", "dp", "f-rec", "toda"] {
        let o = dp3(&["lattice", "--which", which, "--n-min", "-2", "--n-max", "5"]);
        assert!(o.status.success(), "{which}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let res = v["residuals"].as_array().unwrap();
        assert!(!res.is_empty());
        assert!(res.iter().all(|r| r["residual"].as_f64().unwrap() < 1e-5), "{which}: {v}");
    }
}

#[test]
fn chart_json_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let pt = write_point(&dir, "pt.json", &point_with_nu(c(0.03, -0.02)));
    let out = dir.path().join("chart.json");
    let o = dp3(&["chart", "small", "--point", &pt, "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["log_mode"], false);
    assert_eq!(v["p_vals"].as_array().unwrap().len(), 4);
    let o = dp3(&["chart", "large", "--point", &pt, "--imag", "--eps1", "1"]);
    assert!(matches!(o.status.code(), Some(0) | Some(3)));
}
