use std::f64::consts::PI;

use dp3_core::asymptotics::{self, Special, VerifyOptions};
use dp3_core::monodromy::Branch;
use dp3_core::{Complex64, EquationParams, ErrorKind, MonodromyPoint};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit() -> EquationParams {
    EquationParams::new(1, 1.0).unwrap()
}

fn point_with_nu(a: Complex64, nu: Complex64) -> MonodromyPoint {
    let prod = (c(0.0, -2.0 * PI) * nu).exp();
    let (g11, g12) = (c(0.9, 0.3), c(0.5, -0.4));
    MonodromyPoint::from_branch(a, Branch::Generic { g11, g12, g21: (prod - 1.0) / g12, g22: prod / g11 }).unwrap()
}

fn algebraic_point() -> MonodromyPoint {
    let (one, zero) = (c(1.0, 0.0), c(0.0, 0.0));
    MonodromyPoint::from_branch(zero, Branch::Generic { g11: one, g12: zero, g21: zero, g22: one }).unwrap()
}

#[test]
fn generic_point_connects() {
    let pt = point_with_nu(c(0.05, 0.0), c(0.0, 0.05));
    let opts = VerifyOptions { tau0_list: vec![2e-3], tau1_list: vec![200.0], ..VerifyOptions::default() };
    let r = asymptotics::verify_connection(&pt, &unit(), 0.02, 400.0, &opts).unwrap();
    assert_eq!(r.predicted.special, Special::None);
    assert_eq!(r.convergence_table.len(), 4);
    let nu_err = r.abs_errors.nu_plus_1.unwrap();
    assert!(nu_err < 2e-2, "{r:#?}");
    // Seeding closer to the origin shrinks the dropped small-tau terms.
    let best = r.convergence_table.iter().find(|row| row.tau0 == 2e-3 && row.tau1 == 400.0).unwrap();
    assert!(best.err_nu.unwrap() < nu_err, "{r:#?}");
    assert!(best.err_z.unwrap() < 0.1, "{r:#?}");
}

#[test]
fn algebraic_point_is_flagged_and_amplitude_shrinks() {
    let pt = algebraic_point();
    let opts = VerifyOptions { tau0_list: vec![2e-4], ..VerifyOptions::default() };
    let r = asymptotics::verify_connection(&pt, &unit(), 0.02, 400.0, &opts).unwrap();
    assert_eq!(r.predicted.special, Special::G21Zero);
    let amp = |t0: f64| r.convergence_table.iter().find(|row| row.tau0 == t0).unwrap().oscillation_amplitude;
    assert!(amp(2e-4) < amp(0.02) / 5.0, "{r:#?}");
    assert!((r.fitted.diagnostics.leading_coefficient - 0.5).norm() < 1e-5, "{r:#?}");
}

#[test]
fn violated_condition_is_reported() {
    let pt = point_with_nu(c(0.0, 0.0), c(0.4, 0.0));
    let e = asymptotics::verify_connection(&pt, &unit(), 0.02, 100.0, &VerifyOptions::default()).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Condition);
}

#[test]
fn bad_grid_is_rejected() {
    let pt = point_with_nu(c(0.0, 0.0), c(0.0, 0.05));
    let p = unit();
    for (t0, t1, window) in [(0.02, 0.01, 0.5), (0.02, 100.0, 1.5), (80.0, 100.0, 0.5)] {
        let opts = VerifyOptions { window, ..VerifyOptions::default() };
        let e = asymptotics::verify_connection(&pt, &p, t0, t1, &opts).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::Validation, "{t0} {t1} {window}");
    }
}
