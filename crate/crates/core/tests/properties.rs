use std::f64::consts::PI;

use proptest::prelude::*;

use dp3_core::asymptotics;
use dp3_core::backlund;
use dp3_core::batch;
use dp3_core::io;
use dp3_core::monodromy::{Branch, Direction};
use dp3_core::ode::{self, SolutionState, Trajectory};
use dp3_core::specfun;
use dp3_core::{Complex64, EquationParams, MonodromyPoint};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit() -> EquationParams {
    EquationParams::new(1, 1.0).unwrap()
}

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(x, y)| c(x, y))
}

fn entry() -> impl Strategy<Value = Complex64> {
    complex(1.2).prop_filter("bounded away from zero", |z| z.norm() > 0.3)
}

prop_compose! {
    fn generic_point()(a in complex(0.5), nu in complex(0.15), g11 in entry(), g12 in entry()) -> MonodromyPoint {
        let prod = (c(0.0, -2.0 * PI) * nu).exp();
        MonodromyPoint::from_branch(a, Branch::Generic { g11, g12, g21: (prod - 1.0) / g12, g22: prod / g11 }).unwrap()
    }
}

prop_compose! {
    fn any_point()(a in complex(0.5), s00 in complex(2.0), g in entry(), nu in complex(0.15), g12 in entry(), k in 0..3u8)
        -> MonodromyPoint {
        let branch = match k {
            0 => {
                let prod = (c(0.0, -2.0 * PI) * nu).exp();
                Branch::Generic { g11: g, g12, g21: (prod - 1.0) / g12, g22: prod / g }
            }
            1 => Branch::G11Zero { s00, g22: g },
            _ => Branch::G22Zero { s00, g11: g },
        };
        MonodromyPoint::from_branch(a, branch).unwrap()
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_actions_stay_on_manifold(pt in any_point()) {
        prop_assert!(pt.max_residual() < 1e-10);
        for act in batch::all_group_actions() {
            let img = act.apply(&pt).unwrap();
            prop_assert!(img.max_residual() < 1e-10, "{act:?}: {:?}", img.manifold_residual());
        }
        prop_assert_eq!(pt.apply_f(0, 0).unwrap(), pt);
    }

    #[test]
    fn backlund_directions_are_inverse(pt in any_point()) {
        let back = pt.backlund(Direction::Up).backlund(Direction::Down);
        prop_assert!((back.a - pt.a).norm() < 1e-14);
        prop_assert!((back.g() - pt.g()).norm() < 1e-12 * pt.g().norm());
    }

    #[test]
    fn stokes_and_cyclic_relations(pt in any_point()) {
        prop_assert!((pt.cos_2pi_rho() - pt.cos_2pi_rho_inf()).norm() < 1e-10);
        let (cyclic, semi) = pt.cyclic_residuals().unwrap();
        prop_assert!(semi < 1e-10 && cyclic < 1e-10);
    }

    #[test]
    fn small_chart_is_even_in_rho(pt in generic_point(), s in 1e-4..0.5f64) {
        let p = unit();
        if let Ok(c1) = asymptotics::small_tau_chart(&pt, 0, &p) {
            if !c1.log_mode {
                let c2 = asymptotics::small_tau_chart_with_rho(&pt, 0, &p, -c1.rho).unwrap();
                let (u1, u2) = (c1.u(s).unwrap(), c2.u(s).unwrap());
                prop_assert!(rel(u2, u1) < 1e-12, "{u1} vs {u2}");
            }
        }
    }

    #[test]
    fn sector_identities(pt in generic_point()) {
        let p = unit();
        if [0, 1, -1].iter().all(|&e| asymptotics::large_tau_chart(&pt, e, &p).is_ok()) {
            let r = asymptotics::remark31_residuals(&pt).unwrap();
            prop_assert!(r.iter().all(|x| *x < 1e-10), "{r:?}");
        }
    }

    #[test]
    fn large_chart_mean_is_algebraic_part(s in 10.0..1e4f64, b in 0.2..5.0f64, eps in prop::sample::select(vec![1i8, -1])) {
        let p = EquationParams::new(eps, b * f64::from(eps)).unwrap();
        let (one, zero) = (c(1.0, 0.0), c(0.0, 0.0));
        let pt = MonodromyPoint::from_branch(zero, Branch::Generic { g11: one, g12: zero, g21: zero, g22: one }).unwrap();
        let ch = asymptotics::large_tau_chart(&pt, 0, &p).unwrap();
        let (u, _) = ode::algebraic_solution(s, &p);
        prop_assert!((ch.algebraic_part(s) - u).abs() <= 1e-14 * u.abs());
    }

    #[test]
    fn gamma_identities(x in -3.3..3.3f64, y in 0.05..2.5f64, sign in prop::sample::select(vec![1.0, -1.0])) {
        let z = c(x, sign * y);
        let g = specfun::gamma(z).unwrap();
        prop_assert!(rel(specfun::gamma(z + 1.0).unwrap(), z * g) < 1e-12);
        prop_assert!(rel(g * specfun::gamma(1.0 - z).unwrap(), PI / specfun::sinpi(z)) < 1e-12);
        prop_assert!(rel(specfun::ln_gamma(z).unwrap().exp(), g) < 1e-12);
        prop_assert!(rel(specfun::gamma(z.conj()).unwrap(), g.conj()) < 1e-14);
        let psi = specfun::digamma(z).unwrap();
        prop_assert!((specfun::digamma(z + 1.0).unwrap() - psi - 1.0 / z).norm() < 1e-12 * psi.norm().max(1.0));
    }

    #[test]
    fn solution_backlund_round_trip(u in complex(1.0), du in complex(1.0), a in complex(0.5), tau in 0.3..4.0f64) {
        prop_assume!(u.norm() > 0.2);
        let st = SolutionState::new(c(tau, 0.0), u, du);
        let p = unit();
        if let Ok((up, a1)) = backlund::backlund_step(&st, a, &p, Direction::Up) {
            prop_assume!(up.u.norm() > 1e-3);
            let (back, a2) = backlund::backlund_step(&up, a1, &p, Direction::Down).unwrap();
            prop_assert!((a2 - a).norm() < 1e-14);
            let scale = u.norm() + du.norm();
            prop_assert!((back.u - u).norm() < 1e-9 * scale && (back.du - du).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn hamiltonian_forms_agree(u in complex(2.0), du in complex(2.0), a in complex(0.5), tau in 0.1..50.0f64, phi in -3.0..3.0f64) {
        prop_assume!(u.norm() > 0.1);
        let p = unit();
        let st = SolutionState::new(c(tau, 0.0), u, du).with_phi(c(phi, 0.0));
        let h = ode::hamiltonian_u(&st, a, &p).unwrap();
        let mom = ode::p_from_u(&st, a, &p, -1).unwrap();
        prop_assert!(rel(ode::hamiltonian_pq(mom, u, st.tau, a, &p, -1), h) < 1e-11 || h.norm() < 1e-3);
        let x = ode::to_abcd(&st, a, &p).unwrap();
        prop_assert!((x.u(st.tau, &p) - u).norm() < 1e-13 * u.norm());
        let split = ode::hamiltonian_abcd(&x, st.tau, a, &p).unwrap();
        prop_assert!((split.h - h).norm() < 1e-11 * h.norm().max(1.0));
    }

    #[test]
    fn point_json_round_trip(pt in any_point()) {
        let text = io::to_json(&pt).unwrap();
        prop_assert_eq!(io::parse_points(&text).unwrap(), vec![pt]);
    }

    #[test]
    fn trajectory_csv_round_trip(vals in prop::collection::vec((0.01..1e3f64, complex(1e3), complex(1e3)), 1..20)) {
        let samples: Vec<SolutionState> = vals.iter().map(|&(t, u, du)| SolutionState::new(c(t, 0.0), u, du)).collect();
        let hamiltonian = vals.iter().map(|&(_, u, du)| u * du).collect();
        let traj = Trajectory { params: unit(), a: c(0.1, -0.2), dir: c(1.0, 0.0), samples, hamiltonian };
        let mut buf = Vec::new();
        io::write_trajectory_csv(&traj, &mut buf).unwrap();
        prop_assert_eq!(io::read_trajectory_csv(&buf[..], &traj.params, traj.a).unwrap(), traj);
    }
}
