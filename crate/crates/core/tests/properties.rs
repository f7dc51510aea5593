use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use kicked_spin::meanfield::{lyapunov_exponent, LyapunovOptions};
use kicked_spin::model::{
    analytic_btc_solution, conserved_m, integrate_flow, kick_map, Flow, RBranchTracker, StroboscopicMap,
};
use kicked_spin::quantum::floquet::{check_state, FloquetPropagator};
use kicked_spin::quantum::lindblad::rotation_x;
use kicked_spin::quantum::ops::{build_spin_operators, dagger, max_abs, trace, trace_product, CMatrix};
use kicked_spin::quantum::dense_floquet_spectrum;
use kicked_spin::trajectory::{jump_trajectory, jump_trajectory_from, spin_up_state, TrajectoryOptions};
use kicked_spin::{BlochVector, ModelParams, Spin};

fn unit_vector() -> impl Strategy<Value = BlochVector> {
    (-1.0f64..1.0, 0.0f64..TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        BlochVector::new(r * phi.cos(), r * phi.sin(), z)
    })
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.0f64..3.0, 0.0f64..TAU, 0.0f64..3.2).prop_map(|(w0, w1, wz)| ModelParams::new(w0, w1, wz))
}

fn complex_matrix(d: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d)
        .prop_map(move |v| CMatrix::from_shape_vec((d, d), v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn density(d: usize) -> impl Strategy<Value = CMatrix> {
    complex_matrix(d).prop_map(|a| {
        let r = a.dot(&dagger(&a));
        let t = trace(&r);
        r.mapv(|z| z / t)
    })
}

fn hermitian(d: usize) -> impl Strategy<Value = CMatrix> {
    complex_matrix(d).prop_map(|a| (&a + &dagger(&a)).mapv(|z| z * 0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stroboscopic_map_keeps_the_radius(m in unit_vector(), p in params()) {
        let map = StroboscopicMap::new(&p, 1e-3).unwrap();
        let out = map.apply_checked(m).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_drift_within_budget(m in unit_vector(), p in params()) {
        let out = Flow::new(&p).advance(m, 1e-3, 1000);
        prop_assert!((out.norm() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn kick_is_two_pi_periodic(m in unit_vector(), w1 in -10.0f64..10.0) {
        let a = kick_map(m, w1);
        let b = kick_map(m, w1 + TAU);
        prop_assert!(a.max_abs_diff(b) < 1e-12);
    }

    #[test]
    fn btc_invariant_is_conserved(m in unit_vector(), w0 in 1.2f64..3.0) {
        let p = ModelParams::new(w0, 0.0, 0.0);
        let m0 = conserved_m(m, &p).unwrap();
        let m1 = conserved_m(integrate_flow(m, &p, 5.0, 1e-3).unwrap(), &p).unwrap();
        prop_assert!((m1 - m0).abs() <= 1e-8 * m0.abs().max(1.0));
    }

    #[test]
    fn twisted_invariant_is_conserved(m in unit_vector(), w0 in 1.2f64..3.0, wz in 0.1f64..3.0) {
        let p = ModelParams::new(w0, 0.0, wz);
        let flow = Flow::new(&p);
        let mut tracker = RBranchTracker::new(&p);
        let Ok(r0) = tracker.observe(m) else { return Ok(()) };
        let mut x = m;
        let mut worst: f64 = 0.0;
        for _ in 0..3000 {
            x = flow.step(x, 1e-3);
            match tracker.observe(x) {
                Ok(r) => worst = worst.max((r - r0).abs()),
                Err(_) => return Ok(()),
            }
        }
        prop_assert!(worst <= 1e-7 * r0.abs().max(1.0), "drift {worst}");
    }

    #[test]
    fn rk4_is_fourth_order(w0 in 1.2f64..3.0) {
        let p = ModelParams::new(w0, 0.0, 0.0);
        let exact = analytic_btc_solution(2.0, &p).unwrap();
        let err = |dt: f64| integrate_flow(BlochVector::up(), &p, 2.0, dt).unwrap().max_abs_diff(exact);
        let ratio = err(0.01) / err(0.005);
        prop_assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn lyapunov_runs_are_seed_deterministic(p in params(), seed in 0u64..1000) {
        let o = LyapunovOptions { periods: 1000, seed, ..Default::default() };
        // short runs may report non-convergence; that must be reproducible too
        let a = lyapunov_exponent(&p, BlochVector::up(), &o);
        let b = lyapunov_exponent(&p, BlochVector::up(), &o);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn floquet_map_keeps_states_physical(rho in density(5), p in params()) {
        let ops = build_spin_operators(Spin::new(2.0).unwrap()).unwrap();
        let mut prop = FloquetPropagator::new(&ops, &p, 1e-3).unwrap();
        let mut r = rho;
        for _ in 0..3 {
            r = prop.map(&r).unwrap();
        }
        let c = check_state(&r).unwrap();
        prop_assert!(c.trace_error <= 1e-10);
        prop_assert!(c.hermiticity <= 1e-10);
        prop_assert!(c.min_eigenvalue >= -1e-8);
    }

    #[test]
    fn quantum_kick_is_two_pi_periodic(rho in density(4), w1 in -6.0f64..6.0) {
        // half-integer spin picks up a global sign, invisible under conjugation
        let ops = build_spin_operators(Spin::new(1.5).unwrap()).unwrap();
        let a = rotation_x(&ops, w1).unwrap();
        let b = rotation_x(&ops, w1 + TAU).unwrap();
        let ra = a.dot(&rho).dot(&dagger(&a));
        let rb = b.dot(&rho).dot(&dagger(&b));
        prop_assert!(max_abs(&(ra - rb)) < 1e-10);
    }

    #[test]
    fn spectrum_is_conjugation_closed(p in params()) {
        let ops = build_spin_operators(Spin::new(1.5).unwrap()).unwrap();
        let s = dense_floquet_spectrum(&ops, &p).unwrap();
        prop_assert!((s.leading() - 1.0).norm() <= 1e-8);
        prop_assert!(s.eigenvalues.iter().all(|l| l.norm() <= 1.0 + 1e-8));
        prop_assert!(s.conjugation_defect() <= 1e-8);
    }

    #[test]
    fn jump_records_are_seed_deterministic(seed in 0u64..10_000, p in params()) {
        let ops = build_spin_operators(Spin::new(3.0).unwrap()).unwrap();
        let a = jump_trajectory(&ops, &p, 1e-3, 3.0, seed).unwrap();
        let b = jump_trajectory(&ops, &p, 1e-3, 3.0, seed).unwrap();
        prop_assert_eq!(&a.jump_times, &b.jump_times);
        prop_assert!(a.jump_times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trajectory_states_stay_normalised(seed in 0u64..10_000, p in params()) {
        let ops = build_spin_operators(Spin::new(3.0).unwrap()).unwrap();
        let opts = TrajectoryOptions { t_max: 4.0, keep_states: true, ..Default::default() };
        let r = jump_trajectory_from(&ops, &p, &spin_up_state(&ops), &opts, seed, 0).unwrap();
        for x in &r.strobe_states {
            let n: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((n - 1.0).abs() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn adjoint_map_is_the_trace_dual(a in hermitian(13), b in hermitian(13), p in params()) {
        let ops = build_spin_operators(Spin::new(6.0).unwrap()).unwrap();
        let mut prop = FloquetPropagator::new(&ops, &p, 1e-3).unwrap();
        let mut ub: Vec<Complex64> = b.iter().copied().collect();
        prop.apply_linear(&mut ub);
        let ub = CMatrix::from_shape_vec((13, 13), ub).unwrap();
        let uda = prop.adjoint_map(&a).unwrap();
        let lhs = trace_product(&a, &ub);
        let rhs = trace_product(&uda, &b);
        prop_assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
    }
}
