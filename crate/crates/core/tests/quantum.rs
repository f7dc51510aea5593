use num_complex::Complex64;

use kicked_spin::model::kicked_time_series;
use kicked_spin::quantum::dense::{dense_steady_state, floquet_superoperator};
use kicked_spin::quantum::floquet::{evolve, FloquetPropagator};
use kicked_spin::quantum::ops::{max_abs, spin_up, trace_product, CMatrix, ONE, ZERO};
use kicked_spin::quantum::{
    arnoldi_floquet_spectrum, autocorrelation, autocorrelation_from, build_spin_operators, dense_floquet_spectrum,
    lindblad_rhs, steady_state,
};
use kicked_spin::{BlochVector, ModelParams, Spin};

fn ops(s: f64) -> kicked_spin::quantum::SpinOperators {
    build_spin_operators(Spin::new(s).unwrap()).unwrap()
}

fn vec_of(a: &CMatrix) -> Vec<Complex64> {
    a.iter().copied().collect()
}

fn mat_of(d: usize, v: Vec<Complex64>) -> CMatrix {
    CMatrix::from_shape_vec((d, d), v).unwrap()
}

#[test]
fn spin_half_decay_matches_two_level_solution() {
    // with ω₀ = 0 the (Sᶻ)² term is a constant for S = 1/2; the dissipator
    // rate is κ/S = 2, so populations decay as e^{−2t}, coherences as e^{−t}
    let o = ops(0.5);
    let p = ModelParams::new(0.0, 0.0, 0.7);
    let half = Complex64::new(0.5, 0.0);
    let plus_x = CMatrix::from_elem((2, 2), half);
    let series = evolve(&plus_x, &o, &p, 1e-3, 3, 10, 0).unwrap();
    for (t, m) in series.t.iter().zip(&series.m) {
        assert!((m[0] - (-t).exp()).abs() < 1e-9, "mx at {t}");
        assert!(m[1].abs() < 1e-9, "my at {t}");
        assert!((m[2] - ((-2.0 * t).exp() - 1.0)).abs() < 1e-9, "mz at {t}");
    }
}

#[test]
fn rhs_is_traceless_and_keeps_the_dark_state() {
    let o = ops(3.0);
    let d = o.dim();
    let p = ModelParams::new(0.0, 0.0, 0.0);
    let mixed = CMatrix::eye(d).mapv(|z| z / d as f64);
    let r = lindblad_rhs(&mixed, &o, &p).unwrap();
    assert!(r.diag().sum().norm() < 1e-12);
    assert!(max_abs(&r) > 1e-3);
    let down = kicked_spin::quantum::ops::spin_down(o.spin);
    assert!(max_abs(&lindblad_rhs(&down, &o, &p).unwrap()) < 1e-14);
}

#[test]
fn map_matrix_matches_dense_superoperator() {
    let o = ops(4.0);
    let d = o.dim();
    let n = d * d;
    let p = ModelParams::new(1.5, 1.0, 0.5);
    let dense = floquet_superoperator(&o, &p).unwrap();
    let mut prop = FloquetPropagator::new(&o, &p, 1e-3).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = ONE;
        prop.apply_linear(&mut e);
        for (i, v) in e.iter().enumerate() {
            worst = worst.max((v - dense[[i, j]]).norm());
        }
    }
    assert!(worst <= 1e-6, "worst entry {worst}");
}

#[test]
fn steady_state_matches_dense_eigenvector() {
    for (s, p) in [
        (3.0, ModelParams::new(1.5, 1.0, 0.5)),
        (6.0, ModelParams::new(1.5, 1.0, 2.0)),
        (10.0, ModelParams::new(1.5, 1.0, 2.3)),
    ] {
        let o = ops(s);
        let ss = steady_state(&o, &p, 1e-3).unwrap();
        assert!(ss.residual <= 1e-9);
        let oracle = dense_steady_state(&o, &p).unwrap();
        let diff = max_abs(&(&ss.rho - &oracle));
        assert!(diff <= 1e-7, "S={s}: {diff}");
    }
}

#[test]
fn arnoldi_matches_dense_leading_values() {
    for (s, p) in [(5.0, ModelParams::new(1.5, 1.0, 2.3)), (7.0, ModelParams::new(1.5, 2.0, 0.5))] {
        let o = ops(s);
        let dense = dense_floquet_spectrum(&o, &p).unwrap();
        let kry = arnoldi_floquet_spectrum(&o, &p, 1e-3, 80, 20, 7).unwrap();
        assert!((kry.leading() - 1.0).norm() <= 1e-8);
        for l in kry.eigenvalues.iter().take(10) {
            let near = dense.eigenvalues.iter().map(|m| (m - l).norm()).fold(f64::INFINITY, f64::min);
            assert!(near <= 1e-6, "S={s}: ritz {l} off by {near}");
        }
    }
}

#[test]
fn autocorrelator_forward_route_agrees() {
    let o = ops(5.0);
    let d = o.dim();
    let p = ModelParams::new(1.5, 1.0, 0.5);
    let ss = steady_state(&o, &p, 1e-3).unwrap();
    let adj = autocorrelation_from(&o, &p, 1e-3, 12, &ss.rho).unwrap();
    // Schrödinger picture: Tr[S̃ʸ U^t(S̃ʸ ρ)]
    let my = trace_product(&o.sy, &ss.rho).re;
    let shifted = &o.sy - &CMatrix::eye(d).mapv(|z| z * my);
    let mut x = vec_of(&shifted.dot(&ss.rho));
    let mut prop = FloquetPropagator::new(&o, &p, 1e-3).unwrap();
    let s2 = 25.0;
    for t in 0..=12 {
        if t > 0 {
            prop.apply_linear(&mut x);
        }
        let g = trace_product(&shifted, &mat_of(d, x.clone())).re / s2;
        assert!((g - adj.g[t]).abs() <= 1e-10, "t={t}: {g} vs {}", adj.g[t]);
    }
    assert!(adj.g0 >= 0.0);
    assert_eq!(adj.f2, adj.g0 * 5.0);
}

#[test]
fn halving_the_step_changes_little() {
    let o = ops(6.0);
    let p = ModelParams::new(1.5, 1.0, 0.5);
    let a = evolve(&spin_up(o.spin), &o, &p, 1e-3, 5, 1, 10).unwrap();
    let b = evolve(&spin_up(o.spin), &o, &p, 5e-4, 5, 1, 10).unwrap();
    let diff = max_abs(&(&a.final_state - &b.final_state));
    assert!(diff <= 1e-6, "{diff}");
    assert!(a.worst_min_eigenvalue >= -1e-8);
}

fn semiclassical_deviation(s: f64, p: &ModelParams, periods: usize, samples_per_period: usize) -> f64 {
    let o = ops(s);
    let q = evolve(&spin_up(o.spin), &o, p, 1e-3, periods, samples_per_period, 0).unwrap();
    let mf = kicked_time_series(BlochVector::up(), p, periods, 1e-3, 1000 / samples_per_period).unwrap();
    assert_eq!(q.t.len(), mf.len());
    q.m.iter()
        .zip(&mf)
        .map(|(a, (_, b))| (a[0] - b.x).abs().max((a[1] - b.y).abs()).max((a[2] - b.z).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn finite_spin_approaches_mean_field() {
    let p = ModelParams::new(1.5, 1.0, 0.0);
    let dev: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&s| semiclassical_deviation(s, &p, 5, 10)).collect();
    // deviation at fixed time falls like 1/S
    for w in dev.windows(2) {
        assert!(w[1] < 0.6 * w[0], "{dev:?}");
    }
    // stroboscopic samples only; mid-period the packet runs up to ~0.08 off
    let big = semiclassical_deviation(80.0, &p, 5, 1);
    assert!(big <= 0.05, "S=80 deviation {big}");
}

#[test]
fn undriven_steady_state_approaches_fixed_point() {
    let p = ModelParams::new(0.5, 0.0, 0.0);
    let err: Vec<f64> = [4.0, 8.0, 16.0]
        .iter()
        .map(|&s| {
            let o = ops(s);
            let ss = steady_state(&o, &p, 1e-3).unwrap();
            (trace_product(&o.sy, &ss.rho).re / s - 0.5).abs()
        })
        .collect();
    assert!(err[1] < err[0] && err[2] < err[1], "{err:?}");
}

#[test]
fn variance_is_nonnegative_across_regimes() {
    for wz in [0.5, 2.0, 3.0] {
        let o = ops(4.0);
        let r = autocorrelation(&o, &ModelParams::new(1.5, 1.0, wz), 1e-3, 3).unwrap();
        assert!(r.g0 >= 0.0);
    }
}
