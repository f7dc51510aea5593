use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use kicked_spin::error::Error;
use kicked_spin::quantum::floquet::evolve;
use kicked_spin::quantum::ops::spin_up;
use kicked_spin::quantum::build_spin_operators;
use kicked_spin::spectral::peaks::welch_amplitudes;
use kicked_spin::spectral::SpectrumOptions;
use kicked_spin::trajectory::{
    ensemble_average, ensemble_density, jump_ensemble, jump_probability, jump_trajectory, no_jump_step,
    photon_count_spectrum, rate_series, TrajectoryOptions, TrajectoryRecord, DEFAULT_BIN_WIDTH, MIN_BINS,
};
use kicked_spin::{ModelParams, Spin};

fn record_from(jump_times: Vec<f64>, t_max: f64) -> TrajectoryRecord {
    TrajectoryRecord {
        seed: 0,
        stream: 0,
        dt: 1e-3,
        t_max,
        jump_times,
        strobe_expectations: vec![],
        strobe_bloch: vec![],
        bin_width: DEFAULT_BIN_WIDTH,
        binned_counts: vec![],
        strobe_states: vec![],
    }
}

fn spectral_outliers(jump_times: &[f64], t_max: f64) -> (f64, f64) {
    // largest bin in units of σ above the mean noise floor
    let series = rate_series(jump_times, t_max, DEFAULT_BIN_WIDTH).unwrap();
    let amps = welch_amplitudes(&series, 256).unwrap();
    let half = &amps[1..128];
    let mean = half.iter().sum::<f64>() / half.len() as f64;
    let sd = (half.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (half.len() - 1) as f64).sqrt();
    let top = half.iter().copied().fold(0.0, f64::max);
    ((top - mean) / sd, mean)
}

#[test]
fn no_jump_norm_loss_is_the_jump_probability() {
    let ops = build_spin_operators(Spin::new(5.0).unwrap()).unwrap();
    let p = ModelParams::new(1.5, 1.0, 0.5);
    let d = ops.dim();
    let mut psi: Vec<Complex64> = (0..d).map(|k| Complex64::new(1.0 + k as f64, 0.3 * k as f64)).collect();
    let n = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= n);
    let defect = |dt: f64| {
        let x = no_jump_step(&ops, &p, &psi, dt).unwrap();
        let loss = 1.0 - x.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let prob = jump_probability(&ops, &p, &psi, dt).unwrap();
        (loss - prob, prob)
    };
    let (e1, p1) = defect(1e-3);
    let (e2, _) = defect(5e-4);
    assert!(e1.abs() < 1e-2 * p1, "{e1} vs {p1}");
    // second-order remainder
    let ratio = e1 / e2;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn poisson_record_has_no_significant_peak() {
    let t_max = MIN_BINS as f64 * DEFAULT_BIN_WIDTH * 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let exp = Exp::new(40.0).unwrap();
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut rng);
        if t >= t_max {
            break;
        }
        times.push(t);
    }
    let (z, _) = spectral_outliers(&times, t_max);
    assert!(z < 5.0, "{z}σ");

    // a rate modulated at 2.3 rad per unit time must stand out
    let mut thinned = Vec::new();
    for &t in &times {
        let keep = 0.5 * (1.0 + (2.3 * t).cos());
        if rng.random::<f64>() < keep {
            thinned.push(t);
        }
    }
    let (z, _) = spectral_outliers(&thinned, t_max);
    assert!(z > 5.0, "{z}σ");
}

#[test]
fn empty_record_has_no_peaks() {
    let r = record_from(vec![], 410.0);
    let s = photon_count_spectrum(&r, DEFAULT_BIN_WIDTH, &SpectrumOptions::default()).unwrap();
    assert!(s.is_empty());
}

#[test]
fn short_record_is_rejected() {
    let r = record_from(vec![0.5, 1.2], 10.0);
    let e = photon_count_spectrum(&r, DEFAULT_BIN_WIDTH, &SpectrumOptions::default());
    assert!(matches!(e, Err(Error::SeriesTooShort { .. })));
}

#[test]
fn mismatched_grids_are_rejected() {
    let ops = build_spin_operators(Spin::new(2.0).unwrap()).unwrap();
    let p = ModelParams::new(1.5, 1.0, 0.5);
    let a = jump_trajectory(&ops, &p, 1e-3, 3.0, 1).unwrap();
    let b = jump_trajectory(&ops, &p, 1e-3, 4.0, 1).unwrap();
    assert!(matches!(ensemble_average(&[a, b]), Err(Error::GridMismatch(_))));
}

#[test]
fn unraveling_reproduces_the_master_equation() {
    let ops = build_spin_operators(Spin::new(2.0).unwrap()).unwrap();
    let p = ModelParams::new(1.5, 1.0, 0.5);
    let exact = evolve(&spin_up(ops.spin), &ops, &p, 1e-3, 3, 1, 0).unwrap().final_state;
    let opts = TrajectoryOptions {
        t_max: 3.0,
        keep_states: true,
        ..Default::default()
    };
    let err = |n: usize| {
        let recs = jump_ensemble(&ops, &p, &opts, n, 5).unwrap();
        let rho = ensemble_density(&recs, 3).unwrap();
        (&rho - &exact).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    let small = err(250);
    let large = err(4000);
    // sixteen times the trajectories, a quarter of the error
    let ratio = large / small;
    assert!((0.1..=0.5).contains(&ratio), "{small} -> {large}");
    assert!(large < 0.05, "{large}");
}

#[test]
fn standard_error_shrinks_as_one_over_root_n() {
    let ops = build_spin_operators(Spin::new(4.0).unwrap()).unwrap();
    let p = ModelParams::new(1.5, 1.0, 2.0);
    let opts = TrajectoryOptions {
        t_max: 6.0,
        ..Default::default()
    };
    let last = |n: usize| {
        let avg = ensemble_average(&jump_ensemble(&ops, &p, &opts, n, 9).unwrap()).unwrap();
        assert!(avg.error_bars_defined());
        *avg.stderr.last().unwrap()
    };
    let ratio = last(1600) / last(100);
    assert!((0.18..=0.32).contains(&ratio), "ratio {ratio}");
}

#[test]
fn modulated_rate_peak_sits_at_its_frequency() {
    // inhomogeneous Poisson process with rate 40(1 + cos ωt)
    let w = 2.0 * TAU / 3.0;
    let t_max = MIN_BINS as f64 * DEFAULT_BIN_WIDTH;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let exp = Exp::new(80.0).unwrap();
    let mut t = 0.0;
    let mut times = Vec::new();
    loop {
        t += exp.sample(&mut rng);
        if t >= t_max {
            break;
        }
        if rng.random::<f64>() < 0.5 * (1.0 + (w * t).cos()) {
            times.push(t);
        }
    }
    let s = photon_count_spectrum(&record_from(times, t_max), DEFAULT_BIN_WIDTH, &SpectrumOptions::default()).unwrap();
    let f = s.dominant().unwrap().frequency;
    assert!((f - w).abs() < s.resolution, "{f}");
}
