//! One runner per subcommand. Runners are pure: they take the effective
//! configuration and return the tables to be written.

use std::f64::consts::TAU;

use kicked_spin::meanfield::scan::linspace;
use kicked_spin::meanfield::section::random_initial_states;
use kicked_spin::meanfield::zgeom::{predicted_omega_eff, theta_dot, z_geom_invariant_average_with};
use kicked_spin::meanfield::{bifurcation_scan, lyapunov_map, poincare_section, z_geom, ScanAxis};
use kicked_spin::model::{intrinsic_frequency, StroboscopicMap};
use kicked_spin::quantum::dense::{dense_floquet_spectrum, FloquetSpectrum, SpectrumMethod};
use kicked_spin::quantum::floquet::{evolve, magnetization};
use kicked_spin::quantum::ops::spin_up;
use kicked_spin::quantum::{
    arnoldi_floquet, autocorr_spectrum, autocorrelation_from, build_spin_operators, phase_classifier_quantum,
    steady_state_with, QuantumThresholds, SpinOperators,
};
use kicked_spin::spectral::peaks::spectrum_peaks;
use kicked_spin::spectral::scan::frequency_point;
use kicked_spin::spectral::{arnold_tongue_map, fit_frequency_lattice, frequency_shift_curve, SpectrumOptions, SpectrumPeaks};
use kicked_spin::trajectory::{ensemble_average, jump_ensemble, meanfield_rate_series, photon_count_spectrum};
use kicked_spin::{BlochVector, ModelParams, Spin};

use crate::config::{Axis, Method, RunConfig};
use crate::output::{self, num, opt, Table};
use crate::CliError;

pub type Tables = Result<Vec<Table>, CliError>;

fn spin_ops(s: f64) -> Result<SpinOperators, CliError> {
    let spin = Spin::new(s).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(build_spin_operators(spin)?)
}

fn pair(r: [f64; 2]) -> (f64, f64) {
    (r[0], r[1])
}

pub fn lyap_map(cfg: &RunConfig) -> Tables {
    let c = &cfg.lyap_map;
    let opts = kicked_spin::meanfield::LyapunovOptions { seed: cfg.seed, ..c.lyapunov };
    let cells = lyapunov_map(
        &cfg.model.params(),
        pair(c.omega_z_range),
        pair(c.omega1_range),
        (c.grid[0], c.grid[1]),
        &opts,
    )?;
    let mut t = Table::new("lyap_map", output::GRID_PHASE);
    for cell in &cells {
        t.push(vec![num(cell.omega_z), num(cell.omega1), num(cell.eta), cell.phase_label.to_string()]);
    }
    Ok(vec![t])
}

pub fn bifurcation(cfg: &RunConfig) -> Tables {
    let c = &cfg.bifurcation;
    let opts = kicked_spin::meanfield::LyapunovOptions { seed: cfg.seed, ..c.lyapunov };
    let axis = match c.axis {
        Axis::OmegaZ => ScanAxis::OmegaZ,
        Axis::Omega1 => ScanAxis::Omega1,
    };
    let rows = bifurcation_scan(&cfg.model.params(), axis, pair(c.range), c.n_points, c.samples_per_point, &opts)?;
    let mut t = Table::new("bifurcation", output::BIFURCATION).with_meta("axis", format!("{:?}", c.axis));
    for r in &rows {
        for y in &r.samples {
            t.push(vec![num(r.value), num(*y), num(r.eta), r.label.to_string()]);
        }
    }
    Ok(vec![t])
}

pub fn poincare(cfg: &RunConfig) -> Tables {
    let c = &cfg.poincare;
    let mut starts = vec![BlochVector::up()];
    starts.extend(random_initial_states(c.n_initial, cfg.seed));
    let sets = poincare_section(&cfg.model.params(), &starts, c.periods, c.transient, c.dt)?;
    let mut t = Table::new("poincare", output::POINCARE);
    for (i, s) in sets.iter().enumerate() {
        for pt in &s.points {
            t.push(vec![i.to_string(), num(pt.q), num(pt.p), num(pt.m.x), num(pt.m.y), num(pt.m.z)]);
        }
    }
    Ok(vec![t])
}

fn spectrum_table(name: &str, peaks: &SpectrumPeaks, omega_eff: Option<f64>, top: usize, lattice: (i32, i32, f64)) -> Table {
    let half = peaks.half_band();
    let shown = SpectrumPeaks {
        peaks: half.iter().take(top).copied().collect(),
        ..peaks.clone()
    };
    let fit = omega_eff.map(|w| fit_frequency_lattice(&shown, w, lattice.0, lattice.1, lattice.2));
    let mut t = Table::new(name, output::SPECTRUM)
        .with_meta("resolution", peaks.resolution)
        .with_meta("series_length", peaks.series_length as u64);
    if let Some(w) = omega_eff {
        t = t.with_meta("omega_eff", w);
    }
    for (i, p) in shown.peaks.iter().enumerate() {
        let label = fit.as_ref().and_then(|f| f.labels[i]);
        t.push(vec![
            num(p.frequency),
            num(p.amplitude),
            label.map_or_else(String::new, |l| l.m.to_string()),
            label.map_or_else(String::new, |l| l.n.to_string()),
        ]);
    }
    t
}

pub fn spectrum(cfg: &RunConfig) -> Tables {
    let c = &cfg.spectrum;
    let p = cfg.model.params();
    let fopts = kicked_spin::spectral::FrequencyOptions { seed: cfg.seed, ..c.frequency };
    let fp = frequency_point(&p, &fopts)?;
    let mut spec = spectrum_table("spectrum", &fp.spectrum, fp.omega_eff, c.top, (c.m_max, c.n_max, c.lattice_tol))
        .with_meta("eta", fp.eta)
        .with_meta("locked", fp.lock.locked);
    if fp.lock.locked {
        spec = spec
            .with_meta("p", fp.lock.p)
            .with_meta("q", fp.lock.q)
            .with_meta("f_mod", fp.lock.f_mod);
    }
    let map = StroboscopicMap::new(&p, fopts.dt)?;
    let m = map.iterate(BlochVector::up(), fopts.transient);
    let mut ts = Table::new("stroboscopic", output::TIME_SERIES).with_meta("transient", fopts.transient as u64);
    for (k, m) in map.orbit(m, c.series_len).into_iter().enumerate() {
        ts.push(vec![num((fopts.transient + k + 1) as f64), num(m.x), num(m.y), num(m.z)]);
    }
    Ok(vec![spec, ts])
}

pub fn shift_curve(cfg: &RunConfig) -> Tables {
    let c = &cfg.shift_curve;
    let fopts = kicked_spin::spectral::FrequencyOptions { seed: cfg.seed, ..c.frequency };
    let curve = frequency_shift_curve(&cfg.model.params(), pair(c.omega1_range), c.n_points, &fopts)?;
    let mut t = Table::new("shift_curve", output::SHIFT_CURVE).with_meta("omega_z", curve.omega_z);
    if let Some(f) = &curve.fit {
        t = t.with_meta("slope", f.slope).with_meta("intercept", f.intercept);
    }
    let plateaus: Vec<String> = curve
        .plateaus(c.min_plateau)
        .iter()
        .map(|p| format!("{}/{} [{}, {}]", p.p, p.q, p.start, p.end))
        .collect();
    t = t.with_meta("plateaus", plateaus);
    for pt in &curve.points {
        t.push(vec![
            num(pt.omega1),
            opt(pt.omega_eff),
            num(pt.eta),
            pt.lock.locked.to_string(),
            pt.lock.p.to_string(),
            pt.lock.q.to_string(),
            num(pt.lock.f_mod),
        ]);
    }
    Ok(vec![t])
}

pub fn tongues(cfg: &RunConfig) -> Tables {
    let c = &cfg.tongues;
    let fopts = kicked_spin::spectral::FrequencyOptions { seed: cfg.seed, ..c.frequency };
    let cells = arnold_tongue_map(
        &cfg.model.params(),
        pair(c.omega1_range),
        pair(c.omega_z_range),
        (c.grid[0], c.grid[1]),
        &fopts,
    )?;
    let mut t = Table::new("tongues", output::GRID_LOCK);
    for cell in &cells {
        t.push(vec![
            num(cell.omega_z),
            num(cell.omega1),
            cell.lock.locked.to_string(),
            cell.lock.p.to_string(),
            cell.lock.q.to_string(),
            num(cell.lock.f_mod),
        ]);
    }
    Ok(vec![t])
}

pub fn zgeom(cfg: &RunConfig) -> Tables {
    let c = &cfg.zgeom;
    let p = cfg.model.params();
    let avg = z_geom_invariant_average_with(&p, c.nodes)?;
    let mut t = Table::new("zgeom", output::ZGEOM)
        .with_meta("invariant_average", avg)
        .with_meta("omega", intrinsic_frequency(&p.with_omega1(0.0))?)
        .with_meta("predicted_omega_eff", predicted_omega_eff(&p)?);
    for th in linspace(0.0, TAU, c.samples.max(2)) {
        t.push(vec![num(th), num(z_geom(th, &p)?), num(theta_dot(th, &p)?)]);
    }
    Ok(vec![t])
}

fn eigen_rows(t: &mut Table, s: &FloquetSpectrum) {
    for l in &s.eigenvalues {
        t.push(vec![num(l.re), num(l.im), num(l.norm()), num(l.arg()), num(s.spin), s.method.to_string()]);
    }
}

pub fn liouvillian(cfg: &RunConfig) -> Tables {
    let c = &cfg.liouvillian;
    let p = cfg.model.params();
    let mut t = Table::new("liouvillian", output::EIGENVALUES);
    let mut gaps = serde_json::Map::new();
    for &s in &c.spins {
        let ops = spin_ops(s)?;
        let mut spectra = Vec::new();
        if matches!(c.method, Method::Dense | Method::Both) {
            spectra.push(dense_floquet_spectrum(&ops, &p)?);
        }
        if matches!(c.method, Method::Arnoldi | Method::Both) {
            // small spaces: the full Krylov space is exact
            let n = ops.dim() * ops.dim();
            let opts = kicked_spin::quantum::ArnoldiOptions {
                seed: cfg.seed,
                krylov_dim: c.arnoldi.krylov_dim.min(n),
                max_dim: c.arnoldi.max_dim.min(n),
                n_ritz: c.arnoldi.n_ritz.min(n.saturating_sub(5)),
                ..c.arnoldi
            };
            let r = arnoldi_floquet(&ops, &p, c.dt, &opts)?;
            let vals = r.ritz_values.into_iter().take(opts.n_ritz).collect();
            spectra.push(FloquetSpectrum::new(vals, SpectrumMethod::Arnoldi, s));
        }
        for sp in &spectra {
            gaps.insert(
                format!("{}:{}", sp.method, s),
                serde_json::json!({
                    "gap": sp.gap(),
                    "gap_phase_zero": sp.gap_phase_zero(),
                    "gap_phase_pi": sp.gap_phase_pi(),
                }),
            );
            eigen_rows(&mut t, sp);
        }
    }
    Ok(vec![t.with_meta("gaps", serde_json::Value::Object(gaps))])
}

pub fn autocorr(cfg: &RunConfig) -> Tables {
    let c = &cfg.autocorr;
    let p = cfg.model.params();
    let sopts = kicked_spin::quantum::SteadyOptions { seed: cfg.seed, ..c.steady };
    let mut series = Vec::new();
    for &s in &c.spins {
        let ops = spin_ops(s)?;
        let ss = steady_state_with(&ops, &p, c.dt, &sopts)?;
        series.push(autocorrelation_from(&ops, &p, c.dt, c.t_max, &ss.rho)?);
    }
    let mut t = Table::new("autocorr", output::AUTOCORR);
    let mut g0 = serde_json::Map::new();
    for r in &series {
        g0.insert(num(r.spin), serde_json::json!({ "g0": r.g0, "f2": r.f2, "my_ss": r.my_ss }));
        for (k, g) in r.g.iter().enumerate() {
            t.push(vec![k.to_string(), num(*g), num(r.spin)]);
        }
    }
    t = t.with_meta("by_spin", serde_json::Value::Object(g0));
    if let Some(last) = series.iter().max_by(|a, b| a.spin.total_cmp(&b.spin)) {
        if let Ok(spec) = autocorr_spectrum(last) {
            let label = phase_classifier_quantum(&series, &spec, &QuantumThresholds::default());
            t = t.with_meta("phase_label", label.to_string());
        }
    }
    Ok(vec![t])
}

pub fn steady(cfg: &RunConfig) -> Tables {
    let c = &cfg.steady;
    let p = cfg.model.params();
    let sopts = kicked_spin::quantum::SteadyOptions { seed: cfg.seed, ..c.steady };
    let mut summary = Table::new("steady", output::STEADY);
    let mut out = Vec::new();
    for &s in &c.spins {
        let ops = spin_ops(s)?;
        let ss = steady_state_with(&ops, &p, c.dt, &sopts)?;
        let m = magnetization(&ss.rho, &ops);
        summary.push(vec![num(s), num(m[0]), num(m[1]), num(m[2]), num(ss.residual), ss.iterations.to_string()]);
        if c.periods > 0 {
            let q = evolve(&spin_up(ops.spin), &ops, &p, c.dt, c.periods, c.samples_per_period, 10)?;
            let mut ts = Table::new(format!("evolution_S{s}"), output::TIME_SERIES).with_meta("S", s);
            for (t, m) in q.t.iter().zip(&q.m) {
                ts.push(vec![num(*t), num(m[0]), num(m[1]), num(m[2])]);
            }
            out.push(ts);
        }
    }
    out.insert(0, summary);
    Ok(out)
}

pub fn trajectory(cfg: &RunConfig) -> Tables {
    let c = &cfg.trajectory;
    let p = cfg.model.params();
    let ops = spin_ops(c.spin)?;
    if c.n_trajectories == 0 {
        return Err(CliError::Config("trajectory.n_trajectories must be at least 1".into()));
    }
    let recs = jump_ensemble(&ops, &p, &c.options, c.n_trajectories, cfg.seed)?;
    let first = &recs[0];
    let mut jumps = Table::new("jumps", output::JUMPS).with_meta("S", c.spin).with_meta("t_max", first.t_max);
    for &t in &first.jump_times {
        jumps.push(vec![num(t)]);
    }
    let avg = ensemble_average(&recs)?;
    let n = recs.len() as f64;
    let mut ens = Table::new("ensemble", output::ENSEMBLE).with_meta("count", recs.len() as u64);
    for (i, t) in avg.t.iter().enumerate() {
        let mean = |k: usize| recs.iter().map(|r| r.strobe_bloch[i][k]).sum::<f64>() / n;
        ens.push(vec![num(*t), num(mean(0)), num(avg.mean[i]), num(mean(2)), num(avg.stderr[i])]);
    }
    let mut out = vec![jumps, ens];
    let sopts = SpectrumOptions {
        segment_len: c.segment_len,
        ..Default::default()
    };
    let bw = c.options.bin_width;
    // photon spectra need enough bins; shorter runs only get the records
    if let Ok(spec) = photon_count_spectrum(first, bw, &sopts) {
        out.push(spectrum_table("photon_spectrum", &spec, None, 12, (0, 0, 0.0)));
        let mf = meanfield_rate_series(&p, c.spin, first.t_max, bw, c.options.dt)?;
        let mspec = spectrum_peaks(&mf, bw, &sopts)?;
        out.push(spectrum_table("photon_spectrum_meanfield", &mspec, None, 12, (0, 0, 0.0)));
    }
    Ok(out)
}

/// Model parameters of a run, for callers that only need the couplings.
pub fn model(cfg: &RunConfig) -> ModelParams {
    cfg.model.params()
}
