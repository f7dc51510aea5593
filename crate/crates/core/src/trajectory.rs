//! Photon-counting unraveling of the kicked master equation.
//!
//! Between jumps the state evolves under `H_eff = H₀ − i(κ/2S)S⁺S⁻`, one RK4
//! step per `dt`, and is renormalised. The jump probability in a step is
//! `(κ/S)⟨S⁺S⁻⟩dt`; a jump applies `S⁻` and stamps the end of the step.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{step_count, ModelParams};
use crate::par;
use crate::quantum::lindblad::{rotation_x, steps_per_period};
use crate::quantum::ops::{CMatrix, SpinOperators, I, ZERO};
use crate::rng;
use crate::spectral::peaks::spectrum_peaks;
use crate::spectral::{SpectrumOptions, SpectrumPeaks};

/// Largest jump probability allowed in one step.
pub const JUMP_PROB_LIMIT: f64 = 0.1;
/// Default photon bin width for spectra.
pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryOptions {
    pub dt: f64,
    /// Whole number of periods.
    pub t_max: f64,
    pub bin_width: f64,
    /// Keep the post-kick state vector at every integer time.
    pub keep_states: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            dt: 1e-3,
            t_max: 10.0,
            bin_width: DEFAULT_BIN_WIDTH,
            keep_states: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub stream: u64,
    pub dt: f64,
    pub t_max: f64,
    /// Strictly increasing photon timestamps.
    pub jump_times: Vec<f64>,
    /// `⟨Sʸ⟩/S` at `t = 0, 1, …` (post-kick).
    pub strobe_expectations: Vec<f64>,
    /// `⟨S⟩/S` at the same times.
    pub strobe_bloch: Vec<[f64; 3]>,
    pub bin_width: f64,
    /// `(bin start, count)`.
    pub binned_counts: Vec<(f64, u64)>,
    #[serde(skip)]
    pub strobe_states: Vec<Vec<Complex64>>,
}

/// Banded pieces of the effective Hamiltonian.
struct Effective {
    hx: Vec<f64>,
    diag: Vec<Complex64>,
    n: Vec<f64>,
    gamma: f64,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Effective {
    fn new(ops: &SpinOperators, p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let s = ops.s();
        let gamma = p.kappa / s;
        let n = ops.raising_lowering_diag();
        let d = ops.dim();
        Ok(Effective {
            hx: ops.ladder.iter().map(|c| 0.5 * c * p.omega0).collect(),
            diag: ops
                .m
                .iter()
                .zip(&n)
                .map(|(m, nk)| Complex64::new(p.omega_z / s * m * m, -0.5 * gamma * nk))
                .collect(),
            n,
            gamma,
            k: [vec![ZERO; d], vec![ZERO; d], vec![ZERO; d], vec![ZERO; d]],
            tmp: vec![ZERO; d],
        })
    }

    /// `out = −i H_eff x`.
    fn rhs(hx: &[f64], diag: &[Complex64], x: &[Complex64], out: &mut [Complex64]) {
        let d = x.len();
        for a in 0..d {
            let mut acc = diag[a] * x[a];
            if a > 0 {
                acc += x[a - 1] * hx[a - 1];
            }
            if a + 1 < d {
                acc += x[a + 1] * hx[a];
            }
            out[a] = -I * acc;
        }
    }

    fn step(&mut self, x: &mut [Complex64], h: f64) {
        let (hx, diag) = (&self.hx, &self.diag);
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        Self::rhs(hx, diag, x, k1);
        for i in 0..x.len() {
            tmp[i] = x[i] + k1[i] * (0.5 * h);
        }
        Self::rhs(hx, diag, tmp, k2);
        for i in 0..x.len() {
            tmp[i] = x[i] + k2[i] * (0.5 * h);
        }
        Self::rhs(hx, diag, tmp, k3);
        for i in 0..x.len() {
            tmp[i] = x[i] + k3[i] * h;
        }
        Self::rhs(hx, diag, tmp, k4);
        for i in 0..x.len() {
            x[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }

    /// `(κ/S)⟨S⁺S⁻⟩` for a normalised state.
    fn jump_rate(&self, x: &[Complex64]) -> f64 {
        self.gamma * x.iter().zip(&self.n).map(|(z, n)| z.norm_sqr() * n).sum::<f64>()
    }
}

fn normalize(x: &mut [Complex64]) {
    let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    x.iter_mut().for_each(|z| *z /= n);
}

/// `S⁻x`, unnormalised.
fn lower(ladder: &[f64], x: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; x.len()];
    for (k, c) in ladder.iter().enumerate() {
        out[k + 1] = x[k] * *c;
    }
    out
}

fn apply_dense(u: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..x.len()).map(|i| (0..x.len()).map(|j| u[[i, j]] * x[j]).sum()).collect()
}

/// `⟨x|Sʸ|x⟩/S` from the ladder structure.
pub fn sy_expectation(ops: &SpinOperators, x: &[Complex64]) -> f64 {
    // Sʸ = (S⁺ − S⁻)/2i; ⟨S⁺⟩ = Σ c_k x̄_k x_{k+1}
    let sp: Complex64 = ops.ladder.iter().enumerate().map(|(k, c)| x[k].conj() * x[k + 1] * *c).sum();
    sp.im / ops.s()
}

/// `⟨x|S|x⟩/S` for all three components.
pub fn bloch_expectation(ops: &SpinOperators, x: &[Complex64]) -> [f64; 3] {
    let sp: Complex64 = ops.ladder.iter().enumerate().map(|(k, c)| x[k].conj() * x[k + 1] * *c).sum();
    let sz: f64 = x.iter().zip(&ops.m).map(|(z, m)| z.norm_sqr() * m).sum();
    let s = ops.s();
    [sp.re / s, sp.im / s, sz / s]
}

/// Counts per bin of width `bin_width` over `[0, t_max)`.
pub fn bin_counts(jump_times: &[f64], t_max: f64, bin_width: f64) -> Vec<(f64, u64)> {
    let n = (t_max / bin_width).round() as usize;
    let mut c = vec![0u64; n];
    for &t in jump_times {
        let b = ((t / bin_width).ceil() as usize).saturating_sub(1).min(n.saturating_sub(1));
        if n > 0 {
            c[b] += 1;
        }
    }
    c.into_iter().enumerate().map(|(i, k)| (i as f64 * bin_width, k)).collect()
}

/// One trajectory from `psi0` on random stream `(seed, stream)`.
pub fn jump_trajectory_from(
    ops: &SpinOperators,
    p: &ModelParams,
    psi0: &[Complex64],
    opts: &TrajectoryOptions,
    seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord> {
    let d = ops.dim();
    if psi0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: psi0.len() });
    }
    let spp = steps_per_period(p, opts.dt)?;
    let periods = opts.t_max / p.period;
    if !(periods >= 0.0) || (periods - periods.round()).abs() > 1e-9 {
        return Err(Error::param("t_max", "must be a whole number of periods"));
    }
    let periods = periods.round() as usize;
    let mut eff = Effective::new(ops, p)?;
    let kick = rotation_x(ops, p.omega1)?;
    let mut r = rng::stream(seed, stream);
    let mut x = psi0.to_vec();
    normalize(&mut x);
    let mut jumps = Vec::new();
    let mut strobe = vec![sy_expectation(ops, &x)];
    let mut bloch = vec![bloch_expectation(ops, &x)];
    let mut states = Vec::new();
    if opts.keep_states {
        states.push(x.clone());
    }
    for n in 0..periods {
        for s in 0..spp {
            let prob = eff.jump_rate(&x) * opts.dt;
            if prob > JUMP_PROB_LIMIT {
                return Err(Error::StepTooCoarse { prob, limit: JUMP_PROB_LIMIT });
            }
            let u: f64 = r.random();
            if u < prob {
                x = lower(&ops.ladder, &x);
                jumps.push((n * spp + s + 1) as f64 * opts.dt);
            } else {
                eff.step(&mut x, opts.dt);
            }
            normalize(&mut x);
        }
        x = apply_dense(&kick, &x);
        strobe.push(sy_expectation(ops, &x));
        bloch.push(bloch_expectation(ops, &x));
        if opts.keep_states {
            states.push(x.clone());
        }
    }
    let t_max = periods as f64 * p.period;
    Ok(TrajectoryRecord {
        seed,
        stream,
        dt: opts.dt,
        t_max,
        binned_counts: bin_counts(&jumps, t_max, opts.bin_width),
        jump_times: jumps,
        strobe_expectations: strobe,
        strobe_bloch: bloch,
        bin_width: opts.bin_width,
        strobe_states: states,
    })
}

/// One no-jump step of `psi` under `H_eff`, left unnormalised.
pub fn no_jump_step(ops: &SpinOperators, p: &ModelParams, psi: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
    let mut eff = Effective::new(ops, p)?;
    let mut x = psi.to_vec();
    eff.step(&mut x, dt);
    Ok(x)
}

/// `(κ/S)⟨S⁺S⁻⟩dt` for a normalised `psi`.
pub fn jump_probability(ops: &SpinOperators, p: &ModelParams, psi: &[Complex64], dt: f64) -> Result<f64> {
    Ok(Effective::new(ops, p)?.jump_rate(psi) * dt)
}

/// Fully polarised `|S, S⟩`.
pub fn spin_up_state(ops: &SpinOperators) -> Vec<Complex64> {
    let mut x = vec![ZERO; ops.dim()];
    x[0] = Complex64::new(1.0, 0.0);
    x
}

/// One trajectory from `|S, S⟩` on stream 0 of `seed`.
pub fn jump_trajectory(ops: &SpinOperators, p: &ModelParams, dt: f64, t_max: f64, seed: u64) -> Result<TrajectoryRecord> {
    let opts = TrajectoryOptions {
        dt,
        t_max,
        ..Default::default()
    };
    jump_trajectory_from(ops, p, &spin_up_state(ops), &opts, seed, 0)
}

/// `n` trajectories on streams `0..n` of `seed`, in parallel when enabled.
pub fn jump_ensemble(ops: &SpinOperators, p: &ModelParams, opts: &TrajectoryOptions, n: usize, seed: u64) -> Result<Vec<TrajectoryRecord>> {
    let psi0 = spin_up_state(ops);
    par::map_range(n, |i| jump_trajectory_from(ops, p, &psi0, opts, seed, i as u64))
        .into_iter()
        .collect()
}

/// Sequential counterpart of [`jump_ensemble`].
pub fn jump_ensemble_sequential(
    ops: &SpinOperators,
    p: &ModelParams,
    opts: &TrajectoryOptions,
    n: usize,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>> {
    let psi0 = spin_up_state(ops);
    (0..n).map(|i| jump_trajectory_from(ops, p, &psi0, opts, seed, i as u64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleAverage {
    pub t: Vec<f64>,
    pub mean: Vec<f64>,
    /// Standard error of the mean; infinite for a single record.
    pub stderr: Vec<f64>,
    pub count: usize,
}

impl EnsembleAverage {
    pub fn error_bars_defined(&self) -> bool {
        self.count >= 2
    }
}

/// Pointwise mean and standard error of `⟨Sʸ⟩/S`.
pub fn ensemble_average(records: &[TrajectoryRecord]) -> Result<EnsembleAverage> {
    let first = records.first().ok_or_else(|| Error::GridMismatch("no records".into()))?;
    let len = first.strobe_expectations.len();
    for r in records {
        if r.strobe_expectations.len() != len || r.dt != first.dt || r.t_max != first.t_max {
            return Err(Error::GridMismatch(format!(
                "stream {} has {} samples at dt {}, expected {} at dt {}",
                r.stream,
                r.strobe_expectations.len(),
                r.dt,
                len,
                first.dt
            )));
        }
    }
    let n = records.len() as f64;
    let mut mean = vec![0.0; len];
    for r in records {
        for (m, v) in mean.iter_mut().zip(&r.strobe_expectations) {
            *m += v / n;
        }
    }
    let stderr = if records.len() < 2 {
        vec![f64::INFINITY; len]
    } else {
        (0..len)
            .map(|i| {
                let var = records.iter().map(|r| (r.strobe_expectations[i] - mean[i]).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            })
            .collect()
    };
    Ok(EnsembleAverage {
        t: (0..len).map(|i| i as f64).collect(),
        mean,
        stderr,
        count: records.len(),
    })
}

/// Averaged post-kick density matrices from records kept with `keep_states`.
pub fn ensemble_density(records: &[TrajectoryRecord], period: usize) -> Result<CMatrix> {
    let first = records.first().ok_or_else(|| Error::GridMismatch("no records".into()))?;
    let d = first.strobe_states.first().map_or(0, Vec::len);
    let mut rho = CMatrix::zeros((d, d));
    let w = 1.0 / records.len() as f64;
    for r in records {
        let x = r
            .strobe_states
            .get(period)
            .ok_or_else(|| Error::GridMismatch(format!("stream {} kept no state at period {period}", r.stream)))?;
        for i in 0..d {
            for j in 0..d {
                rho[[i, j]] += x[i] * x[j].conj() * w;
            }
        }
    }
    Ok(rho)
}

/// Minimum number of bins for a photon-count spectrum.
pub const MIN_BINS: usize = 1 << 12;

/// Spectrum of the binned photon-count rate.
pub fn photon_count_spectrum(record: &TrajectoryRecord, bin_width: f64, opts: &SpectrumOptions) -> Result<SpectrumPeaks> {
    let series = rate_series(&record.jump_times, record.t_max, bin_width)?;
    spectrum_peaks(&series, bin_width, &SpectrumOptions { min_len: MIN_BINS, ..*opts })
}

/// Counts per unit time in consecutive bins.
pub fn rate_series(jump_times: &[f64], t_max: f64, bin_width: f64) -> Result<Vec<f64>> {
    if !(bin_width > 0.0) {
        return Err(Error::param("bin_width", "must be positive"));
    }
    let bins = (t_max / bin_width).round() as usize;
    if bins < MIN_BINS {
        return Err(Error::SeriesTooShort { needed: MIN_BINS, have: bins });
    }
    Ok(bin_counts(jump_times, t_max, bin_width).into_iter().map(|(_, c)| c as f64 / bin_width).collect())
}

/// Mean-field photon rate `κS(1 − (mᶻ)²)` averaged over bins of `bin_width`,
/// sampled every `dt` from the spin-up state.
pub fn meanfield_rate_series(p: &ModelParams, spin: f64, t_max: f64, bin_width: f64, dt: f64) -> Result<Vec<f64>> {
    use crate::model::{kick_map, BlochVector, Flow};
    let spp = steps_per_period(p, dt)?;
    let per_bin = step_count(bin_width, dt);
    if (per_bin as f64 * dt - bin_width).abs() > 1e-9 || spp % per_bin != 0 {
        return Err(Error::param("bin_width", "must be a whole number of steps dividing the period"));
    }
    let bins = (t_max / bin_width).round() as usize;
    let flow = Flow::new(p);
    let mut m = BlochVector::up();
    let mut out = Vec::with_capacity(bins);
    let rate = |m: BlochVector| p.kappa * spin * (1.0 - m.z * m.z);
    let mut step = 0usize;
    for _ in 0..bins {
        // trapezoid average of the rate over the bin
        let mut acc = 0.5 * rate(m);
        for k in 0..per_bin {
            m = flow.step(m, dt);
            step += 1;
            let w = if k + 1 == per_bin { 0.5 } else { 1.0 };
            acc += w * rate(m);
            if step.is_multiple_of(spp) {
                // the rate is continuous across the kick; only m moves
                m = kick_map(m, p.omega1);
            }
        }
        out.push(acc / per_bin as f64);
    }
    Ok(out)
}
