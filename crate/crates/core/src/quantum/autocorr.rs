//! Steady-state autocorrelator of the transverse magnetisation and the
//! finite-S phase classifier built on it.
//!
//! `G(t) = Re Tr[S̃ʸ(t) S̃ʸ ρ_ss] / S²` at integer t, with `S̃ʸ = Sʸ − ⟨Sʸ⟩_ss`
//! evolved in the Heisenberg picture by the adjoint one-period map.

use std::f64::consts::TAU;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::floquet::FloquetPropagator;
use super::ops::{trace_product, CMatrix, SpinOperators};
use super::steady::{steady_state_with, SteadyOptions};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::phase::PhaseLabel;
use crate::spectral::peaks::spectrum_peaks;
use crate::spectral::{SpectrumOptions, SpectrumPeaks};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrResult {
    pub spin: f64,
    /// `G(t)` for `t = 0..=t_max`.
    pub g: Vec<f64>,
    pub g0: f64,
    /// `F² = G(0)·S`.
    pub f2: f64,
    /// `⟨Sʸ⟩_ss / S`.
    pub my_ss: f64,
}

impl AutocorrResult {
    /// Largest `|G|` over the trailing `fraction` of the window.
    pub fn late_envelope(&self, fraction: f64) -> f64 {
        let n = self.g.len();
        let start = n - ((n as f64 * fraction).ceil() as usize).clamp(1, n);
        self.g[start..].iter().fold(0.0, |a, g| a.max(g.abs()))
    }
}

/// Autocorrelator from a known steady state.
pub fn autocorrelation_from(
    ops: &SpinOperators,
    p: &ModelParams,
    dt: f64,
    t_max: usize,
    rho_ss: &CMatrix,
) -> Result<AutocorrResult> {
    let d = ops.dim();
    if rho_ss.dim() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho_ss.nrows(),
        });
    }
    let s = ops.s();
    let my = trace_product(&ops.sy, rho_ss).re;
    let shifted = &ops.sy - &CMatrix::eye(d).mapv(|z| z * my);
    let x = shifted.dot(rho_ss);
    let mut prop = FloquetPropagator::new(ops, p, dt)?;
    let mut a: Vec<_> = shifted.as_standard_layout().iter().copied().collect();
    let mut g = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            prop.apply_adjoint_linear(&mut a);
        }
        let at = Array2::from_shape_vec((d, d), a.clone()).expect("square");
        g.push(trace_product(&at, &x).re / (s * s));
    }
    let g0 = g[0];
    Ok(AutocorrResult {
        spin: s,
        g,
        g0,
        f2: g0 * s,
        my_ss: my / s,
    })
}

/// Steady state followed by the autocorrelator.
pub fn autocorrelation(ops: &SpinOperators, p: &ModelParams, dt: f64, t_max: usize) -> Result<AutocorrResult> {
    let ss = steady_state_with(ops, p, dt, &SteadyOptions::default())?;
    autocorrelation_from(ops, p, dt, t_max, &ss.rho)
}

/// Spectrum of `G(t)` at integer times, short-window settings.
pub fn autocorr_spectrum(g: &AutocorrResult) -> Result<SpectrumPeaks> {
    let n = g.g.len();
    let mut seg = 16;
    while seg * 4 <= n {
        seg *= 2;
    }
    let opts = SpectrumOptions {
        segment_len: seg,
        min_len: 2 * seg,
        abs_floor: 1e-12,
        ..Default::default()
    };
    spectrum_peaks(&g.g, 1.0, &opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumThresholds {
    /// `G(0)` at the largest S must exceed this to count as finite.
    pub g0_min: f64,
    /// `G(0)` ratio on doubling S below which it counts as vanishing.
    pub halving: f64,
    pub late_fraction: f64,
    /// Late envelope relative to `G(0)` above which `G(∞) ≠ 0`.
    pub late_ratio: f64,
    /// Largest subharmonic order tested for periodicity.
    pub max_period: u32,
    /// Tolerance on the dominant frequency, in spectral bins.
    pub period_bins: f64,
}

impl Default for QuantumThresholds {
    fn default() -> Self {
        QuantumThresholds {
            g0_min: 0.01,
            halving: 0.5,
            late_fraction: 0.2,
            late_ratio: 0.1,
            max_period: 4,
            period_bins: 1.5,
        }
    }
}

/// Whether `G(0)` stays finite: above threshold at the largest S and not
/// halving against the largest computed S at most half as big.
pub fn g0_finite(series: &[AutocorrResult], th: &QuantumThresholds) -> bool {
    let Some(last) = series.iter().max_by(|a, b| a.spin.total_cmp(&b.spin)) else {
        return false;
    };
    if last.g0 <= th.g0_min {
        return false;
    }
    let half = series
        .iter()
        .filter(|r| r.spin * 2.0 <= last.spin + 1e-9)
        .max_by(|a, b| a.spin.total_cmp(&b.spin));
    half.is_none_or(|h| last.g0 > th.halving * h.g0)
}

/// Finite-S label from autocorrelators at several S (the largest S decides
/// the long-time behaviour) and the spectrum of its `G(t)`.
pub fn phase_classifier_quantum(series: &[AutocorrResult], spectrum: &SpectrumPeaks, th: &QuantumThresholds) -> PhaseLabel {
    let Some(last) = series.iter().max_by(|a, b| a.spin.total_cmp(&b.spin)) else {
        return PhaseLabel::Unresolved;
    };
    if !g0_finite(series, th) {
        return PhaseLabel::Stationary;
    }
    if last.late_envelope(th.late_fraction) <= th.late_ratio * last.g0 {
        return PhaseLabel::Chaotic;
    }
    let Some(dom) = spectrum.dominant() else {
        return PhaseLabel::Unresolved;
    };
    let f = dom.frequency;
    let tol = th.period_bins * spectrum.resolution;
    if f.min(TAU - f) <= tol {
        return PhaseLabel::Unresolved;
    }
    for k in 2..=th.max_period {
        let step = TAU / k as f64;
        let j = (f / step).round();
        if j >= 1.0 && (f - j * step).abs() <= tol {
            return PhaseLabel::Dtc(k);
        }
    }
    PhaseLabel::Dqtc
}
