//! Parameter sweeps: bifurcation cuts and Lyapunov phase diagrams.

use serde::{Deserialize, Serialize};

use super::lyapunov::{lyapunov_estimate, LyapunovOptions, ZERO_BAND};
use super::section::{cluster_centers, CLUSTER_RADIUS};
use crate::error::{Error, Result};
use crate::model::{BlochVector, ModelParams};
use crate::par;
use crate::phase::PhaseLabel;

/// Minimum number of distinct section points for a quasi-periodic label.
pub const DQTC_MIN_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    OmegaZ,
    Omega1,
}

impl ScanAxis {
    pub fn apply(self, p: &ModelParams, v: f64) -> ModelParams {
        match self {
            ScanAxis::OmegaZ => p.with_omega_z(v),
            ScanAxis::Omega1 => p.with_omega1(v),
        }
    }
}

/// Regime from the Lyapunov exponent and the number of distinct
/// post-transient stroboscopic points.
pub fn classify(eta: f64, converged: bool, clusters: usize) -> PhaseLabel {
    if !converged || !eta.is_finite() {
        return PhaseLabel::Unresolved;
    }
    if eta > ZERO_BAND {
        PhaseLabel::Chaotic
    } else if eta < -ZERO_BAND {
        match clusters {
            1 => PhaseLabel::Stationary,
            k if k < DQTC_MIN_POINTS => PhaseLabel::Dtc(k as u32),
            _ => PhaseLabel::Unresolved,
        }
    } else if clusters >= DQTC_MIN_POINTS {
        PhaseLabel::Dqtc
    } else {
        PhaseLabel::Unresolved
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointAnalysis {
    pub eta: f64,
    pub converged: bool,
    pub clusters: usize,
    pub label: PhaseLabel,
    #[serde(skip)]
    pub tail: Vec<BlochVector>,
}

/// Lyapunov exponent plus section-cluster count from `(0, 0, 1)`.
pub fn analyse_point(p: &ModelParams, opts: &LyapunovOptions) -> Result<PointAnalysis> {
    let r = lyapunov_estimate(p, BlochVector::up(), opts)?;
    let clusters = cluster_centers(&r.tail, CLUSTER_RADIUS).len();
    Ok(PointAnalysis {
        eta: r.eta,
        converged: r.converged,
        clusters,
        label: classify(r.eta, r.converged, clusters),
        tail: r.tail,
    })
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub value: f64,
    /// Post-transient stroboscopic `my` samples.
    pub samples: Vec<f64>,
    pub distinct: usize,
    pub eta: f64,
    pub label: PhaseLabel,
}

/// Sweeps one parameter; each point yields its `my` samples and Lyapunov
/// exponent. Points run in parallel.
pub fn bifurcation_scan(
    p_base: &ModelParams,
    axis: ScanAxis,
    range: (f64, f64),
    n_points: usize,
    samples_per_point: usize,
    opts: &LyapunovOptions,
) -> Result<Vec<BifurcationRow>> {
    if n_points < 2 {
        return Err(Error::param("n_points", "need at least 2 points"));
    }
    let opts = LyapunovOptions {
        tail_samples: samples_per_point,
        ..*opts
    };
    let values = linspace(range.0, range.1, n_points);
    par::map(&values, |&v| {
        let a = analyse_point(&axis.apply(p_base, v), &opts)?;
        Ok(BifurcationRow {
            value: v,
            samples: a.tail.iter().map(|m| m.y).collect(),
            distinct: a.clusters,
            eta: a.eta,
            label: a.label,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramCell {
    pub omega_z: f64,
    pub omega1: f64,
    pub eta: f64,
    pub phase_label: PhaseLabel,
}

/// Lyapunov exponent and regime label on an `(ωz, ω1)` grid, row-major in
/// `ω1` (outer) and `ωz` (inner).
pub fn lyapunov_map(
    p_base: &ModelParams,
    omega_z_range: (f64, f64),
    omega1_range: (f64, f64),
    grid: (usize, usize),
    opts: &LyapunovOptions,
) -> Result<Vec<PhaseDiagramCell>> {
    if grid.0 < 2 || grid.1 < 2 {
        return Err(Error::param("grid", "dimensions must be at least 2"));
    }
    let zs = linspace(omega_z_range.0, omega_z_range.1, grid.0);
    let ks = linspace(omega1_range.0, omega1_range.1, grid.1);
    let cells: Vec<(f64, f64)> = ks.iter().flat_map(|&k| zs.iter().map(move |&z| (z, k))).collect();
    par::map(&cells, |&(z, k)| {
        let a = analyse_point(&p_base.with_omega_z(z).with_omega1(k), opts)?;
        Ok(PhaseDiagramCell {
            omega_z: z,
            omega1: k,
            eta: a.eta,
            phase_label: a.label,
        })
    })
    .into_iter()
    .collect()
}

/// Contiguous stretch of one regime along a cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub label: PhaseLabel,
    pub start: f64,
    pub end: f64,
    pub len: usize,
}

/// Default minimum length (in grid points) of an ordered run.
pub const MIN_ORDERED_RUN: usize = 5;

fn raw_runs(cut: &[(f64, PhaseLabel)]) -> Vec<(PhaseLabel, usize, usize)> {
    let mut runs: Vec<(PhaseLabel, usize, usize)> = Vec::new();
    for (i, &(_, l)) in cut.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if r.0 == l => r.2 = i,
            _ => runs.push((l, i, i)),
        }
    }
    runs
}

/// Splits a labelled cut into ordered regimes and the disordered stretches
/// between them.
///
/// Ordered runs are maximal runs of one non-chaotic label (DQTC, stationary,
/// DTC of a fixed period) at least `min_run` points long; isolated unresolved
/// points flanked by the same label are absorbed. Everything between two
/// ordered runs is one segment: chaotic if it contains a chaotic point
/// (periodic windows and period-doubling cascades included), otherwise a
/// bifurcation gap, which is dropped so the neighbours meet at its midpoint.
pub fn regime_segments(cut: &[(f64, PhaseLabel)], min_run: usize) -> Vec<Segment> {
    let mut runs = raw_runs(cut);
    let mut i = 1;
    while i + 1 < runs.len() {
        let gap = runs[i].2 - runs[i].1 + 1;
        if runs[i].0 == PhaseLabel::Unresolved && gap <= 2 && runs[i - 1].0 == runs[i + 1].0 {
            runs[i - 1].2 = runs[i + 1].2;
            runs.drain(i..i + 2);
        } else {
            i += 1;
        }
    }
    let ordered = |r: &(PhaseLabel, usize, usize)| {
        !matches!(r.0, PhaseLabel::Chaotic | PhaseLabel::Unresolved) && r.2 - r.1 + 1 >= min_run
    };
    let seg = |label, a: usize, b: usize| Segment {
        label,
        start: cut[a].0,
        end: cut[b].0,
        len: b - a + 1,
    };
    let mut out = Vec::new();
    let mut pending: Option<usize> = None;
    for r in &runs {
        if ordered(r) {
            if let Some(a) = pending.take() {
                if cut[a..r.1].iter().any(|c| c.1 == PhaseLabel::Chaotic) {
                    out.push(seg(PhaseLabel::Chaotic, a, r.1 - 1));
                } else if out.is_empty() {
                    out.push(seg(PhaseLabel::Unresolved, a, r.1 - 1));
                }
            }
            out.push(seg(r.0, r.1, r.2));
        } else if pending.is_none() {
            pending = Some(r.1);
        }
    }
    if let Some(a) = pending {
        let label = if cut[a..].iter().any(|c| c.1 == PhaseLabel::Chaotic) {
            PhaseLabel::Chaotic
        } else {
            PhaseLabel::Unresolved
        };
        out.push(seg(label, a, cut.len() - 1));
    }
    out
}

/// Boundaries between consecutive segments, midway between the last point
/// of one and the first point of the next.
pub fn transitions(segments: &[Segment]) -> Vec<f64> {
    segments.windows(2).map(|w| 0.5 * (w[0].end + w[1].start)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_rule() {
        assert_eq!(classify(0.3, true, 256), PhaseLabel::Chaotic);
        assert_eq!(classify(-0.4, true, 1), PhaseLabel::Stationary);
        assert_eq!(classify(-0.1, true, 2), PhaseLabel::Dtc(2));
        assert_eq!(classify(0.001, true, 256), PhaseLabel::Dqtc);
        assert_eq!(classify(0.001, true, 3), PhaseLabel::Unresolved);
        assert_eq!(classify(0.5, false, 256), PhaseLabel::Unresolved);
    }

    #[test]
    fn ordered_runs_and_chaotic_gaps() {
        use PhaseLabel::*;
        let labels = [
            Dqtc, Dqtc, Unresolved, Dqtc, Dqtc, Dqtc, Chaotic, Dtc(4), Dtc(4), Chaotic, Unresolved,
            Stationary, Stationary, Stationary, Stationary, Stationary, Unresolved, Dtc(2), Dtc(2), Dtc(2),
            Dtc(2), Dtc(2), Dtc(4), Dqtc, Chaotic, Chaotic,
        ];
        let cut: Vec<(f64, PhaseLabel)> = labels.iter().enumerate().map(|(i, &l)| (i as f64, l)).collect();
        let segs = regime_segments(&cut, 5);
        let seq: Vec<PhaseLabel> = segs.iter().map(|s| s.label).collect();
        assert_eq!(seq, [Dqtc, Chaotic, Stationary, Dtc(2), Chaotic]);
        assert_eq!(transitions(&segs), vec![5.5, 10.5, 16.0, 21.5]);
    }

    #[test]
    fn scan_needs_two_points() {
        let p = ModelParams::default();
        let o = LyapunovOptions::default();
        assert!(bifurcation_scan(&p, ScanAxis::OmegaZ, (0.0, 1.0), 1, 10, &o).is_err());
        assert!(lyapunov_map(&p, (0.0, 1.0), (0.0, 1.0), (1, 2), &o).is_err());
    }
}
