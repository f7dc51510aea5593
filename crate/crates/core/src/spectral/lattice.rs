//! Frequency lattices `f = mΩ_eff + n·f_kick` and rational locking.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::peaks::{Peak, SpectrumPeaks};

/// Kick frequency in units where the period is one.
pub const F_KICK: f64 = TAU;

pub const DEFAULT_LATTICE_TOL: f64 = 1e-2;
pub const DEFAULT_M_MAX: i32 = 10;
pub const DEFAULT_N_MAX: i32 = 4;
pub const DEFAULT_LOCK_TOL: f64 = 2e-3;
pub const DEFAULT_Q_MAX: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub m: i32,
    pub n: i32,
}

impl Label {
    fn weight(self) -> i32 {
        self.m.abs() + self.n.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeFit {
    pub omega_eff: f64,
    pub frequencies: Vec<f64>,
    /// Simplest admissible label per peak (smallest `|m| + |n|`, then
    /// smallest residual); `None` when no label fits.
    pub labels: Vec<Option<Label>>,
    /// Every label within tolerance, per peak. Near a rational `Ω_eff` the
    /// lattice is degenerate and several labels describe the same line.
    pub admissible: Vec<Vec<Label>>,
    pub residuals: Vec<f64>,
    /// Largest residual over labelled peaks.
    pub max_residual: f64,
}

impl LatticeFit {
    pub fn unassigned(&self) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, l)| l.is_none()).map(|(i, _)| i).collect()
    }

    pub fn assigned_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }
}

/// All `(m, n)` with `|f − (m·base + n·step)| ≤ tol`, within the bounds.
fn admissible_labels(f: f64, base: f64, step: f64, m_max: i32, n_max: i32, tol: f64) -> Vec<(Label, f64)> {
    let mut out = Vec::new();
    for m in -m_max..=m_max {
        let n = ((f - m as f64 * base) / step).round();
        if n.abs() > n_max as f64 {
            continue;
        }
        let r = (f - m as f64 * base - n * step).abs();
        if r <= tol {
            out.push((Label { m, n: n as i32 }, r));
        }
    }
    out.sort_by(|a, b| a.0.weight().cmp(&b.0.weight()).then(a.1.total_cmp(&b.1)));
    out
}

fn fit_frequencies(freqs: &[f64], omega_eff: f64, m_max: i32, n_max: i32, tol: f64) -> LatticeFit {
    let mut labels = Vec::with_capacity(freqs.len());
    let mut admissible = Vec::with_capacity(freqs.len());
    let mut residuals = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let cands = admissible_labels(f, omega_eff, F_KICK, m_max, n_max, tol);
        labels.push(cands.first().map(|c| c.0));
        residuals.push(cands.first().map_or(f64::NAN, |c| c.1));
        admissible.push(cands.into_iter().map(|c| c.0).collect());
    }
    let max_residual = residuals.iter().copied().filter(|r| r.is_finite()).fold(0.0, f64::max);
    LatticeFit {
        omega_eff,
        frequencies: freqs.to_vec(),
        labels,
        admissible,
        residuals,
        max_residual,
    }
}

/// Labels each peak frequency on the lattice generated by `omega_eff` and the
/// kick frequency. Unassignable peaks keep a `None` label.
pub fn fit_frequency_lattice(peaks: &SpectrumPeaks, omega_eff: f64, m_max: i32, n_max: i32, tol: f64) -> LatticeFit {
    let freqs: Vec<f64> = peaks.peaks.iter().map(|p| p.frequency).collect();
    fit_frequencies(&freqs, omega_eff, m_max, n_max, tol)
}

/// Lattice fit of explicitly listed frequencies.
pub fn fit_listed(freqs: &[f64], omega_eff: f64, m_max: i32, n_max: i32, tol: f64) -> LatticeFit {
    fit_frequencies(freqs, omega_eff, m_max, n_max, tol)
}

/// Number of leading half-band peaks used when judging candidate `Ω_eff`.
const OVERRIDE_PEAKS: usize = 8;

/// Main stroboscopic frequency: the dominant peak in `(0, π]`, unless a
/// subharmonic `(f + 2πk)/j` of it explains strictly more of the leading
/// peaks on its lattice.
pub fn extract_omega_eff(peaks: &SpectrumPeaks) -> Option<f64> {
    let half: Vec<Peak> = peaks.half_band();
    let dominant = half.first()?.frequency;
    let top: Vec<f64> = half.iter().take(OVERRIDE_PEAKS).map(|p| p.frequency).collect();
    let score = |w: f64| fit_frequencies(&top, w, DEFAULT_M_MAX, DEFAULT_N_MAX, DEFAULT_LATTICE_TOL).assigned_count();
    let mut best = (dominant, score(dominant));
    for j in 2..=3 {
        for k in 0..j {
            let w = (dominant + TAU * k as f64) / j as f64;
            if w <= 0.0 || w > PI {
                continue;
            }
            let s = score(w);
            if s > best.1 {
                best = (w, s);
            }
        }
    }
    Some(best.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockClassification {
    pub locked: bool,
    pub p: u32,
    pub q: u32,
    /// Modulation frequency of the sidebands; zero when not locked or when no
    /// sideband structure is found.
    pub f_mod: f64,
}

impl LockClassification {
    pub fn unlocked() -> Self {
        LockClassification {
            locked: false,
            p: 0,
            q: 0,
            f_mod: 0.0,
        }
    }

    pub fn ratio(&self) -> Option<(u32, u32)> {
        self.locked.then_some((self.p, self.q))
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Closest rational `p/q` (coprime, `q ≤ q_max`) within `tol` of `x`;
/// ties go to the smaller `q`.
pub fn nearest_rational(x: f64, q_max: u32, tol: f64) -> Option<(u32, u32)> {
    let mut best: Option<(u32, u32, f64)> = None;
    for q in 1..=q_max {
        let p = (x * q as f64).round();
        if p < 0.0 {
            continue;
        }
        let p = p as u32;
        if gcd(p, q) != 1 {
            continue;
        }
        let d = (x - p as f64 / q as f64).abs();
        if d <= tol && best.is_none_or(|b| d < b.2 - 1e-15) {
            best = Some((p, q, d));
        }
    }
    best.map(|b| (b.0, b.1))
}

/// Sideband labels on `f = m·Ω_eff + n·f_mod + k·f_kick`.
const SIDEBAND_M: i32 = 3;
const SIDEBAND_N: i32 = 4;

fn sideband_fit(freqs: &[f64], omega_eff: f64, f_mod: f64, tol: f64) -> (usize, i32, Vec<(f64, i32)>) {
    let mut count = 0;
    let mut complexity = 0;
    let mut rows = Vec::new();
    for &f in freqs {
        let mut best: Option<(i32, f64, f64)> = None;
        for m in -SIDEBAND_M..=SIDEBAND_M {
            for n in -SIDEBAND_N..=SIDEBAND_N {
                if n == 0 {
                    continue;
                }
                let base = m as f64 * omega_eff + n as f64 * f_mod;
                let k = ((f - base) / F_KICK).round();
                let off = f - base - k * F_KICK;
                let r = off.abs();
                let w = m.abs() + n.abs();
                if r <= tol && best.is_none_or(|b| w < b.0 || (w == b.0 && r < b.1.abs())) {
                    best = Some((w, off + n as f64 * f_mod, n as f64));
                }
            }
        }
        if let Some((w, target, n)) = best {
            count += 1;
            complexity += w;
            rows.push((target, n as i32));
        }
    }
    (count, complexity, rows)
}

/// Locking test `|Ω_eff/2π − p/q| ≤ lock_tol`. When locked, peaks off the
/// harmonic lattice of `Ω_eff` are fitted as sidebands `mΩ_eff + n·f_mod`
/// and `f_mod` is refined by least squares over the fitted peaks.
pub fn classify_locking(omega_eff: f64, spectrum: &SpectrumPeaks, q_max: u32, lock_tol: f64) -> LockClassification {
    let q_max = q_max.max(2);
    let Some((p, q)) = nearest_rational(omega_eff / F_KICK, q_max, lock_tol) else {
        return LockClassification::unlocked();
    };
    let tol = DEFAULT_LATTICE_TOL;
    let half: Vec<f64> = spectrum.half_band().iter().map(|p| p.frequency).collect();
    let harmonic = |f: f64| (1..=q as i32).any(|m| {
        let d = (f - m as f64 * omega_eff).rem_euclid(F_KICK);
        d.min(F_KICK - d) <= tol
    });
    let residual: Vec<f64> = half.iter().copied().filter(|&f| !harmonic(f)).collect();
    if residual.is_empty() {
        return LockClassification { locked: true, p, q, f_mod: 0.0 };
    }

    let mut candidates = Vec::new();
    for &f in &residual {
        for m in -SIDEBAND_M..=SIDEBAND_M {
            let d = (f - m as f64 * omega_eff).rem_euclid(F_KICK);
            for c in [d, F_KICK - d] {
                if c > tol && c < PI {
                    candidates.push(c);
                }
            }
        }
    }
    // most peaks explained, then the simplest labelling, then the smallest
    let mut best: Option<(usize, i32, f64)> = None;
    for c in candidates {
        let (count, cx, _) = sideband_fit(&residual, omega_eff, c, tol);
        let better = match best {
            None => true,
            Some((bc, bx, bf)) => count > bc || (count == bc && (cx < bx || (cx == bx && c < bf - 1e-9))),
        };
        if better {
            best = Some((count, cx, c));
        }
    }
    let f_mod = best.map_or(0.0, |(_, _, c)| {
        let (_, _, rows) = sideband_fit(&residual, omega_eff, c, tol);
        // rows hold (n·f_mod estimate, n); least squares for f_mod
        let num: f64 = rows.iter().map(|(t, n)| t * *n as f64).sum();
        let den: f64 = rows.iter().map(|(_, n)| (*n * *n) as f64).sum();
        if den > 0.0 {
            (num / den).abs()
        } else {
            c
        }
    });
    LockClassification { locked: true, p, q, f_mod }
}
