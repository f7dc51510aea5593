//! Frequency-shift curves and Arnold-tongue maps over parameter sweeps.

use serde::{Deserialize, Serialize};

use super::lattice::{classify_locking, extract_omega_eff, LockClassification, DEFAULT_LOCK_TOL, DEFAULT_Q_MAX};
use super::peaks::{stroboscopic_spectrum, SpectrumOptions, SpectrumPeaks};
use crate::error::{Error, Result};
use crate::meanfield::lyapunov::{lyapunov_estimate, LyapunovOptions, ZERO_BAND};
use crate::meanfield::scan::linspace;
use crate::model::{BlochVector, ModelParams, DEFAULT_DT};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrequencyOptions {
    pub transient: usize,
    pub length: usize,
    pub dt: f64,
    pub seed: u64,
    pub spectrum: SpectrumOptions,
    pub q_max: u32,
    pub lock_tol: f64,
}

impl Default for FrequencyOptions {
    fn default() -> Self {
        FrequencyOptions {
            transient: 2000,
            length: 1 << 14,
            dt: DEFAULT_DT,
            seed: 0,
            spectrum: SpectrumOptions::default(),
            q_max: DEFAULT_Q_MAX,
            lock_tol: DEFAULT_LOCK_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub eta: f64,
    pub chaotic: bool,
    pub omega_eff: Option<f64>,
    pub lock: LockClassification,
    pub spectrum: SpectrumPeaks,
}

/// Post-transient `my` series from `(0, 0, 1)` together with the Lyapunov
/// exponent of the same run.
pub fn stroboscopic_my_series(p: &ModelParams, opts: &FrequencyOptions) -> Result<(Vec<f64>, f64)> {
    let total = opts.transient + opts.length;
    let lopts = LyapunovOptions {
        periods: total,
        transient_fraction: opts.transient as f64 / total as f64,
        dt: opts.dt,
        seed: opts.seed,
        tail_samples: opts.length,
        ..Default::default()
    };
    let r = lyapunov_estimate(p, BlochVector::up(), &lopts)?;
    Ok((r.tail.iter().map(|m| m.y).collect(), r.eta))
}

/// Spectrum, `Ω_eff` and locking state of one parameter point.
pub fn frequency_point(p: &ModelParams, opts: &FrequencyOptions) -> Result<FrequencyPoint> {
    let (series, eta) = stroboscopic_my_series(p, opts)?;
    let spectrum = stroboscopic_spectrum(&series, 0, &opts.spectrum)?;
    let chaotic = eta > ZERO_BAND;
    let omega_eff = if chaotic { None } else { extract_omega_eff(&spectrum) };
    let lock = omega_eff.map_or(LockClassification::unlocked(), |w| {
        classify_locking(w, &spectrum, opts.q_max, opts.lock_tol)
    });
    Ok(FrequencyPoint {
        eta,
        chaotic,
        omega_eff,
        lock,
        spectrum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        points: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPoint {
    pub omega1: f64,
    pub omega_eff: Option<f64>,
    pub eta: f64,
    pub chaotic: bool,
    pub lock: LockClassification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftCurve {
    pub omega_z: f64,
    pub points: Vec<ShiftPoint>,
    /// Fit over non-chaotic, unlocked points.
    pub fit: Option<LinearFit>,
    /// `ω1` values excluded as chaotic.
    pub excluded: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub p: u32,
    pub q: u32,
    pub start: f64,
    pub end: f64,
    pub len: usize,
}

impl ShiftCurve {
    /// Runs of at least `min_len` consecutive points locked to one ratio.
    pub fn plateaus(&self, min_len: usize) -> Vec<Plateau> {
        let mut out: Vec<Plateau> = Vec::new();
        let mut cur: Option<Plateau> = None;
        for pt in &self.points {
            let r = pt.lock.ratio();
            match (&mut cur, r) {
                (Some(c), Some((p, q))) if (c.p, c.q) == (p, q) => {
                    c.end = pt.omega1;
                    c.len += 1;
                }
                _ => {
                    if let Some(c) = cur.take() {
                        if c.len >= min_len {
                            out.push(c);
                        }
                    }
                    cur = r.map(|(p, q)| Plateau {
                        p,
                        q,
                        start: pt.omega1,
                        end: pt.omega1,
                        len: 1,
                    });
                }
            }
        }
        if let Some(c) = cur {
            if c.len >= min_len {
                out.push(c);
            }
        }
        out
    }
}

/// `Ω_eff(ω1)` along a kick-strength sweep, points in parallel.
pub fn frequency_shift_curve(
    p_base: &ModelParams,
    omega1_range: (f64, f64),
    n_points: usize,
    opts: &FrequencyOptions,
) -> Result<ShiftCurve> {
    if n_points < 2 {
        return Err(Error::param("n_points", "need at least 2 points"));
    }
    let ws = linspace(omega1_range.0, omega1_range.1, n_points);
    let points: Vec<ShiftPoint> = par::map(&ws, |&w| {
        let fp = frequency_point(&p_base.with_omega1(w), opts)?;
        Ok(ShiftPoint {
            omega1: w,
            omega_eff: fp.omega_eff,
            eta: fp.eta,
            chaotic: fp.chaotic,
            lock: fp.lock,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.chaotic && !p.lock.locked)
        .filter_map(|p| p.omega_eff.map(|w| (p.omega1, w)))
        .unzip();
    Ok(ShiftCurve {
        omega_z: p_base.omega_z,
        fit: linear_fit(&xs, &ys),
        excluded: points.iter().filter(|p| p.chaotic).map(|p| p.omega1).collect(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TongueCell {
    pub omega_z: f64,
    pub omega1: f64,
    pub eta: f64,
    pub chaotic: bool,
    pub omega_eff: Option<f64>,
    pub lock: LockClassification,
}

/// Locking state on an `(ω1, ωz)` grid, row-major in `ωz` (outer) and `ω1`
/// (inner).
pub fn arnold_tongue_map(
    p_base: &ModelParams,
    omega1_range: (f64, f64),
    omega_z_range: (f64, f64),
    grid: (usize, usize),
    opts: &FrequencyOptions,
) -> Result<Vec<TongueCell>> {
    if grid.0 < 2 || grid.1 < 2 {
        return Err(Error::param("grid", "dimensions must be at least 2"));
    }
    let ws = linspace(omega1_range.0, omega1_range.1, grid.0);
    let zs = linspace(omega_z_range.0, omega_z_range.1, grid.1);
    let cells: Vec<(f64, f64)> = zs.iter().flat_map(|&z| ws.iter().map(move |&w| (z, w))).collect();
    par::map(&cells, |&(z, w)| {
        let fp = frequency_point(&p_base.with_omega_z(z).with_omega1(w), opts)?;
        Ok(TongueCell {
            omega_z: z,
            omega1: w,
            eta: fp.eta,
            chaotic: fp.chaotic,
            omega_eff: fp.omega_eff,
            lock: fp.lock,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TongueRegion {
    pub p: u32,
    pub q: u32,
    /// `(ω1 index, ωz index)` of member cells.
    pub cells: Vec<(usize, usize)>,
}

impl TongueRegion {
    /// Number of member cells in each `ωz` row, indexed by row.
    pub fn widths(&self, n_omega_z: usize) -> Vec<usize> {
        let mut w = vec![0; n_omega_z];
        for &(_, j) in &self.cells {
            w[j] += 1;
        }
        w
    }
}

/// Connected (4-neighbour) components of cells locked to the same ratio.
pub fn tongue_regions(cells: &[TongueCell], n_omega1: usize, n_omega_z: usize) -> Result<Vec<TongueRegion>> {
    if cells.len() != n_omega1 * n_omega_z {
        return Err(Error::GridMismatch(format!(
            "{} cells for a {}x{} grid",
            cells.len(),
            n_omega1,
            n_omega_z
        )));
    }
    let at = |i: usize, j: usize| cells[j * n_omega1 + i].lock.ratio();
    let mut seen = vec![false; cells.len()];
    let mut out = Vec::new();
    for j0 in 0..n_omega_z {
        for i0 in 0..n_omega1 {
            let Some(r) = at(i0, j0) else { continue };
            if seen[j0 * n_omega1 + i0] {
                continue;
            }
            let mut stack = vec![(i0, j0)];
            seen[j0 * n_omega1 + i0] = true;
            let mut members = Vec::new();
            while let Some((i, j)) = stack.pop() {
                members.push((i, j));
                let mut nb = Vec::with_capacity(4);
                if i > 0 {
                    nb.push((i - 1, j));
                }
                if i + 1 < n_omega1 {
                    nb.push((i + 1, j));
                }
                if j > 0 {
                    nb.push((i, j - 1));
                }
                if j + 1 < n_omega_z {
                    nb.push((i, j + 1));
                }
                for (a, b) in nb {
                    if !seen[b * n_omega1 + a] && at(a, b) == Some(r) {
                        seen[b * n_omega1 + a] = true;
                        stack.push((a, b));
                    }
                }
            }
            members.sort_unstable();
            out.push(TongueRegion {
                p: r.0,
                q: r.1,
                cells: members,
            });
        }
    }
    Ok(out)
}
