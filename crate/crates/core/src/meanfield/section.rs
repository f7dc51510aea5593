//! Poincaré sections of the stroboscopic map and cluster counting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bloch_to_canonical, BlochVector, ModelParams, StroboscopicMap};
use crate::par;
use crate::rng;

/// Samples closer than this to a pole have an ill-defined `P`.
pub const POLE_MARGIN: f64 = 1e-9;

/// Default cluster radius used when counting distinct section points.
pub const CLUSTER_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub q: f64,
    /// `NaN` when `near_pole` is set.
    pub p: f64,
    pub near_pole: bool,
    pub m: BlochVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSet {
    pub initial: BlochVector,
    pub points: Vec<SectionPoint>,
}

impl SectionSet {
    pub fn pole_count(&self) -> usize {
        self.points.iter().filter(|p| p.near_pole).count()
    }

    pub fn bloch(&self) -> Vec<BlochVector> {
        self.points.iter().map(|p| p.m).collect()
    }
}

fn to_point(m: BlochVector) -> SectionPoint {
    if m.z.abs() > 1.0 - POLE_MARGIN {
        return SectionPoint { q: m.z, p: f64::NAN, near_pole: true, m };
    }
    match bloch_to_canonical(m) {
        Ok(c) => SectionPoint { q: c.q, p: c.p, near_pole: false, m },
        Err(_) => SectionPoint { q: m.z, p: f64::NAN, near_pole: true, m },
    }
}

/// Post-kick stroboscopic samples after `transient` periods, one set per
/// initial state. Sets are computed in parallel.
pub fn poincare_section(
    p: &ModelParams,
    initial_states: &[BlochVector],
    periods: usize,
    transient: usize,
    dt: f64,
) -> Result<Vec<SectionSet>> {
    if periods <= transient {
        return Err(Error::param("periods", "must exceed transient"));
    }
    let map = StroboscopicMap::new(p, dt)?;
    Ok(par::map(initial_states, |&m0| {
        let m = map.iterate(m0.normalized(), transient);
        SectionSet {
            initial: m0,
            points: map.orbit(m, periods - transient).into_iter().map(to_point).collect(),
        }
    }))
}

/// `n` seeded uniform initial states on the sphere.
pub fn random_initial_states(n: usize, seed: u64) -> Vec<BlochVector> {
    let mut r = rng::stream(seed, 0);
    (0..n).map(|_| rng::uniform_sphere(&mut r)).collect()
}

/// Greedy clustering: each point joins the first centre within `radius`.
pub fn cluster_centers(points: &[BlochVector], radius: f64) -> Vec<BlochVector> {
    let mut centers: Vec<BlochVector> = Vec::new();
    for &m in points {
        if !centers.iter().any(|c| (*c - m).norm() <= radius) {
            centers.push(m);
        }
    }
    centers
}

/// Smallest `k` with `x[i + k] ≈ x[i]` for all sampled `i`, if any `k ≤ max_k`.
pub fn detect_period(points: &[BlochVector], radius: f64, max_k: usize) -> Option<usize> {
    (1..=max_k.min(points.len().saturating_sub(1)))
        .find(|&k| (0..points.len() - k).all(|i| (points[i + k] - points[i]).norm() <= radius))
}
