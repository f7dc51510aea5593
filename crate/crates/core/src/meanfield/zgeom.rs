//! Phase response of the unkicked limit cycle to an infinitesimal kick.
//!
//! A kick `ω1` displaces the state by `ω1 (−mz, my)` in the `(my, mz)`
//! plane. Its projection on the cycle tangent `T(θ)` advances the phase by
//! `ω1 Z(θ)`, with `Z(θ) = Ω T·(−mz, my) / |T|²`. The invariant average of
//! `Z` weights each phase by the residence time `1/θ̇`, and sets the slope of
//! the stroboscopic frequency for weak kicks: `Ω_eff ≈ Ω + ω1 <Z>`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::model::{btc_cycle_point, intrinsic_frequency, meanfield_rhs, ModelParams};

/// Default number of quadrature nodes on the cycle.
pub const DEFAULT_NODES: usize = 10_000;

fn require_unkicked_cycle(p: &ModelParams) -> Result<f64> {
    if p.omega_z != 0.0 {
        return Err(Error::param("omega_z", "phase response is defined on the omega_z = 0 cycle"));
    }
    intrinsic_frequency(p)
}

/// Geometric phase-response function at cycle phase `theta`.
pub fn z_geom(theta: f64, p: &ModelParams) -> Result<f64> {
    let omega = require_unkicked_cycle(p)?;
    let m = btc_cycle_point(theta, p)?;
    let t = meanfield_rhs(m, p);
    let (ty, tz) = (t.y, t.z);
    Ok(omega * (ty * -m.z + tz * m.y) / (ty * ty + tz * tz))
}

/// Phase velocity `θ̇ = |dm/dt| / |dm/dθ|` along the closed-form cycle.
pub fn theta_dot(theta: f64, p: &ModelParams) -> Result<f64> {
    let m = btc_cycle_point(theta, p)?;
    let a = p.omega0 / p.kappa;
    let b = (a * a - 1.0).sqrt();
    let (s, c) = theta.sin_cos();
    let den2 = (c - a) * (c - a);
    let dy = (a * a - 1.0) * s / den2;
    let dz = b * (1.0 - a * c) / den2;
    let speed = meanfield_rhs(m, p).norm();
    Ok(speed / (dy * dy + dz * dz).sqrt())
}

/// Residence-time weighted average of [`z_geom`] over `nodes` uniformly
/// spaced phases (periodic trapezoid rule).
pub fn z_geom_invariant_average_with(p: &ModelParams, nodes: usize) -> Result<f64> {
    require_unkicked_cycle(p)?;
    if nodes < 8 {
        return Err(Error::param("nodes", "need at least 8 quadrature nodes"));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..nodes {
        let th = TAU * i as f64 / nodes as f64;
        let w = 1.0 / theta_dot(th, p)?;
        num += z_geom(th, p)? * w;
        den += w;
    }
    Ok(num / den)
}

pub fn z_geom_invariant_average(p: &ModelParams) -> Result<f64> {
    z_geom_invariant_average_with(p, DEFAULT_NODES)
}

/// Weak-kick prediction `Ω + ω1 <Z>` for the stroboscopic frequency.
pub fn predicted_omega_eff(p: &ModelParams) -> Result<f64> {
    let base = p.with_omega1(0.0);
    Ok(intrinsic_frequency(&base)? + p.omega1 * z_geom_invariant_average(&base)?)
}
