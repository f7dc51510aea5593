//! Model parameters, mean-field equations of motion and the kick.
//!
//! Between kicks the normalised magnetisation `m = <S>/S` follows
//!
//! ```text
//! dmx/dt =  κ mx mz − 2 ωz my mz
//! dmy/dt = −ω0 mz + κ my mz + 2 ωz mx mz
//! dmz/dt =  ω0 my − κ (mx² + my²)
//! ```
//!
//! and at every integer time it is rotated rigidly by `ω1` about the x axis.
//! One stroboscopic step is "flow for one period, then kick"; samples are
//! taken right after the kick.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default fixed RK4 step between kicks.
pub const DEFAULT_DT: f64 = 1e-3;

/// Drive period. Fixed throughout.
pub const PERIOD: f64 = 1.0;

/// Relative norm drift tolerated over one period before renormalisation.
pub const NORM_DRIFT_BUDGET: f64 = 1e-8;

/// Collective spin length `S`, stored as the integer `2S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    twice: u32,
}

impl Spin {
    /// Accepts any positive half-integer.
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::NonFinite("spin"));
        }
        let twice = 2.0 * s;
        if twice < 1.0 || (twice - twice.round()).abs() > 1e-12 || twice > u32::MAX as f64 {
            return Err(Error::param("spin", format!("{s} is not a positive half-integer")));
        }
        Ok(Spin {
            twice: twice.round() as u32,
        })
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::param("spin", "S must be at least 1/2"));
        }
        Ok(Spin { twice })
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    /// Hilbert-space dimension `2S + 1`.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Spin::new(s)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

/// Physical couplings of the kicked dissipative collective spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Static transverse field, in units of κ.
    pub omega0: f64,
    /// Kick rotation angle.
    pub omega1: f64,
    /// Nonlinear `(Sz)²` coupling.
    pub omega_z: f64,
    /// Collective decay rate.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    /// Only needed by the finite-S modules.
    #[serde(default)]
    pub spin: Option<Spin>,
}

fn default_kappa() -> f64 {
    1.0
}

fn default_period() -> f64 {
    PERIOD
}

impl Default for ModelParams {
    /// `ω0 = 1.5`, `κ = 1`, no kick and no nonlinearity.
    fn default() -> Self {
        ModelParams {
            omega0: 1.5,
            omega1: 0.0,
            omega_z: 0.0,
            kappa: 1.0,
            period: PERIOD,
            spin: None,
        }
    }
}

impl ModelParams {
    pub fn new(omega0: f64, omega1: f64, omega_z: f64) -> Self {
        ModelParams {
            omega0,
            omega1,
            omega_z,
            ..Default::default()
        }
    }

    pub fn with_omega1(mut self, omega1: f64) -> Self {
        self.omega1 = omega1;
        self
    }

    pub fn with_omega_z(mut self, omega_z: f64) -> Self {
        self.omega_z = omega_z;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_spin(mut self, spin: Spin) -> Self {
        self.spin = Some(spin);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega0", self.omega0),
            ("omega1", self.omega1),
            ("omega_z", self.omega_z),
            ("kappa", self.kappa),
            ("period", self.period),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.kappa <= 0.0 {
            return Err(Error::param("kappa", "must be positive"));
        }
        if self.period != PERIOD {
            return Err(Error::param("period", "the drive period is fixed to 1"));
        }
        Ok(())
    }
}

/// Normalised mean-field magnetisation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    /// Fully polarised spin-up state `(0, 0, 1)`.
    pub const fn up() -> Self {
        BlochVector::new(0.0, 0.0, 1.0)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        BlochVector::new(a[0], a[1], a[2])
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(self, o: Self) -> f64 {
        (self.x - o.x).abs().max((self.y - o.y).abs()).max((self.z - o.z).abs())
    }
}

impl Add for BlochVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for BlochVector {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// Canonical sphere coordinates: `mz = Q`, `mx + i my = sqrt(1 - Q²) e^{2iP}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCoords {
    pub q: f64,
    pub p: f64,
}

pub fn bloch_to_canonical(m: BlochVector) -> Result<CanonicalCoords> {
    if !m.is_finite() {
        return Err(Error::NonFinite("bloch_to_canonical"));
    }
    if (m.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::param("m", format!("|m| = {} is not on the unit sphere", m.norm())));
    }
    if m.x == 0.0 && m.y == 0.0 {
        return Err(Error::Singular("P is undefined at the poles Q = ±1"));
    }
    Ok(CanonicalCoords {
        q: m.z,
        p: 0.5 * m.y.atan2(m.x),
    })
}

pub fn canonical_to_bloch(c: CanonicalCoords) -> BlochVector {
    let r = (1.0 - c.q * c.q).max(0.0).sqrt();
    let (s, co) = (2.0 * c.p).sin_cos();
    BlochVector::new(r * co, r * s, c.q)
}

#[inline(always)]
fn rhs(m: BlochVector, omega0: f64, two_wz: f64, kappa: f64) -> BlochVector {
    BlochVector::new(
        kappa * m.x * m.z - two_wz * m.y * m.z,
        -omega0 * m.z + kappa * m.y * m.z + two_wz * m.x * m.z,
        omega0 * m.y - kappa * (m.x * m.x + m.y * m.y),
    )
}

/// Time derivative of `m` under the static (between-kick) dynamics.
pub fn meanfield_rhs(m: BlochVector, p: &ModelParams) -> BlochVector {
    rhs(m, p.omega0, 2.0 * p.omega_z, p.kappa)
}

/// Instantaneous kick: rotation by `omega1` about the x axis.
pub fn kick_map(m: BlochVector, omega1: f64) -> BlochVector {
    let (s, c) = omega1.sin_cos();
    BlochVector::new(m.x, m.y * c - m.z * s, m.y * s + m.z * c)
}

/// Fixed-step RK4 propagator for the between-kick flow.
#[derive(Debug, Clone, Copy)]
pub struct Flow {
    omega0: f64,
    two_wz: f64,
    kappa: f64,
}

impl Flow {
    pub fn new(p: &ModelParams) -> Self {
        Flow {
            omega0: p.omega0,
            two_wz: 2.0 * p.omega_z,
            kappa: p.kappa,
        }
    }

    #[inline(always)]
    pub fn rhs(&self, m: BlochVector) -> BlochVector {
        rhs(m, self.omega0, self.two_wz, self.kappa)
    }

    #[inline]
    pub fn step(&self, m: BlochVector, h: f64) -> BlochVector {
        let k1 = self.rhs(m);
        let k2 = self.rhs(m + k1 * (0.5 * h));
        let k3 = self.rhs(m + k2 * (0.5 * h));
        let k4 = self.rhs(m + k3 * h);
        m + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
    }

    pub fn advance(&self, mut m: BlochVector, h: f64, steps: usize) -> BlochVector {
        for _ in 0..steps {
            m = self.step(m, h);
        }
        m
    }
}

/// Number of RK4 steps for `duration` at nominal step `dt` (rounded, at least 1).
pub fn step_count(duration: f64, dt: f64) -> usize {
    ((duration / dt).round() as usize).max(1)
}

fn check_step(dt: f64, duration: f64) -> Result<()> {
    if !dt.is_finite() || !duration.is_finite() {
        return Err(Error::NonFinite("integrator step/duration"));
    }
    if dt <= 0.0 {
        return Err(Error::param("dt", "must be positive"));
    }
    if duration < 0.0 {
        return Err(Error::param("duration", "must be non-negative"));
    }
    Ok(())
}

/// Continuous evolution without kicks. The step is adjusted so that an
/// integer number of steps covers `duration`.
pub fn integrate_flow(m0: BlochVector, p: &ModelParams, duration: f64, dt: f64) -> Result<BlochVector> {
    check_step(dt, duration)?;
    p.validate()?;
    if !m0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    if duration == 0.0 {
        return Ok(m0);
    }
    let n = step_count(duration, dt);
    Ok(Flow::new(p).advance(m0, duration / n as f64, n))
}

/// Continuous evolution including kicks at integer times, recorded every
/// `sample_every` steps. Returns `(t, m)` pairs starting at `t = 0`.
pub fn kicked_time_series(
    m0: BlochVector,
    p: &ModelParams,
    periods: usize,
    dt: f64,
    sample_every: usize,
) -> Result<Vec<(f64, BlochVector)>> {
    check_step(dt, 1.0)?;
    p.validate()?;
    let flow = Flow::new(p);
    let n = step_count(p.period, dt);
    let h = p.period / n as f64;
    let every = sample_every.max(1);
    let mut out = vec![(0.0, m0)];
    let mut m = m0;
    for k in 0..periods {
        for s in 1..=n {
            m = flow.step(m, h);
            if s == n {
                m = kick_map(m, p.omega1);
                m = m.normalized();
            }
            if s % every == 0 {
                out.push((k as f64 + s as f64 * h, m));
            }
        }
    }
    Ok(out)
}

/// One full Floquet cycle: flow for one period, then kick.
///
/// The result is renormalised onto the sphere of the input's radius; the
/// drift accumulated before renormalisation must stay below
/// [`NORM_DRIFT_BUDGET`].
#[derive(Debug, Clone, Copy)]
pub struct StroboscopicMap {
    flow: Flow,
    h: f64,
    steps: usize,
    omega1: f64,
}

impl StroboscopicMap {
    pub fn new(p: &ModelParams, dt: f64) -> Result<Self> {
        check_step(dt, 1.0)?;
        p.validate()?;
        let steps = step_count(p.period, dt);
        Ok(StroboscopicMap {
            flow: Flow::new(p),
            h: p.period / steps as f64,
            steps,
            omega1: p.omega1,
        })
    }

    /// Fast path used in long scans; renormalises to unit length.
    #[inline]
    pub fn apply(&self, m: BlochVector) -> BlochVector {
        kick_map(self.flow.advance(m, self.h, self.steps), self.omega1).normalized()
    }

    /// Like [`apply`](Self::apply) but keeps the input radius and enforces
    /// the drift budget.
    pub fn apply_checked(&self, m: BlochVector) -> Result<BlochVector> {
        if !m.is_finite() {
            return Err(Error::NonFinite("stroboscopic_map input"));
        }
        let r0 = m.norm();
        let out = kick_map(self.flow.advance(m, self.h, self.steps), self.omega1);
        let r1 = out.norm();
        let drift = ((r1 - r0) / r0).abs();
        if !(drift <= NORM_DRIFT_BUDGET) {
            return Err(Error::NormDrift {
                drift,
                budget: NORM_DRIFT_BUDGET,
            });
        }
        Ok(out * (r0 / r1))
    }

    /// Post-kick samples after `n` applications (the initial state excluded).
    pub fn orbit(&self, mut m: BlochVector, n: usize) -> Vec<BlochVector> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            m = self.apply(m);
            out.push(m);
        }
        out
    }

    pub fn iterate(&self, mut m: BlochVector, n: usize) -> BlochVector {
        for _ in 0..n {
            m = self.apply(m);
        }
        m
    }
}

pub fn stroboscopic_map(m: BlochVector, p: &ModelParams, dt: f64) -> Result<BlochVector> {
    StroboscopicMap::new(p, dt)?.apply_checked(m)
}

fn require_limit_cycle(p: &ModelParams) -> Result<(f64, f64)> {
    p.validate()?;
    let a = p.omega0 / p.kappa;
    if a <= 1.0 {
        return Err(Error::param("omega0", "the limit cycle needs omega0 > kappa"));
    }
    Ok((a, (a * a - 1.0).sqrt()))
}

/// Intrinsic limit-cycle frequency `sqrt(ω0² − κ²)`.
pub fn intrinsic_frequency(p: &ModelParams) -> Result<f64> {
    require_limit_cycle(p)?;
    Ok((p.omega0 * p.omega0 - p.kappa * p.kappa).sqrt())
}

/// Ratio between consecutive harmonic amplitudes of `my(t)` on the cycle.
pub fn harmonic_ratio(p: &ModelParams) -> Result<f64> {
    let (a, b) = require_limit_cycle(p)?;
    Ok(a - b)
}

/// Point on the unkicked limit cycle at phase `theta`, reached from
/// `(0, 0, 1)` at `theta = −φ0`.
pub fn btc_cycle_point(theta: f64, p: &ModelParams) -> Result<BlochVector> {
    let (a, b) = require_limit_cycle(p)?;
    let (s, c) = theta.sin_cos();
    let den = c - a;
    Ok(BlochVector::new(0.0, a + (a * a - 1.0) / den, b * s / den))
}

/// Initial phase `φ0` with `cos φ0 = κ/ω0` and `sin φ0 = sqrt(1 − κ²/ω0²)`.
pub fn btc_initial_phase(p: &ModelParams) -> Result<f64> {
    let (a, _) = require_limit_cycle(p)?;
    Ok((1.0 / a).acos())
}

/// Closed-form no-kick trajectory from `(0, 0, 1)` for `ω0 > κ`, `ωz = 0`.
pub fn analytic_btc_solution(t: f64, p: &ModelParams) -> Result<BlochVector> {
    if !t.is_finite() {
        return Err(Error::NonFinite("t"));
    }
    if p.omega_z != 0.0 {
        return Err(Error::param("omega_z", "closed form requires omega_z = 0"));
    }
    let omega = intrinsic_frequency(p)?;
    let phi0 = btc_initial_phase(p)?;
    btc_cycle_point(omega * t - phi0, p)
}

/// `M = mx / (my − ω0/κ)`, conserved by the `ωz = 0` flow.
pub fn conserved_m(m: BlochVector, p: &ModelParams) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::NonFinite("conserved_m"));
    }
    if p.omega_z != 0.0 {
        return Err(Error::param("omega_z", "M is only conserved for omega_z = 0"));
    }
    let den = m.y - p.omega0 / p.kappa;
    if den.abs() < 1e-14 {
        return Err(Error::Singular("my = omega0/kappa"));
    }
    Ok(m.x / den)
}

fn r_parts(m: BlochVector, p: &ModelParams) -> (f64, f64) {
    let num = p.kappa * m.x - 2.0 * p.omega_z * m.y;
    let den = p.kappa * m.y + 2.0 * p.omega_z * m.x - p.omega0;
    (num, den)
}

/// Invariant `R_ωz` of the unkicked flow on branch `branch_n`.
pub fn conserved_r(m: BlochVector, p: &ModelParams, branch_n: i64) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::NonFinite("conserved_r"));
    }
    let (num, den) = r_parts(m, p);
    let arg = num * num + den * den;
    if arg <= 1e-300 {
        return Err(Error::Singular("log argument of R vanishes"));
    }
    Ok(2.0 * p.omega_z * arg.ln() + 2.0 * p.kappa * (num / den).atan() + 2.0 * p.kappa * PI * branch_n as f64)
}

/// Follows `R_ωz` along a sampled trajectory, stepping the branch index
/// whenever the arctan argument crosses its cut (denominator sign change
/// accompanied by a jump of the principal value).
#[derive(Debug, Clone)]
pub struct RBranchTracker {
    p: ModelParams,
    branch: i64,
    last_den: Option<f64>,
    last_atan: f64,
}

impl RBranchTracker {
    pub fn new(p: &ModelParams) -> Self {
        RBranchTracker {
            p: *p,
            branch: 0,
            last_den: None,
            last_atan: 0.0,
        }
    }

    pub fn branch(&self) -> i64 {
        self.branch
    }

    pub fn observe(&mut self, m: BlochVector) -> Result<f64> {
        let (num, den) = r_parts(m, &self.p);
        let at = (num / den).atan();
        if let Some(prev) = self.last_den {
            if prev.signum() != den.signum() {
                let jump = at - self.last_atan;
                if jump > PI / 2.0 {
                    self.branch -= 1;
                } else if jump < -PI / 2.0 {
                    self.branch += 1;
                }
            }
        }
        self.last_den = Some(den);
        self.last_atan = at;
        conserved_r(m, &self.p, self.branch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(omega0: f64, omega1: f64, omega_z: f64) -> ModelParams {
        ModelParams::new(omega0, omega1, omega_z)
    }

    #[test]
    fn rhs_vanishes_at_stationary_fixed_point() {
        let q = p(0.5, 0.0, 0.0);
        let m = BlochVector::new(0.0, 0.5, -(0.75f64).sqrt());
        let d = meanfield_rhs(m, &q);
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn rhs_direct_substitution() {
        let d = meanfield_rhs(BlochVector::up(), &p(1.5, 0.0, 0.0));
        assert_eq!(d, BlochVector::new(0.0, -1.5, 0.0));
    }

    #[test]
    fn rhs_is_tangent_to_sphere() {
        let q = p(1.5, 0.0, 2.0);
        for m in [
            BlochVector::new(0.437, 0.641, -0.631),
            BlochVector::new(0.3, -0.2, 0.9),
            BlochVector::new(-0.6, 0.0, 0.8),
        ] {
            assert_abs_diff_eq!(m.dot(meanfield_rhs(m, &q)), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn kick_examples() {
        let m = BlochVector::new(0.3, -0.4, 0.5);
        assert_eq!(kick_map(m, 0.0), m);
        let r = kick_map(BlochVector::up(), PI / 2.0);
        assert!(r.max_abs_diff(BlochVector::new(0.0, -1.0, 0.0)) < 1e-15);
        assert!(kick_map(m, 2.0 * PI).max_abs_diff(m) < 1e-15);
        assert_abs_diff_eq!(kick_map(m, 0.7).norm(), m.norm(), epsilon = 1e-15);
    }

    #[test]
    fn zero_duration_is_identity() {
        let m = BlochVector::new(0.6, 0.0, 0.8);
        assert_eq!(integrate_flow(m, &p(1.5, 0.0, 0.0), 0.0, 1e-3).unwrap(), m);
    }

    #[test]
    fn bad_steps_rejected() {
        let q = p(1.5, 0.0, 0.0);
        let m = BlochVector::up();
        assert!(integrate_flow(m, &q, 1.0, 0.0).is_err());
        assert!(integrate_flow(m, &q, 1.0, -1e-3).is_err());
        assert!(integrate_flow(m, &q, f64::NAN, 1e-3).is_err());
        assert!(integrate_flow(BlochVector::new(f64::INFINITY, 0.0, 0.0), &q, 1.0, 1e-3).is_err());
        assert!(integrate_flow(m, &q.with_kappa(0.0), 1.0, 1e-3).is_err());
    }

    #[test]
    fn flow_matches_closed_form() {
        let q = p(1.5, 0.0, 0.0);
        let m = integrate_flow(BlochVector::up(), &q, 5.0, 1e-4).unwrap();
        let exact = analytic_btc_solution(5.0, &q).unwrap();
        assert!(m.max_abs_diff(exact) < 1e-6);
    }

    #[test]
    fn stationary_phase_attracts() {
        let q = p(0.5, 0.0, 0.0);
        let target = BlochVector::new(0.0, 0.5, -(0.75f64).sqrt());
        for m0 in [
            BlochVector::up(),
            BlochVector::new(1.0, 0.0, 0.0),
            BlochVector::new(0.0, -0.6, 0.8),
            BlochVector::new(-0.48, 0.6, 0.64),
        ] {
            let m = integrate_flow(m0, &q, 50.0, 1e-3).unwrap();
            assert!(m.max_abs_diff(target) < 1e-6, "{m0:?} -> {m:?}");
        }
    }

    #[test]
    fn stroboscopic_fixed_point_of_unkicked_stationary_phase() {
        let q = p(0.5, 0.0, 0.0);
        let m = BlochVector::new(0.0, 0.5, -(0.75f64).sqrt());
        assert!(stroboscopic_map(m, &q, 1e-3).unwrap().max_abs_diff(m) < 1e-12);
    }

    #[test]
    fn stroboscopic_samples_equal_kicked_series() {
        let q = p(1.5, 1.0, 0.5);
        let map = StroboscopicMap::new(&q, 1e-3).unwrap();
        let orbit = map.orbit(BlochVector::up(), 5);
        let series = kicked_time_series(BlochVector::up(), &q, 5, 1e-3, 1000).unwrap();
        for (k, m) in orbit.iter().enumerate() {
            let (t, s) = series[k + 1];
            assert_abs_diff_eq!(t, (k + 1) as f64, epsilon = 1e-12);
            assert!(m.max_abs_diff(s) < 1e-14);
        }
    }

    #[test]
    fn closed_form_starts_at_north_pole() {
        let q = p(1.5, 0.0, 0.0);
        let m = analytic_btc_solution(0.0, &q).unwrap();
        assert!(m.max_abs_diff(BlochVector::up()) < 1e-14);
        assert_abs_diff_eq!(intrinsic_frequency(&q).unwrap(), 1.25f64.sqrt(), epsilon = 1e-15);
        assert!((intrinsic_frequency(&q).unwrap() - 1.1180).abs() < 1e-4);
        assert!((harmonic_ratio(&q).unwrap() - 0.382).abs() < 1e-3);
        assert!(analytic_btc_solution(1.0, &p(1.0, 0.0, 0.0)).is_err());
        assert!(analytic_btc_solution(1.0, &p(0.5, 0.0, 0.0)).is_err());
    }

    #[test]
    fn conserved_m_examples() {
        let q = p(1.5, 0.0, 0.0);
        assert_eq!(conserved_m(BlochVector::up(), &q).unwrap(), 0.0);
        assert!(matches!(
            conserved_m(BlochVector::new(0.0, 1.5, 0.0), &q),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn r_reduces_to_arctan_m() {
        let q = p(1.5, 0.0, 0.0);
        let m = BlochVector::new(0.3, 0.1, (0.9f64).sqrt());
        let r = conserved_r(m, &q, 0).unwrap();
        assert_abs_diff_eq!(r, 2.0 * conserved_m(m, &q).unwrap().atan(), epsilon = 1e-14);
    }

    #[test]
    fn r_log_singularity() {
        // kappa*mx = 2 wz my and kappa*my + 2 wz mx = omega0
        let q = p(1.5, 0.0, 2.0);
        let my = 1.5 / 17.0;
        let m = BlochVector::new(4.0 * my, my, 0.0);
        assert!(matches!(conserved_r(m, &q, 0), Err(Error::Singular(_))));
    }

    #[test]
    fn canonical_examples() {
        let c = bloch_to_canonical(BlochVector::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!((c.q, c.p), (0.0, 0.0));
        let c = bloch_to_canonical(BlochVector::new(0.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(c.q, 0.0);
        assert_abs_diff_eq!(c.p, PI / 4.0, epsilon = 1e-15);
        assert!(bloch_to_canonical(BlochVector::up()).is_err());
        assert!(bloch_to_canonical(BlochVector::new(0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn spin_validation() {
        assert_eq!(Spin::new(0.5).unwrap().dim(), 2);
        assert_eq!(Spin::new(10.0).unwrap().dim(), 21);
        assert!(Spin::new(0.3).is_err());
        assert!(Spin::new(0.0).is_err());
        assert!(Spin::new(-1.0).is_err());
    }
}
