//! One-period Floquet map `U(ρ) = K e^{L₀}(ρ) K†`, `K = exp(−iω₁Sˣ)`, and its
//! adjoint `U†(A) = e^{L₀†}(K†AK)`.

use ndarray::Array2;
use ndarray_linalg::{EigValsh, UPLO};
use num_complex::Complex64;

use super::lindblad::{rotation_x, steps_per_period, Direction, Generator, Rk4};
use super::ops::{dagger, hermiticity_defect, trace, CMatrix, SpinOperators, ZERO};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Trace drift allowed over one period before renormalisation.
pub const TRACE_DRIFT_BUDGET: f64 = 1e-8;
/// Negative eigenvalues below this abort propagation.
pub const POSITIVITY_ABORT: f64 = -1e-6;

#[derive(Debug, Clone)]
pub struct FloquetPropagator {
    d: usize,
    dt: f64,
    steps: usize,
    forward: Rk4,
    adjoint: Rk4,
    kick: CMatrix,
    kick_dag: CMatrix,
}

fn to_matrix(d: usize, v: Vec<Complex64>) -> CMatrix {
    Array2::from_shape_vec((d, d), v).expect("square buffer")
}

fn to_vec(a: &CMatrix) -> Vec<Complex64> {
    a.as_standard_layout().iter().copied().collect()
}

impl FloquetPropagator {
    pub fn new(ops: &SpinOperators, p: &ModelParams, dt: f64) -> Result<Self> {
        let steps = steps_per_period(p, dt)?;
        let gen = Generator::new(ops, p)?;
        let kick = rotation_x(ops, p.omega1)?;
        Ok(FloquetPropagator {
            d: ops.dim(),
            dt,
            steps,
            forward: Rk4::new(gen.clone(), Direction::Forward),
            adjoint: Rk4::new(gen, Direction::Adjoint),
            kick_dag: dagger(&kick),
            kick,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn conjugate(&self, x: &[Complex64], u: &CMatrix, u_dag: &CMatrix) -> Vec<Complex64> {
        let m = Array2::from_shape_vec((self.d, self.d), x.to_vec()).expect("square buffer");
        let r = u.dot(&m).dot(u_dag);
        to_vec(&r)
    }

    /// Linear one-period map on a row-major buffer (no renormalisation).
    pub fn apply_linear(&mut self, x: &mut Vec<Complex64>) {
        self.forward.advance(x, self.dt, self.steps);
        *x = self.conjugate(x, &self.kick, &self.kick_dag);
    }

    /// Adjoint one-period map on a row-major buffer.
    pub fn apply_adjoint_linear(&mut self, x: &mut Vec<Complex64>) {
        *x = self.conjugate(x, &self.kick_dag, &self.kick);
        self.adjoint.advance(x, self.dt, self.steps);
    }

    /// Continuous evolution for `steps` RK4 steps without a kick.
    pub fn evolve_steps(&mut self, x: &mut [Complex64], steps: usize) {
        self.forward.advance(x, self.dt, steps);
    }

    pub fn kick_in_place(&self, x: &mut Vec<Complex64>) {
        *x = self.conjugate(x, &self.kick, &self.kick_dag);
    }

    pub fn steps_per_period(&self) -> usize {
        self.steps
    }

    /// One period on a density operator; the trace is restored afterwards,
    /// with the drift checked against the budget.
    pub fn map(&mut self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.dim() != (self.d, self.d) {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: rho.nrows(),
            });
        }
        let before = trace(rho);
        let mut x = to_vec(rho);
        self.apply_linear(&mut x);
        let mut out = to_matrix(self.d, x);
        let after = trace(&out);
        let drift = (after - before).norm();
        if !drift.is_finite() {
            return Err(Error::NonFinite("density operator"));
        }
        if drift > TRACE_DRIFT_BUDGET * before.norm().max(1.0) {
            return Err(Error::TraceDrift {
                drift,
                budget: TRACE_DRIFT_BUDGET,
            });
        }
        if after.norm() > 0.0 {
            out.mapv_inplace(|z| z * (before / after));
        }
        Ok(out)
    }

    pub fn adjoint_map(&mut self, a: &CMatrix) -> Result<CMatrix> {
        if a.dim() != (self.d, self.d) {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: a.nrows(),
            });
        }
        let mut x = to_vec(a);
        self.apply_adjoint_linear(&mut x);
        Ok(to_matrix(self.d, x))
    }
}

/// One application of the Floquet map.
pub fn floquet_map(rho: &CMatrix, ops: &SpinOperators, p: &ModelParams, dt: f64) -> Result<CMatrix> {
    FloquetPropagator::new(ops, p, dt)?.map(rho)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(rho: &CMatrix) -> Result<f64> {
    let h = (rho + &dagger(rho)).mapv(|z| z * 0.5);
    let vals = h.eigvalsh(UPLO::Upper)?;
    Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Health of a density operator after propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateCheck {
    pub trace_error: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

pub fn check_state(rho: &CMatrix) -> Result<StateCheck> {
    Ok(StateCheck {
        trace_error: (trace(rho) - 1.0).norm(),
        hermiticity: hermiticity_defect(rho),
        min_eigenvalue: min_eigenvalue(rho)?,
    })
}

/// Normalised collective magnetisation `⟨S⟩/S`.
pub fn magnetization(rho: &CMatrix, ops: &SpinOperators) -> [f64; 3] {
    use super::ops::trace_product;
    let s = ops.s();
    [
        trace_product(&ops.sx, rho).re / s,
        trace_product(&ops.sy, rho).re / s,
        trace_product(&ops.sz, rho).re / s,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSeries {
    /// Sample times.
    pub t: Vec<f64>,
    /// `⟨S⟩/S` at each sample.
    pub m: Vec<[f64; 3]>,
    pub final_state: CMatrix,
    /// Most negative eigenvalue seen at the spot checks.
    pub worst_min_eigenvalue: f64,
}

/// Propagates `rho0` for `periods` periods, recording `⟨S⟩/S` at the start
/// and `samples_per_period` times per period (the last one post-kick).
/// Positivity is spot-checked every `check_every` periods (0 disables).
pub fn evolve(
    rho0: &CMatrix,
    ops: &SpinOperators,
    p: &ModelParams,
    dt: f64,
    periods: usize,
    samples_per_period: usize,
    check_every: usize,
) -> Result<QuantumSeries> {
    let mut prop = FloquetPropagator::new(ops, p, dt)?;
    let spp = samples_per_period.max(1);
    let steps = prop.steps_per_period();
    if steps % spp != 0 {
        return Err(Error::param("samples_per_period", "must divide the steps per period"));
    }
    let chunk = steps / spp;
    let d = ops.dim();
    let mut rho = rho0.clone();
    let mut t = vec![0.0];
    let mut m = vec![magnetization(&rho, ops)];
    let mut worst = f64::INFINITY;
    for n in 0..periods {
        let before = trace(&rho);
        let mut x = to_vec(&rho);
        for s in 1..=spp {
            prop.evolve_steps(&mut x, chunk);
            if s == spp {
                prop.kick_in_place(&mut x);
            } else {
                t.push(n as f64 + s as f64 / spp as f64);
                m.push(magnetization(&to_matrix(d, x.clone()), ops));
            }
        }
        rho = to_matrix(d, x);
        let after = trace(&rho);
        let drift = (after - before).norm();
        if drift > TRACE_DRIFT_BUDGET {
            return Err(Error::TraceDrift {
                drift,
                budget: TRACE_DRIFT_BUDGET,
            });
        }
        rho.mapv_inplace(|z| z * (before / after));
        if check_every > 0 && (n + 1) % check_every == 0 {
            let e = min_eigenvalue(&rho)?;
            worst = worst.min(e);
            if e < POSITIVITY_ABORT {
                return Err(Error::Positivity { min_eig: e, dt });
            }
        }
        t.push((n + 1) as f64);
        m.push(magnetization(&rho, ops));
    }
    Ok(QuantumSeries {
        t,
        m,
        final_state: rho,
        worst_min_eigenvalue: worst,
    })
}

/// Zero matrix of matching size.
pub fn zeros(d: usize) -> CMatrix {
    CMatrix::from_elem((d, d), ZERO)
}

#[cfg(test)]
mod tests {
    use super::super::ops::{build_spin_operators, max_abs, spin_down, spin_up, trace_product};
    use super::*;
    use crate::model::Spin;

    #[test]
    fn dark_state_survives_a_period() {
        let ops = build_spin_operators(Spin::new(3.0).unwrap()).unwrap();
        let p = ModelParams::new(0.0, 0.0, 0.0);
        let rho = spin_down(ops.spin);
        let out = floquet_map(&rho, &ops, &p, 1e-3).unwrap();
        assert!(max_abs(&(out - &rho)) < 1e-14);
    }

    #[test]
    fn adjoint_consistency() {
        let ops = build_spin_operators(Spin::new(2.0).unwrap()).unwrap();
        let d = ops.dim();
        let p = ModelParams::new(1.5, 0.8, 0.6);
        let mut prop = FloquetPropagator::new(&ops, &p, 1e-2).unwrap();
        let a = CMatrix::from_shape_fn((d, d), |(i, j)| Complex64::new((i + 2 * j) as f64, (i * j) as f64 * 0.3 - 1.0));
        let b = CMatrix::from_shape_fn((d, d), |(i, j)| Complex64::new((3 * i + j) as f64 * 0.1, i as f64 - j as f64));
        let mut ub = to_vec(&b);
        prop.apply_linear(&mut ub);
        let ub = to_matrix(d, ub);
        let uda = prop.adjoint_map(&a).unwrap();
        let lhs = trace_product(&a, &ub);
        let rhs = trace_product(&uda, &b);
        assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm().max(1.0), "{lhs} {rhs}");
    }

    #[test]
    fn evolution_keeps_state_physical() {
        let ops = build_spin_operators(Spin::new(3.0).unwrap()).unwrap();
        let p = ModelParams::new(1.5, 1.0, 0.5);
        let s = evolve(&spin_up(ops.spin), &ops, &p, 1e-3, 20, 4, 5).unwrap();
        assert_eq!(s.t.len(), 1 + 20 * 4);
        let c = check_state(&s.final_state).unwrap();
        assert!(c.trace_error < 1e-10 && c.hermiticity < 1e-10 && c.min_eigenvalue > -1e-8, "{c:?}");
        assert!(FloquetPropagator::new(&ops, &p, 0.3).is_err());
    }
}
