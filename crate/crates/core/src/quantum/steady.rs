//! Steady state of the one-period map.
//!
//! A short Arnoldi run supplies the eigenvector of the eigenvalue nearest 1 as
//! a starting point; power iteration with trace renormalisation then polishes
//! it until a period leaves it unchanged to the requested tolerance.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::arnoldi::{arnoldi, ArnoldiOptions};
use super::floquet::FloquetPropagator;
use super::ops::{dagger, max_abs, spin_up, trace, CMatrix, SpinOperators};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyOptions {
    /// `max |U(ρ) − ρ|` at convergence.
    pub tol: f64,
    pub max_iter: usize,
    /// Krylov dimension of the seeding run; 0 starts from the spin-up state.
    pub seed_krylov: usize,
    pub seed: u64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            tol: 1e-9,
            max_iter: 100_000,
            seed_krylov: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: CMatrix,
    pub iterations: usize,
    pub residual: f64,
}

/// Hermitian part divided by its trace.
pub fn normalize_density(rho: &CMatrix) -> CMatrix {
    let h = (rho + &dagger(rho)).mapv(|z| z * 0.5);
    let tr = trace(&h).re;
    h.mapv(|z| z / tr)
}

fn arnoldi_seed(prop: &mut FloquetPropagator, d: usize, opts: &SteadyOptions) -> Option<CMatrix> {
    let n = d * d;
    let k = opts.seed_krylov.min(n);
    if k < 10 {
        return None;
    }
    let ao = ArnoldiOptions {
        krylov_dim: k,
        n_ritz: 5,
        seed: opts.seed,
        tol: 1e-10,
        expand_by: 20,
        max_dim: (4 * k).min(n),
    };
    // a non-converged run still yields a usable start
    let r = arnoldi(n, |x| prop.apply_linear(x), &ao).ok()?;
    let i = (0..r.ritz_values.len()).min_by(|&a, &b| {
        (r.ritz_values[a] - 1.0).norm().total_cmp(&(r.ritz_values[b] - 1.0).norm())
    })?;
    let v = r.ritz_vector(i);
    let rho = Array2::from_shape_vec((d, d), v).expect("square");
    let tr = trace(&rho);
    if tr.norm() < 1e-12 {
        return None;
    }
    let rho = rho.mapv(|z| z / tr);
    Some(normalize_density(&rho))
}

pub fn steady_state_with(ops: &SpinOperators, p: &ModelParams, dt: f64, opts: &SteadyOptions) -> Result<SteadyState> {
    let mut prop = FloquetPropagator::new(ops, p, dt)?;
    let d = ops.dim();
    let mut rho = arnoldi_seed(&mut prop, d, opts).unwrap_or_else(|| spin_up(ops.spin));
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = normalize_density(&prop.map(&rho)?);
        residual = max_abs(&(&next - &rho));
        if !residual.is_finite() {
            return Err(Error::NonFinite("steady state iteration"));
        }
        rho = next;
        if residual <= opts.tol {
            return Ok(SteadyState {
                rho,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NotConverged {
        what: "steady state",
        residual,
    })
}

pub fn steady_state(ops: &SpinOperators, p: &ModelParams, dt: f64) -> Result<SteadyState> {
    steady_state_with(ops, p, dt, &SteadyOptions::default())
}

/// `⟨A⟩` in the state `rho`.
pub fn expectation(a: &CMatrix, rho: &CMatrix) -> Complex64 {
    super::ops::trace_product(a, rho)
}

#[cfg(test)]
mod tests {
    use super::super::ops::build_spin_operators;
    use super::*;
    use crate::model::Spin;

    #[test]
    fn normalisation() {
        let a = CMatrix::from_shape_fn((3, 3), |(i, j)| Complex64::new((i + j) as f64, i as f64 - 2.0 * j as f64));
        let r = normalize_density(&a);
        assert!((trace(&r) - 1.0).norm() < 1e-14);
        assert!(max_abs(&(&r - &dagger(&r))) < 1e-15);
    }

    #[test]
    fn fixed_point_of_the_map() {
        let ops = build_spin_operators(Spin::new(3.0).unwrap()).unwrap();
        let p = ModelParams::new(1.5, 1.0, 0.5);
        let ss = steady_state(&ops, &p, 1e-3).unwrap();
        let mut prop = FloquetPropagator::new(&ops, &p, 1e-3).unwrap();
        let next = prop.map(&ss.rho).unwrap();
        assert!(max_abs(&(next - &ss.rho)) <= 1e-9);
        // the unseeded route reaches the same state
        let o = SteadyOptions { seed_krylov: 0, ..Default::default() };
        let plain = steady_state_with(&ops, &p, 1e-3, &o).unwrap();
        assert!(max_abs(&(plain.rho - &ss.rho)) < 1e-7);
    }
}
