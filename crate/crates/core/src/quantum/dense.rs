//! Explicit one-period superoperator and its full spectrum.
//!
//! Operators are vectorised row-major, `vec(ρ)[a·d + b] = ρ[a, b]`, so that
//! `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::{Eig, EigVals};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expm::expm;
use super::lindblad::{rotation_x, Generator};
use super::ops::{dagger, CMatrix, SpinOperators, ZERO};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Largest superoperator dimension `d²` handled densely by default.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    DenseEd,
    Arnoldi,
}

impl std::fmt::Display for SpectrumMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpectrumMethod::DenseEd => "dense_ed",
            SpectrumMethod::Arnoldi => "arnoldi",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetSpectrum {
    /// Descending modulus.
    pub eigenvalues: Vec<Complex64>,
    pub method: SpectrumMethod,
    pub spin: f64,
}

/// Default angular window for "real" eigenvalues in the phase-resolved gaps.
pub const PHASE_TOL: f64 = 1e-3;

impl FloquetSpectrum {
    pub fn new(mut eigenvalues: Vec<Complex64>, method: SpectrumMethod, spin: f64) -> Self {
        eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
        FloquetSpectrum {
            eigenvalues,
            method,
            spin,
        }
    }

    pub fn leading(&self) -> Complex64 {
        self.eigenvalues[0]
    }

    /// `Δ = −ln|λ₁|`.
    pub fn gap(&self) -> f64 {
        self.eigenvalues.get(1).map_or(f64::INFINITY, |l| -l.norm().ln())
    }

    /// Smallest gap among non-leading eigenvalues with `arg λ` within `tol`
    /// of `phase` (0 or π).
    pub fn phase_gap(&self, phase: f64, tol: f64) -> Option<f64> {
        self.eigenvalues
            .iter()
            .skip(1)
            .filter(|l| {
                let d = (l.arg() - phase).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d) <= tol
            })
            .map(|l| -l.norm().ln())
            .reduce(f64::min)
    }

    pub fn gap_phase_zero(&self) -> Option<f64> {
        self.phase_gap(0.0, PHASE_TOL)
    }

    pub fn gap_phase_pi(&self) -> Option<f64> {
        self.phase_gap(PI, PHASE_TOL)
    }

    /// Largest distance from a complex eigenvalue to the nearest conjugate of
    /// another eigenvalue.
    pub fn conjugation_defect(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|l| l.im.abs() > 1e-10)
            .map(|l| {
                self.eigenvalues
                    .iter()
                    .map(|m| (m - l.conj()).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

/// Matrix of the generator `L₀` in the row-major vectorisation.
pub fn generator_matrix(ops: &SpinOperators, p: &ModelParams) -> Result<CMatrix> {
    let d = ops.dim();
    let n = d * d;
    let gen = Generator::new(ops, p)?;
    let mut l = Array2::zeros((n, n));
    let mut e = vec![ZERO; n];
    let mut out = vec![ZERO; n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        gen.apply(&e, &mut out);
        for (i, v) in out.iter().enumerate() {
            l[[i, j]] = *v;
        }
        e[j] = ZERO;
    }
    Ok(l)
}

/// Dense one-period superoperator `(K ⊗ K̄) e^{L₀}`.
pub fn floquet_superoperator(ops: &SpinOperators, p: &ModelParams) -> Result<CMatrix> {
    let d = ops.dim();
    let n = d * d;
    if n > DENSE_LIMIT {
        return Err(Error::SizeGuard { dim: n, limit: DENSE_LIMIT });
    }
    let prop = expm(&generator_matrix(ops, p)?.mapv(|z| z * p.period))?;
    let k = rotation_x(ops, p.omega1)?;
    let kd = dagger(&k);
    let mut u = Array2::zeros((n, n));
    for j in 0..n {
        let col = Array2::from_shape_vec((d, d), prop.column(j).to_vec()).expect("square");
        let c = k.dot(&col).dot(&kd);
        for (i, v) in c.iter().enumerate() {
            u[[i, j]] = *v;
        }
    }
    Ok(u)
}

/// Full spectrum of the one-period map by dense diagonalisation.
pub fn dense_floquet_spectrum(ops: &SpinOperators, p: &ModelParams) -> Result<FloquetSpectrum> {
    let u = floquet_superoperator(ops, p)?;
    let vals = u.eigvals()?;
    Ok(FloquetSpectrum::new(vals.to_vec(), SpectrumMethod::DenseEd, ops.s()))
}

/// Eigenvector of the dense map for the eigenvalue closest to 1, as a
/// Hermitian, unit-trace matrix.
pub fn dense_steady_state(ops: &SpinOperators, p: &ModelParams) -> Result<CMatrix> {
    let d = ops.dim();
    let u = floquet_superoperator(ops, p)?;
    let (vals, vecs) = u.eig()?;
    let k = (0..vals.len())
        .min_by(|&a, &b| (vals[a] - 1.0).norm().total_cmp(&(vals[b] - 1.0).norm()))
        .ok_or(Error::Singular("empty spectrum"))?;
    let rho = Array2::from_shape_vec((d, d), vecs.column(k).to_vec()).expect("square");
    Ok(super::steady::normalize_density(&rho))
}

#[cfg(test)]
mod tests {
    use super::super::floquet::FloquetPropagator;
    use super::super::ops::build_spin_operators;
    use super::*;
    use crate::model::Spin;

    #[test]
    fn superoperator_matches_propagated_basis() {
        let ops = build_spin_operators(Spin::new(1.5).unwrap()).unwrap();
        let d = ops.dim();
        let p = ModelParams::new(1.5, 1.0, 0.5);
        let u = floquet_superoperator(&ops, &p).unwrap();
        let mut prop = FloquetPropagator::new(&ops, &p, 1e-3).unwrap();
        for j in [0, 3, 7, d * d - 1] {
            let mut x = vec![ZERO; d * d];
            x[j] = Complex64::new(1.0, 0.0);
            prop.apply_linear(&mut x);
            for i in 0..d * d {
                assert!((x[i] - u[[i, j]]).norm() < 1e-9, "{i} {j}");
            }
        }
    }

    #[test]
    fn unique_unit_eigenvalue() {
        let ops = build_spin_operators(Spin::new(2.0).unwrap()).unwrap();
        let s = dense_floquet_spectrum(&ops, &ModelParams::new(1.5, 1.0, 0.5)).unwrap();
        assert!((s.leading() - 1.0).norm() < 1e-8);
        assert!(s.eigenvalues[1].norm() < 1.0 - 1e-6);
        assert!(s.conjugation_defect() < 1e-8);
        assert!(s.eigenvalues.iter().all(|l| l.norm() <= 1.0 + 1e-8));
    }

    #[test]
    fn size_guard() {
        let ops = build_spin_operators(Spin::new(32.0).unwrap()).unwrap();
        assert!(matches!(
            floquet_superoperator(&ops, &ModelParams::default()),
            Err(Error::SizeGuard { .. })
        ));
    }
}
