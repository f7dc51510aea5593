//! Fixed points of the stroboscopic map and their local stability.

use ndarray::Array2;
use ndarray_linalg::Eig;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlochVector, ModelParams, StroboscopicMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub dt: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            max_iters: 100_000,
            tol: 1e-10,
            dt: crate::model::DEFAULT_DT,
        }
    }
}

/// Outcome of the fixed-point search. Failure to converge is a result, not
/// an error: quasi-periodic and chaotic regimes have no attracting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedPoint {
    Found { point: BlochVector, iterations: usize },
    NotFound { residual: f64 },
}

impl FixedPoint {
    pub fn point(&self) -> Option<BlochVector> {
        match self {
            FixedPoint::Found { point, .. } => Some(*point),
            FixedPoint::NotFound { .. } => None,
        }
    }
}

/// Plain iteration of the stroboscopic map until successive iterates agree
/// to `tol`.
pub fn find_fixed_point(p: &ModelParams, m0: BlochVector, opts: &FixedPointOptions) -> Result<FixedPoint> {
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    if !m0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    let map = StroboscopicMap::new(p, opts.dt)?;
    let mut m = m0.normalized();
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iters {
        let next = map.apply(m);
        residual = (next - m).norm();
        m = next;
        if residual < opts.tol {
            return Ok(FixedPoint::Found { point: m, iterations: it });
        }
    }
    Ok(FixedPoint::NotFound { residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianResult {
    pub fixed_point: BlochVector,
    /// Row-major 3×3 matrix `∂U_i/∂m_j`.
    pub jacobian: [[f64; 3]; 3],
    /// Sorted by descending modulus.
    pub eigenvalues: Vec<Complex64>,
    /// `ln|μ_j| / T`, same order as `eigenvalues`.
    pub local_exponents: Vec<f64>,
    /// Index of the radial eigenvalue. The map renormalises onto the unit
    /// sphere, so radial perturbations are annihilated (μ ≈ 0) and carry no
    /// dynamical information.
    pub radial_index: usize,
}

impl JacobianResult {
    /// Eigenvalues of the dynamics on the sphere, descending modulus.
    pub fn relevant_eigenvalues(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.radial_index)
            .map(|(_, v)| *v)
            .collect()
    }

    pub fn dominant_eigenvalue(&self) -> Complex64 {
        self.relevant_eigenvalues()[0]
    }

    pub fn dominant_exponent(&self) -> f64 {
        self.dominant_eigenvalue().norm().ln()
    }

    pub fn is_stable(&self) -> bool {
        self.eigenvalues.iter().all(|m| m.norm() < 1.0)
    }
}

fn fd_jacobian(map: &StroboscopicMap, m: BlochVector, h: f64) -> Array2<f64> {
    let mut j = Array2::zeros((3, 3));
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = h;
        let e = BlochVector::from_array(e);
        let plus = map.apply(m + e);
        let minus = map.apply(m - e);
        let col = (plus - minus) * (0.5 / h);
        for (i, v) in col.to_array().into_iter().enumerate() {
            j[[i, k]] = v;
        }
    }
    j
}

fn sorted_eig(j: &Array2<f64>, m: BlochVector) -> Result<(Vec<Complex64>, usize)> {
    let (vals, vecs) = j.eig()?;
    let mut idx: Vec<usize> = (0..3).collect();
    idx.sort_by(|&a, &b| vals[b].norm().total_cmp(&vals[a].norm()));
    let mhat = m.normalized().to_array();
    let alignment = |c: usize| {
        let v = vecs.column(c);
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let d: Complex64 = v.iter().zip(mhat).map(|(z, w)| z * w).sum();
        d.norm() / n
    };
    let radial_orig = (0..3).max_by(|&a, &b| alignment(a).total_cmp(&alignment(b))).unwrap_or(0);
    let radial = idx.iter().position(|&i| i == radial_orig).unwrap_or(2);
    Ok((idx.iter().map(|&i| vals[i]).collect(), radial))
}

/// Central finite-difference Jacobian of the stroboscopic map at a fixed
/// point. The computation is repeated at `fd_step / 2`; a relative change of
/// more than 1% in the dynamical eigenvalues is reported as ill-conditioning.
pub fn jacobian_at(p: &ModelParams, m_star: BlochVector, fd_step: f64, dt: f64) -> Result<JacobianResult> {
    if !(1e-7..=1e-4).contains(&fd_step) {
        return Err(Error::param("fd_step", "must lie in [1e-7, 1e-4]"));
    }
    let map = StroboscopicMap::new(p, dt)?;
    let m = m_star.normalized();
    let res = (map.apply(m) - m).norm();
    if res > 1e-9 {
        return Err(Error::param("m_star", format!("not a fixed point (residual {res:e})")));
    }
    let j = fd_jacobian(&map, m, fd_step);
    let (vals, radial) = sorted_eig(&j, m)?;
    let (half, radial_half) = sorted_eig(&fd_jacobian(&map, m, 0.5 * fd_step), m)?;
    let dynamical = |v: &[Complex64], r: usize| -> Vec<Complex64> {
        v.iter().enumerate().filter(|(i, _)| *i != r).map(|(_, z)| *z).collect()
    };
    let change = dynamical(&vals, radial)
        .iter()
        .zip(dynamical(&half, radial_half))
        .map(|(a, b)| (a - b).norm() / a.norm().max(1e-12))
        .fold(0.0, f64::max);
    if change > 0.01 {
        return Err(Error::IllConditioned { change });
    }
    let mut jac = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            jac[i][k] = j[[i, k]];
        }
    }
    Ok(JacobianResult {
        fixed_point: m,
        jacobian: jac,
        local_exponents: vals.iter().map(|v| v.norm().max(1e-300).ln() / p.period).collect(),
        eigenvalues: vals,
        radial_index: radial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_fixed_point_below_threshold() {
        let p = ModelParams::new(0.5, 0.0, 0.0);
        let opts = FixedPointOptions::default();
        let fp = find_fixed_point(&p, BlochVector::up(), &opts).unwrap();
        let m = fp.point().expect("fixed point");
        let exact = BlochVector::new(0.0, 0.5, -(0.75f64).sqrt());
        assert!(m.max_abs_diff(exact) < 1e-9);

        let j = jacobian_at(&p, m, 1e-6, opts.dt).unwrap();
        assert!(j.is_stable());
        assert!(j.eigenvalues[j.radial_index].norm() < 1e-6);
    }

    #[test]
    fn rejects_non_fixed_points() {
        let p = ModelParams::new(1.5, 1.0, 0.5);
        assert!(jacobian_at(&p, BlochVector::up(), 1e-6, 1e-3).is_err());
        assert!(jacobian_at(&p, BlochVector::up(), 1e-2, 1e-3).is_err());
        assert!(find_fixed_point(&p, BlochVector::up(), &FixedPointOptions { tol: 0.0, ..Default::default() }).is_err());
    }
}
