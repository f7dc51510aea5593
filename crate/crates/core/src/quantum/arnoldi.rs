//! Matrix-free Arnoldi iteration for the leading eigenvalues of the
//! one-period map.
//!
//! The Krylov basis is orthogonalised by modified Gram–Schmidt applied twice.
//! Instead of restarting, the basis is extended in fixed increments past the
//! initial dimension; the Ritz values are compared between successive
//! extensions and the run stops once the requested set has settled.

use ndarray::Array2;
use ndarray_linalg::Eig;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::{FloquetSpectrum, SpectrumMethod};
use super::floquet::FloquetPropagator;
use super::ops::{SpinOperators, ZERO};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArnoldiOptions {
    pub krylov_dim: usize,
    pub n_ritz: usize,
    pub seed: u64,
    /// Largest allowed movement of the requested Ritz values between
    /// successive extensions.
    pub tol: f64,
    pub expand_by: usize,
    pub max_dim: usize,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        ArnoldiOptions {
            krylov_dim: 80,
            n_ritz: 20,
            seed: 0,
            tol: 1e-7,
            expand_by: 40,
            max_dim: 480,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArnoldiResult {
    pub ritz_values: Vec<Complex64>,
    /// `|h_{k+1,k} y_k|` for each Ritz pair, same order.
    pub residual_estimates: Vec<f64>,
    pub krylov_dim: usize,
    pub movement: f64,
    basis: Vec<Vec<Complex64>>,
    ritz_coeffs: Vec<Vec<Complex64>>,
}

impl ArnoldiResult {
    /// Ritz vector for the `i`-th Ritz value.
    pub fn ritz_vector(&self, i: usize) -> Vec<Complex64> {
        let n = self.basis[0].len();
        let mut x = vec![ZERO; n];
        for (c, v) in self.ritz_coeffs[i].iter().zip(&self.basis) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += c * vi;
            }
        }
        x
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Ritz values of the leading `k×k` block of `h`, sorted by descending
/// modulus, with residual estimates and eigenvector coefficients.
/// Ritz values, residual estimates and coefficient vectors.
type RitzPairs = (Vec<Complex64>, Vec<f64>, Vec<Vec<Complex64>>);

fn ritz(h: &[Vec<Complex64>], k: usize, beta: f64) -> Result<RitzPairs> {
    let hk = Array2::from_shape_fn((k, k), |(i, j)| h[j].get(i).copied().unwrap_or(ZERO));
    let (vals, vecs) = hk.eig()?;
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| vals[b].norm().total_cmp(&vals[a].norm()).then(vals[b].im.total_cmp(&vals[a].im)));
    let mut coeffs = Vec::with_capacity(k);
    let mut res = Vec::with_capacity(k);
    for &i in &idx {
        let y: Vec<Complex64> = vecs.column(i).to_vec();
        let ny = norm(&y);
        res.push(beta * y[k - 1].norm() / ny);
        coeffs.push(y.into_iter().map(|z| z / ny).collect());
    }
    Ok((idx.iter().map(|&i| vals[i]).collect(), res, coeffs))
}

fn movement(new: &[Complex64], old: &[Complex64]) -> f64 {
    new.iter()
        .map(|a| old.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Arnoldi on a linear map acting in place on vectors of length `n`.
pub fn arnoldi<F>(n: usize, mut apply: F, opts: &ArnoldiOptions) -> Result<ArnoldiResult>
where
    F: FnMut(&mut Vec<Complex64>),
{
    if opts.n_ritz == 0 || opts.krylov_dim < opts.n_ritz + 5 {
        return Err(Error::param("krylov_dim", "must be at least n_ritz + 5"));
    }
    if opts.krylov_dim > n {
        return Err(Error::param("krylov_dim", format!("must not exceed the space dimension {n}")));
    }
    let max_dim = opts.max_dim.max(opts.krylov_dim).min(n);
    let mut r = rng::stream(opts.seed, 0);
    let mut v0: Vec<Complex64> = (0..n).map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
    let n0 = norm(&v0);
    v0.iter_mut().for_each(|z| *z /= n0);

    let mut basis = vec![v0];
    // column j of the Hessenberg matrix, length j + 2
    let mut h: Vec<Vec<Complex64>> = Vec::new();
    let mut previous: Option<Vec<Complex64>> = None;
    let mut next_check = opts.krylov_dim;
    loop {
        let j = h.len();
        let mut w = basis[j].clone();
        apply(&mut w);
        let mut col = vec![ZERO; j + 2];
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                col[i] += c;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let beta = norm(&w);
        col[j + 1] = Complex64::new(beta, 0.0);
        h.push(col);
        let k = j + 1;
        let breakdown = beta <= 1e-13;
        if !breakdown {
            w.iter_mut().for_each(|z| *z /= beta);
            basis.push(w);
        }
        if k == next_check || breakdown || k == max_dim {
            let (vals, res, coeffs) = ritz(&h, k, beta)?;
            let want = opts.n_ritz.min(k);
            let mv = previous.as_ref().map_or(f64::INFINITY, |p| movement(&vals[..want], p));
            if breakdown || mv <= opts.tol {
                basis.truncate(k);
                return Ok(ArnoldiResult {
                    ritz_values: vals,
                    residual_estimates: res,
                    krylov_dim: k,
                    movement: if breakdown { 0.0 } else { mv },
                    basis,
                    ritz_coeffs: coeffs,
                });
            }
            if k >= max_dim {
                return Err(Error::NotConverged {
                    what: "arnoldi ritz values",
                    residual: mv,
                });
            }
            previous = Some(vals[..want].to_vec());
            next_check = (k + opts.expand_by.max(1)).min(max_dim);
        }
    }
}

/// Leading eigenvalues of the one-period map without forming it.
pub fn arnoldi_floquet(ops: &SpinOperators, p: &ModelParams, dt: f64, opts: &ArnoldiOptions) -> Result<ArnoldiResult> {
    let mut prop = FloquetPropagator::new(ops, p, dt)?;
    let n = ops.dim() * ops.dim();
    arnoldi(n, |x| prop.apply_linear(x), opts)
}

pub fn arnoldi_floquet_spectrum(
    ops: &SpinOperators,
    p: &ModelParams,
    dt: f64,
    krylov_dim: usize,
    n_ritz: usize,
    seed: u64,
) -> Result<FloquetSpectrum> {
    let opts = ArnoldiOptions {
        krylov_dim,
        n_ritz,
        seed,
        ..Default::default()
    };
    let r = arnoldi_floquet(ops, p, dt, &opts)?;
    let vals = r.ritz_values.into_iter().take(n_ritz).collect();
    Ok(FloquetSpectrum::new(vals, SpectrumMethod::Arnoldi, ops.s()))
}
