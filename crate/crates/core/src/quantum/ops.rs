//! Collective spin operators in the Dicke basis `|S, m⟩`, `m = S, S−1, …, −S`
//! (row/column index `k` holds `m = S − k`).

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::Result;
use crate::model::Spin;

pub type CMatrix = Array2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub spin: Spin,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub sp: CMatrix,
    pub sm: CMatrix,
    /// `⟨S, m+1| S⁺ |S, m⟩` between index `k + 1` and `k`, `k = 0..d−1`.
    pub ladder: Vec<f64>,
    /// `m` values by index.
    pub m: Vec<f64>,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn s(&self) -> f64 {
        self.spin.value()
    }

    /// `S⁺S⁻` diagonal: `(S + m)(S − m + 1)`.
    pub fn raising_lowering_diag(&self) -> Vec<f64> {
        let s = self.s();
        self.m.iter().map(|&m| (s + m) * (s - m + 1.0)).collect()
    }
}

/// Ladder coefficients `√(S(S+1) − m(m+1))` with `m = S − k − 1`.
pub fn ladder_coefficients(spin: Spin) -> Vec<f64> {
    let s = spin.value();
    (0..spin.dim() - 1)
        .map(|k| {
            let m = s - k as f64 - 1.0;
            (s * (s + 1.0) - m * (m + 1.0)).sqrt()
        })
        .collect()
}

pub fn build_spin_operators(spin: Spin) -> Result<SpinOperators> {
    let d = spin.dim();
    let s = spin.value();
    let ladder = ladder_coefficients(spin);
    let m: Vec<f64> = (0..d).map(|k| s - k as f64).collect();
    let mut sp = CMatrix::zeros((d, d));
    for (k, &c) in ladder.iter().enumerate() {
        sp[[k, k + 1]] = Complex64::new(c, 0.0);
    }
    let sm = sp.t().to_owned();
    let sx = (&sp + &sm).mapv(|z| z * 0.5);
    let sy = (&sp - &sm).mapv(|z| z / (2.0 * I));
    let sz = CMatrix::from_diag(&ndarray::Array1::from_iter(m.iter().map(|&v| Complex64::new(v, 0.0))));
    Ok(SpinOperators {
        spin,
        sx,
        sy,
        sz,
        sp,
        sm,
        ladder,
        m,
    })
}

/// Conjugate transpose.
pub fn dagger(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diag().sum()
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = ZERO;
    for ((i, j), &x) in a.indexed_iter() {
        acc += x * b[[j, i]];
    }
    acc
}

/// Largest absolute entry of `A − A†`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for ((i, j), &x) in a.indexed_iter() {
        worst = worst.max((x - a[[j, i]].conj()).norm());
    }
    worst
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `|S, m⟩⟨S, m|` for the basis index `k`.
pub fn basis_projector(d: usize, k: usize) -> CMatrix {
    let mut r = CMatrix::zeros((d, d));
    r[[k, k]] = ONE;
    r
}

/// Fully polarised spin-up state `|S, S⟩⟨S, S|`.
pub fn spin_up(spin: Spin) -> CMatrix {
    basis_projector(spin.dim(), 0)
}

/// All spins down `|S, −S⟩⟨S, −S|`.
pub fn spin_down(spin: Spin) -> CMatrix {
    basis_projector(spin.dim(), spin.dim() - 1)
}
