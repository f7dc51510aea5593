//! Master equation `ρ̇ = −i[H₀, ρ] + (κ/S)(S⁻ρS⁺ − ½{S⁺S⁻, ρ})` with
//! `H₀ = ω₀Sˣ + (ω_z/S)(Sᶻ)²`, evaluated in O(d²) from the band structure
//! of the operators.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use super::ops::{CMatrix, SpinOperators, I, ZERO};
use crate::error::{Error, Result};
use crate::model::{step_count, ModelParams};

/// Banded coefficients of the generator for one parameter set.
#[derive(Debug, Clone)]
pub struct Generator {
    d: usize,
    /// `ω₀ ⟨k|Sˣ|k+1⟩`.
    hx: Vec<f64>,
    /// `(ω_z/S) m_k²`.
    hz: Vec<f64>,
    /// `⟨k+1|S⁻|k⟩`.
    lower: Vec<f64>,
    /// `S⁺S⁻` diagonal.
    n: Vec<f64>,
    gamma: f64,
}

impl Generator {
    pub fn new(ops: &SpinOperators, p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let s = ops.s();
        Ok(Generator {
            d: ops.dim(),
            hx: ops.ladder.iter().map(|c| 0.5 * c * p.omega0).collect(),
            hz: ops.m.iter().map(|m| p.omega_z / s * m * m).collect(),
            lower: ops.ladder.clone(),
            n: ops.raising_lowering_diag(),
            gamma: p.kappa / s,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(Hρ)[a,b]` row contribution: tridiagonal times dense.
    #[inline]
    fn h_left(&self, r: &[Complex64], a: usize, b: usize) -> Complex64 {
        let d = self.d;
        let mut acc = r[a * d + b] * self.hz[a];
        if a > 0 {
            acc += r[(a - 1) * d + b] * self.hx[a - 1];
        }
        if a + 1 < d {
            acc += r[(a + 1) * d + b] * self.hx[a];
        }
        acc
    }

    #[inline]
    fn h_right(&self, r: &[Complex64], a: usize, b: usize) -> Complex64 {
        let d = self.d;
        let mut acc = r[a * d + b] * self.hz[b];
        if b > 0 {
            acc += r[a * d + b - 1] * self.hx[b - 1];
        }
        if b + 1 < d {
            acc += r[a * d + b + 1] * self.hx[b];
        }
        acc
    }

    /// Generator applied to a row-major `d×d` matrix.
    pub fn apply(&self, r: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        let g = self.gamma;
        for a in 0..d {
            for b in 0..d {
                let comm = self.h_left(r, a, b) - self.h_right(r, a, b);
                let mut v = -I * comm - r[a * d + b] * (0.5 * g * (self.n[a] + self.n[b]));
                if a > 0 && b > 0 {
                    v += r[(a - 1) * d + b - 1] * (g * self.lower[a - 1] * self.lower[b - 1]);
                }
                out[a * d + b] = v;
            }
        }
    }

    /// Adjoint generator `A ↦ i[H₀, A] + (κ/S)(S⁺AS⁻ − ½{S⁺S⁻, A})`.
    pub fn apply_adjoint(&self, r: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        let g = self.gamma;
        for a in 0..d {
            for b in 0..d {
                let comm = self.h_left(r, a, b) - self.h_right(r, a, b);
                let mut v = I * comm - r[a * d + b] * (0.5 * g * (self.n[a] + self.n[b]));
                if a + 1 < d && b + 1 < d {
                    v += r[(a + 1) * d + b + 1] * (g * self.lower[a] * self.lower[b]);
                }
                out[a * d + b] = v;
            }
        }
    }
}

/// Time derivative of `rho` under the master equation.
pub fn lindblad_rhs(rho: &CMatrix, ops: &SpinOperators, p: &ModelParams) -> Result<CMatrix> {
    let d = ops.dim();
    if rho.dim() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho.nrows(),
        });
    }
    let g = Generator::new(ops, p)?;
    let r = rho.as_standard_layout();
    let mut out = vec![ZERO; d * d];
    g.apply(r.as_slice().expect("standard layout"), &mut out);
    Ok(Array2::from_shape_vec((d, d), out).expect("shape"))
}

/// Which generator a propagator integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Adjoint,
}

/// Fixed-step RK4 integrator with owned work buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    gen: Generator,
    dir: Direction,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(gen: Generator, dir: Direction) -> Self {
        let n = gen.d * gen.d;
        Rk4 {
            gen,
            dir,
            k: [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]],
            tmp: vec![ZERO; n],
        }
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    fn eval(gen: &Generator, dir: Direction, x: &[Complex64], out: &mut [Complex64]) {
        match dir {
            Direction::Forward => gen.apply(x, out),
            Direction::Adjoint => gen.apply_adjoint(x, out),
        }
    }

    pub fn step(&mut self, x: &mut [Complex64], h: f64) {
        let (gen, dir) = (&self.gen, self.dir);
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        Self::eval(gen, dir, x, k1);
        for i in 0..x.len() {
            tmp[i] = x[i] + k1[i] * (0.5 * h);
        }
        Self::eval(gen, dir, tmp, k2);
        for i in 0..x.len() {
            tmp[i] = x[i] + k2[i] * (0.5 * h);
        }
        Self::eval(gen, dir, tmp, k3);
        for i in 0..x.len() {
            tmp[i] = x[i] + k3[i] * h;
        }
        Self::eval(gen, dir, tmp, k4);
        let c = h / 6.0;
        for i in 0..x.len() {
            x[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * c;
        }
    }

    pub fn advance(&mut self, x: &mut [Complex64], h: f64, steps: usize) {
        for _ in 0..steps {
            self.step(x, h);
        }
    }
}

/// `exp(−iθSˣ)` from the eigendecomposition of `Sˣ`.
pub fn rotation_x(ops: &SpinOperators, theta: f64) -> Result<CMatrix> {
    let d = ops.dim();
    let sx = Array2::from_shape_fn((d, d), |(i, j)| ops.sx[[i, j]].re);
    let (vals, vecs) = sx.eigh(UPLO::Upper)?;
    let phases: Vec<Complex64> = vals.iter().map(|&e| Complex64::from_polar(1.0, -theta * e)).collect();
    Ok(Array2::from_shape_fn((d, d), |(i, j)| {
        let mut acc = ZERO;
        for k in 0..d {
            acc += phases[k] * (vecs[[i, k]] * vecs[[j, k]]);
        }
        acc
    }))
}

/// Number of RK4 steps per period, rejecting step sizes that do not divide it.
pub fn steps_per_period(p: &ModelParams, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "must be positive and finite"));
    }
    let n = step_count(p.period, dt);
    if (n as f64 * dt - p.period).abs() > 1e-9 * p.period {
        return Err(Error::param("dt", "must divide the period into an integer number of steps"));
    }
    Ok(n)
}
