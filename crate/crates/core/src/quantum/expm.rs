//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant.

use ndarray::Array2;
use ndarray_linalg::{FactorizeInto, Solve};
use num_complex::Complex64;

use super::ops::CMatrix;
use crate::error::{Error, Result};

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which the degree-13 approximant is accurate to
/// double precision without scaling.
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn scaled(a: &CMatrix, c: f64) -> CMatrix {
    a.mapv(|z| z * c)
}

pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = scaled(a, 0.5f64.powi(s));
    let id = CMatrix::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = |k: usize| Complex64::new(B13[k], 0.0);
    let lin = |m: &CMatrix, k: usize| m.mapv(|z| z * b(k));

    let u_inner = lin(&a6, 13) + lin(&a4, 11) + lin(&a2, 9);
    let u = a.dot(&(a6.dot(&u_inner) + lin(&a6, 7) + lin(&a4, 5) + lin(&a2, 3) + lin(&id, 1)));
    let v_inner = lin(&a6, 12) + lin(&a4, 10) + lin(&a2, 8);
    let v = a6.dot(&v_inner) + lin(&a6, 6) + lin(&a4, 4) + lin(&a2, 2) + lin(&id, 0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = Array2::zeros((n, n));
    let lu = q.factorize_into()?;
    for j in 0..n {
        let col = lu.solve(&p.column(j).to_owned())?;
        r.column_mut(j).assign(&col);
    }
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::super::ops::{max_abs, I};
    use super::*;

    #[test]
    fn rotation_generator() {
        // exp(θ [[0, −1], [1, 0]]) is a rotation
        let th = 7.3;
        let a = CMatrix::from_shape_vec((2, 2), vec![0.0.into(), (-th).into(), th.into(), 0.0.into()]).unwrap();
        let e = expm(&a).unwrap();
        let want = CMatrix::from_shape_vec(
            (2, 2),
            vec![th.cos().into(), (-th.sin()).into(), th.sin().into(), th.cos().into()],
        )
        .unwrap();
        assert!(max_abs(&(e - want)) < 1e-12);
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = CMatrix::from_diag(&ndarray::arr1(&[Complex64::new(-30.0, 2.0), I * 0.5, Complex64::new(1.0, 0.0)]));
        let e = expm(&d).unwrap();
        for k in 0..3 {
            assert!((e[[k, k]] - d[[k, k]].exp()).norm() < 1e-12 * d[[k, k]].exp().norm().max(1.0));
        }
        let mut n = CMatrix::zeros((3, 3));
        n[[0, 1]] = 1.0.into();
        n[[1, 2]] = 1.0.into();
        let e = expm(&n).unwrap();
        assert!((e[[0, 2]].re - 0.5).abs() < 1e-14);
    }
}
