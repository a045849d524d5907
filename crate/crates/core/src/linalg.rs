//! Small dense complex helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Max-entry norm `max |a_jk|`, the norm used throughout.
pub fn max_norm(a: &CMat) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Maximum absolute row sum, an upper bound for the operator norm induced by
/// the max-entry vector norm.
pub fn row_sum_norm(a: &CMat) -> f64 {
    (0..a.nrows())
        .map(|r| a.row(r).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn identity(m: usize) -> CMat {
    CMat::identity(m, m)
}

pub fn diag(entries: &[C64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

/// Wronskian `<Z, Y> = Z Y' - Z' Y`.
pub fn wronskian(z: &CMat, dz: &CMat, y: &CMat, dy: &CMat) -> CMat {
    z * dy - dz * y
}

/// Principal power `z^mu = exp(mu Log z)`.
pub fn cpow(z: C64, mu: f64) -> C64 {
    if z == C64::new(0.0, 0.0) {
        if mu == 0.0 {
            return C64::new(1.0, 0.0);
        }
        return C64::new(0.0, 0.0);
    }
    (z.ln() * mu).exp()
}

/// Principal square root with `Re rho >= 0`; on the negative real axis the
/// root with `Im rho >= 0` is returned.
pub fn sqrt_lambda(lambda: C64) -> C64 {
    let r = lambda.sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        -r
    } else {
        r
    }
}

pub fn det(a: &CMat) -> C64 {
    a.clone().lu().determinant()
}

pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    a.clone().lu().solve(b)
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    a.clone().try_inverse()
}

/// Reciprocal 2-norm condition number `s_min / s_max`.
pub fn rcond(a: &CMat) -> f64 {
    let s = a.clone().svd(false, false).singular_values;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Serialized form of a complex matrix: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMat> for MatrixRecord {
    fn from(a: &CMat) -> Self {
        let mut entries = Vec::with_capacity(a.len());
        for r in 0..a.nrows() {
            for k in 0..a.ncols() {
                let z = a[(r, k)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixRecord {
            rows: a.nrows(),
            cols: a.ncols(),
            entries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_branch_has_nonnegative_real_part() {
        for &(re, im) in &[(4.0, 0.0), (-4.0, 0.0), (-4.0, -1e-300), (0.0, -3.0), (2.0, -5.0)] {
            let r = sqrt_lambda(c(re, im));
            assert!(r.re >= 0.0);
            assert!((r * r - c(re, im)).norm() < 1e-12 * (1.0 + c(re, im).norm()));
        }
        assert_eq!(sqrt_lambda(c(-4.0, 0.0)), c(0.0, 2.0));
    }

    #[test]
    fn wronskian_of_identity_pair() {
        let z = identity(2);
        let dz = CMat::zeros(2, 2);
        let w = wronskian(&z, &dz, &identity(2), &identity(2));
        assert!(max_norm(&(w - identity(2))) == 0.0);
    }

    #[test]
    fn principal_power() {
        let z = cpow(c(0.0, 4.0), 0.5);
        assert!((z - c(2f64.sqrt(), 2f64.sqrt())).norm() < 1e-14);
        assert_eq!(cpow(c(0.0, 0.0), 0.3), c(0.0, 0.0));
    }
}
