use crate::error::{Error, Result};
use crate::linalg::{cpow, C64};

use super::ScalarOrder;

/// Truncated Frobenius series `c_j(z) = z^{mu_j} sum_k c_jk z^{2k}`.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub order: ScalarOrder,
    pub j: usize,
    pub c0: C64,
    pub coeffs: Vec<C64>,
    pub truncation: usize,
    /// Bound on `|sum_{k > K} c_jk z^{2k}|` for `|z| <= disk_radius`.
    pub tail_bound: f64,
    pub disk_radius: f64,
}

const TAIL_TOL: f64 = 1e-16;
const MAX_TERMS: usize = 400;

impl SeriesSolution {
    /// Series with exactly `k_terms` coefficients beyond the leading one.
    pub fn new(order: ScalarOrder, j: usize, c0: C64, k_terms: usize, disk_radius: f64) -> Result<SeriesSolution> {
        Self::check(&order, j, c0)?;
        if k_terms < 1 {
            return Err(Error::InvalidInput("series truncation K must be at least 1".into()));
        }
        let coeffs = Self::coefficients(&order, j, c0, k_terms)?;
        let tail_bound = tail_bound(&order, j, &coeffs, disk_radius);
        Ok(SeriesSolution {
            order,
            j,
            c0,
            truncation: k_terms,
            coeffs,
            tail_bound,
            disk_radius,
        })
    }

    /// Grows `K` until the geometric-majorant tail bound on the disk falls
    /// below `1e-16 |c0|`.
    pub fn adaptive(order: ScalarOrder, j: usize, c0: C64, disk_radius: f64) -> Result<SeriesSolution> {
        Self::check(&order, j, c0)?;
        let coeffs = Self::coefficients(&order, j, c0, MAX_TERMS)?;
        for k in 1..MAX_TERMS {
            let bound = tail_bound(&order, j, &coeffs[..=k], disk_radius);
            if bound < TAIL_TOL * c0.norm() {
                return Ok(SeriesSolution {
                    order,
                    j,
                    c0,
                    coeffs: coeffs[..=k].to_vec(),
                    truncation: k,
                    tail_bound: bound,
                    disk_radius,
                });
            }
        }
        Err(Error::Domain(format!(
            "series for nu = {} does not reach the tail tolerance on |z| <= {disk_radius} within {MAX_TERMS} terms",
            order.nu
        )))
    }

    fn check(order: &ScalarOrder, j: usize, c0: C64) -> Result<()> {
        if j != 1 && j != 2 {
            return Err(Error::InvalidInput(format!("series index must be 1 or 2, got {j}")));
        }
        if c0.norm() == 0.0 || !c0.is_finite() {
            return Err(Error::InvalidInput("leading coefficient c0 must be finite and nonzero".into()));
        }
        order.validate()
    }

    fn coefficients(order: &ScalarOrder, j: usize, c0: C64, k_terms: usize) -> Result<Vec<C64>> {
        let mut coeffs = Vec::with_capacity(k_terms + 1);
        coeffs.push(c0);
        for k in 1..=k_terms {
            let d = order.denominator(j, k);
            if d == 0.0 {
                return Err(Error::Domain(format!("recursion denominator vanishes at k = {k} (nu = {})", order.nu)));
            }
            let prev = coeffs[k - 1];
            coeffs.push(-prev / d);
        }
        Ok(coeffs)
    }

    pub fn mu(&self) -> f64 {
        self.order.mu(self.j)
    }

    /// Sum `sum_k c_jk w^k` and `sum_k k c_jk w^{k-1}` (Horner).
    fn poly(&self, w: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * w + p;
            p = p * w + c;
        }
        (p, dp)
    }

    /// Unscaled `c_j(z)` and `c_j'(z)` for `|z| <= disk_radius`, principal branch.
    pub fn eval_unscaled(&self, z: C64) -> Result<(C64, C64)> {
        if z.norm() > self.disk_radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|z| = {} outside certified disk {}", z.norm(), self.disk_radius)));
        }
        let mu = self.mu();
        let w = z * z;
        let (p, dp) = self.poly(w);
        let zm = cpow(z, mu);
        Ok((zm * p, zm * (p * mu / z + dp * 2.0 * z)))
    }

    /// `c_j(x, lambda)` and its x-derivative in the lambda-entire form
    /// `x^{mu_j} sum_k c_jk (lambda x^2)^k`.
    pub fn eval_lambda(&self, x: f64, lambda: C64) -> Result<(C64, C64)> {
        let w = lambda * x * x;
        if w.norm() > (self.disk_radius * self.disk_radius) * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "|rho x| = {} outside certified disk {}",
                w.norm().sqrt(),
                self.disk_radius
            )));
        }
        let mu = self.mu();
        let (p, dp) = self.poly(w);
        let xm = x.powf(mu);
        Ok((p * xm, xm / x * (p * mu + dp * 2.0 * w)))
    }

    /// Second x-derivative, used by the ODE residual checks.
    pub fn eval_lambda_second(&self, x: f64, lambda: C64) -> C64 {
        let mu = self.mu();
        let mut acc = C64::new(0.0, 0.0);
        let mut lk = C64::new(1.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let p = mu + 2.0 * k as f64;
            acc += c * lk * (p * (p - 1.0) * x.powf(p - 2.0));
            lk *= lambda;
        }
        acc
    }

    /// `c_j(x, lambda)` with `lambda = rho^2`.
    pub fn eval(&self, x: f64, rho: C64) -> Result<(C64, C64)> {
        if rho.re < 0.0 {
            return Err(Error::Domain(format!("Re rho must be nonnegative, got {rho}")));
        }
        self.eval_lambda(x, rho * rho)
    }
}

/// Geometric-majorant bound for the tail beyond the stored coefficients.
fn tail_bound(order: &ScalarOrder, j: usize, coeffs: &[C64], r: f64) -> f64 {
    let big_k = coeffs.len() - 1;
    let r2 = r * r;
    let mu = order.mu(j);
    let mut term = coeffs[big_k].norm() * r2.powi(big_k as i32);
    let mut sum = 0.0;
    let mut k = big_k;
    while k <= big_k + MAX_TERMS {
        term *= r2 / order.denominator(j, k + 1).abs();
        k += 1;
        sum += term;
        // denominators 2k(2k + 2 mu - 1) grow monotonically once positive
        let qn = r2 / order.denominator(j, k + 1).abs();
        if qn < 1.0 && 2.0 * k as f64 + 2.0 * mu - 1.0 > 0.0 {
            return sum + term * qn / (1.0 - qn);
        }
    }
    f64::INFINITY
}
