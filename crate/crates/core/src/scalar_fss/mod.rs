//! Scalar building blocks for one channel `-y'' + (omega / x^2) y = lambda y`:
//! Frobenius series `c_j`, Jost solutions `e_k` and the connection
//! constants `beta0`.

mod beta;
mod jost;
mod series;

use serde::Serialize;

pub use beta::{beta_constants, BetaConstants, CHECK_POINT, MATCH_POINT};
pub use jost::JostEngine;
pub use series::SeriesSolution;

use crate::error::{Error, Result};
use crate::linalg::{cpow, C64};

/// Radius of the disk `|rho x| <= SERIES_DISK` on which series are used.
pub const SERIES_DISK: f64 = 2.0;
/// Jost solutions are evaluated directly for `|rho x| >= JOST_SWITCH`.
pub const JOST_SWITCH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarOrder {
    pub nu: f64,
    pub omega: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl ScalarOrder {
    pub fn new(nu: f64) -> Result<ScalarOrder> {
        let o = ScalarOrder {
            nu,
            omega: nu * nu - 0.25,
            mu1: 0.5 - nu,
            mu2: 0.5 + nu,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidInput(format!("nu must be positive and finite, got {}", self.nu)));
        }
        let r = self.nu.round();
        if r >= 1.0 && (self.nu - r).abs() < 1e-9 {
            return Err(Error::Domain(format!("nu = {} is a positive integer (logarithmic case)", self.nu)));
        }
        Ok(())
    }

    pub fn mu(&self, j: usize) -> f64 {
        if j == 1 {
            self.mu1
        } else {
            self.mu2
        }
    }

    /// `(2k + mu_j)(2k + mu_j - 1) - omega = 2k (2k + 2 mu_j - 1)`.
    pub fn denominator(&self, j: usize, k: usize) -> f64 {
        let p = self.mu(j) + 2.0 * k as f64;
        p * (p - 1.0) - self.omega
    }
}

/// Series with an adaptive truncation on the default disk `|z| <= 2`.
pub fn series_coeffs(order: ScalarOrder, j: usize, c0: C64, k_terms: usize) -> Result<SeriesSolution> {
    SeriesSolution::new(order, j, c0, k_terms, SERIES_DISK)
}

/// `c_j(x, lambda)` and its x-derivative, `lambda = rho^2`.
pub fn eval_c(sol: &SeriesSolution, x: f64, rho: C64) -> Result<(C64, C64)> {
    sol.eval(x, rho)
}

/// `e_k(x, rho) = e_k(rho x)` and `d/dx e_k(rho x)` for `|rho x| >= 1`.
pub fn eval_jost(order: ScalarOrder, k: usize, x: f64, rho: C64) -> Result<(C64, C64)> {
    let z = rho * x;
    if z.norm() < JOST_SWITCH * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "|rho x| = {} below the Jost switch {JOST_SWITCH}; use the beta connection",
            z.norm()
        )));
    }
    let engine = JostEngine::new(order)?;
    let (e, de) = match k {
        1 => engine.e1(z)?,
        2 => engine.e2(z)?,
        _ => return Err(Error::InvalidInput(format!("Jost index must be 1 or 2, got {k}"))),
    };
    Ok((e, rho * de))
}

/// Jost solution sampled on a grid with the measured asymptotic constant.
#[derive(Debug, Clone)]
pub struct JostSolution {
    pub order: ScalarOrder,
    pub k: usize,
    pub rho: C64,
    pub grid: Vec<f64>,
    pub values: Vec<C64>,
    pub derivatives: Vec<C64>,
    pub tail_cutoff: f64,
    /// `sup |rho x| |e_k^{(v)} (+-i rho)^{-v} exp(-+i rho x) - 1|` over the
    /// grid points with `|rho x| >= 1`, for `v = 0, 1`.
    pub m0: [f64; 2],
}

impl JostSolution {
    pub fn on_grid(order: ScalarOrder, k: usize, rho: C64, grid: &[f64]) -> Result<JostSolution> {
        let fss = ScalarFss::new(order, C64::new(1.0, 0.0))?;
        let mut values = Vec::with_capacity(grid.len());
        let mut derivatives = Vec::with_capacity(grid.len());
        let mut m0: [f64; 2] = [0.0, 0.0];
        let sign = if k == 1 { 1.0 } else { -1.0 };
        let irho = C64::new(0.0, sign) * rho;
        for &x in grid {
            let (e, de) = fss.e(k, x, rho)?;
            if (rho * x).norm() >= JOST_SWITCH {
                let ph = (-irho * x).exp();
                let s = (rho * x).norm();
                m0[0] = m0[0].max(s * (e * ph - 1.0).norm());
                m0[1] = m0[1].max(s * (de / irho * ph - 1.0).norm());
            }
            values.push(e);
            derivatives.push(de);
        }
        Ok(JostSolution {
            order,
            k,
            rho,
            grid: grid.to_vec(),
            values,
            derivatives,
            tail_cutoff: fss.jost.radius,
            m0,
        })
    }
}

/// Values and x-derivatives of `c_1, c_2, e_1, e_2` at one abscissa.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChannelPoint {
    pub c: [C64; 2],
    pub dc: [C64; 2],
    pub e: [C64; 2],
    pub de: [C64; 2],
}

/// Everything needed to evaluate the four scalar solutions of one channel
/// anywhere in `x > 0`, `Re rho >= 0`.
#[derive(Debug, Clone)]
pub struct ScalarFss {
    pub order: ScalarOrder,
    pub series: [SeriesSolution; 2],
    pub jost: JostEngine,
    pub beta: BetaConstants,
    beta_inv: [[C64; 2]; 2],
}

impl ScalarFss {
    /// Channel with `c_10 = c10` and `c_20 = 1/(2 nu c10)`.
    pub fn new(order: ScalarOrder, c10: C64) -> Result<ScalarFss> {
        order.validate()?;
        let c20 = (2.0 * order.nu * c10).inv();
        let s1 = SeriesSolution::adaptive(order, 1, c10, SERIES_DISK)?;
        let s2 = SeriesSolution::adaptive(order, 2, c20, SERIES_DISK)?;
        let jost = JostEngine::new(order)?;
        let beta = beta::beta_from_parts(&s1, &s2, &jost)?;
        let beta_inv = beta.inverse();
        Ok(ScalarFss {
            order,
            series: [s1, s2],
            jost,
            beta,
            beta_inv,
        })
    }

    /// `c_j(x, lambda)` and x-derivative; `rho` must satisfy `rho^2 = lambda`
    /// with `Re rho >= 0`.
    pub fn c(&self, j: usize, x: f64, lambda: C64, rho: C64) -> Result<(C64, C64)> {
        let z = rho * x;
        if z.norm() <= SERIES_DISK {
            return self.series[j - 1].eval_lambda(x, lambda);
        }
        let e1 = to_x(rho, self.jost.e1(z)?);
        let e2 = to_x(rho, self.jost.e2(z)?);
        Ok(self.c_from_e(j, rho, e1, e2))
    }

    fn c_from_e(&self, j: usize, rho: C64, e1: (C64, C64), e2: (C64, C64)) -> (C64, C64) {
        let s = cpow(rho, -self.order.mu(j));
        let b = &self.beta_inv[j - 1];
        (s * (b[0] * e1.0 + b[1] * e2.0), s * (b[0] * e1.1 + b[1] * e2.1))
    }

    fn e_from_c(&self, k: usize, rho: C64, c1: (C64, C64), c2: (C64, C64)) -> (C64, C64) {
        let b = &self.beta.beta[k - 1];
        let p1 = b[0] * cpow(rho, self.order.mu1);
        let p2 = b[1] * cpow(rho, self.order.mu2);
        (p1 * c1.0 + p2 * c2.0, p1 * c1.1 + p2 * c2.1)
    }

    /// `e_k(x, rho)` and x-derivative for `rho != 0`.
    pub fn e(&self, k: usize, x: f64, rho: C64) -> Result<(C64, C64)> {
        if rho.norm() == 0.0 || rho.re < 0.0 {
            return Err(Error::Domain(format!("Jost solutions need Re rho >= 0, rho != 0 (got {rho})")));
        }
        let z = rho * x;
        if z.norm() >= JOST_SWITCH {
            let v = if k == 1 { self.jost.e1(z)? } else { self.jost.e2(z)? };
            return Ok(to_x(rho, v));
        }
        let lambda = rho * rho;
        let c1 = self.series[0].eval_lambda(x, lambda)?;
        let c2 = self.series[1].eval_lambda(x, lambda)?;
        Ok(self.e_from_c(k, rho, c1, c2))
    }

    /// All four solutions at every abscissa. `with_e = false` skips the Jost
    /// family (needed when `rho = 0`).
    pub fn table(&self, lambda: C64, rho: C64, xs: &[f64], with_e: bool) -> Result<Vec<ChannelPoint>> {
        let mut out = vec![ChannelPoint::default(); xs.len()];
        let r = rho.norm();
        let with_e = with_e && r > 0.0;
        let far: Vec<usize> = (0..xs.len())
            .filter(|&i| {
                let s = r * xs[i];
                s > SERIES_DISK || (with_e && s >= JOST_SWITCH)
            })
            .collect();
        let mut jost = vec![((C64::default(), C64::default()), (C64::default(), C64::default())); xs.len()];
        if !far.is_empty() {
            let dir = rho / r;
            let radii: Vec<f64> = far.iter().map(|&i| r * xs[i]).collect();
            let f1 = self.jost.normalized_on_ray(dir, &radii)?;
            let f2 = self.jost.normalized_on_ray(dir.conj(), &radii)?;
            for (n, &i) in far.iter().enumerate() {
                let z = rho * xs[i];
                let e1 = jost::to_e1(z, f1[n].0, f1[n].1);
                let e2 = jost::to_e1(z.conj(), f2[n].0, f2[n].1);
                jost[i] = (to_x(rho, e1), to_x(rho, (e2.0.conj(), e2.1.conj())));
            }
        }
        for (i, &x) in xs.iter().enumerate() {
            let s = r * x;
            let p = &mut out[i];
            let (c1, c2) = if s <= SERIES_DISK {
                (self.series[0].eval_lambda(x, lambda)?, self.series[1].eval_lambda(x, lambda)?)
            } else {
                (
                    self.c_from_e(1, rho, jost[i].0, jost[i].1),
                    self.c_from_e(2, rho, jost[i].0, jost[i].1),
                )
            };
            p.c = [c1.0, c2.0];
            p.dc = [c1.1, c2.1];
            if with_e {
                let (e1, e2) = if s >= JOST_SWITCH {
                    jost[i]
                } else {
                    (self.e_from_c(1, rho, c1, c2), self.e_from_c(2, rho, c1, c2))
                };
                p.e = [e1.0, e2.0];
                p.de = [e1.1, e2.1];
            }
        }
        Ok(out)
    }
}

/// Converts `(e(z), e'(z))` to `(e(rho x), d/dx e(rho x))`.
fn to_x(rho: C64, v: (C64, C64)) -> (C64, C64) {
    (v.0, rho * v.1)
}

#[cfg(test)]
mod tests;
