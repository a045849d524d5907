use crate::error::{Error, Result};
use crate::linalg::{c, C64};

use super::jost::JostEngine;
use super::series::SeriesSolution;
use super::ScalarOrder;

pub const MATCH_POINT: f64 = 1.5;
pub const CHECK_POINT: f64 = 1.8;
const BETA_TOL: f64 = 1e-9;

/// Connection constants in `e_k = beta_k1 c_1 + beta_k2 c_2`.
#[derive(Debug, Clone)]
pub struct BetaConstants {
    pub order: ScalarOrder,
    pub beta: [[C64; 2]; 2],
    pub c10: C64,
    pub c20: C64,
    /// Max entry difference between the extractions at the two abscissas.
    pub check_deviation: f64,
}

impl BetaConstants {
    pub fn det(&self) -> C64 {
        self.beta[0][0] * self.beta[1][1] - self.beta[0][1] * self.beta[1][0]
    }

    pub fn inverse(&self) -> [[C64; 2]; 2] {
        let d = self.det();
        let b = &self.beta;
        [[b[1][1] / d, -b[0][1] / d], [-b[1][0] / d, b[0][0] / d]]
    }
}

fn extract(x: f64, s1: &SeriesSolution, s2: &SeriesSolution, jost: &JostEngine) -> Result<[[C64; 2]; 2]> {
    let z = c(x, 0.0);
    let (c1, dc1) = s1.eval_unscaled(z)?;
    let (c2, dc2) = s2.eval_unscaled(z)?;
    let es = [jost.e1(z)?, jost.e2(z)?];
    let mut beta = [[C64::new(0.0, 0.0); 2]; 2];
    for (k, (e, de)) in es.iter().enumerate() {
        beta[k][0] = e * dc2 - de * c2;
        beta[k][1] = -(e * dc1 - de * c1);
    }
    Ok(beta)
}

pub fn beta_constants(order: ScalarOrder, c10: C64, c20: C64) -> Result<BetaConstants> {
    order.validate()?;
    let target = 1.0 / (2.0 * order.nu);
    if ((c10 * c20) - target).norm() > 1e-12 * target {
        return Err(Error::InvalidInput(format!(
            "normalization requires c10 c20 = 1/(2 nu) = {target}, got {}",
            c10 * c20
        )));
    }
    let s1 = SeriesSolution::adaptive(order, 1, c10, 2.0)?;
    let s2 = SeriesSolution::adaptive(order, 2, c20, 2.0)?;
    let jost = JostEngine::new(order)?;
    beta_from_parts(&s1, &s2, &jost)
}

pub(crate) fn beta_from_parts(s1: &SeriesSolution, s2: &SeriesSolution, jost: &JostEngine) -> Result<BetaConstants> {
    let beta = extract(MATCH_POINT, s1, s2, jost)?;
    let check = extract(CHECK_POINT, s1, s2, jost)?;
    let mut dev: f64 = 0.0;
    for k in 0..2 {
        for j in 0..2 {
            dev = dev.max((beta[k][j] - check[k][j]).norm() / beta[k][j].norm().max(1.0));
        }
    }
    if dev > BETA_TOL {
        return Err(Error::accuracy("beta0 extraction at two matching abscissas", dev, BETA_TOL));
    }
    Ok(BetaConstants {
        order: s1.order,
        beta,
        c10: s1.c0,
        c20: s2.c0,
        check_deviation: dev,
    })
}
