//! Named invariant checks with measured values and tolerances, grouped the
//! way the command-line `verify` command and the acceptance suite report
//! them.

use serde::Serialize;

use crate::birkhoff::{sector_boundary, successive_approximation_report, CONTRACTION_LIMIT};
use crate::error::Result;
use crate::linalg::{c, identity, max_norm, sqrt_lambda, wronskian, CMat, C64, I};
use crate::matrix_fss::{build_diagonal, solve_bessel, solve_s, Equation, Family};
use crate::oracle::{compare_bessel, shooting_eigenvalue, OracleSettings};
use crate::spectral::{sigma_forms, BoundaryProblem, SpectralDatum};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Worst check relative to its tolerance.
pub fn worst(checks: &[Check]) -> Option<&Check> {
    checks
        .iter()
        .max_by(|a, b| (a.value / a.tolerance).partial_cmp(&(b.value / b.tolerance)).unwrap())
}

pub const WRONSKIAN_TOL: f64 = 1e-8;

/// `max(1, |Z| |Y'| + |Z'| |Y|)`: the size of the products cancelling in
/// `<Z, Y>`, against which its rounding error is measured.
fn product_scale(z: &CMat, dz: &CMat, y: &CMat, dy: &CMat) -> f64 {
    (max_norm(z) * max_norm(dy) + max_norm(dz) * max_norm(y)).max(1.0)
}

/// Scalar and block Wronskian identities at one `lambda` on `xs`. Each
/// deviation is relative to the size of the products that cancel in it.
pub fn wronskian_checks(eq: &Equation, lambda: C64, xs: &[f64]) -> Result<Vec<Check>> {
    let rho = sqrt_lambda(lambda);
    let m = eq.m();
    let id = identity(m);
    let mut out = Vec::new();

    let c1 = build_diagonal(eq, Family::C1, xs, rho)?;
    let c2 = build_diagonal(eq, Family::C2, xs, rho)?;
    let e1 = build_diagonal(eq, Family::E1, xs, rho)?;
    let e2 = build_diagonal(eq, Family::E2, xs, rho)?;
    let (mut wc, mut we) = (0.0f64, 0.0f64);
    for i in 0..xs.len() {
        let (a, da, b, db) = (&c1.values[i], &c1.derivatives[i], &c2.values[i], &c2.derivatives[i]);
        wc = wc.max(max_norm(&(wronskian(a, da, b, db) - &id)) / product_scale(a, da, b, db));
        let (a, da, b, db) = (&e1.values[i], &e1.derivatives[i], &e2.values[i], &e2.derivatives[i]);
        let w = wronskian(a, da, b, db) / rho;
        we = we.max(max_norm(&(w + &id * (2.0 * I))) / (product_scale(a, da, b, db) / rho.norm()).max(1.0));
    }
    out.push(Check::at_most("<c1,c2> = 1", wc, WRONSKIAN_TOL));
    out.push(Check::at_most("<e1,e2> = -2i", we, WRONSKIAN_TOL));

    let (mut wd, mut wr) = (0.0f64, 0.0f64);
    for ch in &eq.channels {
        let b = &ch.beta;
        wd = wd.max((b.det() + 2.0 * I).norm());
        for j in 0..2 {
            let phase = (I * std::f64::consts::PI * ch.order.mu(j + 1)).exp();
            wr = wr.max((b.beta[1][j] - phase * b.beta[0][j]).norm() / b.beta[0][j].norm());
        }
    }
    out.push(Check::at_most("det beta0 = -2i", wd, WRONSKIAN_TOL));
    out.push(Check::at_most("beta0_2j = exp(i pi mu_j) beta0_1j", wr, WRONSKIAN_TOL));

    let s = solve_bessel(eq, lambda, None, false)?;
    let t = solve_bessel(eq, lambda, None, true)?;
    let mut ws = 0.0f64;
    for &x in xs {
        let a = s.at(x)?;
        let b = t.at(x)?;
        for j in 0..2 {
            for k in 0..2 {
                let w = wronskian(&b.s[j], &b.ds[j], &a.s[k], &a.ds[k]);
                let scale = product_scale(&b.s[j], &b.ds[j], &a.s[k], &a.ds[k]);
                let want = match (j, k) {
                    (0, 1) => id.clone(),
                    (1, 0) => -&id,
                    _ => CMat::zeros(m, m),
                };
                ws = ws.max(max_norm(&(w - want)) / scale);
            }
        }
    }
    out.push(Check::at_most("<S_j*,S_k> = (-1)^(j-1) delta_jk", ws, WRONSKIAN_TOL));

    let mut wsig = 0.0f64;
    for k in 0..2 {
        let sk = solve_s(eq, k + 1, lambda, xs)?;
        let f = sigma_forms(eq, &sk, WRONSKIAN_TOL)?;
        for j in 0..2 {
            let want = if j == k { id.clone() } else { CMat::zeros(m, m) };
            wsig = wsig.max(max_norm(&(&f.sigma[j] - want)));
        }
    }
    out.push(Check::at_most("sigma_j(S_k) = delta_jk", wsig, WRONSKIAN_TOL));
    Ok(out)
}

pub const ORACLE_TOL: f64 = 1e-8;
pub const SHOOTING_TOL: f64 = 1e-7;

/// `[T/100, T]` with `points` geometrically spaced abscissas.
pub fn oracle_grid(length: f64, points: usize) -> Vec<f64> {
    let a = length / 100.0;
    let mut g: Vec<f64> = (0..points)
        .map(|i| a * 100f64.powf(i as f64 / (points - 1) as f64))
        .collect();
    g[points - 1] = length;
    g
}

/// Integral-equation `S_j`, `S_j*` against direct integration.
pub fn oracle_checks(eq: &Equation, lambdas: &[C64], settings: &OracleSettings) -> Result<Vec<Check>> {
    let grid = oracle_grid(eq.length, 9);
    let mut out = Vec::new();
    for &lambda in lambdas {
        for adjoint in [false, true] {
            let run = compare_bessel(eq, lambda, &grid, adjoint, settings)?;
            let name = if adjoint { "S_j*" } else { "S_j" };
            out.push(Check::at_most(format!("{name} vs ODE at lambda = {lambda}"), run.max_deviation, ORACLE_TOL));
        }
    }
    Ok(out)
}

/// Contour roots against shooting with the direct integrator.
pub fn shooting_checks(p: &BoundaryProblem, data: &[SpectralDatum], settings: &OracleSettings) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for d in data {
        for &r in &d.roots {
            let s = shooting_eigenvalue(&p.eq, &p.h, &p.big_h, r, settings)?;
            out.push(Check::at_most(
                format!("shooting vs contour, n = {}, group {}", d.n, d.group + 1),
                (s - r).norm(),
                SHOOTING_TOL,
            ));
        }
    }
    Ok(out)
}

pub const SECTOR_TOL: f64 = 1e-8;

/// Kernel bound and iterate decay at each `rho`, and with `boundary_rho`
/// the agreement of the two sector constructions on the real axis.
pub fn birkhoff_checks(eq: &Equation, rhos: &[C64], boundary_rho: Option<f64>) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &rho in rhos {
        for k in 1..=2 {
            let r = successive_approximation_report(eq, k, rho)?;
            out.push(Check::at_most(format!("kernel bound, Y_{k}, rho = {rho}"), r.kernel_bound, CONTRACTION_LIMIT));
            out.push(Check::at_most(
                format!("iterate ratio within kernel bound, Y_{k}, rho = {rho}"),
                r.observed_ratio,
                r.kernel_bound,
            ));
        }
    }
    let Some(boundary_rho) = boundary_rho else {
        return Ok(out);
    };
    let xs: Vec<f64> = (1..=8).map(|i| eq.length * i as f64 / 8.0).collect();
    let rep = sector_boundary(eq, boundary_rho, &xs)?;
    for k in 0..2 {
        out.push(Check::at_most(
            format!("sector continuity, Y_{}, rho = {boundary_rho}", k + 1),
            rep.within_sector[k],
            SECTOR_TOL,
        ));
        out.push(Check::at_most(
            format!("cross-sector agreement, Y_{}, rho = {boundary_rho}", k + 1),
            rep.cross_sector[k],
            SECTOR_TOL,
        ));
    }
    Ok(out)
}

/// Default spectral parameters used by `wronskian_checks` callers.
pub fn sample_lambdas() -> Vec<C64> {
    vec![c(5.0, 2.0), c(-30.0, 0.0), c(400.0, 0.0)]
}
