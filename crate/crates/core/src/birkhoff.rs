//! Birkhoff-type solutions `Y_1 ~ exp(i rho x)`, `Y_2 ~ exp(-i rho x)` for
//! large `|rho|`.
//!
//! In the sector `Im rho >= 0` the recessive solution `Y_1` solves
//!
//! ```text
//! Y_1(x) = E_1(x) + (2 i rho)^-1 [ int_0^x E_1(x) E_2(t) Q Y_1 dt + int_x^T E_2(x) E_1(t) Q Y_1 dt ]
//! ```
//!
//! and the dominant `Y_2` the Volterra equation with kernel
//! `(E_1(x) E_2(t) - E_2(x) E_1(t)) / (2 i rho)`. In `Im rho <= 0` the roles
//! are exchanged. Solutions are only accepted when the kernel bound of the
//! normalized equation is below `1/2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, max_norm, CMat, C64, I};
use crate::matrix_fss::volterra::{Fam, Kernel, Solution, Span, Term};
use crate::matrix_fss::{Equation, Family, FssEvaluation, IterationReport};

/// Largest kernel bound for which a solve is accepted.
pub const CONTRACTION_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sector {
    /// `arg rho in [0, pi/2]`
    Upper,
    /// `arg rho in [-pi/2, 0]`
    Lower,
}

impl Sector {
    /// `Upper` for `Im rho >= 0`.
    pub fn of(rho: C64) -> Sector {
        if rho.im >= 0.0 {
            Sector::Upper
        } else {
            Sector::Lower
        }
    }

    fn contains(self, rho: C64) -> bool {
        match self {
            Sector::Upper => rho.im >= 0.0,
            Sector::Lower => rho.im <= 0.0,
        }
    }
}

pub struct BirkhoffSolve<'e> {
    eq: &'e Equation,
    pub k: usize,
    pub rho: C64,
    pub sector: Sector,
    /// Bound on `sup_x int ||K_k(x, t)|| dt` for the normalized unknown.
    pub kernel_bound: f64,
    kernel: Kernel,
    solution: Solution,
}

impl<'e> BirkhoffSolve<'e> {
    pub fn report(&self) -> &IterationReport {
        &self.solution.report
    }

    /// `Y_k(x)` and `Y_k'(x)`.
    pub fn at(&self, x: f64) -> Result<(CMat, CMat)> {
        let m = self.kernel.m;
        let point = self.eq.table(self.rho * self.rho, self.rho, &[x], true)?;
        let (v, d) = self.solution.eval(&self.kernel, x, &point)?;
        Ok((CMat::from_row_slice(m, m, &v), CMat::from_row_slice(m, m, &d)))
    }

    pub fn evaluate(&self, xs: &[f64]) -> Result<FssEvaluation> {
        let mut values = Vec::with_capacity(xs.len());
        let mut derivatives = Vec::with_capacity(xs.len());
        for &x in xs {
            let (v, d) = self.at(x)?;
            values.push(v);
            derivatives.push(d);
        }
        Ok(FssEvaluation {
            family: if self.k == 1 { Family::Y1 } else { Family::Y2 },
            lambda: self.rho * self.rho,
            rho: self.rho,
            abscissas: xs.to_vec(),
            values,
            derivatives,
            report: Some(self.solution.report.clone()),
        })
    }

    /// `||Y_k(x) exp(-+ i rho x) - I||` and the derivative analogue
    /// `||Y_k'(x) (+-i rho)^-1 exp(-+ i rho x) - I||`.
    pub fn asymptotic_deviation(&self, x: f64) -> Result<(f64, f64)> {
        let (v, d) = self.at(x)?;
        let s = if self.k == 1 { I } else { -I };
        let f = (-s * self.rho * x).exp();
        let id = CMat::identity(self.kernel.m, self.kernel.m);
        Ok((
            max_norm(&(v * f - &id)),
            max_norm(&(d * (f / (s * self.rho)) - &id)),
        ))
    }

    /// Scalar normalization `n(x)` of the unknown `u = Y / n`.
    pub fn normalization(&self, x: f64) -> f64 {
        normalization(self.eq, self.k, self.rho, x)
    }
}

fn normalization(eq: &Equation, k: usize, rho: C64, x: f64) -> f64 {
    let r = rho.norm() * x;
    if r < 1.0 {
        r.powf(eq.order.mu(1, 0))
    } else {
        let s = if k == 1 { 1.0 } else { -1.0 };
        (-s * rho.im * x).exp()
    }
}

/// Solves for `Y_k` in `sector` (default: the sector containing `rho`).
pub fn solve_y(eq: &Equation, k: usize, rho: C64, sector: Option<Sector>) -> Result<BirkhoffSolve<'_>> {
    if k != 1 && k != 2 {
        return Err(Error::InvalidInput(format!("Birkhoff index must be 1 or 2, got {k}")));
    }
    if rho.re < 0.0 || rho.norm() == 0.0 {
        return Err(Error::Domain(format!("Birkhoff solutions need Re rho >= 0, rho != 0 (got {rho})")));
    }
    let sector = sector.unwrap_or_else(|| Sector::of(rho));
    if !sector.contains(rho) {
        return Err(Error::Domain(format!("rho = {rho} is not in the closed sector {sector:?}")));
    }
    let m = eq.m();
    let r = rho.norm();
    let split = if 1.0 / r < eq.length { Some(1.0 / r) } else { None };
    let mesh = eq.mesh(r, split.as_slice())?;
    let np = mesh.panels.len();
    let ks = match split {
        Some(xs) => mesh
            .panel_starting_at(xs)
            .ok_or_else(|| Error::Domain(format!("kernel split {xs} is not a mesh break")))?,
        None => np,
    };
    let table = eq.table(rho * rho, rho, &mesh.nodes, true)?;
    let q = eq.potential.at_nodes(&mesh.nodes, false);
    let mu1: Vec<f64> = (0..m).map(|p| eq.order.mu(1, p)).collect();
    let mu2: Vec<f64> = (0..m).map(|p| eq.order.mu(2, p)).collect();
    let kc = (2.0 * I * rho).inv();
    let one = c(1.0, 0.0);
    let term = |coef: C64, left: Fam, right: Fam, span: Span| Term {
        coef,
        left,
        right,
        span,
        right_exp: match right {
            Fam::C2 => mu2.clone(),
            _ => mu1.clone(),
        },
    };
    // Volterra members use the Green function, split like the S equations.
    let volterra = || {
        vec![
            term(one, Fam::C2, Fam::C1, Span::Lower { lo: 0, hi: ks }),
            term(-one, Fam::C1, Fam::C2, Span::Lower { lo: 0, hi: ks }),
            term(kc, Fam::E1, Fam::E2, Span::Lower { lo: ks, hi: np }),
            term(-kc, Fam::E2, Fam::E1, Span::Lower { lo: ks, hi: np }),
        ]
    };
    let terms = match (sector, k) {
        (Sector::Upper, 1) => vec![
            term(kc, Fam::E1, Fam::E2, Span::Lower { lo: 0, hi: np }),
            term(kc, Fam::E2, Fam::E1, Span::Upper),
        ],
        (Sector::Lower, 2) => vec![
            term(-kc, Fam::E2, Fam::E1, Span::Lower { lo: 0, hi: np }),
            term(-kc, Fam::E1, Fam::E2, Span::Upper),
        ],
        _ => volterra(),
    };
    let free = if k == 1 { Fam::E1 } else { Fam::E2 };
    let norm: Vec<f64> = mesh.nodes.iter().map(|&x| normalization(eq, k, rho, x)).collect();
    let weight: Vec<f64> = norm.iter().flat_map(|&n| std::iter::repeat_n(n, m * m)).collect();
    let unknown_exp: Vec<f64> = (0..m * m).map(|e| mu1[e % m]).collect();
    let kernel = Kernel::new(mesh, m, table, q, terms, vec![free], unknown_exp, weight);
    let kernel_bound = kernel.bound(&norm, eq.order.mu(1, 0));
    if kernel_bound >= CONTRACTION_LIMIT {
        return Err(Error::RhoTooSmall {
            rho_abs: r,
            bound: kernel_bound,
        });
    }
    let solution = kernel.solve(eq.settings.picard_tol, eq.settings.picard_max_iter)?;
    Ok(BirkhoffSolve {
        eq,
        k,
        rho,
        sector,
        kernel_bound,
        kernel,
        solution,
    })
}

/// Per-iteration weighted sup-norm deltas of the successive approximations
/// together with the kernel bound they should respect.
#[derive(Debug, Clone, Serialize)]
pub struct ApproximationReport {
    pub k: usize,
    pub rho: C64,
    pub sector: Sector,
    pub kernel_bound: f64,
    pub deltas: Vec<f64>,
    /// Largest observed ratio of successive deltas.
    pub observed_ratio: f64,
}

pub fn successive_approximation_report(eq: &Equation, k: usize, rho: C64) -> Result<ApproximationReport> {
    let y = solve_y(eq, k, rho, None)?;
    Ok(ApproximationReport {
        k,
        rho,
        sector: y.sector,
        kernel_bound: y.kernel_bound,
        deltas: y.report().deltas.clone(),
        observed_ratio: y.report().contraction,
    })
}

/// Smallest `|rho|` on the ray `arg rho = arg dir` (searched on a geometric
/// grid from `start`) for which both `Y_1` and `Y_2` are accepted.
pub fn adaptive_threshold(eq: &Equation, dir: C64, start: f64) -> Result<f64> {
    let dir = dir / dir.norm();
    let mut r = start.max(1e-3);
    for _ in 0..60 {
        let rho = dir * r;
        let ok = |k| match solve_y(eq, k, rho, None) {
            Ok(_) => Ok(true),
            Err(Error::RhoTooSmall { .. }) => Ok(false),
            Err(e) => Err(e),
        };
        if ok(1)? && ok(2)? {
            return Ok(r);
        }
        r *= 1.25;
    }
    Err(Error::Regime(format!("no accepted Birkhoff solve up to |rho| = {r}")))
}

/// Comparison of the two sector constructions on their shared boundary
/// `arg rho = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct SectorBoundaryReport {
    pub rho: f64,
    /// `max_x ||Y_k^(upper) - Y_k^(lower)|| / ||Y_k||` for `k = 1, 2`.
    pub cross_sector: [f64; 2],
    /// Same, after subtracting the homogeneous term by which the two
    /// constructions differ (see [`sector_boundary`]).
    pub cross_sector_explained: [f64; 2],
    /// `max_x ||Y_k(rho e^{+-i eps}) - Y_k(rho)|| / ||Y_k||` within each
    /// sector, with `eps |rho| T = 1e-10`.
    pub within_sector: [f64; 2],
}

/// On the real axis both sector constructions apply but need not coincide:
/// the two-sided equation in one sector and the Volterra equation in the
/// other differ by a multiple of the opposite Volterra solution,
///
/// ```text
/// Y_1^(upper) = Y_1^(lower) + Y_2^(vol) C,   C =  (2 i rho)^-1 int_0^T E_1 Q Y_1^(upper) dt,
/// Y_2^(lower) = Y_2^(upper) + Y_1^(vol) C',  C' = -(2 i rho)^-1 int_0^T E_2 Q Y_2^(lower) dt.
/// ```
///
/// The report gives the raw discrepancy, the discrepancy after removing
/// this term, and the continuity of each construction up to the boundary.
pub fn sector_boundary(eq: &Equation, rho: f64, xs: &[f64]) -> Result<SectorBoundaryReport> {
    let m = eq.m();
    let r = c(rho, 0.0);
    let eps = 1e-10 / (rho * eq.length);
    let mut cross = [0.0f64; 2];
    let mut explained = [0.0f64; 2];
    let mut within = [0.0f64; 2];
    for k in 1..=2 {
        let (two_sided, volterra) = if k == 1 {
            (Sector::Upper, Sector::Lower)
        } else {
            (Sector::Lower, Sector::Upper)
        };
        let a = solve_y(eq, k, r, Some(two_sided))?;
        let b = solve_y(eq, k, r, Some(volterra))?;
        let other = solve_y(eq, 3 - k, r, Some(two_sided))?;
        let tail = a.solution.tail_total(1, m * m);
        let cmat = CMat::from_row_slice(m, m, &tail) * a.kernel.terms[1].coef;
        let shift = |s: Sector| if s == Sector::Upper { eps } else { -eps };
        let near_a = solve_y(eq, k, r * C64::from_polar(1.0, shift(two_sided)), Some(two_sided))?;
        let near_b = solve_y(eq, k, r * C64::from_polar(1.0, shift(volterra)), Some(volterra))?;
        for &x in xs {
            let (va, _) = a.at(x)?;
            let (vb, _) = b.at(x)?;
            let (vo, _) = other.at(x)?;
            let scale = max_norm(&va);
            let diff = &va - &vb;
            cross[k - 1] = cross[k - 1].max(max_norm(&diff) / scale);
            explained[k - 1] = explained[k - 1].max(max_norm(&(diff - vo * &cmat)) / scale);
            let da = max_norm(&(near_a.at(x)?.0 - &va));
            let db = max_norm(&(near_b.at(x)?.0 - &vb));
            within[k - 1] = within[k - 1].max(da.max(db) / scale);
        }
    }
    Ok(SectorBoundaryReport {
        rho,
        cross_sector: cross,
        cross_sector_explained: explained,
        within_sector: within,
    })
}

#[cfg(test)]
mod tests;
