//! Diagonal families `C_j`, `E_k` and the Bessel-type solutions `S_j`,
//! `S_j*` of the matrix equation.

mod potential;
pub(crate) mod volterra;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, sqrt_lambda, CMat, C64};
use crate::quadrature::{Mesh, MeshParams};
use crate::scalar_fss::{ChannelPoint, ScalarFss, ScalarOrder};

pub use potential::{Potential, PotentialTag};
pub use volterra::IterationReport;
use volterra::{Fam, Kernel, Solution, Span, Term};

/// Diagonal singularity data `omega = diag(nu_q^2 - 1/4)`.
#[derive(Debug, Clone, Serialize)]
pub struct SingularOrder {
    pub m: usize,
    pub nu: Vec<f64>,
    #[serde(skip)]
    pub channels: Vec<ScalarOrder>,
    /// `min(1, 2 nu_1)`.
    pub beta_exp: f64,
}

impl SingularOrder {
    pub fn new(nu: Vec<f64>) -> Result<SingularOrder> {
        if nu.is_empty() {
            return Err(Error::InvalidInput("nu: at least one channel is required".into()));
        }
        if nu.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput(format!("nu: entries must be nonincreasing, got {nu:?}")));
        }
        let channels = nu
            .iter()
            .enumerate()
            .map(|(q, &v)| ScalarOrder::new(v).map_err(|e| e.in_channel(q)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SingularOrder {
            m: nu.len(),
            beta_exp: (2.0 * nu[0]).min(1.0),
            nu,
            channels,
        })
    }

    /// `mu_{jq}`, `j` in {1, 2}, `q` zero-based.
    pub fn mu(&self, j: usize, q: usize) -> f64 {
        self.channels[q].mu(j)
    }

    pub fn omega(&self) -> Vec<f64> {
        self.channels.iter().map(|o| o.omega).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub mesh: MeshParams,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            mesh: MeshParams::default(),
            picard_tol: 1e-12,
            picard_max_iter: 200,
        }
    }
}

/// `-Y'' + (omega / x^2 + Q(x)) Y = lambda Y` on `(0, T]`.
#[derive(Debug, Clone)]
pub struct Equation {
    pub order: SingularOrder,
    pub potential: Potential,
    pub length: f64,
    pub settings: SolverSettings,
    pub certificate: f64,
    pub channels: Vec<ScalarFss>,
}

impl Equation {
    pub fn new(order: SingularOrder, potential: Potential, length: f64, settings: SolverSettings) -> Result<Equation> {
        if potential.m != order.m {
            return Err(Error::InvalidInput(format!(
                "potential is {0} x {0} but nu has {1} entries",
                potential.m, order.m
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!("T must be positive, got {length}")));
        }
        if !(settings.picard_tol > 0.0) || settings.picard_max_iter == 0 {
            return Err(Error::InvalidInput("solver tolerances must be positive".into()));
        }
        let certificate = potential.weighted_l1_certificate(order.nu[0], length)?;
        let channels = order
            .channels
            .iter()
            .enumerate()
            .map(|(q, &o)| ScalarFss::new(o, c(1.0, 0.0)).map_err(|e| e.in_channel(q)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Equation {
            order,
            potential,
            length,
            settings,
            certificate,
            channels,
        })
    }

    /// Same singularity and interval, different potential.
    pub fn with_potential(&self, potential: Potential) -> Result<Equation> {
        if potential.m != self.order.m {
            return Err(Error::InvalidInput("potential dimension mismatch".into()));
        }
        let certificate = potential.weighted_l1_certificate(self.order.nu[0], self.length)?;
        Ok(Equation {
            potential,
            certificate,
            ..self.clone()
        })
    }

    pub fn m(&self) -> usize {
        self.order.m
    }

    /// Mesh for solutions oscillating at frequency `rho_scale`, with
    /// `extra` breaks in addition to the potential's.
    pub fn mesh(&self, rho_scale: f64, extra: &[f64]) -> Result<Arc<Mesh>> {
        let mut breaks = self.potential.breakpoints();
        breaks.extend_from_slice(extra);
        Ok(Arc::new(Mesh::build(self.length, rho_scale, &breaks, &self.settings.mesh)?))
    }

    /// Channel values at every abscissa, `xs.len() x m` row-major.
    pub fn table(&self, lambda: C64, rho: C64, xs: &[f64], with_e: bool) -> Result<Vec<ChannelPoint>> {
        let m = self.m();
        let mut out = vec![ChannelPoint::default(); xs.len() * m];
        for (q, ch) in self.channels.iter().enumerate() {
            let col = ch.table(lambda, rho, xs, with_e).map_err(|e| e.in_channel(q))?;
            for (i, p) in col.into_iter().enumerate() {
                out[i * m + q] = p;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    C1,
    C2,
    E1,
    E2,
    S1,
    S2,
    S1Star,
    S2Star,
    Y1,
    Y2,
    Phi,
}

/// Values and x-derivatives of one solution family on a grid.
#[derive(Debug, Clone)]
pub struct FssEvaluation {
    pub family: Family,
    pub lambda: C64,
    pub rho: C64,
    pub abscissas: Vec<f64>,
    pub values: Vec<CMat>,
    pub derivatives: Vec<CMat>,
    pub report: Option<IterationReport>,
}

/// `C_j(x, lambda)` or `E_k(x, rho)` as diagonal matrices.
pub fn build_diagonal(eq: &Equation, family: Family, xs: &[f64], rho: C64) -> Result<FssEvaluation> {
    let fam = match family {
        Family::C1 => Fam::C1,
        Family::C2 => Fam::C2,
        Family::E1 => Fam::E1,
        Family::E2 => Fam::E2,
        other => return Err(Error::InvalidInput(format!("{other:?} is not a diagonal family"))),
    };
    if rho.re < 0.0 {
        return Err(Error::Domain(format!("rho must satisfy Re rho >= 0, got {rho}")));
    }
    if matches!(fam, Fam::E1 | Fam::E2) && rho.norm() == 0.0 {
        return Err(Error::Domain("Jost solutions are undefined at rho = 0".into()));
    }
    let lambda = rho * rho;
    let m = eq.m();
    let table = eq.table(lambda, rho, xs, matches!(fam, Fam::E1 | Fam::E2))?;
    let mut values = Vec::with_capacity(xs.len());
    let mut derivatives = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        let mut v = CMat::zeros(m, m);
        let mut d = CMat::zeros(m, m);
        for q in 0..m {
            let (a, da) = fam.value(&table[i * m + q]);
            v[(q, q)] = a;
            d[(q, q)] = da;
        }
        values.push(v);
        derivatives.push(d);
    }
    Ok(FssEvaluation {
        family,
        lambda,
        rho,
        abscissas: xs.to_vec(),
        values,
        derivatives,
        report: None,
    })
}

/// Solution pair `(S_1, S_2)` (or the adjoint pair) and derivatives at one
/// abscissa.
#[derive(Debug, Clone)]
pub struct BesselPoint {
    pub x: f64,
    pub s: [CMat; 2],
    pub ds: [CMat; 2],
}

/// Converged integral-equation solution for `S_1, S_2` at one `lambda`;
/// evaluates anywhere in `[x_min, T]`.
pub struct BesselSolve<'e> {
    eq: &'e Equation,
    pub lambda: C64,
    pub rho: C64,
    pub adjoint: bool,
    kernel: Kernel,
    solution: Solution,
    with_e: bool,
}

impl<'e> BesselSolve<'e> {
    pub fn report(&self) -> &IterationReport {
        &self.solution.report
    }

    pub fn mesh(&self) -> &Mesh {
        &self.kernel.mesh
    }

    fn unpack(&self, x: f64, v: &[C64], d: &[C64]) -> BesselPoint {
        let m = self.kernel.m;
        let nc = 2 * m;
        let block = |src: &[C64], j: usize| {
            let a = CMat::from_fn(m, m, |r, q| src[r * nc + j * m + q]);
            if self.adjoint {
                a.transpose()
            } else {
                a
            }
        };
        BesselPoint {
            x,
            s: [block(v, 0), block(v, 1)],
            ds: [block(d, 0), block(d, 1)],
        }
    }

    pub fn at(&self, x: f64) -> Result<BesselPoint> {
        let point = self.eq.table(self.lambda, self.rho, &[x], self.with_e)?;
        let (v, d) = self.solution.eval(&self.kernel, x, &point)?;
        Ok(self.unpack(x, &v, &d))
    }

    /// Values at the mesh nodes.
    pub fn at_node(&self, i: usize) -> BesselPoint {
        let b = 2 * self.kernel.m * self.kernel.m;
        let x = self.kernel.mesh.nodes[i];
        self.unpack(
            x,
            &self.solution.values[i * b..(i + 1) * b],
            &self.solution.derivs[i * b..(i + 1) * b],
        )
    }

    pub fn evaluate(&self, j: usize, xs: &[f64]) -> Result<FssEvaluation> {
        if j != 1 && j != 2 {
            return Err(Error::InvalidInput(format!("solution index must be 1 or 2, got {j}")));
        }
        let family = match (j, self.adjoint) {
            (1, false) => Family::S1,
            (2, false) => Family::S2,
            (1, true) => Family::S1Star,
            _ => Family::S2Star,
        };
        let mut values = Vec::with_capacity(xs.len());
        let mut derivatives = Vec::with_capacity(xs.len());
        for &x in xs {
            let p = self.at(x)?;
            values.push(p.s[j - 1].clone());
            derivatives.push(p.ds[j - 1].clone());
        }
        Ok(FssEvaluation {
            family,
            lambda: self.lambda,
            rho: self.rho,
            abscissas: xs.to_vec(),
            values,
            derivatives,
            report: Some(self.solution.report.clone()),
        })
    }
}

/// Solves
///
/// ```text
/// S_j(x) = C_j(x) + int_0^x (C_2(x) C_1(t) - C_1(x) C_2(t)) Q(t) S_j(t) dt
/// ```
///
/// for both `j` at once. Beyond `t = 1/rho_scale` the kernel is rewritten in
/// the Jost basis, `(E_1(x) E_2(t) - E_2(x) E_1(t)) / (2 i rho)`, which
/// avoids cancellation between exponentially large terms. With
/// `adjoint = true` the row solutions `S_j*` are returned, using
/// `S_j*(x; Q) = S_j(x; Q^T)^T`.
pub fn solve_bessel(eq: &Equation, lambda: C64, rho_scale: Option<f64>, adjoint: bool) -> Result<BesselSolve<'_>> {
    let rho = sqrt_lambda(lambda);
    let scale = rho_scale.unwrap_or(rho.norm());
    let m = eq.m();
    let t_end = eq.length;
    let split = if scale > 0.0 && 1.0 / scale < t_end && rho.norm() / scale >= 0.5 {
        Some(1.0 / scale)
    } else {
        None
    };
    let mesh = eq.mesh(scale, split.as_slice())?;
    let np = mesh.panels.len();
    let ks = match split {
        Some(xs) => mesh
            .panel_starting_at(xs)
            .ok_or_else(|| Error::Domain(format!("kernel split {xs} is not a mesh break")))?,
        None => np,
    };
    let with_e = split.is_some();
    let table = eq.table(lambda, rho, &mesh.nodes, with_e)?;
    let q = eq.potential.at_nodes(&mesh.nodes, adjoint);

    let mu1: Vec<f64> = (0..m).map(|p| eq.order.mu(1, p)).collect();
    let mu2: Vec<f64> = (0..m).map(|p| eq.order.mu(2, p)).collect();
    let one = c(1.0, 0.0);
    let mut terms = vec![
        Term {
            coef: one,
            left: Fam::C2,
            right: Fam::C1,
            span: Span::Lower { lo: 0, hi: ks },
            right_exp: mu1.clone(),
        },
        Term {
            coef: -one,
            left: Fam::C1,
            right: Fam::C2,
            span: Span::Lower { lo: 0, hi: ks },
            right_exp: mu2.clone(),
        },
    ];
    if with_e {
        let k = (2.0 * crate::linalg::I * rho).inv();
        terms.push(Term {
            coef: k,
            left: Fam::E1,
            right: Fam::E2,
            span: Span::Lower { lo: ks, hi: np },
            right_exp: mu1.clone(),
        });
        terms.push(Term {
            coef: -k,
            left: Fam::E2,
            right: Fam::E1,
            span: Span::Lower { lo: ks, hi: np },
            right_exp: mu1.clone(),
        });
    }

    let nc = 2 * m;
    let col_mu = |col: usize| eq.order.mu(col / m + 1, col % m);
    let mut unknown_exp = vec![0.0; m * nc];
    for s in 0..m {
        for col in 0..nc {
            unknown_exp[s * nc + col] = col_mu(col);
        }
    }
    let r = rho.norm();
    let tau = rho.im.abs();
    let mut weight = Vec::with_capacity(mesh.len() * m * nc);
    for &x in &mesh.nodes {
        for _ in 0..m {
            for col in 0..nc {
                let mu = col_mu(col);
                weight.push(if r * x <= 1.0 { x.powf(mu) } else { r.powf(-mu) * (tau * x).exp() });
            }
        }
    }
    let kernel = Kernel::new(mesh, m, table, q, terms, vec![Fam::C1, Fam::C2], unknown_exp, weight);
    let solution = kernel.solve(eq.settings.picard_tol, eq.settings.picard_max_iter)?;
    Ok(BesselSolve {
        eq,
        lambda,
        rho,
        adjoint,
        kernel,
        solution,
        with_e,
    })
}

pub fn solve_s(eq: &Equation, j: usize, lambda: C64, xs: &[f64]) -> Result<FssEvaluation> {
    solve_bessel(eq, lambda, None, false)?.evaluate(j, xs)
}

pub fn solve_s_star(eq: &Equation, j: usize, lambda: C64, xs: &[f64]) -> Result<FssEvaluation> {
    solve_bessel(eq, lambda, None, true)?.evaluate(j, xs)
}

/// `max ||(1 / 2 pi i) int S_j(x, lambda) d lambda||` over the circle
/// `|lambda - center| = radius` (trapezoid rule with `nodes` points),
/// relative to the largest `||S_j||` on the loop. Zero for entire `S_j`.
pub fn entirety_probe(eq: &Equation, j: usize, x: f64, center: C64, radius: f64, nodes: usize) -> Result<f64> {
    if j != 1 && j != 2 {
        return Err(Error::InvalidInput(format!("solution index must be 1 or 2, got {j}")));
    }
    let lambdas: Vec<C64> = (0..nodes)
        .map(|k| center + radius * C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64))
        .collect();
    let vals = crate::par::try_map(&lambdas, |&l| -> Result<CMat> {
        Ok(solve_bessel(eq, l, None, false)?.at(x)?.s[j - 1].clone())
    })?;
    let m = eq.m();
    let mut acc = CMat::zeros(m, m);
    let mut scale: f64 = 0.0;
    for (l, v) in lambdas.iter().zip(&vals) {
        acc += v * (*l - center);
        scale = scale.max(crate::linalg::max_norm(v));
    }
    acc /= c(nodes as f64, 0.0);
    Ok(crate::linalg::max_norm(&acc) / scale.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests;
