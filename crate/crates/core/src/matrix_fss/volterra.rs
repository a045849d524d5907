//! Nystrom solver for linear integral equations of the form
//!
//! ```text
//! Y(x) = Y0(x) + sum_terms coef * L(x) int_{span(x)} R(t) Q(t) Y(t) dt
//! ```
//!
//! with diagonal `L`, `R` taken from the per-channel solution tables. Spans
//! are running integrals `int_lo^{clamp(x, lo, hi)}` or tails `int_x^T`.
//! The fixed point is found by successive approximations on the node values.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature::Mesh;
use crate::scalar_fss::ChannelPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Fam {
    C1,
    C2,
    E1,
    E2,
}

impl Fam {
    #[inline]
    pub(crate) fn value(self, p: &ChannelPoint) -> (C64, C64) {
        match self {
            Fam::C1 => (p.c[0], p.dc[0]),
            Fam::C2 => (p.c[1], p.dc[1]),
            Fam::E1 => (p.e[0], p.de[0]),
            Fam::E2 => (p.e[1], p.de[1]),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Span {
    /// `int_{lo}^{clamp(x, lo, hi)}`; `lo`/`hi` are panel indices (`hi`
    /// exclusive). `lo == 0` includes the analytic first cell.
    Lower { lo: usize, hi: usize },
    /// `int_x^T`.
    Upper,
}

#[derive(Debug, Clone)]
pub(crate) struct Term {
    pub coef: C64,
    pub left: Fam,
    pub right: Fam,
    pub span: Span,
    /// Leading exponents of `R` at zero, per channel.
    pub right_exp: Vec<f64>,
}

pub(crate) struct Kernel {
    pub mesh: Arc<Mesh>,
    pub m: usize,
    pub nc: usize,
    /// `nodes x m` channel values.
    pub table: Vec<ChannelPoint>,
    /// `nodes x (m x m)` potential, row-major.
    pub q: Vec<C64>,
    pub terms: Vec<Term>,
    /// The free term is block diagonal: column block `b` is
    /// `diag(free_fams[b])`.
    pub free_fams: Vec<Fam>,
    /// Leading exponents of the unknown, `m x nc`.
    pub unknown_exp: Vec<f64>,
    /// Normalization for the convergence test, `nodes x (m x nc)`.
    pub weight: Vec<f64>,
    free: Vec<C64>,
    free_d: Vec<C64>,
}

/// Block-diagonal free term at one abscissa, `m x nc` row-major.
pub(crate) fn free_block(m: usize, fams: &[Fam], point: &[ChannelPoint]) -> (Vec<C64>, Vec<C64>) {
    let nc = m * fams.len();
    let mut v = vec![C64::new(0.0, 0.0); m * nc];
    let mut d = v.clone();
    for (b, fam) in fams.iter().enumerate() {
        for p in 0..m {
            let (a, da) = fam.value(&point[p]);
            v[p * nc + b * m + p] = a;
            d[p * nc + b * m + p] = da;
        }
    }
    (v, d)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IterationReport {
    pub iterations: usize,
    /// Weighted sup-norm differences of successive iterates.
    pub deltas: Vec<f64>,
    /// Largest ratio of successive deltas over the tail of the iteration.
    pub contraction: f64,
}

impl IterationReport {
    pub(crate) fn from_deltas(deltas: Vec<f64>) -> IterationReport {
        let mut contraction: f64 = 0.0;
        for w in deltas.windows(2) {
            if w[0] > 1e-13 {
                contraction = contraction.max(w[1] / w[0]);
            }
        }
        IterationReport {
            iterations: deltas.len(),
            deltas,
            contraction,
        }
    }
}

pub(crate) struct Solution {
    pub values: Vec<C64>,
    pub derivs: Vec<C64>,
    pub report: IterationReport,
    /// Integrand `R Q Y` at the nodes, per term.
    integrands: Vec<Vec<C64>>,
    /// Per term: integral accumulated up to the start of each panel (lower
    /// spans) or from the end of each panel to `T` (tails).
    prefix: Vec<Vec<C64>>,
}

impl Kernel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        mesh: Arc<Mesh>,
        m: usize,
        table: Vec<ChannelPoint>,
        q: Vec<C64>,
        terms: Vec<Term>,
        free_fams: Vec<Fam>,
        unknown_exp: Vec<f64>,
        weight: Vec<f64>,
    ) -> Kernel {
        let nc = m * free_fams.len();
        let n = mesh.len();
        let b = m * nc;
        let mut free = vec![C64::new(0.0, 0.0); n * b];
        let mut free_d = free.clone();
        for i in 0..n {
            let (v, d) = free_block(m, &free_fams, &table[i * m..(i + 1) * m]);
            free[i * b..(i + 1) * b].copy_from_slice(&v);
            free_d[i * b..(i + 1) * b].copy_from_slice(&d);
        }
        Kernel {
            mesh,
            m,
            nc,
            table,
            q,
            terms,
            free_fams,
            unknown_exp,
            weight,
            free,
            free_d,
        }
    }

    #[inline]
    fn block(&self) -> usize {
        self.m * self.nc
    }

    fn qy(&self, y: &[C64], out: &mut [C64]) {
        let (m, nc, b) = (self.m, self.nc, self.block());
        for i in 0..self.mesh.len() {
            let qi = &self.q[i * m * m..(i + 1) * m * m];
            let yi = &y[i * b..(i + 1) * b];
            let oi = &mut out[i * b..(i + 1) * b];
            for p in 0..m {
                for c in 0..nc {
                    let mut acc = C64::new(0.0, 0.0);
                    for r in 0..m {
                        acc += qi[p * m + r] * yi[r * nc + c];
                    }
                    oi[p * nc + c] = acc;
                }
            }
        }
    }

    fn integrand(&self, term: &Term, qy: &[C64], out: &mut [C64]) {
        let (m, nc, b) = (self.m, self.nc, self.block());
        for i in 0..self.mesh.len() {
            for p in 0..m {
                let r = term.right.value(&self.table[i * m + p]).0;
                for c in 0..nc {
                    out[i * b + p * nc + c] = r * qy[i * b + p * nc + c];
                }
            }
        }
    }

    /// Analytic integral over `(0, x_min)` assuming power behaviour fixed by
    /// the values at the first node.
    fn first_cell(&self, term: &Term, y: &[C64]) -> Vec<C64> {
        let (m, nc) = (self.m, self.nc);
        let t0 = self.mesh.nodes[0];
        let xm = self.mesh.x_min;
        let mut out = vec![C64::new(0.0, 0.0); self.block()];
        for p in 0..m {
            let r = term.right.value(&self.table[p]).0;
            for c in 0..nc {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..m {
                    let g = term.right_exp[p] + self.unknown_exp[s * nc + c];
                    let f = r * self.q[p * m + s] * y[s * nc + c];
                    acc += f * ((xm / t0).powf(g) * xm / (g + 1.0));
                }
                out[p * nc + c] = acc;
            }
        }
        out
    }

    /// Running integrals at the nodes for one term; also returns the panel
    /// prefix sums used for off-node evaluation.
    fn running(&self, term: &Term, f: &[C64], first: &[C64], out: &mut [C64]) -> Vec<C64> {
        let b = self.block();
        let rule = &self.mesh.rule;
        let n = rule.n;
        let np = self.mesh.panels.len();
        let mut prefix = vec![C64::new(0.0, 0.0); (np + 1) * b];
        let mut cum = vec![C64::new(0.0, 0.0); b];
        match term.span {
            Span::Lower { lo, hi } => {
                if lo == 0 {
                    cum.copy_from_slice(first);
                }
                for (pi, panel) in self.mesh.panels.iter().enumerate() {
                    prefix[pi * b..(pi + 1) * b].copy_from_slice(&cum);
                    let base = panel.start * b;
                    if pi < lo {
                        out[base..base + n * b].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                        continue;
                    }
                    if pi >= hi {
                        for i in 0..n {
                            out[base + i * b..base + (i + 1) * b].copy_from_slice(&cum);
                        }
                        continue;
                    }
                    let h = panel.half();
                    for i in 0..n {
                        let row = rule.integ_row(i);
                        let o = &mut out[base + i * b..base + (i + 1) * b];
                        o.copy_from_slice(&cum);
                        for (k, a) in row.iter().enumerate() {
                            let fk = &f[base + k * b..base + (k + 1) * b];
                            let w = h * a;
                            for e in 0..b {
                                o[e] += fk[e] * w;
                            }
                        }
                    }
                    for (k, w) in rule.weights.iter().enumerate() {
                        let fk = &f[base + k * b..base + (k + 1) * b];
                        for e in 0..b {
                            cum[e] += fk[e] * (h * w);
                        }
                    }
                }
                prefix[np * b..(np + 1) * b].copy_from_slice(&cum);
            }
            Span::Upper => {
                for (pi, panel) in self.mesh.panels.iter().enumerate().rev() {
                    // prefix[pi + 1] holds the integral from the end of panel pi
                    prefix[(pi + 1) * b..(pi + 2) * b].copy_from_slice(&cum);
                    let base = panel.start * b;
                    let h = panel.half();
                    for i in 0..n {
                        let row = rule.integ_row(i);
                        let o = &mut out[base + i * b..base + (i + 1) * b];
                        o.copy_from_slice(&cum);
                        for (k, (a, w)) in row.iter().zip(&rule.weights).enumerate() {
                            let fk = &f[base + k * b..base + (k + 1) * b];
                            let wt = h * (w - a);
                            for e in 0..b {
                                o[e] += fk[e] * wt;
                            }
                        }
                    }
                    for (k, w) in rule.weights.iter().enumerate() {
                        let fk = &f[base + k * b..base + (k + 1) * b];
                        for e in 0..b {
                            cum[e] += fk[e] * (h * w);
                        }
                    }
                }
                prefix[0..b].copy_from_slice(&cum);
            }
        }
        prefix
    }

    fn apply(&self, y: &[C64], qy: &mut [C64], f: &mut [C64], run: &mut [C64], out: &mut [C64], out_d: Option<&mut [C64]>) {
        let (m, nc, b) = (self.m, self.nc, self.block());
        self.qy(y, qy);
        out.copy_from_slice(&self.free);
        let mut out_d = out_d;
        if let Some(d) = out_d.as_deref_mut() {
            d.copy_from_slice(&self.free_d);
        }
        for term in &self.terms {
            self.integrand(term, qy, f);
            let first = self.first_cell(term, y);
            self.running(term, f, &first, run);
            for i in 0..self.mesh.len() {
                for p in 0..m {
                    let (l, dl) = term.left.value(&self.table[i * m + p]);
                    let (l, dl) = (l * term.coef, dl * term.coef);
                    for c in 0..nc {
                        let k = i * b + p * nc + c;
                        out[k] += l * run[k];
                        if let Some(d) = out_d.as_deref_mut() {
                            d[k] += dl * run[k];
                        }
                    }
                }
            }
        }
    }

    /// Upper bound for `sup_x int_0^T ||K(x, t)|| dt` (row-sum norm) of the
    /// operator acting on `u = Y / n`, where `n` is a scalar normalization
    /// per node. Terms are combined by the triangle inequality and partial
    /// panels are approximated by node sums.
    pub(crate) fn bound(&self, norm: &[f64], norm_exp: f64) -> f64 {
        let m = self.m;
        let len = self.mesh.len();
        let mut kappa = vec![vec![0.0f64; m]; len];
        for term in &self.terms {
            let mut a = vec![0.0f64; len * m];
            for i in 0..len {
                for p in 0..m {
                    let r = term.right.value(&self.table[i * m + p]).0.norm();
                    let qs: f64 = (0..m).map(|s| self.q[i * m * m + p * m + s].norm()).sum();
                    a[i * m + p] = r * qs * norm[i] * self.mesh.weights[i];
                }
            }
            let t0 = self.mesh.nodes[0];
            let xm = self.mesh.x_min;
            let first: Vec<f64> = (0..m)
                .map(|p| {
                    let g = term.right_exp[p] + norm_exp;
                    a[p] / self.mesh.weights[0] * (xm / t0).powf(g) * xm / (g + 1.0)
                })
                .collect();
            let panel_of = |i: usize| i / self.mesh.rule.n;
            let mut integral = vec![0.0f64; len * m];
            match term.span {
                Span::Lower { lo, hi } => {
                    let mut cum: Vec<f64> = if lo == 0 { first.clone() } else { vec![0.0; m] };
                    for i in 0..len {
                        let pi = panel_of(i);
                        if pi >= lo && pi < hi {
                            for p in 0..m {
                                cum[p] += a[i * m + p];
                            }
                        }
                        if pi >= lo {
                            integral[i * m..(i + 1) * m].copy_from_slice(&cum);
                        }
                    }
                }
                Span::Upper => {
                    let mut cum = vec![0.0f64; m];
                    for i in (0..len).rev() {
                        for p in 0..m {
                            cum[p] += a[i * m + p];
                        }
                        integral[i * m..(i + 1) * m].copy_from_slice(&cum);
                    }
                }
            }
            for i in 0..len {
                for p in 0..m {
                    let l = term.left.value(&self.table[i * m + p]).0.norm();
                    kappa[i][p] += term.coef.norm() * l / norm[i] * integral[i * m + p];
                }
            }
        }
        kappa.iter().flatten().fold(0.0, |acc, &v| acc.max(v))
    }

    pub(crate) fn solve(&self, tol: f64, max_iter: usize) -> Result<Solution> {
        let len = self.free.len();
        let mut y = self.free.clone();
        let mut next = vec![C64::new(0.0, 0.0); len];
        let mut qy = vec![C64::new(0.0, 0.0); len];
        let mut f = vec![C64::new(0.0, 0.0); len];
        let mut run = vec![C64::new(0.0, 0.0); len];
        let mut deltas = Vec::new();
        let trivial = self.terms.is_empty() || self.q.iter().all(|z| *z == C64::new(0.0, 0.0));
        if !trivial {
            loop {
                self.apply(&y, &mut qy, &mut f, &mut run, &mut next, None);
                let mut delta: f64 = 0.0;
                for k in 0..len {
                    delta = delta.max((next[k] - y[k]).norm() / self.weight[k]);
                }
                if !delta.is_finite() {
                    return Err(Error::NoConvergence {
                        iterations: deltas.len() + 1,
                        delta,
                    });
                }
                std::mem::swap(&mut y, &mut next);
                deltas.push(delta);
                if delta <= tol {
                    break;
                }
                if deltas.len() >= max_iter {
                    return Err(Error::NoConvergence {
                        iterations: deltas.len(),
                        delta,
                    });
                }
            }
        } else {
            deltas.push(0.0);
        }
        // one final application gives derivatives and the stored integrands
        let mut vals = vec![C64::new(0.0, 0.0); len];
        let mut ders = vec![C64::new(0.0, 0.0); len];
        self.apply(&y, &mut qy, &mut f, &mut run, &mut vals, Some(&mut ders));
        let mut integrands = Vec::with_capacity(self.terms.len());
        let mut prefix = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            self.integrand(term, &qy, &mut f);
            let first = self.first_cell(term, &y);
            prefix.push(self.running(term, &f, &first, &mut run));
            integrands.push(f.clone());
        }
        Ok(Solution {
            values: vals,
            derivs: ders,
            report: IterationReport::from_deltas(deltas),
            integrands,
            prefix,
        })
    }
}

impl Solution {
    /// `int_{x_min}^T` of the integrand of a tail term, `m x nc` row-major.
    pub(crate) fn tail_total(&self, term: usize, block: usize) -> Vec<C64> {
        self.prefix[term][0..block].to_vec()
    }

    /// Value and derivative blocks (`m x nc`, row-major) at an arbitrary
    /// `x` in `[x_min, T]`; `point` holds the channel values at `x`.
    pub(crate) fn eval(&self, kernel: &Kernel, x: f64, point: &[ChannelPoint]) -> Result<(Vec<C64>, Vec<C64>)> {
        let (m, nc) = (kernel.m, kernel.nc);
        let b = m * nc;
        let mesh = &kernel.mesh;
        let (pi, s) = mesh
            .locate(x)
            .ok_or_else(|| Error::Domain(format!("x = {x} outside the mesh [{}, {}]", mesh.x_min, mesh.end)))?;
        let panel = mesh.panels[pi];
        let pw = mesh.rule.partial_weights(s);
        let h = panel.half();
        let (mut val, mut der) = free_block(m, &kernel.free_fams, point);
        let mut acc = vec![C64::new(0.0, 0.0); b];
        for (t, term) in kernel.terms.iter().enumerate() {
            let f = &self.integrands[t];
            let pre = &self.prefix[t];
            let base = panel.start * b;
            match term.span {
                Span::Lower { lo, hi } => {
                    if pi < lo {
                        acc.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    } else if pi >= hi {
                        acc.copy_from_slice(&pre[hi * b..(hi + 1) * b]);
                    } else {
                        acc.copy_from_slice(&pre[pi * b..(pi + 1) * b]);
                        for (k, w) in pw.iter().enumerate() {
                            for e in 0..b {
                                acc[e] += f[base + k * b + e] * (h * w);
                            }
                        }
                    }
                }
                Span::Upper => {
                    acc.copy_from_slice(&pre[(pi + 1) * b..(pi + 2) * b]);
                    for (k, (w, full)) in pw.iter().zip(&mesh.rule.weights).enumerate() {
                        for e in 0..b {
                            acc[e] += f[base + k * b + e] * (h * (full - w));
                        }
                    }
                }
            }
            for p in 0..m {
                let (l, dl) = term.left.value(&point[p]);
                for c in 0..nc {
                    val[p * nc + c] += term.coef * l * acc[p * nc + c];
                    der[p * nc + c] += term.coef * dl * acc[p * nc + c];
                }
            }
        }
        Ok((val, der))
    }
}
