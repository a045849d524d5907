//! Composite Gauss-Legendre panels on `(0, T]`, geometrically graded toward
//! the singular endpoint, with intra-panel integration matrices for Volterra
//! (running) integrals.

use std::sync::Arc;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference rule on `[-1, 1]` together with the running-integral matrix
/// `A[i][k] = int_{-1}^{s_i} L_k(s) ds` of its Lagrange basis.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    bary: Vec<f64>,
    integ: Vec<f64>,
}

impl PanelRule {
    pub fn new(n: usize) -> Result<PanelRule> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("panel rule needs at least 2 nodes, got {n}")));
        }
        let rule = GaussLegendre::new(n.try_into().unwrap());
        let mut pairs: Vec<(f64, f64)> = rule.into_node_weight_pairs().into_vec();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let bary = (0..n)
            .map(|k| {
                let prod: f64 = (0..n).filter(|&l| l != k).map(|l| nodes[k] - nodes[l]).product();
                1.0 / prod
            })
            .collect();
        let mut out = PanelRule {
            n,
            nodes,
            weights,
            bary,
            integ: Vec::new(),
        };
        let mut integ = Vec::with_capacity(n * n);
        for i in 0..n {
            integ.extend(out.partial_weights(out.nodes[i]));
        }
        out.integ = integ;
        Ok(out)
    }

    /// Lagrange basis values at `s` (barycentric form).
    pub fn lagrange(&self, s: f64) -> Vec<f64> {
        if let Some(k) = self.nodes.iter().position(|&x| x == s) {
            let mut v = vec![0.0; self.n];
            v[k] = 1.0;
            return v;
        }
        let terms: Vec<f64> = (0..self.n).map(|k| self.bary[k] / (s - self.nodes[k])).collect();
        let total: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / total).collect()
    }

    /// `int_{-1}^{s} L_k` for every basis function.
    pub fn partial_weights(&self, s: f64) -> Vec<f64> {
        let half = 0.5 * (s + 1.0);
        let mut out = vec![0.0; self.n];
        if half <= 0.0 {
            return out;
        }
        for (g, w) in self.nodes.iter().zip(&self.weights) {
            let u = -1.0 + half * (g + 1.0);
            let l = self.lagrange(u);
            for k in 0..self.n {
                out[k] += half * w * l[k];
            }
        }
        out
    }

    /// Row `i` of the running-integral matrix.
    #[inline]
    pub fn integ_row(&self, i: usize) -> &[f64] {
        &self.integ[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshParams {
    /// Gauss nodes per panel.
    pub nodes_per_panel: usize,
    /// Number of dyadic levels between `x_min` and `T`.
    pub grading_levels: usize,
    /// Maximum phase of `exp(2 i rho t)` across one panel.
    pub panel_phase: f64,
    /// Upper bound on the panel width relative to `T`.
    pub max_width_fraction: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        MeshParams {
            nodes_per_panel: 16,
            grading_levels: 36,
            panel_phase: 4.0,
            max_width_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    /// Index of the first node of the panel in [`Mesh::nodes`].
    pub start: usize,
}

impl Panel {
    #[inline]
    pub fn half(&self) -> f64 {
        0.5 * (self.b - self.a)
    }
}

/// Panels covering `[x_min, T]`; the first cell `(0, x_min)` is handled
/// analytically by the integral-equation solvers.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub end: f64,
    pub x_min: f64,
    pub panels: Vec<Panel>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub rule: Arc<PanelRule>,
    pub rho_scale: f64,
}

impl Mesh {
    /// Builds a mesh on `(0, end]` suitable for solutions oscillating like
    /// `exp(+-i rho x)` with `|rho| ~ rho_scale`. Every point of `breaks`
    /// inside the interval becomes a panel boundary.
    pub fn build(end: f64, rho_scale: f64, breaks: &[f64], params: &MeshParams) -> Result<Mesh> {
        if !(end > 0.0 && end.is_finite()) {
            return Err(Error::InvalidInput(format!("interval length must be positive, got {end}")));
        }
        if params.grading_levels < 1 || params.panel_phase <= 0.0 || params.max_width_fraction <= 0.0 {
            return Err(Error::InvalidInput("mesh parameters must be positive".into()));
        }
        let rule = Arc::new(PanelRule::new(params.nodes_per_panel)?);
        let x_min = end * 0.5f64.powi(params.grading_levels as i32);
        let mut pts: Vec<f64> = (0..=params.grading_levels).map(|k| end * 0.5f64.powi(k as i32)).collect();
        for &b in breaks {
            if b > x_min && b < end {
                pts.push(b);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());

        let mut width = params.max_width_fraction * end;
        if rho_scale > 0.0 {
            width = width.min(params.panel_phase / (2.0 * rho_scale));
        }
        let mut panels = Vec::new();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in pts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let pieces = ((b - a) / width).ceil().max(1.0) as usize;
            for p in 0..pieces {
                let pa = if p == 0 { a } else { a + (b - a) * p as f64 / pieces as f64 };
                let pb = if p + 1 == pieces { b } else { a + (b - a) * (p + 1) as f64 / pieces as f64 };
                let panel = Panel { a: pa, b: pb, start: nodes.len() };
                let h = panel.half();
                for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                    nodes.push(pa + h * (s + 1.0));
                    weights.push(h * w);
                }
                panels.push(panel);
            }
        }
        Ok(Mesh {
            end,
            x_min,
            panels,
            nodes,
            weights,
            rule,
            rho_scale,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn per_panel(&self) -> usize {
        self.rule.n
    }

    /// Panel containing `x` and the local coordinate in `[-1, 1]`.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !(x >= self.x_min && x <= self.end) {
            return None;
        }
        let idx = self.panels.partition_point(|p| p.b < x).min(self.panels.len() - 1);
        let p = &self.panels[idx];
        let s = ((x - p.a) / p.half() - 1.0).clamp(-1.0, 1.0);
        Some((idx, s))
    }

    /// Index of the panel whose left end is `x` (within rounding).
    pub fn panel_starting_at(&self, x: f64) -> Option<usize> {
        self.panels.iter().position(|p| (p.a - x).abs() <= 1e-12 * x.abs().max(self.x_min))
    }

    pub fn has_break(&self, x: f64) -> bool {
        (x - self.end).abs() <= 1e-12 * self.end || self.panel_starting_at(x).is_some()
    }
}
