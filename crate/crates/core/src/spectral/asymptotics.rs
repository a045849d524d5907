//! Large-`n` laws for eigenvalues and group weights, recovery of `nu` from
//! the weights, and the partial-fraction expansion of the Weyl matrix.

use std::f64::consts::PI;

use serde::Serialize;

use super::contour::SpectralDatum;
use super::{AsymptoticConstants, BoundaryProblem};
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LadderFit, SlopeFit};
use crate::linalg::{c, max_norm, CMat, MatrixRecord, C64};
use crate::stokes::d_matrix;

/// Fitted decay exponents must be at least `beta - EXPONENT_BAND`.
pub const EXPONENT_BAND: f64 = 0.15;

#[derive(Debug, Clone, Serialize)]
pub struct EigenPoint {
    pub n: usize,
    pub center: f64,
    pub roots: Vec<[f64; 2]>,
    /// `max |rho_nq - rho0_nq|` over the roots in the circle.
    pub deviation: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupLaw {
    pub group: usize,
    pub frac: f64,
    pub channels: Vec<usize>,
    pub points: Vec<EigenPoint>,
    pub fit: LadderFit,
    /// Every circle holds exactly `|J_q|` zeros.
    pub counts_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueAsymptotics {
    pub beta_exp: f64,
    pub groups: Vec<GroupLaw>,
}

impl EigenvalueAsymptotics {
    pub fn passes(&self) -> bool {
        self.groups.iter().all(|g| g.counts_ok && g.fit.passes)
    }
}

fn by_group(data: &[SpectralDatum], g: usize) -> Vec<&SpectralDatum> {
    let mut v: Vec<&SpectralDatum> = data.iter().filter(|d| d.group == g).collect();
    v.sort_by_key(|d| d.n);
    v
}

/// `|rho_nq - rho0_nq|` against `n`, one fit per channel group.
pub fn eigenvalue_asymptotics(p: &BoundaryProblem, data: &[SpectralDatum]) -> EigenvalueAsymptotics {
    let consts = p.constants();
    let beta = p.eq.order.beta_exp;
    let groups = consts
        .groups
        .iter()
        .enumerate()
        .map(|(g, grp)| {
            let pts: Vec<EigenPoint> = by_group(data, g)
                .into_iter()
                .map(|d| EigenPoint {
                    n: d.n,
                    center: d.center,
                    roots: d.roots.iter().map(|r| [r.re, r.im]).collect(),
                    deviation: d.shift(),
                    count: d.count,
                })
                .collect();
            let ns: Vec<f64> = pts.iter().map(|p| p.n as f64).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.deviation).collect();
            GroupLaw {
                group: g,
                frac: grp.frac,
                channels: grp.channels.clone(),
                counts_ok: pts.iter().all(|p| p.count == grp.channels.len()),
                fit: LadderFit::new(format!("rho_n,{}", g + 1), &ns, &ys, -beta + EXPONENT_BAND),
                points: pts,
            }
        })
        .collect();
    EigenvalueAsymptotics { beta_exp: beta, groups }
}

/// `(pi n / T)^-1 D_1(pi n / T)^-1 W D_2(pi n / T)`.
pub fn normalized_weight(p: &BoundaryProblem, n: usize, w: &CMat) -> CMat {
    let r = c(PI * n as f64 / p.length(), 0.0);
    let d1 = d_matrix(&p.eq, 1, r);
    let d2 = d_matrix(&p.eq, 2, r);
    let d1inv = CMat::from_diagonal(&d1.diagonal().map(|z| z.inv()));
    d1inv * w * d2 / r
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightPoint {
    pub n: usize,
    pub normalized: MatrixRecord,
    /// `||normalized - A_q||`.
    pub deviation: f64,
    /// Largest off-support entry over the largest `|theta_j|`, `j in J_q`.
    pub off_support: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightLaw {
    pub group: usize,
    pub channels: Vec<usize>,
    pub a: MatrixRecord,
    pub points: Vec<WeightPoint>,
    pub fit: LadderFit,
    /// Off-support entries at the largest `n` are at most
    /// `SUPPORT_LEVEL` of the on-support scale.
    pub support_ok: bool,
}

pub const SUPPORT_LEVEL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct WeightAsymptotics {
    pub beta_exp: f64,
    pub theta: Vec<[f64; 2]>,
    pub theta_nonzero: bool,
    pub groups: Vec<WeightLaw>,
}

impl WeightAsymptotics {
    pub fn passes(&self) -> bool {
        self.theta_nonzero && self.groups.iter().all(|g| g.fit.passes && g.support_ok)
    }
}

/// Compares each group weight with `(pi n / T) D_1 A_q D_2^-1`.
pub fn weight_asymptotics(p: &BoundaryProblem, data: &[SpectralDatum]) -> WeightAsymptotics {
    let consts = p.constants();
    let beta = p.eq.order.beta_exp;
    let m = p.m();
    let groups = (0..consts.groups.len())
        .map(|g| {
            let a = consts.a_matrix(g);
            let on = &consts.groups[g].channels;
            let scale = on.iter().map(|&j| consts.theta[j].norm()).fold(0.0, f64::max);
            let points: Vec<WeightPoint> = by_group(data, g)
                .into_iter()
                .map(|d| {
                    let nw = normalized_weight(p, d.n, &d.group_weight);
                    let mut off: f64 = 0.0;
                    for r in 0..m {
                        for k in 0..m {
                            if !(r == k && on.contains(&r)) {
                                off = off.max(nw[(r, k)].norm());
                            }
                        }
                    }
                    WeightPoint {
                        n: d.n,
                        deviation: max_norm(&(&nw - &a)),
                        off_support: off / scale,
                        normalized: (&nw).into(),
                    }
                })
                .collect();
            let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
            let ys: Vec<f64> = points.iter().map(|p| p.deviation).collect();
            WeightLaw {
                group: g,
                channels: on.clone(),
                a: (&a).into(),
                support_ok: points.last().is_some_and(|p| p.off_support <= SUPPORT_LEVEL),
                fit: LadderFit::new(format!("alpha_n,{}", g + 1), &ns, &ys, -beta + EXPONENT_BAND),
                points,
            }
        })
        .collect();
    WeightAsymptotics {
        beta_exp: beta,
        theta: consts.theta.iter().map(|t| [t.re, t.im]).collect(),
        theta_nonzero: consts.theta.iter().all(|t| t.norm() > 1e-12),
        groups,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NuEstimate {
    /// Zero-based channel.
    pub channel: usize,
    pub nu: f64,
    pub fit: SlopeFit,
}

/// Estimates `nu_s`, `s in J_q`, from the diagonal of the group weights of
/// one group: `|W_ss| ~ |theta_s| (rho0_n)^{1 - 2 nu_s}`, so the log-log slope
/// against the circle centers is `1 - 2 nu_s`.
pub fn recover_nu(consts: &AsymptoticConstants, data: &[SpectralDatum], group: usize) -> Result<Vec<NuEstimate>> {
    let pts = by_group(data, group);
    if pts.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "nu recovery needs at least 4 circles, got {}",
            pts.len()
        )));
    }
    let grp = consts
        .groups
        .get(group)
        .ok_or_else(|| Error::InvalidInput(format!("group index {group} out of range")))?;
    grp.channels
        .iter()
        .map(|&s| {
            let xy: Vec<(f64, f64)> = pts
                .iter()
                .map(|d| (d.center.ln(), d.group_weight[(s, s)].norm().ln()))
                .collect();
            let fit = linear_fit(&xy).ok_or_else(|| Error::Regime("degenerate ladder".into()))?;
            let steps: Vec<f64> = xy.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
            let spread = steps.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - steps.iter().cloned().fold(f64::INFINITY, f64::min);
            if !fit.slope.is_finite() || spread > 0.25 || fit.rms_residual > 0.05 {
                return Err(Error::Regime(format!(
                    "channel {}: local slopes {steps:?} are not consistent with a power law",
                    s + 1
                )));
            }
            Ok(NuEstimate {
                channel: s,
                nu: 0.5 * (1.0 - fit.slope),
                fit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PartialFractionReport {
    pub lambda: [f64; 2],
    pub direct: MatrixRecord,
    /// `(number of terms, ||M(lambda) - partial sum||)` as terms are added in
    /// order of `|lambda_p|`.
    pub trend: Vec<(usize, f64)>,
}

/// Partial sums of `sum_p alpha_p / (m_p (lambda - lambda_p))` against the
/// directly computed `M(lambda)`. `poles` holds `(lambda_p, m_p^-1 alpha_p)`
/// pairs, with coinciding poles already merged.
pub fn weyl_partial_fraction(p: &BoundaryProblem, lambda: C64, poles: &[(C64, CMat)]) -> Result<PartialFractionReport> {
    let direct = p.weyl(lambda)?.m;
    let mut sorted: Vec<&(C64, CMat)> = poles.iter().collect();
    sorted.sort_by(|a, b| a.0.norm().partial_cmp(&b.0.norm()).unwrap());
    let m = p.m();
    let mut acc = CMat::zeros(m, m);
    let mut trend = Vec::with_capacity(sorted.len() + 1);
    trend.push((0, max_norm(&direct)));
    for (i, (lp, a)) in sorted.iter().enumerate() {
        acc += a / (lambda - lp);
        trend.push((i + 1, max_norm(&(&direct - &acc))));
    }
    Ok(PartialFractionReport {
        lambda: [lambda.re, lambda.im],
        direct: (&direct).into(),
        trend,
    })
}
