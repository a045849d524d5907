//! Eigenvalue localization on circles `|rho - rho0_nq| = delta` and the
//! group weights `(1 / 2 pi i) int 2 rho M(rho^2) d rho` on the same circles.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{BoundaryData, BoundaryProblem};
use crate::error::{Error, Result};
use crate::linalg::{c, max_norm, singular_values, CMat, C64};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContourSettings {
    /// Initial trapezoid nodes per circle.
    pub nodes: usize,
    pub max_nodes: usize,
    /// A circle is rejected if `min |Delta| < safety_floor * max |Delta|` on it.
    pub safety_floor: f64,
    /// Relative change of a group weight allowed when the nodes are halved.
    pub weight_tol: f64,
    /// Relative size of the upper half of the Fourier coefficients of
    /// `Delta` above which the circle is refined.
    pub alias_tol: f64,
    /// Newton stops once `|Delta| <= newton_tol * max_circle |Delta|`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Multiplies the default radius `min(0.45 gap, 0.2 pi / T)`.
    pub radius_factor: f64,
}

impl Default for ContourSettings {
    fn default() -> Self {
        ContourSettings {
            nodes: 32,
            max_nodes: 1024,
            safety_floor: 1e-6,
            weight_tol: 1e-9,
            alias_tol: 1e-13,
            newton_tol: 1e-11,
            newton_max_iter: 50,
            radius_factor: 1.0,
        }
    }
}

/// Eigenvalues and group weight inside one circle `gamma_nq`.
#[derive(Debug, Clone)]
pub struct SpectralDatum {
    pub n: usize,
    /// Index into [`super::AsymptoticConstants::groups`].
    pub group: usize,
    /// Zero-based channels of the group `J_q`.
    pub channels: Vec<usize>,
    pub center: f64,
    pub radius: f64,
    pub nodes: usize,
    /// Zero count from the winding number of `Delta(rho^2)`.
    pub count: usize,
    /// Refined zeros `rho_p` of `Delta(rho^2)`.
    pub roots: Vec<C64>,
    /// `|Delta(rho_p^2)| / max_circle |Delta|` after refinement.
    pub root_residuals: Vec<f64>,
    /// `sum_{s in J_q} m_ns^-1 alpha_ns`.
    pub group_weight: CMat,
    /// Relative change of the group weight between `nodes / 2` and `nodes`.
    pub weight_change: f64,
    /// Numerical rank of the group weight.
    pub weight_rank: usize,
    /// `min |Delta| / max |Delta|` on the circle.
    pub floor_ratio: f64,
}

impl SpectralDatum {
    pub fn lambdas(&self) -> Vec<C64> {
        self.roots.iter().map(|r| r * r).collect()
    }

    /// Largest `|rho_p - rho0_nq|`.
    pub fn shift(&self) -> f64 {
        self.roots.iter().map(|r| (r - self.center).norm()).fold(0.0, f64::max)
    }
}

/// Samples of the boundary data on one circle. Node `j` of `N` sits at
/// `center + radius exp(2 pi i j / N)`.
struct Ring {
    center: C64,
    radius: f64,
    scale: f64,
    data: Vec<BoundaryData>,
}

impl Ring {
    fn node(&self, j: usize) -> C64 {
        self.center + self.radius * unit(j, self.data.len())
    }

    fn sample(p: &BoundaryProblem, center: C64, radius: f64, n: usize, scale: f64) -> Result<Ring> {
        let rhos: Vec<C64> = (0..n).map(|j| center + radius * unit(j, n)).collect();
        let data = par::try_map(&rhos, |&r| p.boundary_data(r * r, Some(scale)))?;
        Ok(Ring {
            center,
            radius,
            scale,
            data,
        })
    }

    /// Doubles the nodes, reusing the existing samples.
    fn refine(self, p: &BoundaryProblem) -> Result<Ring> {
        let n = self.data.len();
        let rhos: Vec<C64> = (0..n).map(|j| self.center + self.radius * unit(2 * j + 1, 2 * n)).collect();
        let fresh = par::try_map(&rhos, |&r| p.boundary_data(r * r, Some(self.scale)))?;
        let mut data = Vec::with_capacity(2 * n);
        for (old, new) in self.data.into_iter().zip(fresh) {
            data.push(old);
            data.push(new);
        }
        Ok(Ring {
            center: self.center,
            radius: self.radius,
            scale: self.scale,
            data,
        })
    }

    fn deltas(&self) -> Vec<C64> {
        self.data.iter().map(|d| d.delta()).collect()
    }
}

fn unit(j: usize, n: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)
}

fn fft(buf: &mut [C64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    plan.process(buf);
}

/// Taylor data of a function analytic in the disk from its samples on the
/// unit circle.
struct Analysis {
    /// `max_{k >= N/2} |c_k| / max_k |c_k|`.
    alias: f64,
    /// `z f'(z) / f(z)` at the nodes.
    log_derivative: Vec<C64>,
    winding: f64,
    max_jump: f64,
}

fn analyze(f: &[C64]) -> Analysis {
    let n = f.len();
    let mut coef = f.to_vec();
    fft(&mut coef, false);
    for z in coef.iter_mut() {
        *z /= n as f64;
    }
    let top = coef.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let alias = coef[n / 2..].iter().map(|z| z.norm()).fold(0.0, f64::max) / top;
    let mut d: Vec<C64> = coef
        .iter()
        .enumerate()
        .map(|(k, z)| if k < n / 2 { z * k as f64 } else { c(0.0, 0.0) })
        .collect();
    fft(&mut d, true);
    let log_derivative = d.iter().zip(f).map(|(g, v)| g / v).collect();
    let mut winding = 0.0;
    let mut max_jump: f64 = 0.0;
    for j in 0..n {
        let step = (f[(j + 1) % n] / f[j]).arg();
        winding += step;
        max_jump = max_jump.max(step.abs());
    }
    Analysis {
        alias,
        log_derivative,
        winding: winding / (2.0 * PI),
        max_jump,
    }
}

/// Zeros inside the unit disk from the power sums
/// `s_p = (1 / 2 pi i) int z^p f'/f dz`, `p = 1..k`.
fn moment_roots(log_derivative: &[C64], k: usize) -> Vec<C64> {
    let n = log_derivative.len();
    let s: Vec<C64> = (0..=k)
        .map(|p| {
            log_derivative
                .iter()
                .enumerate()
                .map(|(j, q)| unit(j * p % n, n) * q)
                .sum::<C64>()
                / n as f64
        })
        .collect();
    if k == 1 {
        return vec![s[1]];
    }
    // Newton identities: elementary symmetric functions from power sums.
    let mut e = vec![c(1.0, 0.0); k + 1];
    for i in 1..=k {
        let mut acc = c(0.0, 0.0);
        for t in 1..=i {
            let sign = if t % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[i - t] * s[t] * sign;
        }
        e[i] = acc / i as f64;
    }
    let mut comp = DMatrix::<C64>::zeros(k, k);
    for i in 1..k {
        comp[(i, i - 1)] = c(1.0, 0.0);
    }
    for i in 0..k {
        // coefficient of z^i in the monic polynomial is (-1)^{k-i} e_{k-i}
        let sign = if (k - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        comp[(i, k - 1)] = -e[k - i] * sign;
    }
    comp.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

/// Newton on `Delta(rho^2) / prod (rho - r_j)` with central differences.
fn polish(
    p: &BoundaryProblem,
    scale: f64,
    start: C64,
    found: &[C64],
    level: f64,
    radius: f64,
    settings: &ContourSettings,
) -> Result<(C64, f64)> {
    let g = |r: C64| -> Result<C64> {
        let mut v = p.boundary_data(r * r, Some(scale))?.delta();
        for f in found {
            v /= r - f;
        }
        Ok(v)
    };
    let deflate = |r: C64| found.iter().map(|f| r - f).product::<C64>();
    let h = 1e-5 * radius;
    let mut r = start;
    let mut gr = g(r)?;
    let mut best = (r, (gr * deflate(r)).norm());
    for _ in 0..settings.newton_max_iter {
        if best.1 <= settings.newton_tol * level {
            break;
        }
        let d = (g(r + h)? - g(r - h)?) / (2.0 * h);
        let step = gr / d;
        if !step.is_finite() {
            break;
        }
        r -= step;
        if (r - start).norm() > radius {
            break;
        }
        gr = g(r)?;
        let res = (gr * deflate(r)).norm();
        if res < best.1 {
            best = (r, res);
        }
        if step.norm() <= 1e-15 * r.norm() {
            break;
        }
    }
    Ok((best.0, best.1 / level))
}

/// Trapezoid value of `(1 / 2 pi i) int 2 rho M(rho^2) d rho` using every
/// `stride`-th node.
fn weight_sum(ring: &Ring, stride: usize) -> Result<CMat> {
    let n = ring.data.len();
    let m = ring.data[0].v_phi.nrows();
    let mut acc = CMat::zeros(m, m);
    let mut count = 0;
    for j in (0..n).step_by(stride) {
        let rho = ring.node(j);
        let mj = ring.data[j]
            .weyl()
            .ok_or_else(|| Error::Localization(format!("V(phi) singular on the contour at rho = {rho}")))?;
        acc += mj * (2.0 * rho * ring.radius * unit(j, n));
        count += 1;
    }
    Ok(acc / c(count as f64, 0.0))
}

fn numerical_rank(a: &CMat) -> usize {
    let sv = singular_values(a);
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-6 * top).count()
}

/// Localizes the zeros in `gamma_ng` and computes the group weight.
pub fn locate_group(p: &BoundaryProblem, n: usize, g: usize, settings: &ContourSettings) -> Result<SpectralDatum> {
    let consts = p.constants();
    if g >= consts.groups.len() {
        return Err(Error::InvalidInput(format!("group index {g} out of range")));
    }
    let center = consts.center(n, g);
    let base = consts.radius() * settings.radius_factor;
    if center <= base {
        return Err(Error::Regime(format!(
            "circle around rho0 = {center} reaches rho = 0; use the lambda-plane search"
        )));
    }
    let mut last_err = None;
    for factor in [1.0, 1.2, 0.8] {
        let radius = base * factor;
        match try_circle(p, n, g, center, radius, settings) {
            Ok(d) => return Ok(d),
            Err(e @ Error::Localization(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

fn try_circle(
    p: &BoundaryProblem,
    n: usize,
    g: usize,
    center: f64,
    radius: f64,
    settings: &ContourSettings,
) -> Result<SpectralDatum> {
    let consts = p.constants();
    let mut ring = Ring::sample(p, c(center, 0.0), radius, settings.nodes, center)?;
    let (f, an) = loop {
        let f = ring.deltas();
        let an = analyze(&f);
        let settled = an.alias <= settings.alias_tol && an.max_jump <= 0.5 * PI;
        if settled || ring.data.len() >= settings.max_nodes {
            break (f, an);
        }
        ring = ring.refine(p)?;
    };
    let mags: Vec<f64> = f.iter().map(|z| z.norm()).collect();
    let level = mags.iter().cloned().fold(0.0, f64::max);
    let floor_ratio = mags.iter().cloned().fold(f64::INFINITY, f64::min) / level;
    if floor_ratio < settings.safety_floor {
        return Err(Error::Localization(format!(
            "|Delta| nearly vanishes on the circle around {center} (ratio {floor_ratio:e})"
        )));
    }
    let count = an.winding.round();
    if (an.winding - count).abs() > 0.05 || count < 0.0 {
        return Err(Error::Localization(format!(
            "winding number {} around {center} is not an integer",
            an.winding
        )));
    }
    let count = count as usize;
    let mut roots = Vec::with_capacity(count);
    let mut root_residuals = Vec::with_capacity(count);
    if count > 0 {
        let guesses = moment_roots(&an.log_derivative, count);
        for z in guesses {
            let (r, res) = polish(p, ring.scale, c(center, 0.0) + radius * z, &roots, level, radius, settings)?;
            roots.push(r);
            root_residuals.push(res);
        }
    }
    let (group_weight, weight_change) = loop {
        let w = weight_sum(&ring, 1)?;
        let half = weight_sum(&ring, 2)?;
        let change = max_norm(&(&w - &half)) / max_norm(&w).max(f64::MIN_POSITIVE);
        if change <= settings.weight_tol || ring.data.len() >= settings.max_nodes {
            break (w, change);
        }
        ring = ring.refine(p)?;
    };
    Ok(SpectralDatum {
        n,
        group: g,
        channels: consts.groups[g].channels.clone(),
        center,
        radius,
        nodes: ring.data.len(),
        count,
        roots,
        root_residuals,
        weight_rank: numerical_rank(&group_weight),
        group_weight,
        weight_change,
        floor_ratio,
    })
}

/// Every circle `gamma_ng` for `n` in `ns` and every channel group, ordered
/// by center.
pub fn locate_eigenvalues(p: &BoundaryProblem, ns: &[usize], settings: &ContourSettings) -> Result<Vec<SpectralDatum>> {
    let groups = p.constants().groups.len();
    let jobs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| (0..groups).map(move |g| (n, g))).collect();
    let mut out = par::try_map(&jobs, |&(n, g)| locate_group(p, n, g, settings))?;
    out.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap());
    Ok(out)
}

/// For a circle holding one simple eigenvalue, compares the group weight
/// with `lim (lambda - lambda_p) M(lambda)` obtained by Richardson
/// extrapolation along `lambda_p + eps`, `eps = e0, e0/2, e0/4`. Returns the
/// relative difference.
pub fn group_weight_check(p: &BoundaryProblem, datum: &SpectralDatum) -> Result<f64> {
    if datum.roots.len() != 1 {
        return Err(Error::InvalidInput("residue check needs exactly one eigenvalue in the circle".into()));
    }
    let lam = datum.roots[0] * datum.roots[0];
    let e0 = 1e-3 * datum.radius * datum.center;
    let at = |eps: f64| -> Result<CMat> {
        let b = p.boundary_data(lam + eps, Some(datum.center))?;
        let m = b
            .weyl()
            .ok_or_else(|| Error::Localization("V(phi) singular near the eigenvalue".into()))?;
        Ok(m * c(eps, 0.0))
    };
    let (a0, a1, a2) = (at(e0)?, at(0.5 * e0)?, at(0.25 * e0)?);
    // g(eps) = alpha + g1 eps + g2 eps^2 + ...
    let r1 = &a1 * c(2.0, 0.0) - &a0;
    let r2 = &a2 * c(2.0, 0.0) - &a1;
    let rich = (&r2 * c(4.0, 0.0) - &r1) / c(3.0, 0.0);
    Ok(max_norm(&(rich - &datum.group_weight)) / max_norm(&datum.group_weight))
}
