//! Zero counting on closed paths in the lambda plane: disks for the
//! spectrum-shift probe and a rectangle bisection for the low spectrum,
//! where the circles around `rho0_nq` are not yet reliable.

use std::f64::consts::PI;

use serde::Serialize;

use super::contour::{locate_eigenvalues, ContourSettings, SpectralDatum};
use super::BoundaryProblem;
use crate::error::{Error, Result};
use crate::linalg::{c, max_norm, CMat, C64};
use crate::par;

/// Largest phase step accepted between neighbouring samples of a path.
const MAX_PHASE_STEP: f64 = 0.25 * PI;
const MAX_PATH_SAMPLES: usize = 1 << 16;

/// Winding number of `f` along a closed path `t -> z(t)`, `t in [0, 1)`,
/// with level-wise bisection of every step whose phase change exceeds
/// `MAX_PHASE_STEP`.
fn winding<Z, F>(path: Z, f: F, initial: usize) -> Result<(f64, usize)>
where
    Z: Fn(f64) -> C64 + Sync,
    F: Fn(C64) -> Result<C64> + Sync,
{
    let ts: Vec<f64> = (0..initial).map(|j| j as f64 / initial as f64).collect();
    let vals = par::try_map(&ts, |&t| f(path(t)))?;
    let mut pts: Vec<(f64, C64)> = ts.into_iter().zip(vals).collect();
    loop {
        let n = pts.len();
        let bad: Vec<usize> = (0..n)
            .filter(|&j| (pts[(j + 1) % n].1 / pts[j].1).arg().abs() > MAX_PHASE_STEP)
            .collect();
        if bad.is_empty() {
            break;
        }
        if n + bad.len() > MAX_PATH_SAMPLES {
            return Err(Error::Localization(
                "phase of Delta not resolved on the path (a zero lies on or near it)".into(),
            ));
        }
        let mids: Vec<f64> = bad
            .iter()
            .map(|&j| {
                let t1 = if j + 1 == n { 1.0 } else { pts[j + 1].0 };
                0.5 * (pts[j].0 + t1)
            })
            .collect();
        let mvals = par::try_map(&mids, |&t| f(path(t)))?;
        let mut next = Vec::with_capacity(n + bad.len());
        let mut k = 0;
        for (j, p) in pts.into_iter().enumerate() {
            next.push(p);
            if k < bad.len() && bad[k] == j {
                next.push((mids[k], mvals[k]));
                k += 1;
            }
        }
        pts = next;
    }
    let n = pts.len();
    let total: f64 = (0..n).map(|j| (pts[(j + 1) % n].1 / pts[j].1).arg()).sum();
    Ok((total / (2.0 * PI), n))
}

fn integer_count(w: f64, what: &str) -> Result<usize> {
    let r = w.round();
    if (w - r).abs() > 0.05 || r < 0.0 {
        return Err(Error::Localization(format!("winding number {w} on {what} is not a count")));
    }
    Ok(r as usize)
}

/// Number of eigenvalues in `|lambda| < radius` by the argument principle.
#[derive(Debug, Clone, Serialize)]
pub struct DiskCount {
    pub radius: f64,
    pub count: usize,
    pub winding: f64,
    pub samples: usize,
}

pub fn count_in_disk(p: &BoundaryProblem, radius: f64) -> Result<DiskCount> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("disk radius must be positive, got {radius}")));
    }
    let scale = radius.sqrt().max(1.0);
    let (w, samples) = winding(
        |t| C64::from_polar(radius, 2.0 * PI * t),
        |lam| Ok(p.boundary_data(lam, Some(scale))?.delta()),
        128,
    )?;
    Ok(DiskCount {
        radius,
        count: integer_count(w, "the disk boundary")?,
        winding: w,
        samples,
    })
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn center(&self) -> C64 {
        c(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn contains(&self, z: C64, slack: f64) -> bool {
        z.re >= self.x0 - slack && z.re <= self.x1 + slack && z.im >= self.y0 - slack && z.im <= self.y1 + slack
    }

    fn point(&self, t: f64) -> C64 {
        let (w, h) = (self.x1 - self.x0, self.y1 - self.y0);
        let s = 2.0 * (w + h) * t;
        if s < w {
            c(self.x0 + s, self.y0)
        } else if s < w + h {
            c(self.x1, self.y0 + (s - w))
        } else if s < 2.0 * w + h {
            c(self.x1 - (s - w - h), self.y1)
        } else {
            c(self.x0, self.y1 - (s - 2.0 * w - h))
        }
    }

    /// Off-center split along the longer side, so symmetric points such as
    /// `lambda = 0` do not land on the cut.
    fn split(&self) -> [Rect; 2] {
        const F: f64 = 0.4861;
        if self.x1 - self.x0 >= self.y1 - self.y0 {
            let xm = self.x0 + F * (self.x1 - self.x0);
            [Rect { x1: xm, ..*self }, Rect { x0: xm, ..*self }]
        } else {
            let ym = self.y0 + F * (self.y1 - self.y0);
            [Rect { y1: ym, ..*self }, Rect { y0: ym, ..*self }]
        }
    }
}

/// Eigenvalue found in the lambda plane.
#[derive(Debug, Clone, Serialize)]
pub struct LowEigenvalue {
    pub lambda: C64,
    pub multiplicity: usize,
    /// `|Delta(lambda)| / |Delta(center of the last enclosing rectangle)|`.
    pub residual: f64,
}

fn newton_lambda(p: &BoundaryProblem, start: C64, scale: f64, rect: &Rect) -> Result<Option<(C64, f64)>> {
    let f = |l: C64| -> Result<C64> { Ok(p.boundary_data(l, Some(scale))?.delta()) };
    let h = 1e-6 * rect.diameter();
    let f0 = f(start)?.norm();
    let mut l = start;
    let mut fl = f(l)?;
    for _ in 0..60 {
        let d = (f(l + h)? - f(l - h)?) / (2.0 * h);
        let step = fl / d;
        if !step.is_finite() {
            return Ok(None);
        }
        l -= step;
        if !rect.contains(l, 1e-9 * rect.diameter()) {
            return Ok(None);
        }
        fl = f(l)?;
        if step.norm() <= 1e-14 * (1.0 + l.norm()) {
            return Ok(Some((l, fl.norm() / f0)));
        }
    }
    Ok(None)
}

/// All eigenvalues with `|lambda| < radius`, by recursive bisection of a
/// square around the disk with argument-principle counts.
pub fn locate_in_disk(p: &BoundaryProblem, radius: f64) -> Result<Vec<LowEigenvalue>> {
    let scale = radius.sqrt().max(1.0);
    let delta = |l: C64| -> Result<C64> { Ok(p.boundary_data(l, Some(scale))?.delta()) };
    let count = |r: &Rect| -> Result<usize> {
        let (w, _) = winding(|t| r.point(t), delta, 32)?;
        integer_count(w, "a search rectangle")
    };
    let root = Rect {
        x0: -radius * 1.0131,
        x1: radius * 1.0173,
        y0: -radius * 1.0117,
        y1: radius * 1.0191,
    };
    let mut found = Vec::new();
    let mut stack = vec![(root, count(&root)?, 0usize)];
    while let Some((r, k, depth)) = stack.pop() {
        if k == 0 {
            continue;
        }
        if k == 1 {
            if let Some((l, res)) = newton_lambda(p, r.center(), scale, &r)? {
                found.push(LowEigenvalue {
                    lambda: l,
                    multiplicity: 1,
                    residual: res,
                });
                continue;
            }
        }
        if r.diameter() <= 1e-7 * (1.0 + r.center().norm()) || depth > 80 {
            let (l, res) = newton_lambda(p, r.center(), scale, &r)?.unwrap_or((r.center(), f64::NAN));
            found.push(LowEigenvalue {
                lambda: l,
                multiplicity: k,
                residual: res,
            });
            continue;
        }
        let halves = r.split();
        let ka = count(&halves[0])?;
        let kb = count(&halves[1])?;
        if ka + kb != k {
            return Err(Error::Localization(format!(
                "rectangle counts do not add up ({ka} + {kb} != {k})"
            )));
        }
        stack.push((halves[0], ka, depth + 1));
        stack.push((halves[1], kb, depth + 1));
    }
    found.retain(|e| e.lambda.norm() < radius);
    found.sort_by(|a, b| a.lambda.re.partial_cmp(&b.lambda.re).unwrap());
    Ok(found)
}

/// `(1 / 2 pi i) int M(lambda) d lambda` over `|lambda - center| = radius`
/// with node doubling until the change is below `tol`.
pub fn residue_at(p: &BoundaryProblem, center: C64, radius: f64, tol: f64) -> Result<(CMat, f64)> {
    let scale = (center.norm() + radius).sqrt().max(1.0);
    let sample = |n: usize, offset: bool| -> Result<Vec<(C64, CMat)>> {
        let zs: Vec<C64> = (0..n)
            .map(|j| {
                let k = if offset { 2 * j + 1 } else { 2 * j };
                C64::from_polar(1.0, PI * k as f64 / n as f64)
            })
            .collect();
        par::try_map(&zs, |&z| {
            let b = p.boundary_data(center + radius * z, Some(scale))?;
            let m = b
                .weyl()
                .ok_or_else(|| Error::Localization("V(phi) singular on a residue circle".into()))?;
            Ok((z, m))
        })
    };
    let sum = |pts: &[(C64, CMat)]| -> CMat {
        let m = pts[0].1.nrows();
        let mut acc = CMat::zeros(m, m);
        for (z, mm) in pts {
            acc += mm * (radius * z);
        }
        acc / c(pts.len() as f64, 0.0)
    };
    let mut n = 16;
    let mut pts = sample(n, false)?;
    let mut prev = sum(&pts);
    loop {
        let fresh = sample(n, true)?;
        pts.extend(fresh);
        n *= 2;
        let cur = sum(&pts);
        let change = max_norm(&(&cur - &prev)) / max_norm(&cur).max(f64::MIN_POSITIVE);
        if change <= tol || n >= 1024 {
            return Ok((cur, change));
        }
        prev = cur;
    }
}

/// Low eigenvalues from the lambda plane plus the circles for `1..=n_max`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Radius of the lambda disk searched directly.
    pub low_radius: f64,
    pub low: Vec<LowEigenvalue>,
    pub contours: Vec<SpectralDatum>,
    /// Count in the disk reaching just past the last circle, when checked.
    pub total: Option<DiskCount>,
}

impl Spectrum {
    /// Eigenvalues found (with multiplicity) inside the low disk and circles.
    pub fn located(&self) -> usize {
        self.low.iter().map(|e| e.multiplicity).sum::<usize>() + self.contours.iter().map(|d| d.count).sum::<usize>()
    }

    /// Whether every eigenvalue inside the enclosing disk was accounted for.
    pub fn complete(&self) -> Option<bool> {
        self.total.as_ref().map(|t| t.count == self.located())
    }
}

/// Outer disk radius `rho_top^2` midway between the last circle and the
/// next center.
pub(crate) fn outer_radius(p: &BoundaryProblem, n_max: usize) -> f64 {
    let consts = p.constants();
    let mut centers: Vec<f64> = (0..consts.groups.len())
        .flat_map(|g| [consts.center(n_max, g), consts.center(n_max + 1, g)])
        .collect();
    centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let last = (0..consts.groups.len())
        .map(|g| consts.center(n_max, g))
        .fold(0.0, f64::max);
    let next = centers.into_iter().find(|&x| x > last + 1e-12).unwrap();
    (0.5 * (last + next)).powi(2)
}

/// The spectrum up to the circles of index `n_max`. With `check_total`, the
/// located count is compared against one disk count enclosing everything.
pub fn spectrum(p: &BoundaryProblem, n_max: usize, settings: &ContourSettings, check_total: bool) -> Result<Spectrum> {
    let consts = p.constants();
    let first = (0..consts.groups.len())
        .map(|g| consts.center(1, g))
        .fold(f64::INFINITY, f64::min);
    let low_radius = (first - consts.radius() * settings.radius_factor * 1.25).powi(2);
    let low = locate_in_disk(p, low_radius)?;
    let ns: Vec<usize> = (1..=n_max).collect();
    let contours = locate_eigenvalues(p, &ns, settings)?;
    let total = if check_total {
        Some(count_in_disk(p, outer_radius(p, n_max))?)
    } else {
        None
    };
    Ok(Spectrum {
        low_radius,
        low,
        contours,
        total,
    })
}

/// Eigenvalue counts in `|lambda| < R` for a problem and for its
/// unperturbed version (`Q = 0`, `h = H = 0`).
#[derive(Debug, Clone, Serialize)]
pub struct ShiftProbe {
    pub radius: f64,
    pub perturbed: usize,
    pub unperturbed: usize,
}

/// Counts at `R = rho_R^2` with `rho_R` midway between the circles of
/// index `n` and the next center, for each `n` in `ns`.
pub fn spectrum_shift_probe(p: &BoundaryProblem, ns: &[usize]) -> Result<Vec<ShiftProbe>> {
    let free = p.unperturbed()?;
    ns.iter()
        .map(|&n| {
            let r = outer_radius(p, n);
            Ok(ShiftProbe {
                radius: r,
                perturbed: count_in_disk(p, r)?.count,
                unperturbed: count_in_disk(&free, r)?.count,
            })
        })
        .collect()
}
