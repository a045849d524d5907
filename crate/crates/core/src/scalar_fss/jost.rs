use crate::error::{Error, Result};
use crate::linalg::{C64, I};

use super::ScalarOrder;

/// Evaluates the normalized Jost function `f(z) = e_1(z) exp(-iz)` in the
/// closed right half-plane. `f` solves `f'' + 2i f' - (omega / z^2) f = 0`
/// and tends to 1 at infinity; far out it is summed from its asymptotic
/// series, closer in it is continued by Taylor stepping.
#[derive(Debug, Clone)]
pub struct JostEngine {
    pub order: ScalarOrder,
    /// Radius beyond which the asymptotic series is used directly.
    pub radius: f64,
    asym: Vec<C64>,
}

const SERIES_TOL: f64 = 1e-17;
const MAX_ASYM: usize = 400;
/// Largest Taylor step relative to the distance from the singular point.
const STEP_FRACTION: f64 = 0.35;
const MAX_STEP: f64 = 2.0;
/// Tolerated amplification of the parasitic solution along a ray.
const RAY_GROWTH: f64 = 100.0;

impl JostEngine {
    pub fn new(order: ScalarOrder) -> Result<JostEngine> {
        let mut radius = 20.0f64.max(2.0 * order.omega.abs());
        for _ in 0..40 {
            if let Some(asym) = asymptotic_coefficients(order.omega, radius) {
                return Ok(JostEngine { order, radius, asym });
            }
            radius *= 1.5;
        }
        Err(Error::TailTruncation {
            radius,
            detail: format!("asymptotic series for nu = {} never reaches tolerance", order.nu),
        })
    }

    fn asymptotic(&self, z: C64) -> (C64, C64) {
        let w = z.inv();
        let mut f = C64::new(0.0, 0.0);
        let mut df = C64::new(0.0, 0.0);
        for (k, b) in self.asym.iter().enumerate().rev() {
            f = f * w + b;
            if k > 0 {
                df = df * w + b * (-(k as f64));
            }
        }
        // df currently holds sum_k (-k b_k) w^{k-1}; derivative needs w^{k+1}
        (f, df * w * w)
    }

    /// One Taylor step from `z0` to `z0 + h`.
    fn step(&self, z0: C64, f0: C64, df0: C64, h: C64) -> (C64, C64) {
        let omega = self.order.omega;
        let t2 = z0 * z0;
        let scale = f0.norm() + h.norm() * df0.norm();
        let mut a_km1 = C64::new(0.0, 0.0);
        let mut a_k = f0;
        let mut a_k1 = df0;
        let mut f = f0 + df0 * h;
        let mut df = df0;
        let mut hp = h; // h^{k+1} for the current k
        let mut small = 0;
        for k in 0..120usize {
            let kf = k as f64;
            let num = a_k1 * (2.0 * z0 * kf * (kf + 1.0))
                + a_k * (kf * (kf - 1.0))
                + a_k1 * (2.0 * I * t2 * (kf + 1.0))
                + a_k * (4.0 * I * z0 * kf)
                + a_km1 * (2.0 * I * (kf - 1.0))
                - a_k * omega;
            let a_k2 = -num / (t2 * ((kf + 2.0) * (kf + 1.0)));
            let dterm = a_k2 * hp * (kf + 2.0);
            hp *= h;
            let term = a_k2 * hp;
            f += term;
            df += dterm;
            if term.norm() + dterm.norm() * h.norm() <= SERIES_TOL * scale {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            a_km1 = a_k;
            a_k = a_k1;
            a_k1 = a_k2;
        }
        (f, df)
    }

    /// March from `(z, f, df)` to `target` along the segment in steps
    /// bounded by the distance to the origin.
    fn march(&self, mut z: C64, mut f: C64, mut df: C64, target: C64) -> (C64, C64) {
        loop {
            let rem = target - z;
            let dist = rem.norm();
            if dist == 0.0 {
                return (f, df);
            }
            let hmax = (STEP_FRACTION * z.norm()).min(MAX_STEP);
            let h = if dist <= hmax { rem } else { rem * (hmax / dist) };
            let (nf, ndf) = self.step(z, f, df, h);
            f = nf;
            df = ndf;
            z += h;
            if dist <= hmax {
                return (f, df);
            }
        }
    }

    /// `f(z)` and `f'(z)` at a single point with `Re z >= 0`, `z != 0`,
    /// continued along a horizontal path (neutral stability).
    pub fn normalized(&self, z: C64) -> Result<(C64, C64)> {
        if z.re < 0.0 || z.norm() == 0.0 {
            return Err(Error::Domain(format!("Jost evaluation needs Re z >= 0 and z != 0, got {z}")));
        }
        if z.norm() >= self.radius {
            return Ok(self.asymptotic(z));
        }
        let y = z.im;
        let start = C64::new((self.radius * self.radius - y * y).sqrt(), y);
        let (f0, df0) = self.asymptotic(start);
        Ok(self.march(start, f0, df0, z))
    }

    /// `f` and `f'` at `dir * r` for every radius, where `|dir| = 1` and
    /// `Re dir >= 0`. Uses one inward sweep along the ray when the parasitic
    /// growth along it is acceptable and per-point horizontal paths
    /// otherwise. Results follow the order of `radii`.
    pub fn normalized_on_ray(&self, dir: C64, radii: &[f64]) -> Result<Vec<(C64, C64)>> {
        let growth = (2.0 * (-dir.im).max(0.0) * self.radius).exp();
        if growth > RAY_GROWTH {
            return radii.iter().map(|&r| self.normalized(dir * r)).collect();
        }
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&a, &b| radii[b].partial_cmp(&radii[a]).unwrap());
        let mut out = vec![(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); radii.len()];
        let start = dir * self.radius;
        let (mut f, mut df) = self.asymptotic(start);
        let mut z = start;
        for idx in order {
            let r = radii[idx];
            if r <= 0.0 {
                return Err(Error::Domain("Jost evaluation at z = 0".into()));
            }
            if r >= self.radius {
                out[idx] = self.asymptotic(dir * r);
                continue;
            }
            let target = dir * r;
            let (nf, ndf) = self.march(z, f, df, target);
            f = nf;
            df = ndf;
            z = target;
            out[idx] = (f, df);
        }
        Ok(out)
    }

    /// `e_1(z)` and `e_1'(z)`.
    pub fn e1(&self, z: C64) -> Result<(C64, C64)> {
        let (f, df) = self.normalized(z)?;
        Ok(to_e1(z, f, df))
    }

    /// `e_2(z) = conj(e_1(conj z))` and its derivative.
    pub fn e2(&self, z: C64) -> Result<(C64, C64)> {
        let (e, de) = self.e1(z.conj())?;
        Ok((e.conj(), de.conj()))
    }
}

pub(crate) fn to_e1(z: C64, f: C64, df: C64) -> (C64, C64) {
    let ez = (I * z).exp();
    (ez * f, ez * (I * f + df))
}

/// Coefficients `b_k` of `f ~ sum b_k z^{-k}` truncated where the terms at
/// `|z| = radius` drop below tolerance; `None` if the terms start growing
/// first.
fn asymptotic_coefficients(omega: f64, radius: f64) -> Option<Vec<C64>> {
    let mut b = vec![C64::new(1.0, 0.0)];
    let mut mag = 1.0;
    for k in 0..MAX_ASYM {
        let kf = k as f64;
        let next = b[k] * (kf * (kf + 1.0) - omega) / (2.0 * I * (kf + 1.0));
        if next.norm() == 0.0 {
            return Some(b);
        }
        let new_mag = next.norm() / radius.powi(k as i32 + 1);
        b.push(next);
        if new_mag < SERIES_TOL {
            return Some(b);
        }
        if new_mag > mag && kf > 2.0 * omega.abs().sqrt() + 2.0 {
            return None;
        }
        mag = new_mag;
    }
    None
}
