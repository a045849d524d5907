//! Reference solutions that share no code path with the integral-equation
//! solvers: closed forms for `nu = 1/2` and direct integration of the
//! differential equation from a Frobenius seed.

use std::str::FromStr;

use ode_solvers::{DVector, Dop853, System};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, det, max_norm, sqrt_lambda, CMat, C64, I};
use crate::matrix_fss::{solve_bessel, BesselPoint, Equation, Family, FssEvaluation};

/// Closed-form scalar solutions for `nu = 1/2`, `Q = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClosedForm {
    /// `c_1 = cos(rho x)`
    C1,
    /// `c_2 = sin(rho x) / rho`
    C2,
    /// `e_1 = exp(i rho x)`
    E1,
    /// `e_2 = exp(-i rho x)`
    E2,
}

impl FromStr for ClosedForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c1" => Ok(ClosedForm::C1),
            "c2" => Ok(ClosedForm::C2),
            "e1" => Ok(ClosedForm::E1),
            "e2" => Ok(ClosedForm::E2),
            other => Err(Error::InvalidInput(format!("unknown closed-form case '{other}'"))),
        }
    }
}

/// Value and x-derivative of a closed-form case.
pub fn closed_form_reference(case: ClosedForm, x: f64, rho: C64) -> (C64, C64) {
    let z = rho * x;
    match case {
        ClosedForm::C1 => (z.cos(), -rho * z.sin()),
        ClosedForm::C2 => {
            if rho.norm() == 0.0 {
                (c(x, 0.0), c(1.0, 0.0))
            } else {
                (z.sin() / rho, z.cos())
            }
        }
        ClosedForm::E1 => ((I * z).exp(), I * rho * (I * z).exp()),
        ClosedForm::E2 => ((-I * z).exp(), -I * rho * (-I * z).exp()),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSettings {
    /// Relative tolerance of the integrator.
    pub tolerance: f64,
    /// Seed abscissa; defaults to `T/100` clipped to `|rho x0| <= 1`.
    pub x0: Option<f64>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            tolerance: 1e-13,
            x0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    ClosedForm,
    DirectOde,
}

/// Comparison of an oracle against the primary solver on one grid.
#[derive(Debug, Clone, Serialize)]
pub struct OracleRun {
    pub method: OracleMethod,
    pub tolerance: f64,
    pub x0: f64,
    pub lambda: C64,
    pub grid: Vec<f64>,
    /// Largest deviation relative to the envelope `|S| + |S'| / max(1, |rho|)`
    /// of the reference.
    pub max_deviation: f64,
}

fn seed_abscissa(eq: &Equation, lambda: C64, settings: &OracleSettings) -> Result<f64> {
    let (_, radius) = eq.potential.taylor_at_zero();
    let r = sqrt_lambda(lambda).norm();
    let mut x0 = settings.x0.unwrap_or(eq.length / 100.0);
    if settings.x0.is_none() && r * x0 > 1.0 {
        x0 = 1.0 / r;
    }
    if !(x0 > 0.0 && x0 < eq.length) {
        return Err(Error::InvalidInput(format!("seed abscissa {x0} must lie in (0, T)")));
    }
    if x0 >= radius {
        return Err(Error::Domain(format!(
            "seed abscissa {x0} lies beyond the first potential node {radius}"
        )));
    }
    Ok(x0)
}

/// Frobenius expansion of `S_1, S_2` (for `Q^T` when `transpose`) at `x0`.
///
/// Column `q` of `S_j` is `x^{mu_jq} sum_k a_k x^k` with
/// `[(mu + k)(mu + k - 1) - omega_p] a_{k,p} = (sum_l Q_l a_{k-2-l} - lambda a_{k-2})_p`.
pub fn frobenius_seed(eq: &Equation, lambda: C64, x0: f64, transpose: bool) -> Result<BesselPoint> {
    let m = eq.m();
    let (mut taylor, radius) = eq.potential.taylor_at_zero();
    if transpose {
        taylor = taylor.iter().map(|a| a.transpose()).collect();
    }
    if x0 >= radius {
        return Err(Error::Domain(format!("seed abscissa {x0} beyond the Taylor radius {radius}")));
    }
    let omega = eq.order.omega();
    let mut s = [CMat::zeros(m, m), CMat::zeros(m, m)];
    let mut ds = [CMat::zeros(m, m), CMat::zeros(m, m)];
    for j in 1..=2 {
        for q in 0..m {
            let mu = eq.order.mu(j, q);
            let mut a: Vec<Vec<C64>> = Vec::new();
            let mut first = vec![c(0.0, 0.0); m];
            first[q] = eq.channels[q].series[j - 1].c0;
            a.push(first);
            let mut val = vec![c(0.0, 0.0); m];
            let mut der = vec![c(0.0, 0.0); m];
            let mut peak: f64 = 0.0;
            let mut small_run = 0;
            for k in 0..4000usize {
                if k > 0 {
                    let mut next = vec![c(0.0, 0.0); m];
                    for p in 0..m {
                        let mut rhs = c(0.0, 0.0);
                        if k >= 2 {
                            rhs -= lambda * a[k - 2][p];
                            for (l, ql) in taylor.iter().enumerate() {
                                if k < 2 + l {
                                    break;
                                }
                                let prev = &a[k - 2 - l];
                                for r in 0..m {
                                    rhs += ql[(p, r)] * prev[r];
                                }
                            }
                        }
                        let e = mu + k as f64;
                        let den = e * (e - 1.0) - omega[p];
                        if den.abs() < 1e-9 {
                            if rhs.norm() > 1e-14 * (1.0 + a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)) {
                                return Err(Error::Domain(format!(
                                    "logarithmic resonance in the Frobenius expansion (channel {p}, order {k})"
                                )));
                            }
                            next[p] = c(0.0, 0.0);
                        } else {
                            next[p] = rhs / den;
                        }
                    }
                    a.push(next);
                }
                let e = mu + k as f64;
                let xk = x0.powf(e);
                let mut mag: f64 = 0.0;
                for p in 0..m {
                    val[p] += a[k][p] * xk;
                    der[p] += a[k][p] * (e * xk / x0);
                    mag = mag.max((a[k][p] * xk).norm());
                }
                peak = peak.max(mag);
                if k > 4 && mag <= 1e-18 * peak {
                    small_run += 1;
                    if small_run >= 3 {
                        break;
                    }
                } else {
                    small_run = 0;
                }
                if k == 3999 {
                    return Err(Error::accuracy("Frobenius series did not converge at the seed", mag / peak, 1e-18));
                }
            }
            for p in 0..m {
                s[j - 1][(p, q)] = val[p];
                ds[j - 1][(p, q)] = der[p];
            }
        }
    }
    Ok(BesselPoint { x: x0, s, ds })
}

/// First-order real form of `Y'' = (omega / x^2 + Q(x) - lambda) Y` for an
/// `m x nc` complex matrix `Y`. The abscissa is carried as the last state
/// component: the DOP853 tableau in `ode_solvers` 0.6 evaluates its final
/// stage at the wrong abscissa, which only autonomous systems tolerate.
struct Ode<'a> {
    eq: &'a Equation,
    lambda: C64,
    transpose: bool,
    nc: usize,
}

impl Ode<'_> {
    fn pack(&self, x: f64, y: &CMat, dy: &CMat) -> DVector<f64> {
        let n = y.len();
        let mut v = DVector::zeros(4 * n + 1);
        for (k, z) in y.iter().chain(dy.iter()).enumerate() {
            v[2 * k] = z.re;
            v[2 * k + 1] = z.im;
        }
        v[4 * n] = x;
        v
    }

    fn unpack(&self, v: &DVector<f64>) -> (CMat, CMat) {
        let m = self.eq.m();
        let n = m * self.nc;
        let get = |k: usize| c(v[2 * k], v[2 * k + 1]);
        (
            CMat::from_fn(m, self.nc, |r, col| get(col * m + r)),
            CMat::from_fn(m, self.nc, |r, col| get(n + col * m + r)),
        )
    }
}

impl System<f64, DVector<f64>> for Ode<'_> {
    fn system(&self, _x: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let m = self.eq.m();
        let x = y[y.len() - 1];
        let (v, d) = self.unpack(y);
        let mut a = self.eq.potential.eval(x);
        if self.transpose {
            a = a.transpose();
        }
        for (p, w) in self.eq.order.omega().iter().enumerate() {
            a[(p, p)] += w / (x * x);
        }
        for p in 0..m {
            a[(p, p)] -= self.lambda;
        }
        let dd = a * &v;
        *dy = self.pack(1.0, &d, &dd);
    }
}

/// Integrates the pair `(S_1, S_2)` (or the `Q^T` pair) from the Frobenius
/// seed at `x0` and returns it at every `grid` point (sorted, `>= x0`).
pub fn integrate_pair(
    eq: &Equation,
    lambda: C64,
    grid: &[f64],
    transpose: bool,
    settings: &OracleSettings,
) -> Result<(f64, Vec<BesselPoint>)> {
    let x0 = seed_abscissa(eq, lambda, settings)?;
    if grid.iter().any(|&x| x < x0 || x > eq.length) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(format!(
            "oracle grid must be sorted within [{x0}, {}]",
            eq.length
        )));
    }
    let seed = frobenius_seed(eq, lambda, x0, transpose)?;
    let m = eq.m();
    let mut y = CMat::zeros(m, 2 * m);
    let mut dy = CMat::zeros(m, 2 * m);
    for j in 0..2 {
        y.view_mut((0, j * m), (m, m)).copy_from(&seed.s[j]);
        dy.view_mut((0, j * m), (m, m)).copy_from(&seed.ds[j]);
    }
    let ode = Ode {
        eq,
        lambda,
        transpose,
        nc: 2 * m,
    };
    let mut state = ode.pack(x0, &y, &dy);
    let mut x = x0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        if target > x {
            let scale = state.rows(0, state.len() - 1).amax().max(f64::MIN_POSITIVE);
            let sys = Ode {
                eq,
                lambda,
                transpose,
                nc: 2 * m,
            };
            let mut solver = Dop853::from_param(
                sys,
                x,
                target,
                target - x,
                state.clone(),
                settings.tolerance,
                settings.tolerance * 1e-3 * scale,
                0.9,
                0.0,
                0.333,
                6.0,
                target - x,
                0.0,
                2_000_000,
                1000,
                ode_solvers::OutputType::Sparse,
            );
            solver.integrate().map_err(|e| Error::Domain(format!("direct integration failed: {e}")))?;
            state = solver
                .y_out()
                .last()
                .cloned()
                .ok_or_else(|| Error::Domain("direct integration produced no output".into()))?;
            x = target;
        }
        let (v, d) = ode.unpack(&state);
        let block = |a: &CMat, j: usize| {
            let b = a.view((0, j * m), (m, m)).into_owned();
            if transpose {
                b.transpose()
            } else {
                b
            }
        };
        out.push(BesselPoint {
            x: target,
            s: [block(&v, 0), block(&v, 1)],
            ds: [block(&d, 0), block(&d, 1)],
        });
    }
    Ok((x0, out))
}

/// `S_j` or `S_j*` on `grid` by direct integration.
pub fn direct_integrate(
    eq: &Equation,
    family: Family,
    lambda: C64,
    grid: &[f64],
    settings: &OracleSettings,
) -> Result<FssEvaluation> {
    let (j, transpose) = match family {
        Family::S1 => (0, false),
        Family::S2 => (1, false),
        Family::S1Star => (0, true),
        Family::S2Star => (1, true),
        other => return Err(Error::InvalidInput(format!("direct integration supports S families only, got {other:?}"))),
    };
    let (_, pts) = integrate_pair(eq, lambda, grid, transpose, settings)?;
    Ok(FssEvaluation {
        family,
        lambda,
        rho: sqrt_lambda(lambda),
        abscissas: grid.to_vec(),
        values: pts.iter().map(|p| p.s[j].clone()).collect(),
        derivatives: pts.iter().map(|p| p.ds[j].clone()).collect(),
        report: None,
    })
}

/// Largest entrywise deviation between the integral-equation `S_1, S_2`
/// (values and derivatives) and the direct integration, relative to the
/// local envelope `|S| + |S'| / max(1, |rho|)` of the reference (times
/// `max(1, |rho|)` for derivatives).
pub fn compare_bessel(eq: &Equation, lambda: C64, grid: &[f64], adjoint: bool, settings: &OracleSettings) -> Result<OracleRun> {
    let (x0, reference) = integrate_pair(eq, lambda, grid, adjoint, settings)?;
    let primary = solve_bessel(eq, lambda, None, adjoint)?;
    let k = sqrt_lambda(lambda).norm().max(1.0);
    let mut worst: f64 = 0.0;
    for r in &reference {
        let p = primary.at(r.x)?;
        for j in 0..2 {
            let sv = (max_norm(&r.s[j]) + max_norm(&r.ds[j]) / k).max(f64::MIN_POSITIVE);
            let sd = sv * k;
            worst = worst.max(max_norm(&(&p.s[j] - &r.s[j])) / sv);
            worst = worst.max(max_norm(&(&p.ds[j] - &r.ds[j])) / sd);
        }
    }
    Ok(OracleRun {
        method: OracleMethod::DirectOde,
        tolerance: settings.tolerance,
        x0,
        lambda,
        grid: grid.to_vec(),
        max_deviation: worst,
    })
}

/// `det(phi'(T) + H phi(T))`, `phi = S_1 + S_2 h`, by direct integration.
pub fn shooting_det(eq: &Equation, h: &CMat, big_h: &CMat, lambda: C64, settings: &OracleSettings) -> Result<C64> {
    let (_, pts) = integrate_pair(eq, lambda, &[eq.length], false, settings)?;
    let p = &pts[0];
    let phi = &p.s[0] + &p.s[1] * h;
    let dphi = &p.ds[0] + &p.ds[1] * h;
    Ok(det(&(dphi + big_h * phi)))
}

/// Zero of `rho -> det(phi'(T) + H phi(T))|_{lambda = rho^2}` near `guess`
/// by the secant method.
pub fn shooting_eigenvalue(eq: &Equation, h: &CMat, big_h: &CMat, guess: C64, settings: &OracleSettings) -> Result<C64> {
    let f = |r: C64| shooting_det(eq, h, big_h, r * r, settings);
    let step = 1e-4 * guess.norm().max(1.0);
    let (mut r0, mut r1) = (guess, guess + step);
    let (mut f0, mut f1) = (f(r0)?, f(r1)?);
    for _ in 0..60 {
        if f1 == f0 {
            break;
        }
        let r2 = r1 - f1 * (r1 - r0) / (f1 - f0);
        if !r2.is_finite() {
            break;
        }
        let done = (r2 - r1).norm() <= 1e-14 * r2.norm().max(1.0);
        r0 = r1;
        f0 = f1;
        r1 = r2;
        if done {
            return Ok(r1);
        }
        f1 = f(r1)?;
    }
    if (r1 - r0).norm() <= 1e-11 * r1.norm().max(1.0) {
        Ok(r1)
    } else {
        Err(Error::Localization(format!("shooting did not converge near rho = {guess}")))
    }
}

#[cfg(test)]
mod tests;
