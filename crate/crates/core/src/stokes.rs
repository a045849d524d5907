//! Stokes multipliers `B_kj(rho)` in `Y_k = S_1 B_k1 + S_2 B_k2` and the
//! large-`rho` laws they obey.

use serde::Serialize;

use crate::birkhoff::{solve_y, BirkhoffSolve};
use crate::error::{Error, Result};
use crate::fit::LadderFit;
use crate::linalg::{c, cpow, det, diag, identity, max_norm, solve, wronskian, CMat, MatrixRecord, C64, I};
use crate::matrix_fss::{solve_bessel, BesselSolve, Equation};
use crate::par;

/// Default bound on the relative x-dependence of the extracted multipliers.
pub const WRONSKIAN_TOL: f64 = 1e-8;
/// Acceptance band on fitted decay slopes.
pub const SLOPE_BAND: f64 = 0.1;

/// `D_j(rho) = diag(rho^{mu_jq})`.
pub fn d_matrix(eq: &Equation, j: usize, rho: C64) -> CMat {
    let e: Vec<C64> = (0..eq.m()).map(|q| cpow(rho, eq.order.mu(j, q))).collect();
    diag(&e)
}

/// `B0_kj = diag(beta0_kjq)`.
pub fn b0_matrix(eq: &Equation, k: usize, j: usize) -> CMat {
    let e: Vec<C64> = eq.channels.iter().map(|ch| ch.beta.beta[k - 1][j - 1]).collect();
    diag(&e)
}

/// Wronskian abscissas; kept where `exp(2 |Im rho| x)` stays moderate.
fn abscissas(eq: &Equation, rho: C64) -> [f64; 2] {
    let t = eq.length;
    let tau = rho.im.abs();
    if tau == 0.0 {
        [0.5 * t, 0.75 * t]
    } else {
        [(0.5 * t).min(1.0 / tau), (0.75 * t).min(1.5 / tau)]
    }
}

/// `(sigma_1(Y), sigma_2(Y)) = (-<S_2*, Y>, <S_1*, Y>)` at `x`.
fn sigma_at(adj: &BesselSolve, y: &BirkhoffSolve, x: f64) -> Result<[CMat; 2]> {
    let s = adj.at(x)?;
    let (v, d) = y.at(x)?;
    Ok([-wronskian(&s.s[1], &s.ds[1], &v, &d), wronskian(&s.s[0], &s.ds[0], &v, &d)])
}

#[derive(Debug, Clone)]
pub struct StokesSet {
    pub rho: C64,
    /// `b[k-1][j-1] = B_kj(rho)`.
    pub b: [[CMat; 2]; 2],
    pub d: [CMat; 2],
    pub b0: [[CMat; 2]; 2],
    /// Extraction abscissas; `b` is taken at the first.
    pub abscissas: [f64; 2],
    /// `max_kj ||B_kj(x_a) - B_kj(x_b)|| / ||D_j B0_kj||`.
    pub wronskian_deviation: f64,
    /// `max ||Y_k - S_1 B_k1 - S_2 B_k2||` over the requested grid, relative
    /// to the largest of the three terms.
    pub reconstruction_residual: Option<f64>,
    pub kernel_bounds: [f64; 2],
}

impl StokesSet {
    pub fn multiplier(&self, k: usize, j: usize) -> &CMat {
        &self.b[k - 1][j - 1]
    }

    /// `D_j(rho) B0_kj`, the multiplier for `Q = 0`.
    pub fn reference(&self, k: usize, j: usize) -> CMat {
        &self.d[j - 1] * &self.b0[k - 1][j - 1]
    }

    /// `||(D_j B0_kj)^-1 B_kj - I||`.
    pub fn normalized_deviation(&self, k: usize, j: usize) -> f64 {
        let r = self.reference(k, j);
        let m = r.nrows();
        match solve(&r, self.multiplier(k, j)) {
            Some(x) => max_norm(&(x - identity(m))),
            None => f64::INFINITY,
        }
    }

    /// Determinant of the `2m x 2m` block matrix `[B_kj D_j^-1]`. For `Q = 0`
    /// it equals `prod_q det beta0_q = (-2i)^m`.
    pub fn scaled_determinant(&self) -> C64 {
        let m = self.d[0].nrows();
        let mut big = CMat::zeros(2 * m, 2 * m);
        for k in 0..2 {
            for j in 0..2 {
                let dinv = CMat::from_diagonal(&self.d[j].diagonal().map(|z| z.inv()));
                big.view_mut((k * m, j * m), (m, m)).copy_from(&(&self.b[k][j] * dinv));
            }
        }
        det(&big)
    }

    pub fn record(&self) -> StokesRecord {
        let mut entries = Vec::with_capacity(4);
        for k in 1..=2 {
            for j in 1..=2 {
                entries.push(MultiplierRecord {
                    k,
                    j,
                    b: self.multiplier(k, j).into(),
                    reference: (&self.reference(k, j)).into(),
                    normalized_deviation: self.normalized_deviation(k, j),
                });
            }
        }
        StokesRecord {
            rho: [self.rho.re, self.rho.im],
            abscissas: self.abscissas,
            wronskian_deviation: self.wronskian_deviation,
            reconstruction_residual: self.reconstruction_residual,
            kernel_bounds: self.kernel_bounds,
            multipliers: entries,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplierRecord {
    pub k: usize,
    pub j: usize,
    pub b: MatrixRecord,
    pub reference: MatrixRecord,
    pub normalized_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StokesRecord {
    pub rho: [f64; 2],
    pub abscissas: [f64; 2],
    pub wronskian_deviation: f64,
    pub reconstruction_residual: Option<f64>,
    pub kernel_bounds: [f64; 2],
    pub multipliers: Vec<MultiplierRecord>,
}

/// All four multipliers at `rho`. Since `sigma_j(S_k) = delta_jk I`,
/// `B_k1 = sigma_1(Y_k) = -<S_2*, Y_k>` and `B_k2 = sigma_2(Y_k) = <S_1*, Y_k>`.
/// The Wronskians are taken at two interior abscissas and must agree to
/// `tol`; `grid` (possibly empty) is used for the reconstruction check.
pub fn compute_b(eq: &Equation, rho: C64, grid: &[f64], tol: f64) -> Result<StokesSet> {
    if rho.re < 0.0 || rho.norm() == 0.0 {
        return Err(Error::Domain(format!("Stokes multipliers need Re rho >= 0, rho != 0 (got {rho})")));
    }
    let lambda = rho * rho;
    let adj = solve_bessel(eq, lambda, Some(rho.norm()), true)?;
    let ys = [solve_y(eq, 1, rho, None)?, solve_y(eq, 2, rho, None)?];
    let xs = abscissas(eq, rho);
    let d = [d_matrix(eq, 1, rho), d_matrix(eq, 2, rho)];
    let b0 = [[b0_matrix(eq, 1, 1), b0_matrix(eq, 1, 2)], [b0_matrix(eq, 2, 1), b0_matrix(eq, 2, 2)]];
    let mut b: [[CMat; 2]; 2] = Default::default();
    let mut dev = 0.0f64;
    for k in 0..2 {
        let first = sigma_at(&adj, &ys[k], xs[0])?;
        let second = sigma_at(&adj, &ys[k], xs[1])?;
        for j in 0..2 {
            let scale = max_norm(&(&d[j] * &b0[k][j]));
            dev = dev.max(max_norm(&(&first[j] - &second[j])) / scale);
        }
        b[k] = first;
    }
    if !(dev <= tol) {
        return Err(Error::accuracy("Stokes multiplier Wronskians depend on x", dev, tol));
    }
    let reconstruction_residual = if grid.is_empty() {
        None
    } else {
        let direct = solve_bessel(eq, lambda, Some(rho.norm()), false)?;
        let mut worst = 0.0f64;
        for &x in grid {
            let s = direct.at(x)?;
            for k in 0..2 {
                let (y, _) = ys[k].at(x)?;
                let t1 = &s.s[0] * &b[k][0];
                let t2 = &s.s[1] * &b[k][1];
                let scale = max_norm(&y).max(max_norm(&t1)).max(max_norm(&t2));
                worst = worst.max(max_norm(&(&y - t1 - t2)) / scale);
            }
        }
        Some(worst)
    };
    Ok(StokesSet {
        rho,
        b,
        d,
        b0,
        abscissas: xs,
        wronskian_deviation: dev,
        reconstruction_residual,
        kernel_bounds: [ys[0].kernel_bound, ys[1].kernel_bound],
    })
}

/// `points` values from `start` to `start * span`, equally spaced in log.
pub fn geometric_ladder(start: f64, span: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![start; points];
    }
    (0..points)
        .map(|i| start * span.powf(i as f64 / (points - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct StokesLadderPoint {
    pub rho: [f64; 2],
    /// `deviation[k-1][j-1] = ||(D_j B0_kj)^-1 B_kj - I||`.
    pub deviation: [[f64; 2]; 2],
    pub wronskian_deviation: f64,
    pub kernel_bounds: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct StokesAsymptotics {
    pub beta_exp: f64,
    pub points: Vec<StokesLadderPoint>,
    pub fits: Vec<LadderFit>,
}

impl StokesAsymptotics {
    pub fn passes(&self) -> bool {
        self.fits.iter().all(|f| f.passes)
    }
}

/// Decay of `||(D_j B0_kj)^-1 B_kj(rho) - I||` along a ladder of `rho`
/// values, one log-log fit per `(k, j)`.
///
/// On `Im rho >= 0` the solution `Y_2` solves a Volterra equation from 0 and
/// so has exactly the boundary data of `E_2`: `B_2j = D_j B0_2j` with no
/// remainder. Likewise `B_1j` is exact on `Im rho < 0`. A ladder on each side
/// of the real axis is needed to see all four remainders.
pub fn verify_stokes_asymptotics(eq: &Equation, ladder: &[C64]) -> Result<StokesAsymptotics> {
    let sets = par::try_map(ladder, |&rho| compute_b(eq, rho, &[], WRONSKIAN_TOL))?;
    Ok(stokes_asymptotics_from(eq, &sets))
}

/// The fits of [`verify_stokes_asymptotics`] for multiplier sets that are
/// already computed.
pub fn stokes_asymptotics_from(eq: &Equation, sets: &[StokesSet]) -> StokesAsymptotics {
    let points: Vec<StokesLadderPoint> = sets
        .iter()
        .map(|s| StokesLadderPoint {
            rho: [s.rho.re, s.rho.im],
            deviation: [
                [s.normalized_deviation(1, 1), s.normalized_deviation(1, 2)],
                [s.normalized_deviation(2, 1), s.normalized_deviation(2, 2)],
            ],
            wronskian_deviation: s.wronskian_deviation,
            kernel_bounds: s.kernel_bounds,
        })
        .collect();
    let radii: Vec<f64> = sets.iter().map(|s| s.rho.norm()).collect();
    let threshold = -eq.order.beta_exp + SLOPE_BAND;
    let mut fits = Vec::with_capacity(4);
    for k in 0..2 {
        for j in 0..2 {
            let ys: Vec<f64> = points.iter().map(|p| p.deviation[k][j]).collect();
            fits.push(LadderFit::new(format!("B{}{}", k + 1, j + 1), &radii, &ys, threshold));
        }
    }
    StokesAsymptotics {
        beta_exp: eq.order.beta_exp,
        points,
        fits,
    }
}

/// Leading term of `S_j^{(v)}(x, rho^2)`, `v` in {0, 1}:
///
/// ```text
/// S_1 ~ (i/2) ( (i rho)^v e^{i rho x} B0_22 - (-i rho)^v e^{-i rho x} B0_12) D_1(rho)^-1
/// S_2 ~ (i/2) (-(i rho)^v e^{i rho x} B0_21 + (-i rho)^v e^{-i rho x} B0_11) D_2(rho)^-1
/// ```
pub fn s_leading(eq: &Equation, j: usize, v: u32, x: f64, rho: C64) -> CMat {
    let plus = (I * rho).powu(v) * (I * rho * x).exp();
    let minus = (-I * rho).powu(v) * (-I * rho * x).exp();
    let (a, bm) = if j == 1 {
        (b0_matrix(eq, 2, 2) * plus, b0_matrix(eq, 1, 2) * (-minus))
    } else {
        (b0_matrix(eq, 2, 1) * (-plus), b0_matrix(eq, 1, 1) * minus)
    };
    let dinv = CMat::from_diagonal(&d_matrix(eq, j, rho).diagonal().map(|z| z.inv()));
    (a + bm) * dinv * (I * 0.5)
}

#[derive(Debug, Clone, Serialize)]
pub struct SLadderPoint {
    pub rho: [f64; 2],
    /// `deviation[j-1][v] = 2 ||(S_j^{(v)} - leading) D_j|| / (|rho|^v e^{|Im rho| x})`
    /// at the requested `x`.
    pub deviation: [[f64; 2]; 2],
    /// Same quantity maximized over `WINDOW_POINTS` abscissas in `[x, T]`.
    pub window_deviation: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct SAsymptotics {
    pub x: f64,
    pub beta_exp: f64,
    pub points: Vec<SLadderPoint>,
    pub fits: Vec<LadderFit>,
}

impl SAsymptotics {
    pub fn passes(&self) -> bool {
        self.fits.iter().all(|f| f.passes)
    }
}

pub const WINDOW_POINTS: usize = 24;

/// Relative error of the leading large-`rho` form of `S_j` and `S_j'` along
/// a ladder. The error oscillates in `rho` at fixed `x`, so the fits use its
/// maximum over a window `[x, T]`.
pub fn verify_s_asymptotics(eq: &Equation, x: f64, ladder: &[C64]) -> Result<SAsymptotics> {
    if !(x > 0.0 && x <= eq.length) {
        return Err(Error::InvalidInput(format!("x = {x} outside (0, T]")));
    }
    let window: Vec<f64> = (0..WINDOW_POINTS)
        .map(|i| x + (eq.length - x) * i as f64 / (WINDOW_POINTS - 1) as f64)
        .collect();
    let points = par::try_map(ladder, |&rho| -> Result<SLadderPoint> {
        let st = solve_bessel(eq, rho * rho, Some(rho.norm()), false)?;
        let mut deviation = [[0.0; 2]; 2];
        let mut window_deviation = [[0.0f64; 2]; 2];
        for (i, &xi) in window.iter().enumerate() {
            let p = st.at(xi)?;
            for j in 1..=2 {
                let dj = d_matrix(eq, j, rho);
                for v in 0..2u32 {
                    let s = if v == 0 { &p.s[j - 1] } else { &p.ds[j - 1] };
                    let scale = rho.norm().powi(v as i32) * (rho.im.abs() * xi).exp();
                    let err = (s - s_leading(eq, j, v, xi, rho)) * &dj;
                    let dev = 2.0 * max_norm(&err) / scale;
                    let w = &mut window_deviation[j - 1][v as usize];
                    *w = w.max(dev);
                    if i == 0 {
                        deviation[j - 1][v as usize] = dev;
                    }
                }
            }
        }
        Ok(SLadderPoint {
            rho: [rho.re, rho.im],
            deviation,
            window_deviation,
        })
    })?;
    let radii: Vec<f64> = ladder.iter().map(|r| r.norm()).collect();
    let threshold = -eq.order.beta_exp + SLOPE_BAND;
    let mut fits = Vec::with_capacity(4);
    for j in 0..2 {
        for v in 0..2 {
            let ys: Vec<f64> = points.iter().map(|p| p.window_deviation[j][v]).collect();
            let label = if v == 0 { format!("S{}", j + 1) } else { format!("S{}'", j + 1) };
            fits.push(LadderFit::new(label, &radii, &ys, threshold));
        }
    }
    Ok(SAsymptotics {
        x,
        beta_exp: eq.order.beta_exp,
        points,
        fits,
    })
}

/// Real ladder of `rho` values as complex numbers.
pub fn real_ladder(values: &[f64]) -> Vec<C64> {
    values.iter().map(|&r| c(r, 0.0)).collect()
}

#[cfg(test)]
mod tests;
