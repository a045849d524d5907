//! The boundary value problem
//!
//! ```text
//! U(Y) = sigma_2(Y) - h sigma_1(Y) = 0,   V(Y) = Y'(T) + H Y(T) = 0,
//! ```
//!
//! its characteristic function, Weyl matrix, eigenvalues and weight matrices.

mod asymptotics;
mod contour;
mod region;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, det, diag, max_norm, rcond, solve, sqrt_lambda, wronskian, CMat, C64, I};
use crate::matrix_fss::{solve_bessel, Equation, Family, FssEvaluation, Potential};

pub use asymptotics::{
    eigenvalue_asymptotics, recover_nu, weight_asymptotics, weyl_partial_fraction, EigenPoint,
    EigenvalueAsymptotics, GroupLaw, NuEstimate, PartialFractionReport, WeightAsymptotics, WeightLaw,
    WeightPoint,
};
pub use asymptotics::normalized_weight;
pub use contour::{group_weight_check, locate_eigenvalues, locate_group, ContourSettings, SpectralDatum};
pub use region::{
    count_in_disk, locate_in_disk, residue_at, spectrum, spectrum_shift_probe, DiskCount, LowEigenvalue,
    ShiftProbe, Spectrum,
};

/// Reciprocal condition number of `V(phi)` below which `lambda` is treated
/// as a pole of the Weyl matrix.
pub const POLE_RCOND: f64 = 1e-12;

/// Relative pole distance (in units of `max(1, |lambda|)`) below which the
/// Weyl matrix is not evaluated.
pub const POLE_DISTANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BoundaryProblem {
    pub eq: Equation,
    pub h: CMat,
    pub big_h: CMat,
}

/// `V(phi)` and `V(S_2)` at one `lambda`.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub lambda: C64,
    pub v_phi: CMat,
    pub v_s2: CMat,
}

impl BoundaryData {
    /// `Delta(lambda) = det V(phi)`.
    pub fn delta(&self) -> C64 {
        det(&self.v_phi)
    }

    /// `M(lambda) = -V(phi)^-1 V(S_2)`.
    pub fn weyl(&self) -> Option<CMat> {
        solve(&self.v_phi, &self.v_s2).map(|x| -x)
    }

    pub fn rcond(&self) -> f64 {
        rcond(&self.v_phi)
    }
}

/// Weyl matrix at one `lambda`.
#[derive(Debug, Clone)]
pub struct WeylSample {
    pub lambda: C64,
    pub m: CMat,
    /// Reciprocal condition number of `V(phi)`.
    pub rcond: f64,
    /// Newton estimate `|Delta / Delta'|` of the distance to the nearest pole.
    pub pole_distance: f64,
    /// `||V(S_2) + V(phi) M|| / ||V(S_2)||`, i.e. how well `V(Phi) = 0` holds.
    pub residual: f64,
}

impl BoundaryProblem {
    pub fn new(eq: Equation, h: CMat, big_h: CMat) -> Result<BoundaryProblem> {
        let m = eq.m();
        for (name, a) in [("h", &h), ("H", &big_h)] {
            if a.nrows() != m || a.ncols() != m {
                return Err(Error::InvalidInput(format!(
                    "{name} is {}x{} but the equation has m = {m}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(BoundaryProblem { eq, h, big_h })
    }

    pub fn m(&self) -> usize {
        self.eq.m()
    }

    pub fn length(&self) -> f64 {
        self.eq.length
    }

    /// Same `omega` and `T` with `Q = 0`, `h = H = 0`.
    pub fn unperturbed(&self) -> Result<BoundaryProblem> {
        let m = self.m();
        BoundaryProblem::new(self.eq.with_potential(Potential::zero(m))?, CMat::zeros(m, m), CMat::zeros(m, m))
    }

    pub fn with_boundary(&self, h: CMat, big_h: CMat) -> Result<BoundaryProblem> {
        BoundaryProblem::new(self.eq.clone(), h, big_h)
    }

    /// `V(phi)`, `V(S_2)` with `phi = S_1 + S_2 h`. `rho_scale` fixes the
    /// mesh; pass the same value for every `lambda` on a contour.
    pub fn boundary_data(&self, lambda: C64, rho_scale: Option<f64>) -> Result<BoundaryData> {
        let st = solve_bessel(&self.eq, lambda, rho_scale, false)?;
        let p = st.at(self.eq.length)?;
        let v = |j: usize| &p.ds[j] + &self.big_h * &p.s[j];
        let v_s2 = v(1);
        let v_phi = v(0) + &v_s2 * &self.h;
        Ok(BoundaryData { lambda, v_phi, v_s2 })
    }

    /// `Delta(lambda) = det(phi'(T) + H phi(T))`.
    pub fn char_det(&self, lambda: C64) -> Result<C64> {
        Ok(self.boundary_data(lambda, None)?.delta())
    }

    /// `M(lambda) = -V(phi)^-1 V(S_2)`.
    pub fn weyl(&self, lambda: C64) -> Result<WeylSample> {
        let scale = sqrt_lambda(lambda).norm().max(1.0);
        let b = self.boundary_data(lambda, Some(scale))?;
        let rc = b.rcond();
        let eta = 1e-4 * scale;
        let dd = (self.boundary_data(lambda + eta, Some(scale))?.delta()
            - self.boundary_data(lambda - eta, Some(scale))?.delta())
            / (2.0 * eta);
        let distance = b.delta().norm() / dd.norm();
        let m = match b.weyl() {
            Some(m) if rc >= POLE_RCOND && !(distance < POLE_DISTANCE * scale * scale) => m,
            _ => {
                return Err(Error::PoleProximity {
                    lambda: lambda.to_string(),
                    distance,
                    rcond: rc,
                })
            }
        };
        let residual = max_norm(&(&b.v_s2 + &b.v_phi * &m)) / max_norm(&b.v_s2).max(f64::MIN_POSITIVE);
        Ok(WeylSample {
            lambda,
            m,
            rcond: rc,
            pole_distance: distance,
            residual,
        })
    }

    /// `phi = S_1 + S_2 h` and its derivative on `grid`.
    pub fn phi(&self, lambda: C64, grid: &[f64]) -> Result<FssEvaluation> {
        let st = solve_bessel(&self.eq, lambda, None, false)?;
        let mut values = Vec::with_capacity(grid.len());
        let mut derivatives = Vec::with_capacity(grid.len());
        for &x in grid {
            let p = st.at(x)?;
            values.push(&p.s[0] + &p.s[1] * &self.h);
            derivatives.push(&p.ds[0] + &p.ds[1] * &self.h);
        }
        Ok(FssEvaluation {
            family: Family::Phi,
            lambda,
            rho: st.rho,
            abscissas: grid.to_vec(),
            values,
            derivatives,
            report: Some(st.report().clone()),
        })
    }

    pub fn constants(&self) -> AsymptoticConstants {
        AsymptoticConstants::new(&self.eq)
    }
}

/// `sigma_1(Y) = -<S_2*, Y>`, `sigma_2(Y) = <S_1*, Y>`.
#[derive(Debug, Clone)]
pub struct SigmaForms {
    pub sigma: [CMat; 2],
    /// Largest change of either form across the abscissas of `Y`, relative
    /// to the larger of the two forms and to the growth `exp(2 |Im rho| x)`
    /// of the products inside the Wronskians.
    pub x_dependence: f64,
}

/// Evaluates both forms at every abscissa of `y` and checks that they agree.
pub fn sigma_forms(eq: &Equation, y: &FssEvaluation, tol: f64) -> Result<SigmaForms> {
    if y.abscissas.is_empty() {
        return Err(Error::InvalidInput("sigma forms need at least one abscissa".into()));
    }
    let adj = solve_bessel(eq, y.lambda, None, true)?;
    let mut forms: Vec<[CMat; 2]> = Vec::with_capacity(y.abscissas.len());
    for (i, &x) in y.abscissas.iter().enumerate() {
        let s = adj.at(x)?;
        let (v, d) = (&y.values[i], &y.derivatives[i]);
        forms.push([-wronskian(&s.s[1], &s.ds[1], v, d), wronskian(&s.s[0], &s.ds[0], v, d)]);
    }
    let scale = max_norm(&forms[0][0]).max(max_norm(&forms[0][1])).max(f64::MIN_POSITIVE);
    let growth = |x: f64| (2.0 * y.rho.im.abs() * x).exp();
    let mut dev = 0.0f64;
    for (f, &x) in forms[1..].iter().zip(&y.abscissas[1..]) {
        for j in 0..2 {
            dev = dev.max(max_norm(&(&f[j] - &forms[0][j])) / (scale * growth(x.max(y.abscissas[0]))));
        }
    }
    if !(dev <= tol) {
        return Err(Error::accuracy("sigma forms depend on x", dev, tol));
    }
    let [a, b] = forms.swap_remove(0);
    Ok(SigmaForms {
        sigma: [a, b],
        x_dependence: dev,
    })
}

/// Channels sharing the fractional part `{mu_1q / 2}`.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelGroup {
    pub frac: f64,
    /// Zero-based channel indices.
    pub channels: Vec<usize>,
}

/// Constants of the large-`n` laws for eigenvalues and weights.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticConstants {
    pub length: f64,
    /// `theta_q = -beta0_11q / (i T beta0_12q) (1 - exp(-2 pi i nu_q))`.
    pub theta: Vec<C64>,
    /// `{mu_1q / 2}` in `[0, 1)`.
    pub frac: Vec<f64>,
    /// `P = sum mu_2q`.
    pub p: f64,
    pub groups: Vec<ChannelGroup>,
    /// Group index of each channel.
    pub group_of: Vec<usize>,
}

fn fractional(x: f64) -> f64 {
    let f = x - x.floor();
    if f > 1.0 - 1e-12 {
        0.0
    } else {
        f
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

impl AsymptoticConstants {
    pub fn new(eq: &Equation) -> AsymptoticConstants {
        let t = eq.length;
        let m = eq.m();
        let mut theta = Vec::with_capacity(m);
        let mut frac = Vec::with_capacity(m);
        for q in 0..m {
            let b = &eq.channels[q].beta.beta;
            let nu = eq.order.nu[q];
            theta.push(-b[0][0] / (I * t * b[0][1]) * (1.0 - (-2.0 * PI * I * nu).exp()));
            frac.push(fractional(0.5 * eq.order.mu(1, q)));
        }
        let mut groups: Vec<ChannelGroup> = Vec::new();
        let mut group_of = vec![0; m];
        for q in 0..m {
            match groups.iter().position(|g| circular_gap(g.frac, frac[q]) < 1e-10) {
                Some(g) => {
                    groups[g].channels.push(q);
                    group_of[q] = g;
                }
                None => {
                    group_of[q] = groups.len();
                    groups.push(ChannelGroup {
                        frac: frac[q],
                        channels: vec![q],
                    });
                }
            }
        }
        AsymptoticConstants {
            length: t,
            theta,
            frac,
            p: (0..m).map(|q| eq.order.mu(2, q)).sum(),
            groups,
            group_of,
        }
    }

    /// `rho0_n = (pi / T)(n + frac)` for group `g`.
    pub fn center(&self, n: usize, g: usize) -> f64 {
        PI / self.length * (n as f64 + self.groups[g].frac)
    }

    /// Smallest distance between distinct centers.
    pub fn min_gap(&self) -> f64 {
        let mut gap: f64 = 1.0;
        for (i, a) in self.groups.iter().enumerate() {
            for b in &self.groups[i + 1..] {
                gap = gap.min(circular_gap(a.frac, b.frac));
            }
        }
        PI / self.length * gap
    }

    /// Contour radius `min(0.45 gap, 0.2 pi / T)`.
    pub fn radius(&self) -> f64 {
        (0.45 * self.min_gap()).min(0.2 * PI / self.length)
    }

    /// `A_q = diag(theta_j [j in J_q])` for group `g`.
    pub fn a_matrix(&self, g: usize) -> CMat {
        let e: Vec<C64> = (0..self.theta.len())
            .map(|j| if self.group_of[j] == g { self.theta[j] } else { c(0.0, 0.0) })
            .collect();
        diag(&e)
    }

    /// Leading term of the characteristic function,
    /// `Delta_0(rho) = (-1/2)^m rho^P det(e^{i rho T} B0_22 + e^{-i rho T} B0_12)`.
    pub fn delta0(&self, eq: &Equation, rho: C64) -> C64 {
        let t = self.length;
        let m = self.theta.len();
        let mut d = c((-0.5f64).powi(m as i32), 0.0) * crate::linalg::cpow(rho, self.p);
        for q in 0..m {
            let b = &eq.channels[q].beta.beta;
            d *= (I * rho * t).exp() * b[1][1] + (-I * rho * t).exp() * b[0][1];
        }
        d
    }
}
