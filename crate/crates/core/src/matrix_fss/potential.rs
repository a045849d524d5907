use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, max_norm, CMat, C64};
use crate::quadrature::{Mesh, MeshParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialTag {
    Zero,
    Polynomial,
    Nodes,
}

#[derive(Debug, Clone)]
enum Repr {
    Zero,
    /// `Q(x) = sum_k coeffs[k] x^k`.
    Polynomial(Vec<CMat>),
    /// Entrywise monotone cubic (PCHIP) interpolation of real and imaginary
    /// parts.
    Nodes { xs: Vec<f64>, values: Vec<CMat>, slopes: Vec<CMat> },
}

/// Matrix potential `Q(x)` on `(0, T]`.
#[derive(Debug, Clone)]
pub struct Potential {
    pub m: usize,
    repr: Repr,
}

impl Potential {
    pub fn zero(m: usize) -> Potential {
        Potential { m, repr: Repr::Zero }
    }

    pub fn polynomial(coeffs: Vec<CMat>) -> Result<Potential> {
        let m = coeffs
            .first()
            .map(|c| c.nrows())
            .ok_or_else(|| Error::InvalidInput("empty polynomial potential".into()))?;
        if coeffs.iter().any(|c| c.nrows() != m || c.ncols() != m) {
            return Err(Error::InvalidInput("polynomial coefficients must all be m x m".into()));
        }
        if coeffs.iter().any(|c| c.iter().any(|z| !z.is_finite())) {
            return Err(Error::InvalidInput("polynomial coefficients must be finite".into()));
        }
        Ok(Potential {
            m,
            repr: Repr::Polynomial(coeffs),
        })
    }

    /// Node data with `xs[0] = 0`, strictly increasing.
    pub fn nodes(xs: Vec<f64>, values: Vec<CMat>) -> Result<Potential> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::InvalidInput(
                "node potential needs at least two nodes and one value per node".into(),
            ));
        }
        if xs[0] != 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("potential nodes must start at 0 and increase strictly".into()));
        }
        let m = values[0].nrows();
        if values
            .iter()
            .any(|v| v.nrows() != m || v.ncols() != m || v.iter().any(|z| !z.is_finite()))
        {
            return Err(Error::InvalidInput("potential node values must be finite m x m matrices".into()));
        }
        let slopes = pchip_slopes(&xs, &values, m);
        Ok(Potential {
            m,
            repr: Repr::Nodes { xs, values, slopes },
        })
    }

    pub fn tag(&self) -> PotentialTag {
        match self.repr {
            Repr::Zero => PotentialTag::Zero,
            Repr::Polynomial(_) => PotentialTag::Polynomial,
            Repr::Nodes { .. } => PotentialTag::Nodes,
        }
    }

    pub fn is_zero(&self) -> bool {
        let zero = |v: &[CMat]| v.iter().all(|a| a.iter().all(|z| z.norm() == 0.0));
        match &self.repr {
            Repr::Zero => true,
            Repr::Polynomial(c) => zero(c),
            Repr::Nodes { values, .. } => zero(values),
        }
    }

    /// Points where `Q` is not analytic.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Nodes { xs, .. } => xs[1..xs.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, x: f64) -> CMat {
        let mut out = CMat::zeros(self.m, self.m);
        self.eval_into(x, out.as_mut_slice());
        out
    }

    /// Writes `Q(x)` column-major into `out`.
    fn eval_into(&self, x: f64, out: &mut [C64]) {
        match &self.repr {
            Repr::Zero => out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0)),
            Repr::Polynomial(c) => {
                out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                for coef in c.iter().rev() {
                    for (o, a) in out.iter_mut().zip(coef.as_slice()) {
                        *o = *o * x + a;
                    }
                }
            }
            Repr::Nodes { xs, values, slopes } => {
                let k = xs.partition_point(|&t| t <= x).clamp(1, xs.len() - 1) - 1;
                let h = xs[k + 1] - xs[k];
                let t = ((x - xs[k]) / h).clamp(0.0, 1.0);
                let h00 = (1.0 + 2.0 * t) * (1.0 - t).powi(2);
                let h10 = t * (1.0 - t).powi(2);
                let h01 = t * t * (3.0 - 2.0 * t);
                let h11 = t * t * (t - 1.0);
                for (e, o) in out.iter_mut().enumerate() {
                    *o = values[k].as_slice()[e] * h00
                        + slopes[k].as_slice()[e] * (h10 * h)
                        + values[k + 1].as_slice()[e] * h01
                        + slopes[k + 1].as_slice()[e] * (h11 * h);
                }
            }
        }
    }

    /// `Q` (or `Q^T`) at every abscissa as row-major `m x m` blocks.
    pub(crate) fn at_nodes(&self, xs: &[f64], transpose: bool) -> Vec<C64> {
        let m = self.m;
        let mut out = vec![C64::new(0.0, 0.0); xs.len() * m * m];
        let mut tmp = vec![C64::new(0.0, 0.0); m * m];
        for (i, &x) in xs.iter().enumerate() {
            self.eval_into(x, &mut tmp);
            let blk = &mut out[i * m * m..(i + 1) * m * m];
            for r in 0..m {
                for c in 0..m {
                    let v = tmp[c * m + r];
                    if transpose {
                        blk[c * m + r] = v;
                    } else {
                        blk[r * m + c] = v;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Potential {
        let t = |v: &[CMat]| v.iter().map(|a| a.transpose()).collect::<Vec<_>>();
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Polynomial(c) => Repr::Polynomial(t(c)),
            Repr::Nodes { xs, values, slopes } => Repr::Nodes {
                xs: xs.clone(),
                values: t(values),
                slopes: t(slopes),
            },
        };
        Potential { m: self.m, repr }
    }

    /// Taylor coefficients of `Q` at `0` and the radius on which they
    /// represent `Q` exactly.
    pub fn taylor_at_zero(&self) -> (Vec<CMat>, f64) {
        match &self.repr {
            Repr::Zero => (vec![CMat::zeros(self.m, self.m)], f64::INFINITY),
            Repr::Polynomial(c) => (c.clone(), f64::INFINITY),
            Repr::Nodes { xs, values, slopes } => {
                let h = xs[1];
                let (v0, v1) = (&values[0], &values[1]);
                let (s0, s1) = (&slopes[0] * c(h, 0.0), &slopes[1] * c(h, 0.0));
                let t = [
                    v0.clone(),
                    s0.clone(),
                    v0 * c(-3.0, 0.0) - &s0 * c(2.0, 0.0) + v1 * c(3.0, 0.0) - &s1,
                    v0 * c(2.0, 0.0) + &s0 - v1 * c(2.0, 0.0) + &s1,
                ];
                let coeffs = t.into_iter().enumerate().map(|(k, a)| a / c(h.powi(k as i32), 0.0)).collect();
                (coeffs, h)
            }
        }
    }

    /// `int_0^T x^{1 - 2 nu_1} ||Q(x)|| dx`; must be finite.
    pub fn weighted_l1_certificate(&self, nu1: f64, length: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let g = 1.0 - 2.0 * nu1;
        let q0 = max_norm(&self.eval(0.0));
        if g <= -1.0 && q0 > 0.0 {
            return Err(Error::Domain(format!(
                "x^(1 - 2 nu_1) ||Q(x)|| is not integrable at 0 (nu_1 = {nu1}, ||Q(0)|| = {q0})"
            )));
        }
        let mesh = Mesh::build(length, 0.0, &self.breakpoints(), &MeshParams::default())?;
        let mut total = 0.0;
        for (x, w) in mesh.nodes.iter().zip(&mesh.weights) {
            total += w * x.powf(g) * max_norm(&self.eval(*x));
        }
        if g > -1.0 {
            total += q0 * mesh.x_min.powf(g + 1.0) / (g + 1.0);
        }
        if !total.is_finite() {
            return Err(Error::Domain("weighted L1 certificate of the potential is not finite".into()));
        }
        Ok(total)
    }
}

fn pchip_slopes(xs: &[f64], values: &[CMat], m: usize) -> Vec<CMat> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let mut slopes = vec![CMat::zeros(m, m); n];
    for e in 0..m * m {
        for part in 0..2 {
            let get = |k: usize| {
                let z = values[k].as_slice()[e];
                if part == 0 {
                    z.re
                } else {
                    z.im
                }
            };
            let d: Vec<f64> = (0..n - 1).map(|k| (get(k + 1) - get(k)) / h[k]).collect();
            let mut s = vec![0.0; n];
            if n == 2 {
                s = vec![d[0]; 2];
            } else {
                for k in 1..n - 1 {
                    if d[k - 1] * d[k] > 0.0 {
                        let w1 = 2.0 * h[k] + h[k - 1];
                        let w2 = h[k] + 2.0 * h[k - 1];
                        s[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
                    }
                }
                s[0] = end_slope(h[0], h[1], d[0], d[1]);
                s[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
            }
            for (k, sk) in s.into_iter().enumerate() {
                let z = &mut slopes[k].as_mut_slice()[e];
                if part == 0 {
                    z.re = sk;
                } else {
                    z.im = sk;
                }
            }
        }
    }
    slopes
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_evaluation_and_layout() {
        let a0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        let a1 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        let q = Potential::polynomial(vec![a0, a1]).unwrap();
        let v = q.eval(0.5);
        assert_eq!(v[(0, 0)], c(1.5, 0.0));
        assert_eq!(v[(1, 0)], c(1.5, 0.0));
        assert_eq!(v[(0, 1)], c(0.5, 0.0));
        let rows = q.at_nodes(&[0.5], false);
        assert_eq!(rows[2], c(1.5, 0.0));
        let cols = q.at_nodes(&[0.5], true);
        assert_eq!(cols[1], c(1.5, 0.0));
        assert_eq!(q.transpose().eval(0.5), v.transpose());
    }

    #[test]
    fn pchip_reproduces_linear_data() {
        let xs = vec![0.0, 0.3, 0.5, 1.0];
        let values: Vec<CMat> = xs.iter().map(|x| CMat::from_element(1, 1, c(2.0 * x + 1.0, -x))).collect();
        let q = Potential::nodes(xs, values).unwrap();
        for &x in &[0.0, 0.1, 0.3, 0.77, 1.0] {
            assert!((q.eval(x)[(0, 0)] - c(2.0 * x + 1.0, -x)).norm() < 1e-14);
        }
        assert_eq!(q.breakpoints(), vec![0.3, 0.5]);
        assert!(Potential::nodes(vec![0.1, 1.0], vec![CMat::zeros(1, 1); 2]).is_err());
    }

    #[test]
    fn taylor_coefficients_of_first_piece() {
        let xs = vec![0.0, 0.4, 0.7, 1.0];
        let values: Vec<CMat> = xs.iter().map(|x: &f64| CMat::from_element(1, 1, c(x.sin(), x * x))).collect();
        let q = Potential::nodes(xs, values).unwrap();
        let (t, r) = q.taylor_at_zero();
        assert_eq!(r, 0.4);
        for &x in &[0.0, 0.13, 0.39] {
            let v = t.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * x + a[(0, 0)]);
            assert!((v - q.eval(x)[(0, 0)]).norm() < 1e-14);
        }
    }

    #[test]
    fn certificate_for_constant_potential() {
        let q = Potential::polynomial(vec![CMat::from_element(1, 1, c(2.0, 0.0))]).unwrap();
        let cert = q.weighted_l1_certificate(0.7, 1.0).unwrap();
        assert!((cert - 2.0 / 0.6).abs() < 1e-12);
        assert!(q.weighted_l1_certificate(1.2, 1.0).is_err());
        assert_eq!(Potential::zero(2).weighted_l1_certificate(3.5, 1.0).unwrap(), 0.0);
    }
}
