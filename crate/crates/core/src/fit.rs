//! Log-log slope fits for the asymptotic verification reports.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub rms_residual: f64,
    pub points: usize,
}

/// Least-squares line through `(ln x, ln y)`. Points with non-positive `y`
/// are skipped; `None` if fewer than two usable points remain.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    linear_fit(&pts)
}

pub fn linear_fit(pts: &[(f64, f64)]) -> Option<SlopeFit> {
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / nf).sqrt();
    Some(SlopeFit {
        slope,
        intercept,
        rms_residual: rms,
        points: n,
    })
}

/// Log-log fit of a deviation sequence against a decay law.
#[derive(Debug, Clone, Serialize)]
pub struct LadderFit {
    pub label: String,
    pub fit: Option<SlopeFit>,
    /// Largest slope accepted by the `O(rho^-beta)` law.
    pub threshold: f64,
    /// Every deviation is at rounding level, so there is nothing to fit.
    pub exact: bool,
    pub passes: bool,
}

/// Deviations at or below this level count as exact.
pub const EXACT_LEVEL: f64 = 1e-13;

impl LadderFit {
    pub fn new(label: String, xs: &[f64], ys: &[f64], threshold: f64) -> LadderFit {
        let exact = ys.iter().all(|&y| y <= EXACT_LEVEL);
        let fit = if exact { None } else { loglog_slope(xs, ys) };
        let passes = exact || fit.as_ref().is_some_and(|f| f.slope <= threshold);
        LadderFit {
            label,
            fit,
            threshold,
            exact,
            passes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs: Vec<f64> = (0..6).map(|k| 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.6)).collect();
        let f = loglog_slope(&xs, &ys).unwrap();
        assert!((f.slope + 0.6).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_none());
    }
}
