//! Small statistics helpers shared by the fitting modules.

use crate::error::{Error, Result};

/// Ordinary or weighted least-squares straight line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_err: f64,
    pub intercept_err: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
    /// Weighted sum of squared residuals.
    pub ssr: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Unweighted least-squares line.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let w = vec![1.0; x.len()];
    weighted_linear_fit(x, y, &w)
}

/// Weighted least-squares line with weights `w_k` (typically `1/sigma_k^2`).
///
/// Parameter errors are the usual covariance-based standard errors, scaled by
/// the reduced chi-square when there are more than two points.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::InvalidParameter(
            "length mismatch in linear fit".into(),
        ));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "linear fit needs at least 2 points, got {}",
            x.len()
        )));
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - mx) * (xi - mx);
        sxy += wi * (xi - mx) * (yi - my);
        syy += wi * (yi - my) * (yi - my);
    }
    if sxx <= 0.0 {
        return Err(Error::Degenerate("all abscissae identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| wi * (yi - intercept - slope * xi).powi(2))
        .sum();
    let dof = x.len() as f64 - 2.0;
    let scale = if dof > 0.0 { ssr / dof } else { 0.0 };
    let slope_err = (scale / sxx).sqrt();
    let intercept_err = (scale * (1.0 / sw + mx * mx / sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_err,
        intercept_err,
        r_squared,
        ssr,
    })
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData(
            "pearson needs two equal-length series".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance series".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and a reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = k as f64 / n;
        let hi = (k + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 0.5 * v).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-14);
        assert!((fit.intercept - 2.0).abs() < 1e-14);
        assert!(fit.slope_err < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_of_anticorrelated_is_minus_one() {
        let x = [1.0, 2.0, 3.0];
        let y = [3.0, 2.0, 1.0];
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn ks_of_uniform_grid_is_small() {
        let samples: Vec<f64> = (0..1000).map(|k| (k as f64 + 0.5) / 1000.0).collect();
        let d = ks_distance(&samples, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.5e-3 + 1e-12);
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
    }
}
