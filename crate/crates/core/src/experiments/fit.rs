use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Transformed points actually used.
    pub points: Vec<(f64, f64)>,
}

/// Ordinary least squares after dropping the smallest quarter of the `x`
/// range. Needs at least four remaining points.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<FitResult> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let kept: Vec<(f64, f64)> = pts.split_off(pts.len() / 4);
    if kept.len() < 4 || kept.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidParams(format!("fit needs at least 4 finite points, got {}", kept.len())));
    }
    let n = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / n;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = kept.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(FitResult { slope, intercept: my - slope * mx, r_squared, points: kept })
}

/// [`fit_linear`] on `(ln x, ln y)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<FitResult> {
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    fit_linear(&logs)
}
