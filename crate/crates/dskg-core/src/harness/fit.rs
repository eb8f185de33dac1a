//! Log-log least squares for power-law rate measurements.

use crate::error::HarnessError;

/// Fit `y = C x^slope` by least squares on `(log x, log y)`.
/// Returns `(slope, intercept, r2)`; callers should require `r2 >= 0.9`
/// before trusting a slope.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64), HarnessError> {
    if xs.len() < 4 || xs.len() != ys.len() {
        return Err(HarnessError::NonPositiveData);
    }
    if xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0)) {
        return Err(HarnessError::NonPositiveData);
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(HarnessError::NonPositiveData);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, intercept, r2))
}
