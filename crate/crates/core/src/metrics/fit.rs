use crate::error::{invalid, Result};

/// Least-squares slope of `log(error)` against `log(λ)`.
pub fn order_fit(lambdas: &[f64], errors: &[f64]) -> Result<f64> {
    if lambdas.len() != errors.len() {
        return Err(invalid("errors", "must have one entry per step size"));
    }
    if lambdas.len() < 2 {
        return Err(invalid("lambdas", "need at least two points"));
    }
    if lambdas.iter().chain(errors).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid("lambdas, errors", "entries must be positive and finite"));
    }
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("lambdas", "need at least two distinct step sizes"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
