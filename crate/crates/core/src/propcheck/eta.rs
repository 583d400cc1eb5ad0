use std::time::Instant;

use crate::error::{invalid, Result};
use crate::propcheck::report::{SuiteReport, Table};

/// 10 log-spaced `λ ∈ [1e−4, 1e−1]` times 10 values `λγ ∈ [0.05, 0.5]`.
pub fn default_eta_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::with_capacity(100);
    for i in 0..10 {
        let lambda = 10f64.powf(-4.0 + 3.0 * i as f64 / 9.0);
        for k in 0..10 {
            let x = 0.05 + 0.05 * k as f64;
            grid.push((lambda, x / lambda));
        }
    }
    grid
}

/// With `η = e^{−λγ}`: `λγ/2 ≤ 1 − η ≤ λγ` and `0 ≤ η − 1 + λγ ≤ (λγ)²/2`
/// at every grid point. Requires `λγ ≤ 1/2`.
pub fn suite_eta_bounds(grid: &[(f64, f64)]) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut report = SuiteReport::new(
        "eta_bounds",
        Table::new(&["lambda", "gamma", "one_minus_eta", "lower", "upper", "pass"]),
    );
    for (i, &(lambda, gamma)) in grid.iter().enumerate() {
        let x = lambda * gamma;
        if !(lambda > 0.0 && gamma > 0.0) || x > 0.5 {
            return Err(invalid("grid", format!("point {i} has lambda*gamma = {x:e}, outside (0, 1/2]")));
        }
        let one_minus_eta = -(-x).exp_m1();
        let (lower, upper) = (x / 2.0, x);
        let rest = x - one_minus_eta;
        let first = lower <= one_minus_eta && one_minus_eta <= upper;
        let second = 0.0 <= rest && rest <= x * x / 2.0;
        if !first {
            report.fail(i, format!("lambda={lambda:e} gamma={gamma:e}"), format!("[{lower:e}, {upper:e}]"), format!("{one_minus_eta:e}"));
        }
        if !second {
            report.fail(i, format!("lambda={lambda:e} gamma={gamma:e}"), format!("[0, {:e}]", x * x / 2.0), format!("{rest:e}"));
        }
        report.table.push(vec![
            lambda.into(),
            gamma.into(),
            one_minus_eta.into(),
            lower.into(),
            upper.into(),
            (first && second).into(),
        ]);
    }
    report.cases = grid.len();
    Ok(report.finish(start.elapsed()))
}
