use crate::metrics::SampleCloud;
use crate::potential::PotentialSpec;
use crate::vecops::norm_sq;

const BATCHES: usize = 20;

/// Empirical second moment of a sample cloud against `(2/m)(u(0) + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `empirical − 3·stderr > bound`
    pub violated: bool,
}

/// `(2/m)(u(0) + d)`.
pub fn moment_bound(p: &PotentialSpec<f64>) -> f64 {
    let zero = vec![0.0; p.dim()];
    2.0 / p.m * (p.value(&zero) + p.dim() as f64)
}

/// Compares `E|Y|²` over the cloud with [`moment_bound`].
///
/// The standard error comes from 20 contiguous batch means, so clouds built
/// chain after chain account for within-chain correlation.
pub fn moment_bound_check(samples: &SampleCloud<f64>, p: &PotentialSpec<f64>) -> MomentReport {
    let sq: Vec<f64> = samples.points().map(norm_sq).collect();
    let n = sq.len();
    let empirical = sq.iter().sum::<f64>() / n as f64;
    let stderr = if n >= 2 * BATCHES {
        let size = n / BATCHES;
        let means: Vec<f64> = sq
            .chunks(size)
            .take(BATCHES)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        let mm = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|x| (x - mm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (var / BATCHES as f64).sqrt()
    } else if n >= 2 {
        let var = sq.iter().map(|x| (x - empirical).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let bound = moment_bound(p);
    MomentReport {
        empirical,
        stderr,
        bound,
        violated: empirical - 3.0 * stderr > bound,
    }
}
