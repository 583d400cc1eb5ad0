use std::time::Instant;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::metrics::{moment_bound_check, SampleCloud};
use crate::potential::PotentialSpec;
use crate::propcheck::report::{SuiteReport, Table};
use crate::schemes::{run_chain, NoiseStream, PhaseState, Scheme, SchemeParams};
use crate::taming::TamedDrift;

/// Settings of [`suite_moments`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentConfig {
    pub scheme: Scheme,
    pub lambda: f64,
    pub gamma: f64,
    pub n_chains: usize,
    pub burn_in: usize,
    pub n_steps: usize,
    pub stride: usize,
    pub seed: u64,
}

/// Second moment of positions over long chains (after burn-in) against
/// `(2/m)(u(0) + d)`, with a 3-standard-error allowance.
pub fn suite_moments(p: &PotentialSpec<f64>, cfg: &MomentConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    if cfg.n_chains == 0 || cfg.stride == 0 || cfg.n_steps < cfg.stride {
        return Err(invalid("n_chains, n_steps, stride", "need at least one recorded sample per chain"));
    }
    let td = TamedDrift::new(p.clone(), cfg.lambda)?;
    let sp = SchemeParams::new(&td, cfg.gamma)?;
    let d = p.dim();
    let total = cfg.burn_in + cfg.n_steps;
    let chains: Vec<Result<Vec<f64>>> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|k| {
            let mut stream = NoiseStream::new(cfg.seed, k as u64);
            let mut v = vec![0.0; d];
            stream.fill_normal(&mut v);
            let z0 = PhaseState { x: vec![0.0; d], v };
            let rec = run_chain(cfg.scheme, &z0, &td, &sp, total, cfg.stride, &mut stream)?;
            Ok(rec
                .steps
                .iter()
                .zip(rec.states)
                .filter(|(&s, _)| s > cfg.burn_in)
                .flat_map(|(_, z)| z.x)
                .collect())
        })
        .collect();
    let mut flat = Vec::new();
    for c in chains {
        flat.extend(c?);
    }
    let cloud = SampleCloud::from_flat(d, flat)?;
    let r = moment_bound_check(&cloud, p);

    let mut report = SuiteReport::new(
        "moments",
        Table::new(&["potential", "dim", "empirical", "stderr", "bound", "pass"]),
    );
    report.table.push(vec![
        p.name().into(),
        d.into(),
        r.empirical.into(),
        r.stderr.into(),
        r.bound.into(),
        (!r.violated).into(),
    ]);
    if r.violated {
        report.fail(
            0,
            format!("{} samples", cloud.len()),
            format!("E|Y|^2 <= {:.6e} + 3 stderr", r.bound),
            format!("{:.6e} (stderr {:.3e})", r.empirical, r.stderr),
        );
    }
    report.cases = 1;
    report.measure("empirical_second_moment", r.empirical);
    report.measure("stderr", r.stderr);
    report.measure("bound", r.bound);
    report.measure("samples", cloud.len() as f64);
    Ok(report.finish(start.elapsed()))
}
