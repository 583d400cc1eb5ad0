use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::potential::uniform_in_ball;
use crate::propcheck::report::{SuiteReport, Table};
use crate::schemes::{require_regime, run_coupled, NoiseStream, PhaseState, Scheme, SchemeParams};
use crate::taming::TamedDrift;

/// Relative slack on the strict per-step bound.
pub const RATE_SLACK: f64 = 1e-9;
/// Tolerance of the non-expansion bound.
pub const NON_EXPANSION_SLACK: f64 = 1e-12;
/// Below `64ε` the rate is not resolvable in double precision.
pub const RESOLVABLE_RATE: f64 = 64.0 * f64::EPSILON;
const START_RADIUS: f64 = 1.5;

fn initial_state(stream: &mut NoiseStream, dim: usize) -> PhaseState<f64> {
    let x = uniform_in_ball(stream.rng_mut(), dim, START_RADIUS);
    let mut v = vec![0.0; dim];
    stream.fill_normal(&mut v);
    PhaseState { x, v }
}

/// Synchronously coupled pairs: every per-step ratio of the weighted squared
/// distance must stay below `1 − rate` (`rate = f(λ)` or `λκ`).
///
/// The regime of the scheme is validated first. When the rate is below
/// `64ε` the suite asserts non-expansion (`ratio ≤ 1 + 1e−12`) instead and
/// reports the measured rate.
///
/// Pair `k` draws both starting points (positions uniform in a ball of
/// radius 1.5, standard normal velocities) and then all of its noise from
/// stream `k` of `seed`.
pub fn suite_contraction(
    scheme: Scheme,
    td: &TamedDrift<f64>,
    sp: &SchemeParams<f64>,
    n_pairs: usize,
    n_steps: usize,
    seed: u64,
) -> Result<SuiteReport> {
    let start = Instant::now();
    let regime = scheme.regime(sp);
    require_regime(&regime)?;
    let rate = scheme.contraction_rate(sp);
    let strict = rate >= RESOLVABLE_RATE;
    let bound = if strict {
        (1.0 - rate) * (1.0 + RATE_SLACK)
    } else {
        1.0 + NON_EXPANSION_SLACK
    };
    let dim = td.dim();

    let runs: Vec<Result<(Vec<f64>, Option<usize>)>> = (0..n_pairs)
        .into_par_iter()
        .map(|k| {
            let mut stream = NoiseStream::new(seed, k as u64);
            let z0 = initial_state(&mut stream, dim);
            let z1 = initial_state(&mut stream, dim);
            let rec = run_coupled(scheme, &z0, &z1, td, sp, n_steps, n_steps, &mut stream)?;
            Ok((rec.ratios, rec.merged_at))
        })
        .collect();

    let mut report = SuiteReport::new("contraction", Table::new(&["step", "worst_ratio", "bound", "pass"]));
    let mut worst = vec![f64::NEG_INFINITY; n_steps];
    let mut merged = 0usize;
    let mut cases = 0usize;
    for (k, run) in runs.into_iter().enumerate() {
        let (ratios, merged_at) = run?;
        if merged_at.is_some() {
            merged += 1;
        }
        cases += ratios.len();
        for (n, &q) in ratios.iter().enumerate() {
            worst[n] = worst[n].max(q);
            if !(q <= bound) {
                report.fail(
                    k * n_steps + n,
                    format!("pair {k} step {n}"),
                    format!("ratio <= {bound:.17e}"),
                    format!("{q:.17e}"),
                );
            }
        }
    }
    let mut overall = f64::NEG_INFINITY;
    for (n, &w) in worst.iter().enumerate() {
        if w.is_finite() {
            overall = overall.max(w);
            report.table.push(vec![(n + 1).into(), w.into(), bound.into(), (w <= bound).into()]);
        }
    }
    report.cases = cases;
    report.measure("rate", rate);
    report.measure("bound", bound);
    report.measure("strict_mode", if strict { 1.0 } else { 0.0 });
    report.measure("worst_ratio", overall);
    report.measure("measured_rate", 1.0 - overall);
    report.measure("merged_pairs", merged as f64);
    for c in &regime {
        report.note(format!("regime: {c}"));
    }
    if !strict {
        report.note(format!(
            "rate {rate:.3e} is below 64 machine epsilons; non-expansion asserted"
        ));
    }
    Ok(report.finish(start.elapsed()))
}
