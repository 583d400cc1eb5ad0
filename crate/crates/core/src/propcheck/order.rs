use std::time::Instant;

use crate::error::{invalid, Result};
use crate::metrics::order_fit;
use crate::potential::PotentialSpec;
use crate::propcheck::report::{SuiteReport, Table};
use crate::schemes::{hamiltonian_reference, verlet_map, NoiseStream, PhaseState};
use crate::taming::TamedDrift;
use crate::vecops::{dist, norm_sq};

/// Step sizes of the default order study.
pub const ORDER_LAMBDAS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
/// Accepted range of the fitted one-step velocity-error slope.
pub const ORDER_SLOPE_RANGE: (f64, f64) = (1.9, 2.3);

/// Approximate draw from `exp(−u)`: proposal `N(0, I/(2m))`, accepted with
/// probability `exp(−(u(x) − u(0) − m|x|²))` (capped at 1).
pub fn sample_target(p: &PotentialSpec<f64>, stream: &mut NoiseStream) -> Vec<f64> {
    let d = p.dim();
    let scale = (0.5 / p.m).sqrt();
    let u0 = p.value(&vec![0.0; d]);
    loop {
        let mut x = vec![0.0; d];
        stream.fill_normal(&mut x);
        x.iter_mut().for_each(|c| *c *= scale);
        let log_acc = -(p.value(&x) - u0 - p.m * norm_sq(&x));
        if stream.uniform::<f64>().ln() < log_acc.min(0.0) {
            return x;
        }
    }
}

/// One-step accuracy of the tamed Verlet map against an RK4 integration of
/// the untamed Hamiltonian flow, from `n_starts` points with positions drawn
/// from the target and standard normal velocities. The least-squares
/// log-log slope of the RMS velocity error must fall in [`ORDER_SLOPE_RANGE`].
pub fn suite_verlet_order(
    p: &PotentialSpec<f64>,
    lambdas: &[f64],
    n_starts: usize,
    substeps: usize,
    seed: u64,
) -> Result<SuiteReport> {
    let start = Instant::now();
    if n_starts == 0 {
        return Err(invalid("n_starts", "must be at least 1"));
    }
    let mut stream = NoiseStream::new(seed, 0);
    let starts: Vec<PhaseState<f64>> = (0..n_starts)
        .map(|_| {
            let x = sample_target(p, &mut stream);
            let mut v = vec![0.0; p.dim()];
            stream.fill_normal(&mut v);
            PhaseState { x, v }
        })
        .collect();

    let mut report = SuiteReport::new(
        "order",
        Table::new(&["lambda", "rms_velocity_error", "rms_position_error"]),
    );
    let mut v_err = Vec::with_capacity(lambdas.len());
    let mut x_err = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let td = TamedDrift::new(p.clone(), lambda)?;
        let (mut sv, mut sx) = (0.0, 0.0);
        for z in &starts {
            let a = verlet_map(z, &td, lambda);
            let b = hamiltonian_reference(z, p, lambda, substeps)?;
            sv += dist(&a.v, &b.v).powi(2);
            sx += dist(&a.x, &b.x).powi(2);
        }
        let rv = (sv / n_starts as f64).sqrt();
        let rx = (sx / n_starts as f64).sqrt();
        report.table.push(vec![lambda.into(), rv.into(), rx.into()]);
        v_err.push(rv);
        x_err.push(rx);
    }
    let slope = order_fit(lambdas, &v_err)?;
    let x_slope = order_fit(lambdas, &x_err)?;
    report.measure("velocity_slope", slope);
    report.measure("position_slope", x_slope);
    let (lo, hi) = ORDER_SLOPE_RANGE;
    if !(lo..=hi).contains(&slope) {
        report.fail(0, format!("lambdas={lambdas:?}"), format!("slope in [{lo}, {hi}]"), format!("{slope:.6}"));
    }
    report.cases = 1;
    Ok(report.finish(start.elapsed()))
}
