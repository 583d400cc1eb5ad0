use std::time::Instant;

use crate::error::Result;
use crate::metrics::{default_fd_step, jacobian_opnorm_fd};
use crate::potential::uniform_in_ball;
use crate::propcheck::report::{SuiteReport, Table};
use crate::schemes::{
    mean_map_fbar, noise_map_theta, sigma_bar_displayed, sigma_bar_from_covariance, sym2_opnorm,
    NoiseStream, PhaseState, SchemeParams,
};
use crate::taming::TamedDrift;

/// Step sizes of the small-step covariance check.
pub const SIGMA_LAMBDAS: [f64; 3] = [1e-2, 1e-3, 1e-4];
const SIGMA_REL_TOL: f64 = 0.1;
const NOISE_MAP_SLACK: f64 = 1e-6;
/// Keeps finite-difference stencils inside the ball where `h_λ = h`.
const INTERIOR_MARGIN: f64 = 1e-3;

/// Finite-difference and closed-form proxies of the log-Sobolev arguments:
///
/// 1. the mean map in `(φ, ψ)` coordinates has Jacobian norm `< 1` at
///    `n_points` points with `φ` inside `B(0, r_λ − 2)` and `ψ = φ + 2v/γ`,
///    `v` standard normal;
/// 2. the OBABO transition as a function of `(G, G′)` has Jacobian norm at
///    most `(1 + λ + λ²M_λ/2)√(1 − η̃²)` at the same points;
/// 3. the displayed `(φ, ψ)` noise covariance has operator norm within 10%
///    of `4λ/γ` for `λ ∈ {1e−2, 1e−3, 1e−4}`.
///
/// Rejects `γ ≤ 0`.
pub fn suite_lsi_proxies(td: &TamedDrift<f64>, gamma: f64, n_points: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let sp = SchemeParams::new(td, gamma)?;
    let d = td.dim();
    let radius = (td.r_lambda() - 2.0 - INTERIOR_MARGIN).max(0.0);
    let noise_bound = (1.0 + sp.lambda + sp.lambda * sp.lambda * sp.m_lambda / 2.0) * sp.ou_noise_scale();
    let mut stream = NoiseStream::new(seed, 0);
    let mut report = SuiteReport::new(
        "lsi_proxy",
        Table::new(&["check", "parameter", "measured", "bound", "pass"]),
    );

    let mut worst_fbar = 0.0f64;
    let mut worst_noise = 0.0f64;
    for i in 0..n_points {
        let phi = uniform_in_ball(stream.rng_mut(), d, radius);
        let mut v = vec![0.0; d];
        stream.fill_normal(&mut v);
        let psi: Vec<f64> = phi.iter().zip(&v).map(|(p, q)| p + 2.0 * q / gamma).collect();
        let point: Vec<f64> = phi.iter().chain(&psi).copied().collect();
        let fbar = |p: &[f64]| {
            let (a, b) = mean_map_fbar(&p[..d], &p[d..], td, &sp);
            a.into_iter().chain(b).collect::<Vec<f64>>()
        };
        let norm = jacobian_opnorm_fd(fbar, &point, default_fd_step(&point))?;
        worst_fbar = worst_fbar.max(norm);
        if !(norm < 1.0) {
            report.fail(2 * i, format!("phi={phi:?} psi={psi:?}"), "mean-map Jacobian norm < 1", format!("{norm:.17e}"));
        }

        let z = PhaseState { x: phi.clone(), v: v.clone() };
        let mut g = vec![0.0; 2 * d];
        stream.fill_normal(&mut g);
        let theta = |gg: &[f64]| {
            let out = noise_map_theta(&z, td, &sp, &gg[..d], &gg[d..]);
            out.x.into_iter().chain(out.v).collect::<Vec<f64>>()
        };
        let norm = jacobian_opnorm_fd(theta, &g, default_fd_step(&g))?;
        worst_noise = worst_noise.max(norm);
        if !(norm <= noise_bound * (1.0 + NOISE_MAP_SLACK)) {
            report.fail(
                2 * i + 1,
                format!("x={phi:?} v={v:?}"),
                format!("noise-map Jacobian norm <= {:.17e}", noise_bound * (1.0 + NOISE_MAP_SLACK)),
                format!("{norm:.17e}"),
            );
        }
    }
    report.table.push(vec!["mean_map_jacobian".into(), "max".into(), worst_fbar.into(), 1.0.into(), (worst_fbar < 1.0).into()]);
    report.table.push(vec![
        "noise_map_jacobian".into(),
        "max".into(),
        worst_noise.into(),
        noise_bound.into(),
        (worst_noise <= noise_bound * (1.0 + NOISE_MAP_SLACK)).into(),
    ]);

    // Closed-form covariance ratios.
    let mut excess = Vec::new();
    for (k, &lam) in SIGMA_LAMBDAS.iter().enumerate() {
        let lead = 4.0 * lam / gamma;
        let shown = sym2_opnorm(sigma_bar_displayed(lam, gamma));
        let ratio = shown / lead;
        let pass = (ratio - 1.0).abs() <= SIGMA_REL_TOL;
        if !pass {
            report.fail(
                2 * n_points + k,
                format!("lambda={lam:e} gamma={gamma:e}"),
                "covariance norm / (4 lambda/gamma) within 10% of 1",
                format!("{ratio:.17e}"),
            );
        }
        report.table.push(vec!["sigma_ratio".into(), format!("{lam:e}").into(), ratio.into(), 1.0.into(), pass.into()]);
        excess.push((lam, shown - lead));

        let direct = SchemeParams::from_constants(lam, gamma, sp.m, sp.m_lambda)?;
        let recomputed = sym2_opnorm(sigma_bar_from_covariance(&direct)) / lead;
        report.measure(&format!("sigma_ratio_lambda_{lam:e}"), ratio);
        report.measure(&format!("sigma_ratio_recomputed_lambda_{lam:e}"), recomputed);
    }
    // Least-squares c in ‖Σ̄‖ − 4λ/γ ≈ cλ².
    let num: f64 = excess.iter().map(|(l, e)| e * l * l).sum();
    let den: f64 = excess.iter().map(|(l, _)| l.powi(4)).sum();
    report.measure("sigma_second_order_coefficient", num / den);

    report.cases = 2 * n_points + SIGMA_LAMBDAS.len();
    report.measure("max_mean_map_jacobian", worst_fbar);
    report.measure("mean_map_contraction_gap", 1.0 - worst_fbar);
    report.measure("max_noise_map_jacobian", worst_noise);
    report.measure("noise_map_bound", noise_bound);
    report.measure("noise_map_over_two_sqrt_one_minus_eta_half_sq", worst_noise / (2.0 * sp.ou_noise_scale()));
    Ok(report.finish(start.elapsed()))
}
