use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::metrics::{w2_1d, NormalTransportTable, SampleCloud};
use crate::potential::{BuiltinPotential, PotentialSpec};
use crate::propcheck::report::{SuiteReport, Table};
use crate::schemes::{run_chain, NoiseStream, PhaseState, Scheme, SchemeParams};
use crate::taming::TamedDrift;

/// Settings of [`suite_w2_convergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct W2Config {
    pub scheme: Scheme,
    pub lambda: f64,
    /// Friction; ignored when `gamma_auto` is set.
    pub gamma: f64,
    /// Use the regime minimum `5√M_λ` / `2√M_λ` at every step size.
    pub gamma_auto: bool,
    pub m_override: Option<f64>,
    pub n_chains: usize,
    /// Length of the run from the fixed start.
    pub n_steps: usize,
    pub n_snapshots: usize,
    /// Every position coordinate of the fixed start; velocities start at 0.
    pub start: f64,
    /// Plateau threshold.
    pub epsilon: f64,
    /// Length of the stationary-start runs at `λ` (the `λ/2` run covers the same time).
    pub stationary_steps: usize,
    /// Fine reference step is `λ / reference_factor`.
    pub reference_factor: usize,
    /// Exact-sample clouds used to measure the W2 noise floor.
    pub floor_clouds: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

impl W2Config {
    pub fn new(scheme: Scheme, lambda: f64, n_chains: usize, n_steps: usize, seed: u64) -> Self {
        Self {
            scheme,
            lambda,
            gamma: 2.0,
            gamma_auto: true,
            m_override: None,
            n_chains,
            n_steps,
            n_snapshots: 100,
            start: 2.0,
            epsilon: 0.05,
            stationary_steps: n_steps / 10,
            reference_factor: 100,
            floor_clouds: 100,
            bootstrap: 32,
            seed,
        }
    }
}

/// Counter block per independent set of chains, so sets never share streams.
const BLOCK: u64 = 1 << 32;

struct Setup {
    td: TamedDrift<f64>,
    sp: SchemeParams<f64>,
}

fn setup(target: &PotentialSpec<f64>, cfg: &W2Config, lambda: f64) -> Result<Setup> {
    let mut td = TamedDrift::new(target.clone(), lambda)?;
    if let Some(m) = cfg.m_override {
        td = td.with_lipschitz_override(m)?;
    }
    let gamma = if cfg.gamma_auto {
        cfg.scheme.minimal_gamma(td.m_lambda())
    } else {
        cfg.gamma
    };
    let sp = SchemeParams::new(&td, gamma)?;
    Ok(Setup { td, sp })
}

/// Positions per snapshot, laid out `[snapshot][chain · d + j]`.
fn run_set<F>(s: &Setup, cfg: &W2Config, n_steps: usize, stride: usize, block: u64, init: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&mut NoiseStream) -> PhaseState<f64> + Sync,
{
    let chains: Vec<Result<Vec<Vec<f64>>>> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|k| {
            let mut stream = NoiseStream::new(cfg.seed, block * BLOCK + k as u64);
            let z0 = init(&mut stream);
            let rec = run_chain(cfg.scheme, &z0, &s.td, &s.sp, n_steps, stride, &mut stream)?;
            Ok(rec.states.into_iter().map(|z| z.x).collect())
        })
        .collect();
    let d = s.td.dim();
    let mut snaps: Vec<Vec<f64>> = Vec::new();
    for chain in chains {
        let chain = chain?;
        if snaps.is_empty() {
            snaps = vec![Vec::with_capacity(cfg.n_chains * d); chain.len()];
        }
        for (s, x) in snaps.iter_mut().zip(chain) {
            s.extend(x);
        }
    }
    Ok(snaps)
}

fn coordinate(flat: &[f64], d: usize, j: usize) -> Vec<f64> {
    flat.iter().skip(j).step_by(d).copied().collect()
}

/// How a snapshot cloud is compared with the target.
enum Oracle {
    /// `N(0, σ²)` per coordinate.
    Gaussian { sigma: f64, table: NormalTransportTable },
    /// Per-coordinate oracle clouds.
    Cloud { coords: Vec<Vec<f64>> },
}

impl Oracle {
    /// Largest per-coordinate W2 of `flat` to the oracle.
    fn w2(&self, flat: &[f64], d: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for j in 0..d {
            let c = coordinate(flat, d, j);
            let w = match self {
                Oracle::Gaussian { sigma, table } => table.w2(&c, 0.0, *sigma)?,
                Oracle::Cloud { coords } => w2_1d(
                    &SampleCloud::from_scalars(c)?,
                    &SampleCloud::from_scalars(coords[j].clone())?,
                )?,
            };
            worst = worst.max(w);
        }
        Ok(worst)
    }

    /// Bootstrap standard error of [`Oracle::w2`] over resampled chains.
    fn stderr(&self, flat: &[f64], d: usize, reps: usize, stream: &mut NoiseStream) -> Result<f64> {
        if reps < 2 {
            return Ok(0.0);
        }
        let n = flat.len() / d;
        let mut vals = Vec::with_capacity(reps);
        let mut buf = vec![0.0; flat.len()];
        for _ in 0..reps {
            for i in 0..n {
                let k = stream.rng_mut().random_range(0..n);
                buf[i * d..(i + 1) * d].copy_from_slice(&flat[k * d..(k + 1) * d]);
            }
            vals.push(self.w2(&buf, d)?);
        }
        Ok(std_dev(&vals))
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

struct Series {
    steps: Vec<usize>,
    w2: Vec<f64>,
    stderr: Vec<f64>,
}

impl Series {
    fn table(&self) -> Table {
        let mut t = Table::new(&["step", "empirical_w2", "stderr"]);
        for i in 0..self.steps.len() {
            t.push(vec![self.steps[i].into(), self.w2[i].into(), self.stderr[i].into()]);
        }
        t
    }

    fn last_quarter(&self) -> std::ops::Range<usize> {
        let n = self.w2.len();
        (n - n.div_ceil(4))..n
    }

    fn plateau(&self) -> f64 {
        mean(&self.w2[self.last_quarter()])
    }

    /// Typical single-snapshot standard error over the last quarter.
    fn plateau_stderr(&self) -> f64 {
        mean(&self.stderr[self.last_quarter()])
    }
}

fn evaluate(
    snaps: &[Vec<f64>],
    stride: usize,
    d: usize,
    oracle: &Oracle,
    reps: usize,
    stream: &mut NoiseStream,
) -> Result<Series> {
    let mut s = Series { steps: Vec::new(), w2: Vec::new(), stderr: Vec::new() };
    for (i, flat) in snaps.iter().enumerate() {
        s.steps.push(i * stride);
        s.w2.push(oracle.w2(flat, d)?);
        s.stderr.push(oracle.stderr(flat, d, reps, stream)?);
    }
    Ok(s)
}

/// Stationary covariance of the position–velocity chain for the quadratic
/// target `c|x|²/2` in one coordinate, assuming it stays where the tamed
/// drift is linear. Returns the position variance.
fn linearized_position_variance(scheme: Scheme, c: f64, sp: &SchemeParams<f64>) -> Result<f64> {
    let q = crate::potential::builtin_potential(BuiltinPotential::Quadratic, c, 1)?;
    let td = TamedDrift::from_parts(q, sp.lambda, 1e6, 1e6 * c)?;
    let step = |x: f64, v: f64, n1: f64, n2: f64| -> (f64, f64) {
        let z = PhaseState { x: vec![x], v: vec![v] };
        let out = match scheme {
            Scheme::Exponential => crate::schemes::exp_step(&z, &td, sp, (&[n1], &[n2])),
            Scheme::Obabo => crate::schemes::obabo_step(&z, &td, sp, &[n1], &[n2]),
        };
        (out.x[0], out.v[0])
    };
    let (a00, a10) = step(1.0, 0.0, 0.0, 0.0);
    let (a01, a11) = step(0.0, 1.0, 0.0, 0.0);
    let (n1, n2) = match scheme {
        Scheme::Exponential => ((sp.factor.l11, sp.factor.l21), (0.0, sp.factor.l22)),
        Scheme::Obabo => ((1.0, 0.0), (0.0, 1.0)),
    };
    let (b00, b10) = step(0.0, 0.0, n1.0, n1.1);
    let (b01, b11) = step(0.0, 0.0, n2.0, n2.1);
    // Σ∞ = Σ_k A^k Q (A^k)ᵀ by repeated doubling.
    type M2 = [[f64; 2]; 2];
    let mul = |a: &M2, b: &M2| -> M2 {
        let mut r = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        r
    };
    let tr = |a: &M2| -> M2 { [[a[0][0], a[1][0]], [a[0][1], a[1][1]]] };
    let mut p: M2 = [[a00, a01], [a10, a11]];
    let b: M2 = [[b00, b01], [b10, b11]];
    let mut s = mul(&b, &tr(&b));
    for _ in 0..64 {
        let psp = mul(&mul(&p, &s), &tr(&p));
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += psp[i][j];
            }
        }
        p = mul(&p, &p);
    }
    Ok(s[0][0])
}

/// Empirical position-W2 decay of `n_chains` independent chains from a fixed start.
///
/// For the quadratic target the oracle is the exact Gaussian marginal and the
/// suite checks: (i) decay, `W2ₖ₊₁ ≤ W2ₖ + 3σ`; (ii) plateau (mean over the
/// last quarter of snapshots) `≤ ε`; (iii) chains started from the target
/// stay within `3σ_floor` of the W2 noise floor of exact samples; (iv) the
/// plateau at `λ/2` is lower than at `λ` by more than `3σ`.
///
/// For other targets the oracle is a fine-step chain (`λ/reference_factor`
/// over the same time horizon) and check (iii)/(iv) become: the plateau of
/// the main run is within `3σ` of the plateau of an independent fine-step
/// run against the same oracle.
///
/// `σ` is a bootstrap standard error over chains.
pub fn suite_w2_convergence(target: &PotentialSpec<f64>, cfg: &W2Config) -> Result<SuiteReport> {
    let start = Instant::now();
    if cfg.n_chains < 2 || cfg.n_snapshots == 0 || cfg.n_steps < cfg.n_snapshots {
        return Err(invalid("n_chains, n_steps", "need at least 2 chains and one step per snapshot"));
    }
    let d = target.dim();
    let main = setup(target, cfg, cfg.lambda)?;
    let stride = cfg.n_steps / cfg.n_snapshots;
    let x0 = cfg.start;
    let fixed = |_: &mut NoiseStream| PhaseState { x: vec![x0; d], v: vec![0.0; d] };
    let mut boot = NoiseStream::new(cfg.seed, u64::MAX);

    let mut report = SuiteReport::new("w2", Table::new(&["step", "empirical_w2", "stderr"]));
    report.measure("lambda", cfg.lambda);
    report.measure("gamma", main.sp.gamma);

    let snaps = run_set(&main, cfg, cfg.n_steps, stride, 0, fixed)?;
    let quadratic = target.builtin() == Some(BuiltinPotential::Quadratic);

    let (oracle, reference) = if quadratic {
        let c = target.coefficient().unwrap_or(1.0);
        let sigma = 1.0 / c.sqrt();
        let table = NormalTransportTable::new(cfg.n_chains);
        (Oracle::Gaussian { sigma, table }, None)
    } else {
        let fine = setup(target, cfg, cfg.lambda / cfg.reference_factor as f64)?;
        let fine_steps = cfg.n_steps * cfg.reference_factor;
        let oracle_snaps = run_set(&fine, cfg, fine_steps, fine_steps, 3, fixed)?;
        let last = oracle_snaps.last().expect("final state recorded");
        let coords = (0..d).map(|j| coordinate(last, d, j)).collect();
        let ref_snaps = run_set(&fine, cfg, fine_steps, stride * cfg.reference_factor, 4, fixed)?;
        report.measure("reference_lambda", fine.sp.lambda);
        report.measure("reference_gamma", fine.sp.gamma);
        (Oracle::Cloud { coords }, Some(ref_snaps))
    };

    let series = evaluate(&snaps, stride, d, &oracle, cfg.bootstrap, &mut boot)?;
    let mut case = 0usize;

    // (i) decay up to noise.
    for i in 1..series.w2.len() {
        let sigma = series.stderr[i - 1].hypot(series.stderr[i]);
        if series.w2[i] > series.w2[i - 1] + 3.0 * sigma {
            report.fail(
                case,
                format!("decay at step {}", series.steps[i]),
                format!("<= {:.6e}", series.w2[i - 1] + 3.0 * sigma),
                format!("{:.6e}", series.w2[i]),
            );
        }
        case += 1;
    }

    // (ii) plateau.
    let plateau = series.plateau();
    report.measure("plateau", plateau);
    report.measure("plateau_stderr", series.plateau_stderr());
    report.measure("epsilon", cfg.epsilon);
    if !(plateau <= cfg.epsilon) {
        report.fail(case, "plateau", format!("<= {:.6e}", cfg.epsilon), format!("{plateau:.6e}"));
    }
    case += 1;

    if let Oracle::Gaussian { sigma, .. } = &oracle {
        // Noise floor of exact samples.
        let floor: Vec<f64> = (0..cfg.floor_clouds)
            .into_par_iter()
            .map(|k| {
                let mut s = NoiseStream::new(cfg.seed, 5 * BLOCK + k as u64);
                let mut pts = vec![0.0; cfg.n_chains * d];
                s.fill_normal(&mut pts);
                pts.iter_mut().for_each(|p| *p *= sigma);
                oracle.w2(&pts, d)
            })
            .collect::<Result<_>>()?;
        let (mu_f, sd_f) = (mean(&floor), std_dev(&floor));
        report.measure("noise_floor_mean", mu_f);
        report.measure("noise_floor_sd", sd_f);

        // (iii) stationarity.
        let sig = *sigma;
        let stationary = move |s: &mut NoiseStream| {
            let mut x = vec![0.0; d];
            let mut v = vec![0.0; d];
            s.fill_normal(&mut x);
            s.fill_normal(&mut v);
            x.iter_mut().for_each(|p| *p *= sig);
            PhaseState { x, v }
        };
        let st_stride = (cfg.stationary_steps / cfg.n_snapshots).max(1);
        let st = run_set(&main, cfg, cfg.stationary_steps, st_stride, 1, stationary)?;
        let st_series = evaluate(&st, st_stride, d, &oracle, cfg.bootstrap, &mut boot)?;
        for i in 0..st_series.w2.len() {
            let dev = (st_series.w2[i] - mu_f).abs();
            if dev > 3.0 * sd_f {
                report.fail(
                    case,
                    format!("stationary start, step {}", st_series.steps[i]),
                    format!("|W2 - {mu_f:.6e}| <= {:.6e}", 3.0 * sd_f),
                    format!("{:.6e}", st_series.w2[i]),
                );
            }
            case += 1;
        }
        report.measure("stationary_max_w2", st_series.w2.iter().cloned().fold(0.0, f64::max));

        // (iv) halving the step.
        let half = setup(target, cfg, cfg.lambda / 2.0)?;
        let half_steps = 2 * cfg.stationary_steps;
        let half_stride = (half_steps / cfg.n_snapshots).max(1);
        let hs = run_set(&half, cfg, half_steps, half_stride, 2, stationary)?;
        let h_series = evaluate(&hs, half_stride, d, &oracle, cfg.bootstrap, &mut boot)?;
        let p_full = mean(&st_series.w2);
        let p_half = mean(&h_series.w2);
        let sigma_diff = mean(&st_series.stderr).hypot(mean(&h_series.stderr));
        report.measure("stationary_plateau", p_full);
        report.measure("half_step_plateau", p_half);
        report.measure("half_step_gamma", half.sp.gamma);
        report.measure("halving_sigma", sigma_diff);
        if !(p_full - p_half > 3.0 * sigma_diff) {
            report.fail(
                case,
                format!("plateau at lambda={:.3e} vs lambda/2", cfg.lambda),
                format!("decrease > {:.6e}", 3.0 * sigma_diff),
                format!("{:.6e}", p_full - p_half),
            );
        }
        case += 1;

        let c = target.coefficient().unwrap_or(1.0);
        let exact_full = (linearized_position_variance(cfg.scheme, c, &main.sp)?.sqrt() - sig).abs();
        let exact_half = (linearized_position_variance(cfg.scheme, c, &half.sp)?.sqrt() - sig).abs();
        report.measure("linearized_exact_plateau", exact_full);
        report.measure("linearized_exact_plateau_half_step", exact_half);

        report.extra_tables.push(("stationary".into(), st_series.table()));
        report.extra_tables.push(("half_step".into(), h_series.table()));
    }

    if let Some(ref_snaps) = reference {
        let r_series = evaluate(&ref_snaps, stride, d, &oracle, cfg.bootstrap, &mut boot)?;
        let p_ref = r_series.plateau();
        let sigma = series.plateau_stderr().hypot(r_series.plateau_stderr());
        report.measure("reference_plateau", p_ref);
        report.measure("consistency_sigma", sigma);
        if !((plateau - p_ref).abs() <= 3.0 * sigma) {
            report.fail(
                case,
                "plateau vs fine-step reference",
                format!("|difference| <= {:.6e}", 3.0 * sigma),
                format!("{:.6e}", plateau - p_ref),
            );
        }
        case += 1;
        report.extra_tables.push(("reference".into(), r_series.table()));
    }

    report.table = series.table();
    report.cases = case;
    report.note(format!("oracle: {}", if quadratic { "exact Gaussian marginal" } else { "fine-step reference chain" }));
    Ok(report.finish(start.elapsed()))
}
