//! Executes a configured run and writes its CSV artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use tkl_core::propcheck::report::{SuiteReport, Table};
use tkl_core::propcheck::{
    default_eta_grid, suite_contraction, suite_eta_bounds, suite_lsi_proxies, suite_moments, suite_taming,
    suite_verlet_order, suite_w2_convergence, MomentConfig, W2Config, ORDER_LAMBDAS,
};
use tkl_core::schemes::{run_chain, NoiseStream, PhaseState};

use crate::config::{ExperimentConfig, GammaSetting, Suite};

/// What [`run`] produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub passed: bool,
    pub summary: String,
    /// Files written, in write order.
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Derived constants and regime checks, one per row.
pub fn header_table(cfg: &ExperimentConfig) -> Table {
    let td = &cfg.tamed;
    let sp = &cfg.params;
    let mut t = Table::new(&["quantity", "value", "detail"]);
    let mut row = |q: &str, v: f64, detail: &str| t.push(vec![q.into(), v.into(), detail.into()]);
    row("lambda", cfg.lambda, "");
    row(
        "gamma",
        sp.gamma,
        match cfg.gamma_setting {
            GammaSetting::Auto => "auto",
            GammaSetting::Value(_) => "configured",
        },
    );
    row("r_lambda", td.r_lambda(), "");
    row("R_lambda", td.cap(), "");
    row("M_lambda", td.m_lambda(), if td.lipschitz_overridden() { "override" } else { "default" });
    row("m", td.m(), "");
    row("psi0", sp.psi.psi0, "");
    row("psi1", sp.psi.psi1, "");
    row("psi2", sp.psi.psi2, "");
    row("C11", sp.cov.c11, "");
    row("C12", sp.cov.c12, "");
    row("C22", sp.cov.c22, "");
    row("a", sp.a, "");
    row("b", sp.b, "");
    row("f_lambda", sp.f_lambda, "");
    row("kappa", sp.kappa, "");
    for c in &cfg.regime {
        let detail = format!(
            "rhs={:.16e} {} {}",
            c.condition.rhs,
            if c.condition.holds { "holds" } else { "violated" },
            if c.enforced { "enforced" } else { "not_enforced" }
        );
        t.push(vec![format!("regime: {}", c.condition.label).into(), c.condition.lhs.into(), detail.into()]);
    }
    t
}

fn failures_table(report: &SuiteReport) -> Table {
    let mut t = Table::new(&["case", "input", "expected", "observed"]);
    for f in &report.failures {
        t.push(vec![f.case.into(), f.input.as_str().into(), f.expected.as_str().into(), f.observed.as_str().into()]);
    }
    t
}

fn write_table(dir: &Path, name: &str, table: &Table, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(format!("{name}.csv"));
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    table
        .write_csv(std::io::BufWriter::new(file))
        .with_context(|| format!("writing {}", path.display()))?;
    files.push(path);
    Ok(())
}

/// Free-form sampling: `n_chains` chains from `x = 0` with standard normal
/// velocities, recording every `stride`-th state after `burn_in`.
fn sample_table(cfg: &ExperimentConfig) -> Result<Table> {
    let n_chains = cfg.n_chains.unwrap_or(100);
    let n_steps = cfg.n_steps.unwrap_or(10_000);
    let stride = cfg.stride.unwrap_or(100);
    let burn_in = cfg.burn_in.unwrap_or(0);
    let d = cfg.potential.dim();
    let chains: Vec<tkl_core::Result<_>> = (0..n_chains)
        .into_par_iter()
        .map(|k| {
            let mut stream = NoiseStream::new(cfg.seed, k as u64);
            let mut v = vec![0.0; d];
            stream.fill_normal(&mut v);
            let z0 = PhaseState { x: vec![0.0; d], v };
            run_chain(cfg.scheme, &z0, &cfg.tamed, &cfg.params, burn_in + n_steps, stride, &mut stream)
        })
        .collect();
    let mut cols = vec!["chain".to_string(), "step".to_string()];
    cols.extend((0..d).map(|j| format!("x{j}")));
    cols.extend((0..d).map(|j| format!("v{j}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&col_refs);
    for (k, rec) in chains.into_iter().enumerate() {
        let rec = rec?;
        for (step, z) in rec.steps.iter().zip(&rec.states) {
            if *step < burn_in {
                continue;
            }
            let mut row = vec![k.into(), (*step).into()];
            row.extend(z.x.iter().map(|&x| x.into()));
            row.extend(z.v.iter().map(|&v| v.into()));
            t.push(row);
        }
    }
    Ok(t)
}

/// Runs the selected suite (or the sampling run), writes
/// `<out>/<suite>.csv`, `<suite>_header.csv`, `<suite>_measurements.csv`,
/// `<suite>_failures.csv` and any extra tables, and returns the summary.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let name = cfg.suite.name();
    let report = match cfg.suite {
        Suite::Taming => suite_taming(&cfg.tamed, cfg.n_pairs.unwrap_or(100_000), cfg.seed),
        Suite::Contraction => suite_contraction(
            cfg.scheme,
            &cfg.tamed,
            &cfg.params,
            cfg.n_pairs.unwrap_or(100),
            cfg.n_steps.unwrap_or(10_000),
            cfg.seed,
        )?,
        Suite::W2 => {
            let mut w = W2Config::new(
                cfg.scheme,
                cfg.lambda,
                cfg.n_chains.unwrap_or(10_000),
                cfg.n_steps.unwrap_or(1_000),
                cfg.seed,
            );
            if let GammaSetting::Value(g) = cfg.gamma_setting {
                w.gamma_auto = false;
                w.gamma = g;
            }
            w.m_override = cfg.m_override;
            if let Some(e) = cfg.epsilon {
                w.epsilon = e;
            }
            suite_w2_convergence(&cfg.potential, &w)?
        }
        Suite::LsiProxy => suite_lsi_proxies(&cfg.tamed, cfg.gamma(), cfg.n_points.unwrap_or(1_000), cfg.seed)?,
        Suite::EtaBounds => suite_eta_bounds(&default_eta_grid())?,
        Suite::Order => suite_verlet_order(&cfg.potential, &ORDER_LAMBDAS, cfg.n_points.unwrap_or(1_000), 200, cfg.seed)?,
        Suite::Moments => suite_moments(
            &cfg.potential,
            &MomentConfig {
                scheme: cfg.scheme,
                lambda: cfg.lambda,
                gamma: cfg.gamma(),
                n_chains: cfg.n_chains.unwrap_or(200),
                burn_in: cfg.burn_in.unwrap_or(1_000),
                n_steps: cfg.n_steps.unwrap_or(10_000),
                stride: cfg.stride.unwrap_or(50),
                seed: cfg.seed,
            },
        )?,
        Suite::Sample => {
            let mut r = SuiteReport::new("sample", sample_table(cfg)?);
            r.cases = r.table.rows.len();
            r
        }
    };

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut files = Vec::new();
    write_table(&cfg.out, name, &report.table, &mut files)?;
    write_table(&cfg.out, &format!("{name}_header"), &header_table(cfg), &mut files)?;
    if cfg.suite != Suite::Sample {
        write_table(&cfg.out, &format!("{name}_measurements"), &report.measurement_table(), &mut files)?;
        write_table(&cfg.out, &format!("{name}_failures"), &failures_table(&report), &mut files)?;
    }
    for (extra, table) in &report.extra_tables {
        write_table(&cfg.out, &format!("{name}_{extra}"), table, &mut files)?;
    }
    Ok(RunOutcome {
        passed: report.passed(),
        summary: report.summary_line(),
        files,
    })
}
