use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tkl_cli::{parse_config, run, Suite};

/// Verification suites and sampling runs for tamed kinetic Langevin schemes.
#[derive(Parser)]
#[command(name = "tkl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Properties of the tamed drift on stratified pairs.
    CheckTaming(Common),
    /// Per-step contraction of synchronously coupled chains.
    CheckContraction(Common),
    /// Empirical Wasserstein-2 convergence against an oracle.
    CheckW2(Common),
    /// Lipschitz and covariance proxies of the log-Sobolev arguments.
    CheckLsiProxy(Common),
    /// Bounds on 1 - exp(-gamma*lambda) over a grid.
    CheckEta(Common),
    /// One-step order of the tamed Verlet map.
    CheckOrder(Common),
    /// Second moment of long chains.
    CheckMoments(Common),
    /// Free-form sampling; writes the recorded states.
    Sample(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "TKL_THREADS")]
    threads: Option<usize>,
}

fn execute(suite: Suite, args: Common) -> Result<i32> {
    if let Some(n) = args.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = parse_config(&text).with_context(|| format!("in {}", args.config.display()))?;
    if cfg.suite != suite {
        bail!("{} selects suite `{}` but this subcommand runs `{suite}`", args.config.display(), cfg.suite);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    let outcome = run(&cfg)?;
    println!("{}", outcome.summary);
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suite, args) = match cli.command {
        Command::CheckTaming(a) => (Suite::Taming, a),
        Command::CheckContraction(a) => (Suite::Contraction, a),
        Command::CheckW2(a) => (Suite::W2, a),
        Command::CheckLsiProxy(a) => (Suite::LsiProxy, a),
        Command::CheckEta(a) => (Suite::EtaBounds, a),
        Command::CheckOrder(a) => (Suite::Order, a),
        Command::CheckMoments(a) => (Suite::Moments, a),
        Command::Sample(a) => (Suite::Sample, a),
    };
    match execute(suite, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
