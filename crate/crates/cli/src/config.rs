//! Flat `key = value` configuration with `[section]` headers.
//!
//! ```text
//! [potential]
//! name = double_well
//! c = 1
//! dim = 1
//!
//! [scheme]
//! kind = exponential
//! lambda = 1e-3
//! gamma = auto
//!
//! [run]
//! suite = contraction
//! n_pairs = 100
//! n_steps = 10000
//! seed = 42
//! ```
//!
//! `#` starts a comment. Every key belongs to exactly one section.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;
use tkl_core::schemes::{RegimeCondition, Scheme, SchemeParams};
use tkl_core::{PotentialSpec, TamedDrift};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    DuplicateKey { line: usize, key: String, first: usize },
    #[error("missing required field `{0}`")]
    Missing(&'static str),
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    Value { line: usize, key: String, reason: String },
    #[error("regime violated: {0}")]
    Regime(String),
    #[error(transparent)]
    Core(#[from] tkl_core::Error),
}

/// What a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Taming,
    Contraction,
    W2,
    LsiProxy,
    EtaBounds,
    Order,
    Moments,
    Sample,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Taming,
        Suite::Contraction,
        Suite::W2,
        Suite::LsiProxy,
        Suite::EtaBounds,
        Suite::Order,
        Suite::Moments,
        Suite::Sample,
    ];

    /// Name used in the config and in output file names.
    pub fn name(self) -> &'static str {
        match self {
            Suite::Taming => "taming",
            Suite::Contraction => "contraction",
            Suite::W2 => "w2",
            Suite::LsiProxy => "lsi_proxy",
            Suite::EtaBounds => "eta_bounds",
            Suite::Order => "order",
            Suite::Moments => "moments",
            Suite::Sample => "sample",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|k| k.name()).collect();
                format!("unknown suite `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Friction setting before resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSetting {
    /// Regime minimum `5√M_λ` (exponential) or `2√M_λ` (OBABO).
    Auto,
    Value(f64),
}

/// One regime inequality together with whether this run enforces it.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedCondition {
    pub condition: RegimeCondition,
    pub enforced: bool,
}

/// A parsed and validated run configuration with its derived constants.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec<f64>,
    pub scheme: Scheme,
    pub lambda: f64,
    pub gamma_setting: GammaSetting,
    pub m_override: Option<f64>,
    /// `None`: enforce what the suite needs (see [`parse_config`]).
    pub enforce_regime: Option<bool>,
    pub suite: Suite,
    pub n_steps: Option<usize>,
    pub n_chains: Option<usize>,
    pub n_pairs: Option<usize>,
    pub n_points: Option<usize>,
    pub stride: Option<usize>,
    pub burn_in: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub tamed: TamedDrift<f64>,
    pub params: SchemeParams<f64>,
    pub regime: Vec<CheckedCondition>,
}

impl ExperimentConfig {
    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    /// Re-derives the tamed drift, scheme coefficients and regime checks,
    /// e.g. after changing the suite.
    pub fn revalidate(&mut self) -> Result<(), ConfigError> {
        let mut td = TamedDrift::new(self.potential.clone(), self.lambda)?;
        if let Some(m) = self.m_override {
            td = td.with_lipschitz_override(m)?;
        }
        let gamma = match self.gamma_setting {
            GammaSetting::Auto => self.scheme.minimal_gamma(td.m_lambda()),
            GammaSetting::Value(g) => g,
        };
        let sp = SchemeParams::new(&td, gamma)?;
        let conditions = self.scheme.regime(&sp);
        let regime: Vec<CheckedCondition> = conditions
            .into_iter()
            .map(|c| {
                let enforced = match self.enforce_regime {
                    Some(e) => e,
                    None => required_by_default(self.suite, self.scheme, c.label),
                };
                CheckedCondition { condition: c, enforced }
            })
            .collect();
        if let Some(bad) = regime.iter().find(|c| c.enforced && !c.condition.holds) {
            return Err(ConfigError::Regime(bad.condition.to_string()));
        }
        self.tamed = td;
        self.params = sp;
        self.regime = regime;
        Ok(())
    }
}

/// The contraction suite needs the whole regime of its scheme. Every other
/// run keeps the exponential step-size condition `λ ≤ 1/(2γ)`, which the
/// coefficient bounds of that scheme rely on.
fn required_by_default(suite: Suite, scheme: Scheme, label: &str) -> bool {
    suite == Suite::Contraction || (scheme == Scheme::Exponential && label.starts_with("lambda"))
}

const KEYS: [(&str, &[&str]); 3] = [
    ("potential", &["name", "c", "dim"]),
    ("scheme", &["kind", "lambda", "gamma", "m_override", "enforce_regime"]),
    (
        "run",
        &[
            "suite", "n_steps", "n_chains", "n_pairs", "n_points", "stride", "burn_in", "epsilon", "seed", "out",
        ],
    ),
];

struct Raw {
    /// `section.key -> (value, line)`
    entries: BTreeMap<String, (String, usize)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parse<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|e: T::Err| ConfigError::Value {
                line,
                key: key.to_string(),
                reason: e.to_string(),
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.parse(key)?.ok_or(ConfigError::Missing(key))
    }
}

fn tokenize(text: &str) -> Result<Raw, ConfigError> {
    let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut section: Option<&str> = None;
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                reason: format!("malformed section header `{content}`"),
            })?;
            let name = name.trim();
            section = Some(
                KEYS.iter()
                    .find(|(s, _)| *s == name)
                    .map(|(s, _)| *s)
                    .ok_or_else(|| ConfigError::Syntax {
                        line,
                        reason: format!("unknown section `[{name}]`"),
                    })?,
            );
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            reason: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.ok_or_else(|| ConfigError::Syntax {
            line,
            reason: format!("key `{key}` appears before any section"),
        })?;
        let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        let full = format!("{sec}.{key}");
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: full });
        }
        if value.is_empty() {
            return Err(ConfigError::Value { line, key: full, reason: "empty value".into() });
        }
        if let Some((_, first)) = entries.get(&full) {
            return Err(ConfigError::DuplicateKey { line, key: full, first: *first });
        }
        entries.insert(full, (value.to_string(), line));
    }
    Ok(Raw { entries })
}

/// Parses and validates a configuration document.
///
/// Required: `potential.name`, `scheme.kind`, `scheme.lambda`, `run.seed`,
/// `run.suite`. `gamma` defaults to `auto`.
///
/// Regime conditions of the selected scheme are always evaluated and listed
/// in the run header. Which are enforced: all of them when
/// `enforce_regime = true`, none when `false`, and otherwise the full regime
/// for the contraction suite and `λ ≤ 1/(2γ)` for any exponential run.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = tokenize(text)?;
    let name: String = raw.require("potential.name")?;
    let c: f64 = raw.parse("potential.c")?.unwrap_or(1.0);
    let dim: usize = raw.parse("potential.dim")?.unwrap_or(1);
    let potential = PotentialSpec::by_name(&name, c, dim)?;

    let scheme: Scheme = raw.require("scheme.kind")?;
    let lambda: f64 = raw.require("scheme.lambda")?;
    let gamma_setting = match raw.get("scheme.gamma") {
        None | Some(("auto", _)) => GammaSetting::Auto,
        Some((v, line)) => GammaSetting::Value(v.parse().map_err(|e: std::num::ParseFloatError| {
            ConfigError::Value { line, key: "scheme.gamma".into(), reason: format!("{e} (expected a number or `auto`)") }
        })?),
    };
    let m_override = raw.parse("scheme.m_override")?;
    let enforce_regime = raw.parse("scheme.enforce_regime")?;

    let suite: Suite = raw.require("run.suite")?;
    let lambda_key_line = raw.get("scheme.lambda").map(|(_, l)| l).unwrap_or(0);
    if lambda.is_nan() || lambda <= 0.0 || !lambda.is_finite() {
        return Err(ConfigError::Value {
            line: lambda_key_line,
            key: "scheme.lambda".into(),
            reason: format!("must be positive, got {lambda}"),
        });
    }

    let td = TamedDrift::new(potential.clone(), lambda)?;
    let sp = SchemeParams::new(&td, 1.0)?;
    let mut cfg = ExperimentConfig {
        potential,
        scheme,
        lambda,
        gamma_setting,
        m_override,
        enforce_regime,
        suite,
        n_steps: raw.parse("run.n_steps")?,
        n_chains: raw.parse("run.n_chains")?,
        n_pairs: raw.parse("run.n_pairs")?,
        n_points: raw.parse("run.n_points")?,
        stride: raw.parse("run.stride")?,
        burn_in: raw.parse("run.burn_in")?,
        epsilon: raw.parse("run.epsilon")?,
        seed: raw.require("run.seed")?,
        out: raw.parse::<PathBuf>("run.out")?.unwrap_or_else(|| PathBuf::from(".")),
        tamed: td,
        params: sp,
        regime: Vec::new(),
    };
    cfg.revalidate()?;
    Ok(cfg)
}
