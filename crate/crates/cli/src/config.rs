//! TOML run configs and sweep specs.
//!
//! Run config:
//!
//! ```toml
//! scorer = "teddy"        # teddy | random | random:<seed> | lowest_degree | highest_degree | one_hop_degree
//!
//! [train]                 # every key optional
//! lr = 0.01
//! weight_decay = 5e-4
//! epochs = 200
//! lambda_dt = 1.0
//! tau = 1.0
//! p_g = 0.0
//! p_theta = 0.0
//! seed = 0
//! hidden = 128
//! eval_every = 1
//! warm_start = false
//!
//! [train.optimizer]
//! kind = "adam"           # or "sgd" (no further keys)
//! beta1 = 0.9
//! beta2 = 0.999
//! eps = 1e-8
//! ```
//!
//! Sweep spec: `dataset` (relative paths resolve against the spec file),
//! `scorers`, `grid` (simulation indices k), `seeds`, optional
//! `per_round = 0.05` and `prune_weights = true`, plus a `[train]` table of
//! overrides. Each run uses `p_g = 1 − (1 − per_round)^k`, and the same `p_θ`
//! unless `prune_weights = false`.

use std::fs;
use std::path::{Path, PathBuf};

use glt_core::{RunConfig, ScorerKind};
use serde::Deserialize;

use crate::error::{io_error, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(default = "default_scorer")]
    pub scorer: String,
    #[serde(default)]
    pub train: RunConfig,
}

fn default_scorer() -> String {
    "teddy".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dataset: PathBuf,
    pub scorers: Vec<String>,
    pub grid: Vec<u32>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_per_round")]
    pub per_round: f64,
    #[serde(default = "default_true")]
    pub prune_weights: bool,
    #[serde(default)]
    pub train: RunConfig,
}

fn default_per_round() -> f64 {
    glt_core::pipeline::DEFAULT_PER_ROUND
}

fn default_true() -> bool {
    true
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn load_run_file(path: &Path) -> CliResult<RunFile> {
    let file: RunFile = read_toml(path)?;
    file.train.validate()?;
    parse_scorer(&file.scorer, 0)?;
    Ok(file)
}

pub fn load_sweep_spec(path: &Path) -> CliResult<SweepSpec> {
    let mut spec: SweepSpec = read_toml(path)?;
    if spec.grid.is_empty() {
        return Err(CliError::Validation(
            "invalid sweep field `grid`: must not be empty".into(),
        ));
    }
    if spec.seeds.is_empty() {
        return Err(CliError::Validation(
            "invalid sweep field `seeds`: must not be empty".into(),
        ));
    }
    if spec.scorers.is_empty() {
        return Err(CliError::Validation(
            "invalid sweep field `scorers`: must not be empty".into(),
        ));
    }
    if !(spec.per_round > 0.0 && spec.per_round < 1.0) {
        return Err(CliError::Validation(format!(
            "invalid sweep field `per_round`: {} not in (0, 1)",
            spec.per_round
        )));
    }
    for s in &spec.scorers {
        parse_scorer(s, 0)?;
    }
    spec.train.validate()?;
    if spec.dataset.is_relative() {
        if let Some(parent) = path.parent() {
            spec.dataset = parent.join(&spec.dataset);
        }
    }
    Ok(spec)
}

/// Parses a scorer name; bare `random` draws from the run seed.
pub fn parse_scorer(name: &str, run_seed: u64) -> CliResult<ScorerKind> {
    let kind: ScorerKind = name.parse()?;
    Ok(if name.trim() == "random" {
        kind.reseeded(run_seed)
    } else {
        kind
    })
}
