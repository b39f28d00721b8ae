//! Experiment configuration: a TOML document overlaid by command-line flags,
//! resolved into a validated [`ExperimentConfig`] before anything runs.

use std::path::{Path, PathBuf};

use pqlab_core::freqset::{MAX_SUBSET_SUM_QUERIES, PowerSchedule};
use pqlab_core::lab::grid_from_epsilon;
use pqlab_core::model::{MAX_CONTROL_QUBITS, MAX_TARGET_QUBITS};
use pqlab_core::Phase;
use serde::{Deserialize, Deserializer};
use thiserror::Error;

/// Largest phase grid a curve may be sampled on.
pub const MAX_GRID: u64 = 1 << 20;
/// Cap on `grid * 2^(T + t)` amplitude updates per curve.
pub const MAX_CURVE_WORK: u64 = 1 << 30;
/// The audit squares the subset-sum count per outcome label.
pub const MAX_AUDIT_QUERIES: usize = 8;
pub const MAX_SWEEP_QUERIES: usize = 16;
pub const MAX_SWEEP_GRID: u64 = 1 << 16;
pub const MAX_TRIALS: usize = 10_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    Freqset,
    QpeCurve,
    Audit,
    BoundSweep,
    Selftest,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Freqset => "freqset",
            ExperimentKind::QpeCurve => "qpe-curve",
            ExperimentKind::Audit => "audit",
            ExperimentKind::BoundSweep => "bound-sweep",
            ExperimentKind::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Unvalidated parameters, shared by the config file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Number of queries T
    #[arg(long = "T", value_name = "T")]
    #[serde(rename = "T")]
    pub queries: Option<usize>,
    /// Precision: 2^-k, a decimal, or a/b; bound-sweep also takes 2^-a..2^-b or a comma list
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "number_or_text")]
    pub eps: Option<String>,
    /// Power schedule p_1,...,p_T
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<u64>>,
    /// Number of phases sampled on [0, 1)
    #[arg(long)]
    pub grid: Option<u64>,
    /// Target qubits
    #[arg(long = "t", value_name = "t")]
    #[serde(rename = "t")]
    pub target_qubits: Option<usize>,
    /// Bucket index r
    #[arg(long)]
    pub bucket: Option<u64>,
    /// Eigenphase of |q>
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Eigenphases of the other 2^t - 1 eigenvectors
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub other_phases: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random circuits drawn by selftest
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest T tried by bound-sweep
    #[arg(long = "max-T", value_name = "T")]
    #[serde(rename = "max_T")]
    pub max_queries: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn number_or_text<'de, D: Deserializer<'de>>(de: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
        Text(String),
    }
    Ok(Some(match Raw::deserialize(de)? {
        Raw::Int(i) => i.to_string(),
        Raw::Float(f) => f.to_string(),
        Raw::Text(s) => s,
    }))
}

impl Params {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(self, flags: Params) -> Params {
        Params {
            queries: flags.queries.or(self.queries),
            eps: flags.eps.or(self.eps),
            schedule: flags.schedule.or(self.schedule),
            grid: flags.grid.or(self.grid),
            target_qubits: flags.target_qubits.or(self.target_qubits),
            bucket: flags.bucket.or(self.bucket),
            phi: flags.phi.or(self.phi),
            other_phases: flags.other_phases.or(self.other_phases),
            seed: flags.seed.or(self.seed),
            trials: flags.trials.or(self.trials),
            max_queries: flags.max_queries.or(self.max_queries),
            out: flags.out.or(self.out),
            format: flags.format.or(self.format),
        }
    }
}

/// Parses `2^-k`, `a/b` or a decimal and checks `0 < eps <= 1/2`.
pub fn parse_eps(text: &str) -> Result<f64, ConfigError> {
    let s = text.trim();
    let value = if let Some((base, exp)) = s.split_once('^') {
        let (base, exp) = parse_power(base, exp, s)?;
        (base as f64).powi(exp)
    } else if let Some((num, den)) = s.split_once('/') {
        match (num.trim().parse::<f64>(), den.trim().parse::<f64>()) {
            (Ok(n), Ok(d)) if d != 0.0 => n / d,
            _ => return invalid(format!("eps: cannot parse fraction {s:?}")),
        }
    } else {
        s.parse::<f64>()
            .or_else(|_| invalid(format!("eps: cannot parse {s:?}")))?
    };
    if !(value.is_finite() && value > 0.0 && value <= 0.5) {
        return invalid(format!("eps must satisfy 0 < eps <= 1/2 (got {s})"));
    }
    Ok(value)
}

fn parse_power(base: &str, exp: &str, whole: &str) -> Result<(u32, i32), ConfigError> {
    let exp = exp.trim().trim_start_matches('(').trim_end_matches(')');
    match (base.trim().parse::<u32>(), exp.parse::<i32>()) {
        (Ok(b), Ok(e)) if b >= 2 => Ok((b, e)),
        _ => invalid(format!("eps: cannot parse power {whole:?}")),
    }
}

/// A comma list of precisions, or an inclusive range `b^x..b^y` stepping the
/// exponent by one.
pub fn parse_eps_list(text: &str) -> Result<Vec<f64>, ConfigError> {
    if let Some((lo, hi)) = text.split_once("..") {
        let (Some((b1, e1)), Some((b2, e2))) = (lo.split_once('^'), hi.split_once('^')) else {
            return invalid(format!("eps range {text:?} must have the form 2^-a..2^-b"));
        };
        let (b1, e1) = parse_power(b1, e1, lo)?;
        let (b2, e2) = parse_power(b2, e2, hi)?;
        if b1 != b2 {
            return invalid(format!("eps range {text:?} mixes bases"));
        }
        let exps: Vec<i32> = if e1 <= e2 {
            (e1..=e2).collect()
        } else {
            (e2..=e1).rev().collect()
        };
        return exps
            .into_iter()
            .map(|e| parse_eps(&format!("{b1}^{e}")))
            .collect();
    }
    text.split(',').map(parse_eps).collect()
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub settings: Settings,
    pub out: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Settings {
    Simulate {
        queries: usize,
        target_qubits: usize,
        phi: Phase,
        other_phases: Vec<Phase>,
        eps: Option<f64>,
    },
    Freqset {
        schedule: PowerSchedule,
        target_qubits: Option<usize>,
        eps: Option<f64>,
    },
    QpeCurve {
        queries: usize,
        target_qubits: usize,
        bucket: u64,
        eps: f64,
        grid: u64,
        other_phases: Vec<Phase>,
    },
    Audit {
        queries: usize,
        target_qubits: usize,
        eps: f64,
        other_phases: Vec<Phase>,
    },
    BoundSweep {
        eps: Vec<f64>,
        max_queries: usize,
    },
    Selftest {
        seed: u64,
        trials: usize,
    },
}

fn queries(p: &Params, max: usize) -> Result<usize, ConfigError> {
    let t = p.queries.unwrap_or(3);
    if !(1..=max).contains(&t) {
        return invalid(format!("T must be in 1..={max} (got {t})"));
    }
    Ok(t)
}

fn target_qubits(p: &Params) -> Result<usize, ConfigError> {
    let t = p.target_qubits.unwrap_or(1);
    if !(1..=MAX_TARGET_QUBITS).contains(&t) {
        return invalid(format!("t must be in 1..={MAX_TARGET_QUBITS} (got {t})"));
    }
    Ok(t)
}

fn phase(name: &str, value: f64) -> Result<Phase, ConfigError> {
    if !value.is_finite() {
        return invalid(format!("{name} must be finite (got {value})"));
    }
    Ok(Phase::new(value))
}

fn other_phases(p: &Params, target_qubits: usize) -> Result<Vec<Phase>, ConfigError> {
    let expected = (1usize << target_qubits) - 1;
    match &p.other_phases {
        None => Ok(vec![Phase::ZERO; expected]),
        Some(v) if v.len() == expected => v.iter().map(|&x| phase("other_phases", x)).collect(),
        Some(v) => invalid(format!(
            "other_phases needs 2^t - 1 = {expected} entries for t = {target_qubits} (got {})",
            v.len()
        )),
    }
}

fn single_eps(p: &Params, default: f64) -> Result<f64, ConfigError> {
    p.eps.as_deref().map_or(Ok(default), parse_eps)
}

fn grid_of(eps: f64) -> Result<u64, ConfigError> {
    grid_from_epsilon(eps).or_else(|_| {
        invalid(format!("1/(2 eps) must be a positive integer (eps = {eps})"))
    })
}

impl ExperimentConfig {
    pub fn resolve(kind: ExperimentKind, p: &Params) -> Result<Self, ConfigError> {
        let settings = match kind {
            ExperimentKind::Simulate => {
                let t = target_qubits(p)?;
                let Some(phi) = p.phi else {
                    return invalid("simulate requires phi");
                };
                Settings::Simulate {
                    queries: queries(p, MAX_CONTROL_QUBITS)?,
                    target_qubits: t,
                    phi: phase("phi", phi)?,
                    other_phases: other_phases(p, t)?,
                    eps: p.eps.as_deref().map(parse_eps).transpose()?,
                }
            }
            ExperimentKind::Freqset => {
                let powers = match &p.schedule {
                    Some(s) if p.queries.is_some_and(|t| t != s.len()) => {
                        return invalid(format!(
                            "schedule has {} powers but T = {}",
                            s.len(),
                            p.queries.unwrap_or_default()
                        ));
                    }
                    Some(s) => s.clone(),
                    None => PowerSchedule::geometric(queries(p, MAX_SUBSET_SUM_QUERIES)?)
                        .powers()
                        .to_vec(),
                };
                if powers.len() > MAX_SUBSET_SUM_QUERIES {
                    return invalid(format!(
                        "schedule length must be at most {MAX_SUBSET_SUM_QUERIES} (got {})",
                        powers.len()
                    ));
                }
                let schedule = match PowerSchedule::new(powers) {
                    Ok(s) => s,
                    Err(e) => return invalid(format!("schedule: {e}")),
                };
                let t = match p.target_qubits {
                    Some(_) => Some(target_qubits(p)?),
                    None => None,
                };
                Settings::Freqset {
                    schedule,
                    target_qubits: t,
                    eps: p.eps.as_deref().map(parse_eps).transpose()?,
                }
            }
            ExperimentKind::QpeCurve => {
                let queries = queries(p, MAX_CONTROL_QUBITS)?;
                let t = target_qubits(p)?;
                let eps = single_eps(p, 1.0 / 16.0)?;
                let n = grid_of(eps)?;
                let bucket = p.bucket.unwrap_or(0);
                if bucket >= n {
                    return invalid(format!("bucket must be below N = {n} (got {bucket})"));
                }
                let grid = p.grid.unwrap_or(512);
                if !(3..=MAX_GRID).contains(&grid) {
                    return invalid(format!("grid must be in 3..={MAX_GRID} (got {grid})"));
                }
                let work = grid.saturating_mul(1 << (queries + t));
                if work > MAX_CURVE_WORK {
                    return invalid(format!(
                        "grid * 2^(T + t) = {work} exceeds the limit {MAX_CURVE_WORK}"
                    ));
                }
                Settings::QpeCurve {
                    queries,
                    target_qubits: t,
                    bucket,
                    eps,
                    grid,
                    other_phases: other_phases(p, t)?,
                }
            }
            ExperimentKind::Audit => {
                let queries = queries(p, MAX_AUDIT_QUERIES)?;
                let t = target_qubits(p)?;
                let eps = single_eps(p, 0.5f64.powi(queries as i32 + 1))?;
                let n = grid_of(eps)?;
                if n > MAX_GRID {
                    return invalid(format!("N = {n} exceeds the grid limit {MAX_GRID}"));
                }
                Settings::Audit {
                    queries,
                    target_qubits: t,
                    eps,
                    other_phases: other_phases(p, t)?,
                }
            }
            ExperimentKind::BoundSweep => {
                let eps = parse_eps_list(p.eps.as_deref().unwrap_or("2^-3..2^-8"))?;
                for &e in &eps {
                    let n = grid_of(e)?;
                    if n > MAX_SWEEP_GRID {
                        return invalid(format!("N = {n} exceeds the sweep limit {MAX_SWEEP_GRID}"));
                    }
                }
                let max_queries = p.max_queries.unwrap_or(12);
                if max_queries > MAX_SWEEP_QUERIES {
                    return invalid(format!(
                        "max_T must be at most {MAX_SWEEP_QUERIES} (got {max_queries})"
                    ));
                }
                Settings::BoundSweep { eps, max_queries }
            }
            ExperimentKind::Selftest => {
                let trials = p.trials.unwrap_or(50);
                if !(1..=MAX_TRIALS).contains(&trials) {
                    return invalid(format!("trials must be in 1..={MAX_TRIALS} (got {trials})"));
                }
                Settings::Selftest {
                    seed: p.seed.unwrap_or(0),
                    trials,
                }
            }
        };
        Ok(ExperimentConfig {
            kind,
            settings,
            out: p.out.clone(),
            format: p.format.unwrap_or_default(),
        })
    }
}
