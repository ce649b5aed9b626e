//! Experiment configuration: a `key = value` file plus command-line
//! overrides, checked against the keys of one scenario.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thinns::kv::KvConfig;
use thinns::solver::RUN_KEYS;
use thinns::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Simulate,
    Sweep,
    EstimateConstants,
    VerifyInequalities,
    RescaleCheck,
    Thresholds,
}

pub const RUN_EXTRA: &[&str] = &["label"];
pub const VERIFY_EXTRA: &[&str] = &["label", "slack", "regime", "envelope_samples"];
pub const SWEEP_KEYS: &[&str] = &["inequality", "eps", "l1", "l2", "k_factor", "n3", "trials", "ascent", "seed", "parallelism"];
pub const ESTIMATE_KEYS: &[&str] = &["inequality", "l1", "l2", "eps", "n1", "n2", "n3", "grids", "trials", "ascent", "seed"];
pub const RESCALE_KEYS: &[&str] = &["l1", "l2", "eps", "nu", "n1", "n2", "n3", "amplitude", "seed", "tolerance"];
pub const THRESHOLD_KEYS: &[&str] = &["eps", "delta", "c", "alpha"];

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::Sweep => "sweep",
            Scenario::EstimateConstants => "estimate-constants",
            Scenario::VerifyInequalities => "verify-inequalities",
            Scenario::RescaleCheck => "rescale-check",
            Scenario::Thresholds => "thresholds",
        }
    }

    pub fn keys(self) -> Vec<&'static str> {
        match self {
            Scenario::Simulate => [RUN_KEYS, RUN_EXTRA].concat(),
            Scenario::VerifyInequalities => [RUN_KEYS, VERIFY_EXTRA].concat(),
            Scenario::Sweep => SWEEP_KEYS.to_vec(),
            Scenario::EstimateConstants => ESTIMATE_KEYS.to_vec(),
            Scenario::RescaleCheck => RESCALE_KEYS.to_vec(),
            Scenario::Thresholds => THRESHOLD_KEYS.to_vec(),
        }
    }
}

/// Why a configuration could not be assembled.
#[derive(Debug)]
pub enum ConfigError {
    /// Nothing was configured; the caller prints usage.
    Empty,
    Read { path: PathBuf, message: String },
    /// Parse or validation error; `line` 0 means a command-line override.
    At { source: String, line: usize, message: String },
}

impl ConfigError {
    pub fn from_core(source: &str, e: Error) -> Self {
        match e {
            Error::Config { line, message } => ConfigError::At {
                source: source.to_string(),
                line,
                message,
            },
            other => ConfigError::At {
                source: source.to_string(),
                line: 0,
                message: other.to_string(),
            },
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Empty => f.write_str("empty configuration"),
            ConfigError::Read { path, message } => write!(f, "{}: {message}", path.display()),
            ConfigError::At { line: 0, message, .. } => write!(f, "command line: {message}"),
            ConfigError::At { source, line, message } => write!(f, "{source}:{line}: {message}"),
        }
    }
}

/// Loaded configuration of one scenario.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub kv: KvConfig,
    /// File name used in error messages.
    pub source: String,
}

impl ExperimentConfig {
    pub fn load(scenario: Scenario, file: Option<&Path>, sets: &[String], seed: Option<u64>) -> Result<Self, ConfigError> {
        let source = file.map_or_else(|| "<none>".to_string(), |p| p.display().to_string());
        let text = match file {
            Some(p) => fs::read_to_string(p).map_err(|e| ConfigError::Read {
                path: p.to_path_buf(),
                message: e.to_string(),
            })?,
            None => String::new(),
        };
        Self::from_text(scenario, &source, &text, sets, seed)
    }

    pub fn from_text(scenario: Scenario, source: &str, text: &str, sets: &[String], seed: Option<u64>) -> Result<Self, ConfigError> {
        let mut kv = KvConfig::parse(text).map_err(|e| ConfigError::from_core(source, e))?;
        for s in sets {
            let Some((k, v)) = s.split_once('=') else {
                return Err(ConfigError::At {
                    source: source.to_string(),
                    line: 0,
                    message: format!("override '{s}' is not KEY=VALUE"),
                });
            };
            kv.set(k.trim(), v.trim());
        }
        if let Some(s) = seed {
            kv.set("seed", &s.to_string());
        }
        if kv.is_empty() {
            return Err(ConfigError::Empty);
        }
        kv.check_known(&scenario.keys()).map_err(|e| ConfigError::from_core(source, e))?;
        Ok(Self {
            scenario,
            kv,
            source: source.to_string(),
        })
    }

    pub fn err(&self, e: Error) -> ConfigError {
        ConfigError::from_core(&self.source, e)
    }
}
