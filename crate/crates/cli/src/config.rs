//! Run configuration: a TOML-syntax file with one section per concern.

use std::fmt;
use std::path::{Path, PathBuf};

use engine_core::model::{EngineParams, InitialKind};
use engine_core::EngineError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialChoice {
    Ground,
    Thermal,
    Singlet,
    All,
}

impl InitialChoice {
    pub fn kinds(self) -> Vec<InitialKind> {
        match self {
            InitialChoice::Ground => vec![InitialKind::Ground],
            InitialChoice::Thermal => vec![InitialKind::Thermal],
            InitialChoice::Singlet => vec![InitialKind::Singlet],
            InitialChoice::All => InitialKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max_in_inverse_gamma: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_max_in_inverse_gamma: 20.0,
            n_points: 201,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub step_in_inverse_gamma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            step_in_inverse_gamma: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    TL,
    MuL,
}

impl SweepVariable {
    pub fn label(self) -> &'static str {
        match self {
            SweepVariable::TL => "t_l",
            SweepVariable::MuL => "mu_l",
        }
    }

    pub fn apply(self, p: &EngineParams, value: f64) -> EngineParams {
        match self {
            SweepVariable::TL => p.with_t_l(value),
            SweepVariable::MuL => p.with_mu_l(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub initial_state: InitialChoice,
    pub params: EngineParams,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

/// A configuration problem, with the dotted path of the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Slack allowed when checking that the noise step divides the sample spacing.
const STRIDE_SLACK: f64 = 1e-9;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::at("", e.to_string().trim_end().to_string()))?;
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            let message = inner.lines().last().unwrap_or_default().trim().to_string();
            ConfigError::at(if path == "." { String::new() } else { path }, message)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Err(EngineError::InvalidParams { field, reason }) = self.params.validate() {
            return Err(ConfigError::at(format!("params.{field}"), reason));
        }
        let grid = &self.grid;
        if !(grid.t_max_in_inverse_gamma > 0.0 && grid.t_max_in_inverse_gamma.is_finite()) {
            return Err(ConfigError::at("grid.t_max_in_inverse_gamma", "must be positive and finite"));
        }
        if grid.n_points < 2 {
            return Err(ConfigError::at("grid.n_points", "must be at least 2"));
        }
        let step = self.noise.step_in_inverse_gamma;
        if !(step > 0.0 && step.is_finite()) {
            return Err(ConfigError::at("noise.step_in_inverse_gamma", "must be positive and finite"));
        }
        let ratio = self.spacing() / step;
        if ratio < 1.0 - STRIDE_SLACK || (ratio - ratio.round()).abs() > STRIDE_SLACK * ratio {
            return Err(ConfigError::at(
                "noise.step_in_inverse_gamma",
                format!("must divide the grid spacing {} evenly", self.spacing()),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(ConfigError::at("sweep.values", "must not be empty"));
            }
            for (i, &v) in sweep.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ConfigError::at(format!("sweep.values[{i}]"), "must be finite"));
                }
                if sweep.variable == SweepVariable::TL && v <= 0.0 {
                    return Err(ConfigError::at(format!("sweep.values[{i}]"), "temperatures must be positive"));
                }
            }
            if sweep.variable == SweepVariable::TL && sweep.values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ConfigError::at("sweep.values", "temperatures must be strictly ascending"));
            }
        }
        Ok(())
    }

    /// Sample spacing in units of 1/Γ.
    pub fn spacing(&self) -> f64 {
        self.grid.t_max_in_inverse_gamma / (self.grid.n_points - 1) as f64
    }

    /// Number of noise steps between two output samples.
    pub fn stride(&self) -> usize {
        (self.spacing() / self.noise.step_in_inverse_gamma).round() as usize
    }

    /// Parameter sets to run: one per sweep value, or just the base set.
    pub fn parameter_sets(&self) -> Vec<EngineParams> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| s.variable.apply(&self.params, v)).collect(),
            None => vec![self.params],
        }
    }
}
