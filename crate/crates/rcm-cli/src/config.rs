//! Experiment configuration: a versioned TOML document.

use std::fmt;
use std::path::{Path, PathBuf};

use rcm::model::{ConnectionFunction, ConnectionParams};
use rcm::sampler::{Boundary, BoxSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Task {
    Tau,
    Chi,
    Theta,
    Pi0,
    Pi1,
    LambdaC,
    Gamma,
    Fourier,
    Diagrams,
    Verify,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::Tau => "tau",
            Task::Chi => "chi",
            Task::Theta => "theta",
            Task::Pi0 => "pi0",
            Task::Pi1 => "pi1",
            Task::LambdaC => "lambda-c",
            Task::Gamma => "gamma",
            Task::Fourier => "fourier",
            Task::Diagrams => "diagrams",
            Task::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub side: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl Default for Region {
    fn default() -> Self {
        Region { side: 10.0, boundary: Boundary::Torus }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiiConfig {
    /// Largest radius; defaults to a fifth of the box side.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    pub steps: usize,
}

impl Default for RadiiConfig {
    fn default() -> Self {
        RadiiConfig { r_max: None, steps: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Sigmoid,
    Chi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalConfig {
    pub method: MethodName,
    pub blocks: usize,
    pub resamples: usize,
    pub level: f64,
    /// Fixed `γ` of the pole fit; absent means fitted.
    pub chi_exponent: Option<f64>,
    /// Subcritical intensities of the `gamma` task, as fractions of `λ̂_c`.
    pub fractions: Vec<f64>,
    /// Box side of the `gamma` task.
    pub gamma_side: f64,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        CriticalConfig {
            method: MethodName::Sigmoid,
            blocks: 20,
            resamples: 200,
            level: 0.95,
            chi_exponent: Some(1.0),
            fractions: vec![0.3, 0.6, 0.8],
            gamma_side: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FourierConfig {
    /// `μ` of the random-walk surrogate `φ̂ Ĝ_μ`.
    pub mu: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig { mu: 0.9, k_min: 1e-3, k_max: 20.0, points: 120 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File stem; defaults to the task name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), prefix: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative change allowed between bootstrap grid refinements.
    pub bootstrap_refine: f64,
    /// Statistical tests of `verify` use the full budget unless this is set.
    pub smoke: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { bootstrap_refine: 0.01, smoke: false }
    }
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

fn default_replicas() -> usize {
    1000
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Box sides for `theta`, `lambda-c` and `gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ConnectionParams>,
    #[serde(default)]
    pub region: Region,
    #[serde(default)]
    pub radii: RadiiConfig,
    #[serde(default)]
    pub critical: CriticalConfig,
    #[serde(default)]
    pub fourier: FourierConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            version: SCHEMA_VERSION,
            task: None,
            seed: default_seed(),
            replicas: default_replicas(),
            lambda: None,
            lambdas: None,
            ladder: None,
            model: None,
            region: Region::default(),
            radii: RadiiConfig::default(),
            critical: CriticalConfig::default(),
            fourier: FourierConfig::default(),
            output: OutputConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if c.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("version: expected {SCHEMA_VERSION}, found {}", c.version)));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("the configuration is representable in TOML")
    }

    pub fn connection_function(&self) -> Result<ConnectionFunction, CliError> {
        let p = self.model.clone().ok_or_else(|| CliError::Config("model: missing section (needs at least `kind` and `dimension`)".into()))?;
        ConnectionFunction::new(p).map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn require_lambda(&self) -> Result<f64, CliError> {
        match self.lambda {
            Some(l) if l.is_finite() && l >= 0.0 => Ok(l),
            Some(l) => Err(CliError::Config(format!("lambda: must be finite and non-negative, found {l}"))),
            None => Err(CliError::Config("lambda: missing".into())),
        }
    }

    /// The intensity grid: `lambdas`, or the single `lambda`.
    pub fn lambda_grid(&self) -> Result<Vec<f64>, CliError> {
        match (&self.lambdas, self.lambda) {
            (Some(g), _) if g.is_empty() => Err(CliError::Config("lambdas: empty".into())),
            (Some(g), _) => Ok(g.clone()),
            (None, Some(_)) => Ok(vec![self.require_lambda()?]),
            (None, None) => Err(CliError::Config("lambda or lambdas: missing".into())),
        }
    }

    pub fn require_ladder(&self) -> Result<Vec<f64>, CliError> {
        self.ladder.clone().filter(|l| !l.is_empty()).ok_or_else(|| CliError::Config("ladder: missing".into()))
    }

    pub fn region_box(&self, d: usize) -> Result<BoxSpec, CliError> {
        if !(self.region.side > 0.0 && self.region.side.is_finite()) {
            return Err(CliError::Config(format!("region.side: must be positive, found {}", self.region.side)));
        }
        Ok(BoxSpec::new(self.region.side, d, self.region.boundary))
    }

    pub fn require_replicas(&self) -> Result<usize, CliError> {
        if self.replicas == 0 {
            return Err(CliError::Config("replicas: must be positive".into()));
        }
        Ok(self.replicas)
    }

    pub fn stem(&self, task: Task) -> String {
        self.output.prefix.clone().unwrap_or_else(|| task.to_string())
    }
}
