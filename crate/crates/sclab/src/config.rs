//! Experiment configuration documents (`scv/1`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sclab_core::bundle::SectionClass;
use sclab_core::diff::CertifyConfig;
use sclab_core::retract::CartanConfig;

use crate::formats::{GridSpec, ScaleSpec, VectorSource};
use crate::templates::{MapTemplate, OperatorTemplate, RetractionTemplate};

pub const SCHEMA_VERSION: &str = "scv/1";

/// Environment variable overriding `output.dir` of every configuration.
pub const OUTPUT_DIR_ENV: &str = "SCLAB_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed configuration {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unsupported schema `{0}`, expected `{SCHEMA_VERSION}`")]
    Schema(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: String,
    pub name: String,
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    VerifyScale(VerifyScaleParams),
    ShiftMap(ShiftMapParams),
    Fredholm(FredholmParams),
    ChainRule(ChainRuleParams),
    Splicing(SplicingParams),
    Degeneracy(DegeneracyParams),
    Cartan(CartanParams),
    Tame(TameParams),
    StrongBundle(StrongBundleParams),
}

impl Experiment {
    pub const NAMES: [&'static str; 9] = [
        "verify-scale",
        "shift-map",
        "fredholm",
        "chain-rule",
        "splicing",
        "degeneracy",
        "cartan",
        "tame",
        "strong-bundle",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::VerifyScale(_) => "verify-scale",
            Self::ShiftMap(_) => "shift-map",
            Self::Fredholm(_) => "fredholm",
            Self::ChainRule(_) => "chain-rule",
            Self::Splicing(_) => "splicing",
            Self::Degeneracy(_) => "degeneracy",
            Self::Cartan(_) => "cartan",
            Self::Tame(_) => "tame",
            Self::StrongBundle(_) => "strong-bundle",
        }
    }

    /// Experiments that draw random samples and therefore need a seed.
    pub fn is_randomized(&self) -> bool {
        !matches!(self, Self::Degeneracy(_) | Self::Tame(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
    /// File stem of the report files; defaults to the experiment name.
    #[serde(default)]
    pub stem: Option<String>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("sclab-out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_output_dir(),
            stem: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyScaleParams {
    pub scale: ScaleSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Planted regularities `s` of `x_n = w_n^{-s}`.
    #[serde(default = "default_calibration")]
    pub calibration: Vec<f64>,
    #[serde(default = "default_calibration_tol")]
    pub calibration_tol: f64,
}

fn default_samples() -> usize {
    100
}
fn default_calibration() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}
fn default_calibration_tol() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftMapParams {
    pub scale: ScaleSpec,
    #[serde(default = "one")]
    pub level: usize,
    /// `τ_ν = 2^{-ν}` for `ν = 1..=max_nu`.
    #[serde(default = "default_max_nu")]
    pub max_nu: u32,
    #[serde(default = "default_max_truncation")]
    pub max_truncation: usize,
    #[serde(default = "default_min_gap")]
    pub min_horizontal_gap: f64,
    /// Decay rate `κ` of the fixed inputs, `|v_n| ≤ e^{-κn}`. The residual
    /// of `(i)` decreases along `τ_ν` once `τ_ν` times the dominant frequency
    /// is below `1/2`.
    #[serde(default = "default_input_rate")]
    pub input_rate: f64,
}

fn one() -> usize {
    1
}
fn default_max_nu() -> u32 {
    10
}
fn default_max_truncation() -> usize {
    4096
}
fn default_min_gap() -> f64 {
    1.9
}
fn default_input_rate() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmParams {
    pub scale: ScaleSpec,
    pub operator: OperatorTemplate,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub max_level: Option<usize>,
    #[serde(default)]
    pub expected_index: Option<i64>,
    #[serde(default)]
    pub perturbations: Option<PerturbationSpec>,
    /// Required regularity gain of solutions over right-hand sides.
    #[serde(default)]
    pub min_gain: Option<f64>,
    #[serde(default = "default_regularity_levels")]
    pub regularity_levels: Vec<f64>,
}

fn default_regularity_levels() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub trials: usize,
    /// Ranks are drawn uniformly from `1..=max_rank`.
    pub max_rank: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_rate")]
    pub rate: f64,
}

fn default_amplitude() -> f64 {
    0.1
}
fn default_rate() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRuleParams {
    pub scale: ScaleSpec,
    pub f: MapTemplate,
    pub g: MapTemplate,
    #[serde(default = "default_chain_samples")]
    pub samples: usize,
    #[serde(default = "one")]
    pub m_max: usize,
    #[serde(default = "default_chain_tol")]
    pub tol: f64,
}

fn default_chain_samples() -> usize {
    20
}
fn default_chain_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplicingParams {
    pub grid: GridSpec,
    pub parameters: Vec<f64>,
    #[serde(default = "default_random_samples")]
    pub random_samples: usize,
    #[serde(default = "default_idempotency_tol")]
    pub tol: f64,
}

fn default_random_samples() -> usize {
    50
}
fn default_idempotency_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyParams {
    pub corners: usize,
    pub points: Vec<Vec<f64>>,
    /// Expected indices of `points`, checked when present.
    #[serde(default)]
    pub expected: Option<Vec<usize>>,
    /// Charts `φ_a` of `[0,∞)`, given by their slopes `a`.
    #[serde(default)]
    pub chart_slopes: Vec<f64>,
    #[serde(default)]
    pub identity_chart: bool,
    #[serde(default)]
    pub chart_points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanParams {
    pub retraction: RetractionTemplate,
    pub base: VectorSource,
    #[serde(default)]
    pub config: Option<CartanConfig>,
    #[serde(default)]
    pub expected_dimension: Option<usize>,
    /// Demand `α = id` to the last bit, as for linear projectors.
    #[serde(default)]
    pub exact_identity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TameParams {
    pub retraction: RetractionTemplate,
    pub corners: usize,
    pub samples: Vec<Vec<f64>>,
    #[serde(default = "default_transversality_tol")]
    pub tol: f64,
    /// Expected verdict; without it the run passes iff the retraction is tame.
    #[serde(default)]
    pub expect_tame: Option<bool>,
}

fn default_transversality_tol() -> f64 {
    sclab_core::polyfold::TRANSVERSALITY_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongBundleParams {
    pub grid: GridSpec,
    pub parameters: Vec<f64>,
    /// Largest base level of the exhaustive double-index grid.
    #[serde(default = "default_index_grid")]
    pub index_grid: usize,
    #[serde(default)]
    pub section: Option<SectionSpec>,
}

fn default_index_grid() -> usize {
    10
}

/// Section classification on a circle scale with the identity retraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub scale: ScaleSpec,
    pub principal_part: OperatorTemplate,
    #[serde(default = "default_section_samples")]
    pub samples: usize,
    /// Planted regularity of the sample points.
    #[serde(default = "default_section_level")]
    pub sample_level: f64,
    #[serde(default)]
    pub certify: Option<CertifyConfig>,
    #[serde(default)]
    pub expected: Option<SectionClass>,
}

fn default_section_samples() -> usize {
    3
}
fn default_section_level() -> f64 {
    1.5
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        let config = Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ConfigError::Schema(self.schema.clone()));
        }
        if self.experiment.is_randomized() && self.seed.is_none() {
            return Err(ConfigError::Invalid(format!(
                "experiment `{}` needs a seed",
                self.experiment.name()
            )));
        }
        let scales: Vec<&ScaleSpec> = match &self.experiment {
            Experiment::VerifyScale(p) => vec![&p.scale],
            Experiment::ShiftMap(p) => vec![&p.scale],
            Experiment::Fredholm(p) => vec![&p.scale],
            Experiment::ChainRule(p) => vec![&p.scale],
            Experiment::StrongBundle(StrongBundleParams {
                section: Some(s), ..
            }) => vec![&s.scale],
            _ => Vec::new(),
        };
        for s in scales {
            s.validate().map_err(ConfigError::Invalid)?;
        }
        Ok(())
    }

    /// `output.dir`, unless overridden (by the command line or
    /// [`OUTPUT_DIR_ENV`]).
    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        override_dir
            .map(Path::to_path_buf)
            .unwrap_or_else(|| self.output.dir.clone())
    }

    pub fn stem(&self) -> String {
        self.output
            .stem
            .clone()
            .unwrap_or_else(|| self.name.clone())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
