//! Run configuration, read from TOML. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use privf_core::evaluate::{LogregOptions, SynthConfig};
use privf_core::prior::DEFAULT_SMOOTHING;
use privf_core::solver::DEFAULT_VAR_CAP;
use privf_core::{Init, SolverOptions, StepRule};
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Overrides the solver's variable cap.
pub const VAR_CAP_ENV: &str = "PRIVF_VAR_CAP";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Relative paths resolve against the config file's directory.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub data: Option<DataConfig>,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default)]
    pub distortion: DistortionConfig,
    #[serde(default)]
    pub quantize: QuantizeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub synth: SynthSection,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
    pub private: String,
    pub public: Vec<String>,
    /// Records with any of these values in a used column are dropped.
    #[serde(default = "default_missing")]
    pub missing: Vec<String>,
    /// Continuous columns cut into labelled intervals.
    #[serde(default)]
    pub bins: BTreeMap<String, BinSpec>,
    /// Value relabelling per column; every observed value must be listed.
    #[serde(default)]
    pub recode: BTreeMap<String, BTreeMap<String, String>>,
    /// Public values at or above this become "1", others "0".
    pub binarize_at: Option<f64>,
}

fn default_missing() -> Vec<String> {
    vec!["?".into(), String::new()]
}

/// `x < edges[0]` gets `labels[0]`, `edges[i-1] <= x < edges[i]` gets
/// `labels[i]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub edges: Vec<f64>,
    pub labels: Vec<String>,
}

impl BinSpec {
    pub fn label(&self, x: f64) -> &str {
        let i = self.edges.iter().take_while(|e| x >= **e).count();
        &self.labels[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriorMethod {
    #[default]
    Empirical,
    /// Kernel density estimate on a uniform grid over numeric public columns.
    Kde,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorConfig {
    pub smoothing: f64,
    pub method: PriorMethod,
    pub kde_bins: usize,
    /// Fixed kernel width; cross-validated when absent.
    pub bandwidth: Option<f64>,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { smoothing: DEFAULT_SMOOTHING, method: PriorMethod::Empirical, kde_bins: 10, bandwidth: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Number of public columns that differ.
    #[default]
    Hamming,
    L2,
    /// Each public column is kept or erased.
    Erasure,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistortionConfig {
    pub metric: MetricKind,
    pub deltas: Vec<f64>,
    pub erasure_symbol: String,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        Self { metric: MetricKind::Hamming, deltas: vec![0.0], erasure_symbol: "*".into() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantizeConfig {
    /// Number of centers; 0 solves on the full alphabet.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRuleKind {
    Diminishing,
    LineSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    IdentityOrNearest,
    Uniform,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub step_rule: StepRuleKind,
    pub init: InitKind,
    /// Solve the budgets concurrently, without warm starts.
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            max_iters: d.max_iters,
            tol: d.tol,
            step_rule: StepRuleKind::LineSearch,
            init: InitKind::IdentityOrNearest,
            parallel: false,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> Result<SolverOptions> {
        Ok(SolverOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            step_rule: match self.step_rule {
                StepRuleKind::Diminishing => StepRule::Diminishing,
                StepRuleKind::LineSearch => StepRule::LineSearch,
            },
            init: match self.init {
                InitKind::IdentityOrNearest => Init::IdentityOrNearest,
                InitKind::Uniform => Init::Uniform,
            },
            var_cap: var_cap()?,
        })
    }
}

pub fn var_cap() -> Result<usize> {
    match std::env::var(VAR_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{VAR_CAP_ENV}={v:?} is not a nonnegative integer"))),
        Err(_) => Ok(DEFAULT_VAR_CAP),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateConfig {
    pub folds: usize,
    pub l2_penalty: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Private label scored as the positive class; the last label by default.
    pub positive: Option<String>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        let d = LogregOptions::default();
        Self {
            folds: d.folds,
            l2_penalty: d.l2_penalty,
            learning_rate: d.learning_rate,
            iterations: d.iterations,
            positive: None,
        }
    }
}

impl EvaluateConfig {
    pub fn options(&self, seed: u64) -> LogregOptions {
        LogregOptions {
            folds: self.folds,
            l2_penalty: self.l2_penalty,
            learning_rate: self.learning_rate,
            iterations: self.iterations,
            seed,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    /// Budget the mapping was designed for.
    pub delta: f64,
    pub n: Vec<u64>,
    pub eps: Vec<f64>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { delta: 0.0, n: vec![10_000], eps: vec![0.1] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n: usize,
    pub shows: usize,
    pub discriminative_fraction: f64,
    pub margin: f64,
    pub watch_lift: f64,
    pub positive_rate: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let d = SynthConfig::default();
        Self {
            n: d.n,
            shows: d.shows,
            discriminative_fraction: d.discriminative_fraction,
            margin: d.margin,
            watch_lift: d.watch_lift,
            positive_rate: d.positive_rate,
        }
    }
}

impl SynthSection {
    pub fn config(&self, seed: u64) -> SynthConfig {
        SynthConfig {
            n: self.n,
            shows: self.shows,
            discriminative_fraction: self.discriminative_fraction,
            margin: self.margin,
            watch_lift: self.watch_lift,
            positive_rate: self.positive_rate,
            seed,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            data: None,
            prior: PriorConfig::default(),
            distortion: DistortionConfig::default(),
            quantize: QuantizeConfig::default(),
            solver: SolverConfig::default(),
            evaluate: EvaluateConfig::default(),
            bounds: BoundsConfig::default(),
            synth: SynthSection::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg: Self =
            toml::from_str(text).map_err(|source| CliError::Config { path: path.to_path_buf(), source })?;
        if let Some(dir) = path.parent() {
            if cfg.out.is_relative() {
                cfg.out = dir.join(&cfg.out);
            }
            if let Some(data) = &mut cfg.data {
                if data.path.is_relative() {
                    data.path = dir.join(&data.path);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text, path)
    }

    pub fn data(&self) -> Result<&DataConfig> {
        self.data
            .as_ref()
            .ok_or_else(|| CliError::Usage("config has no [data] section".into()))
    }

    fn validate(&self) -> Result<()> {
        let deltas = &self.distortion.deltas;
        if deltas.is_empty() {
            return Err(CliError::Usage("distortion.deltas is empty".into()));
        }
        if deltas.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(CliError::Usage("distortion.deltas must be finite and nonnegative".into()));
        }
        if deltas.windows(2).any(|w| w[0] > w[1]) {
            return Err(CliError::Usage("distortion.deltas must be nondecreasing".into()));
        }
        if !(self.prior.smoothing >= 0.0) {
            return Err(CliError::Usage("prior.smoothing must be nonnegative".into()));
        }
        if self.quantize.k > 0 && self.distortion.metric == MetricKind::Erasure {
            return Err(CliError::Usage("quantization is not defined for the erasure metric".into()));
        }
        if let Some(data) = &self.data {
            if data.public.is_empty() {
                return Err(CliError::Usage("data.public lists no columns".into()));
            }
            for (col, bin) in &data.bins {
                if bin.labels.len() != bin.edges.len() + 1 {
                    return Err(CliError::Usage(format!("bins.{col}: need one more label than edges")));
                }
                if bin.edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(CliError::Usage(format!("bins.{col}: edges must increase")));
                }
            }
        }
        Ok(())
    }
}
