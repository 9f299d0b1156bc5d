//! Experiment configuration: JSON in, validated, echoed into every output
//! artifact. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use raretail::asymptotics::SampleSizeRegime;
use raretail::bootstrap::InnerEstimator;
use raretail::distributions::FamilySpec;
use raretail::evt::FitMethod;

fn default_level() -> f64 {
    0.95
}

fn default_truncation_tail() -> f64 {
    0.001
}

fn default_margin() -> f64 {
    0.05
}

fn default_oracle_replications() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentConfig {
    TruncationStudy(TruncationStudyConfig),
    EmpiricalStudy(EmpiricalStudyConfig),
    BootstrapCoverage(BootstrapCoverageConfig),
    GpdBootstrapCoverage(GpdBootstrapCoverageConfig),
    EvtDetection(EvtDetectionConfig),
    Thresholds(ThresholdsConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::TruncationStudy(_) => "truncation_study",
            ExperimentConfig::EmpiricalStudy(_) => "empirical_study",
            ExperimentConfig::BootstrapCoverage(_) => "bootstrap_coverage",
            ExperimentConfig::GpdBootstrapCoverage(_) => "gpd_bootstrap_coverage",
            ExperimentConfig::EvtDetection(_) => "evt_detection",
            ExperimentConfig::Thresholds(_) => "thresholds",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::TruncationStudy(c) => c.seed,
            ExperimentConfig::EmpiricalStudy(c) => c.seed,
            ExperimentConfig::BootstrapCoverage(c) => c.seed,
            ExperimentConfig::GpdBootstrapCoverage(c) => c.seed,
            ExperimentConfig::EvtDetection(c) => c.seed,
            ExperimentConfig::Thresholds(c) => c.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::TruncationStudy(c) => c.seed = seed,
            ExperimentConfig::EmpiricalStudy(c) => c.seed = seed,
            ExperimentConfig::BootstrapCoverage(c) => c.seed = seed,
            ExperimentConfig::GpdBootstrapCoverage(c) => c.seed = seed,
            ExperimentConfig::EvtDetection(c) => c.seed = seed,
            ExperimentConfig::Thresholds(c) => c.seed = seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            ExperimentConfig::TruncationStudy(c) => c.validate(),
            ExperimentConfig::EmpiricalStudy(c) => c.validate(),
            ExperimentConfig::BootstrapCoverage(c) => c.validate(),
            ExperimentConfig::GpdBootstrapCoverage(c) => c.validate(),
            ExperimentConfig::EvtDetection(c) => c.validate(),
            ExperimentConfig::Thresholds(c) => c.validate(),
        }
    }
}

fn check_prob(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(format!("{name} must be in (0, 1), got {v}"))
    }
}

fn check_pos<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> Result<(), String> {
    if v > T::default() {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {v}"))
    }
}

/// Truncate each input at a tail quantile and compare the rare-event
/// probability against the untruncated one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationStudyConfig {
    pub seed: u64,
    pub distributions: Vec<FamilySpec>,
    pub n: u64,
    pub target_p: f64,
    #[serde(default = "default_truncation_tail")]
    pub truncation_tail: f64,
    pub replications: u64,
}

impl TruncationStudyConfig {
    fn validate(&self) -> Result<(), String> {
        if self.distributions.is_empty() {
            return Err("distributions must not be empty".into());
        }
        check_pos("n", self.n as i64)?;
        check_prob("target_p", self.target_p)?;
        check_prob("truncation_tail", self.truncation_tail)?;
        check_pos("replications", self.replications as i64)
    }
}

/// Which estimator drives each empirical cell. Conditional Monte Carlo
/// needs enough support points to keep the discrete-tie bias negligible,
/// so `auto` switches to crude below `ak_min_data`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpiricalEstimatorPolicy {
    Auto,
    Crude,
    CondMcAk,
}

fn default_policy() -> EmpiricalEstimatorPolicy {
    EmpiricalEstimatorPolicy::Auto
}

fn default_ak_min_data() -> usize {
    1_000_000
}

fn default_crude_replications() -> u64 {
    5_000_000
}

/// Replace the input by an empirical distribution of N training samples
/// and summarize relative errors against the ground truth over
/// replications.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalStudyConfig {
    pub seed: u64,
    pub distributions: Vec<FamilySpec>,
    pub n: u64,
    pub target_p: f64,
    pub data_sizes: Vec<usize>,
    pub replications: usize,
    /// Conditional-MC budget per cell.
    pub inner_replications: u64,
    /// Crude-MC budget per cell (used below `ak_min_data` under `auto`).
    #[serde(default = "default_crude_replications")]
    pub crude_replications: u64,
    #[serde(default = "default_policy")]
    pub estimator: EmpiricalEstimatorPolicy,
    #[serde(default = "default_ak_min_data")]
    pub ak_min_data: usize,
    #[serde(default = "default_oracle_replications")]
    pub oracle_replications: u64,
}

impl EmpiricalStudyConfig {
    fn validate(&self) -> Result<(), String> {
        if self.distributions.is_empty() || self.data_sizes.is_empty() {
            return Err("distributions and data_sizes must not be empty".into());
        }
        check_pos("n", self.n as i64)?;
        check_prob("target_p", self.target_p)?;
        check_pos("replications", self.replications as i64)?;
        check_pos("inner_replications", self.inner_replications as i64)
    }
}

/// Nonparametric bootstrap coverage against a known truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapCoverageConfig {
    pub seed: u64,
    pub distribution: FamilySpec,
    pub n: u64,
    pub target_p: f64,
    pub data_sizes: Vec<usize>,
    pub resamples: usize,
    pub replications: usize,
    pub inner: InnerEstimator,
    #[serde(default = "default_level")]
    pub level: f64,
    /// Ground truth override; when absent a long conditional-MC oracle run
    /// (or the exact light-tail route) supplies it.
    #[serde(default)]
    pub true_p: Option<f64>,
    #[serde(default = "default_oracle_replications")]
    pub oracle_replications: u64,
}

impl BootstrapCoverageConfig {
    fn validate(&self) -> Result<(), String> {
        if self.data_sizes.is_empty() {
            return Err("data_sizes must not be empty".into());
        }
        check_pos("n", self.n as i64)?;
        check_prob("target_p", self.target_p)?;
        check_prob("level", self.level)?;
        if self.resamples < 2 {
            return Err("resamples must be at least 2".into());
        }
        check_pos("replications", self.replications as i64)
    }
}

/// GPD-spliced bootstrap coverage over the tail-quantile/fit-method grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpdBootstrapCoverageConfig {
    pub seed: u64,
    pub distribution: FamilySpec,
    pub n: u64,
    pub target_p: f64,
    pub data_sizes: Vec<usize>,
    pub tail_quantiles: Vec<f64>,
    pub fit_methods: Vec<FitMethod>,
    pub resamples: usize,
    pub replications: usize,
    pub inner: InnerEstimator,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub true_p: Option<f64>,
    #[serde(default = "default_oracle_replications")]
    pub oracle_replications: u64,
}

impl GpdBootstrapCoverageConfig {
    fn validate(&self) -> Result<(), String> {
        if self.data_sizes.is_empty() || self.tail_quantiles.is_empty() || self.fit_methods.is_empty()
        {
            return Err("data_sizes, tail_quantiles and fit_methods must not be empty".into());
        }
        for &q in &self.tail_quantiles {
            if !(q > 0.0 && q < 0.5) {
                return Err(format!("tail quantile must be in (0, 0.5), got {q}"));
            }
        }
        check_pos("n", self.n as i64)?;
        check_prob("target_p", self.target_p)?;
        check_prob("level", self.level)?;
        if self.resamples < 2 {
            return Err("resamples must be at least 2".into());
        }
        check_pos("replications", self.replications as i64)
    }
}

/// Tail-index series and heavy-tail classification per input and sample
/// size.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvtDetectionConfig {
    pub seed: u64,
    pub distributions: Vec<FamilySpec>,
    pub data_sizes: Vec<usize>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Classification window as fractions of N; defaults to [1/100, 1/10].
    #[serde(default)]
    pub k_window_fractions: Option<(f64, f64)>,
}

impl EvtDetectionConfig {
    fn validate(&self) -> Result<(), String> {
        if self.distributions.is_empty() || self.data_sizes.is_empty() {
            return Err("distributions and data_sizes must not be empty".into());
        }
        for &n in &self.data_sizes {
            if n < 400 {
                return Err(format!("data size {n} too small for index series"));
            }
        }
        if !(0.0..1.0).contains(&self.margin) {
            return Err(format!("margin must be in [0, 1), got {}", self.margin));
        }
        Ok(())
    }
}

/// One row of the data-size threshold table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdQuery {
    pub regime: SampleSizeRegime,
    pub n: u64,
    pub b: f64,
    pub mu: f64,
    #[serde(default)]
    pub target_p: Option<f64>,
}

/// Closed-form threshold table; no simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsConfig {
    pub seed: u64,
    pub queries: Vec<ThresholdQuery>,
}

impl ThresholdsConfig {
    fn validate(&self) -> Result<(), String> {
        if self.queries.is_empty() {
            return Err("queries must not be empty".into());
        }
        Ok(())
    }
}

/// Parse a config file, rejecting unknown keys.
pub fn load_config(text: &str) -> Result<ExperimentConfig, String> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
    cfg.validate()?;
    Ok(cfg)
}
