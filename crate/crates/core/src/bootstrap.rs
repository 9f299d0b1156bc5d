//! Percentile bootstrap uncertainty quantification over the empirical
//! input, with an optional GPD-spliced tail per resample, plus coverage
//! studies against a known truth.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::law::Law;
use crate::distributions::{Dist, Empirical, Spliced};
use crate::error::{Error, Result};
use crate::estimators::{cond_mc_ak, crude_mc, is_tilted_mc, EstimateResult};
use crate::evt::{gpd_fit, FitMethod};
use crate::streams::{child_rng, child_seed, domain};

/// The estimator run against each resample's input model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum InnerEstimator {
    Crude { replications: u64 },
    CondMcAk { replications: u64 },
    TiltedIs { replications: u64 },
}

impl InnerEstimator {
    pub fn replications(&self) -> u64 {
        match *self {
            InnerEstimator::Crude { replications }
            | InnerEstimator::CondMcAk { replications }
            | InnerEstimator::TiltedIs { replications } => replications,
        }
    }

    /// Estimate `P(S_n > gamma)` under `dist`.
    pub fn run(&self, dist: &Dist, n: u64, gamma: f64, seed: u64) -> Result<EstimateResult> {
        match *self {
            InnerEstimator::Crude { replications } => crude_mc(dist, n, gamma, replications, seed),
            InnerEstimator::CondMcAk { replications } => {
                cond_mc_ak(dist, n, gamma, replications, seed)
            }
            InnerEstimator::TiltedIs { replications } => {
                is_tilted_mc(dist, n, gamma / n as f64, replications, seed)
            }
        }
    }
}

/// How the resample input model is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CiMethod {
    Nonparametric,
    GpdSpliced { fit: FitMethod, tail_quantile: f64 },
}

/// Percentile bootstrap interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Successful resample estimates, in resample order.
    pub resample_estimates: Vec<f64>,
    pub method: CiMethod,
    /// Resamples whose inner estimation failed (skipped, reported).
    pub failures: usize,
}

/// Percentile CI bounds: the 1-based `ceil(B alpha/2)` and
/// `ceil(B (1 - alpha/2))` order statistics of the resample estimates.
pub fn percentile_interval(estimates: &[f64], level: f64) -> (f64, f64) {
    let mut sorted = estimates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let b = sorted.len();
    let alpha = 1.0 - level;
    let lo_rank = ((b as f64 * alpha / 2.0).ceil() as usize).clamp(1, b);
    let hi_rank = ((b as f64 * (1.0 - alpha / 2.0)).ceil() as usize).clamp(1, b);
    (sorted[lo_rank - 1], sorted[hi_rank - 1])
}

const MAX_FAILURE_SHARE: f64 = 0.2;

fn bootstrap_ci_impl<F>(
    data: &[f64],
    b_resamples: usize,
    level: f64,
    seed: u64,
    method: CiMethod,
    estimate_one: F,
) -> Result<ConfidenceInterval>
where
    F: Fn(&[f64], u64) -> Result<f64> + Sync,
{
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if b_resamples < 2 {
        return Err(Error::InvalidArgument { message: "need at least 2 resamples".into() });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument { message: format!("level must be in (0,1), got {level}") });
    }

    let outcomes: Vec<Result<f64>> = (0..b_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = child_rng(seed, domain::BOOT_RESAMPLE, i as u64);
            let resample: Vec<f64> = (0..data.len())
                .map(|_| {
                    let u: f64 = rng.random();
                    data[((u * data.len() as f64) as usize).min(data.len() - 1)]
                })
                .collect();
            estimate_one(&resample, child_seed(seed, domain::BOOT_INNER, i as u64))
        })
        .collect();

    let mut estimates = Vec::with_capacity(b_resamples);
    let mut failures = 0usize;
    for o in outcomes {
        match o {
            Ok(v) => estimates.push(v),
            Err(_) => failures += 1,
        }
    }
    if (failures as f64) > MAX_FAILURE_SHARE * b_resamples as f64 {
        return Err(Error::BootstrapFailure { failed: failures, total: b_resamples });
    }
    let (lower, upper) = percentile_interval(&estimates, level);
    Ok(ConfidenceInterval { lower, upper, level, resample_estimates: estimates, method, failures })
}

/// Nonparametric percentile bootstrap: each resample's empirical
/// distribution drives the inner estimator.
pub fn nonparam_bootstrap_ci(
    data: &[f64],
    b_resamples: usize,
    n: u64,
    gamma: f64,
    inner: &InnerEstimator,
    level: f64,
    seed: u64,
) -> Result<ConfidenceInterval> {
    bootstrap_ci_impl(
        data,
        b_resamples,
        level,
        seed,
        CiMethod::Nonparametric,
        |resample, inner_seed| {
            let dist = Dist::Empirical(Empirical::from_samples(resample)?);
            Ok(inner.run(&dist, n, gamma, inner_seed)?.estimate)
        },
    )
}

/// GPD-enhanced bootstrap: each resample is spliced with a fitted GPD
/// tail above its `1 - tail_quantile` empirical quantile before driving
/// the inner estimator.
#[allow(clippy::too_many_arguments)]
pub fn gpd_bootstrap_ci(
    data: &[f64],
    b_resamples: usize,
    n: u64,
    gamma: f64,
    tail_quantile: f64,
    fit_method: FitMethod,
    inner: &InnerEstimator,
    level: f64,
    seed: u64,
) -> Result<ConfidenceInterval> {
    if !(tail_quantile > 0.0 && tail_quantile < 0.5) {
        return Err(Error::InvalidArgument {
            message: format!("tail quantile must be in (0, 0.5), got {tail_quantile}"),
        });
    }
    bootstrap_ci_impl(
        data,
        b_resamples,
        level,
        seed,
        CiMethod::GpdSpliced { fit: fit_method, tail_quantile },
        |resample, inner_seed| {
            let dist = splice_resample(resample, tail_quantile, fit_method)?;
            Ok(inner.run(&dist, n, gamma, inner_seed)?.estimate)
        },
    )
}

/// Fit a GPD to the excesses over the empirical `1 - tail_quantile`
/// quantile and splice it onto the body.
pub fn splice_resample(data: &[f64], tail_quantile: f64, fit_method: FitMethod) -> Result<Dist> {
    let emp = Empirical::from_samples(data)?;
    let threshold = emp.quantile(1.0 - tail_quantile);
    let excesses: Vec<f64> =
        emp.values().iter().filter(|&&v| v > threshold).map(|&v| v - threshold).collect();
    let mut fit = gpd_fit(&excesses, fit_method)?;
    fit.threshold = threshold;
    Ok(Dist::Spliced(Spliced::new(&emp, tail_quantile, &fit)?))
}

/// Coverage of a CI construction over repeated experiments against a
/// known truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub replications: usize,
    /// Fraction of replications whose CI contains the true probability.
    pub coverage: f64,
    pub mean_width: f64,
    /// Interval width over the true probability, one entry per replication.
    pub width_over_p: Vec<f64>,
    /// Full experiment parameters, echoed for reproducibility.
    pub config: serde_json::Value,
}

/// Run `reps` independent experiments: draw `n_data` training samples
/// from `truth`, build a CI with `ci_fn(data, seed)`, and check coverage
/// of `true_p`.
pub fn coverage_study<F>(
    truth: &Dist,
    true_p: f64,
    n_data: usize,
    reps: usize,
    seed: u64,
    config: serde_json::Value,
    ci_fn: F,
) -> Result<CoverageReport>
where
    F: Fn(&[f64], u64) -> Result<(f64, f64)> + Sync,
{
    if reps == 0 {
        return Err(Error::InvalidArgument { message: "need at least one replication".into() });
    }
    let intervals: Vec<Result<(f64, f64)>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = child_rng(seed, domain::STUDY_DATA, rep as u64);
            let data = truth.sample_many(n_data, &mut rng);
            ci_fn(&data, child_seed(seed, domain::STUDY_CI, rep as u64))
        })
        .collect();

    let mut covered = 0usize;
    let mut widths = Vec::with_capacity(reps);
    for interval in intervals {
        let (lo, hi) = interval?;
        if lo <= true_p && true_p <= hi {
            covered += 1;
        }
        widths.push(hi - lo);
    }
    let mean_width = widths.iter().sum::<f64>() / reps as f64;
    Ok(CoverageReport {
        replications: reps,
        coverage: covered as f64 / reps as f64,
        mean_width,
        width_over_p: widths.iter().map(|w| w / true_p).collect(),
        config,
    })
}
