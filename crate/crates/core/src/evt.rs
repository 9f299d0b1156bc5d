//! Extreme-value machinery: generalized Pareto fits for excesses over a
//! threshold, and extreme-value-index series used to detect heavy tails.
//!
//! The index estimators report `xi_hat` as a function of the number `k` of
//! top order statistics used. A positive index signals a power-law-like
//! tail (`alpha = 1/xi`); negative values signal light or bounded tails.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

/// Two-parameter generalized Pareto law for excesses over a threshold.
///
/// Support starts at 0: `sf(y) = (1 + shape*y/scale)^(-1/shape)`, with the
/// exponential limit `exp(-y/scale)` at `shape = 0`. Distinct from the
/// one-parameter input family whose support starts at `1/shape`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdExcess {
    pub shape: f64,
    pub scale: f64,
}

const XI_EXP_LIMIT: f64 = 1e-12;

impl GpdExcess {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 || !shape.is_finite() {
            return Err(Error::ParameterDomain {
                family: "gpd_excess",
                message: format!("need finite shape and scale > 0, got ({shape}, {scale})"),
            });
        }
        Ok(Self { shape, scale })
    }

    /// Upper end of the support (`inf` for shape >= 0).
    pub fn upper(&self) -> f64 {
        if self.shape < 0.0 {
            -self.scale / self.shape
        } else {
            f64::INFINITY
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y < 0.0 || y > self.upper() {
            return 0.0;
        }
        if self.shape.abs() < XI_EXP_LIMIT {
            (-y / self.scale).exp() / self.scale
        } else {
            let t = 1.0 + self.shape * y / self.scale;
            if t <= 0.0 {
                0.0
            } else {
                t.powf(-1.0 / self.shape - 1.0) / self.scale
            }
        }
    }

    pub fn sf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        if self.shape.abs() < XI_EXP_LIMIT {
            (-y / self.scale).exp()
        } else {
            let t = 1.0 + self.shape * y / self.scale;
            if t <= 0.0 {
                0.0
            } else {
                t.powf(-1.0 / self.shape)
            }
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        1.0 - self.sf(y)
    }

    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        if self.shape.abs() < XI_EXP_LIMIT {
            -self.scale * (1.0 - q).ln()
        } else {
            self.scale / self.shape * ((1.0 - q).powf(-self.shape) - 1.0)
        }
    }

    /// Mean excess, finite only for shape < 1.
    pub fn mean(&self) -> f64 {
        if self.shape < 1.0 {
            self.scale / (1.0 - self.shape)
        } else {
            f64::INFINITY
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rand::Rng::sample(&mut *rng, rand_distr::Open01);
        if self.shape.abs() < XI_EXP_LIMIT {
            -self.scale * u.ln()
        } else {
            self.scale / self.shape * (u.powf(-self.shape) - 1.0)
        }
    }

    fn log_likelihood(&self, excesses: &[f64]) -> f64 {
        let m = excesses.len() as f64;
        if self.shape.abs() < XI_EXP_LIMIT {
            let sum: f64 = excesses.iter().sum();
            return -m * self.scale.ln() - sum / self.scale;
        }
        let mut acc = 0.0;
        for &y in excesses {
            let t = 1.0 + self.shape * y / self.scale;
            if t <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += t.ln();
        }
        -m * self.scale.ln() - (1.0 + 1.0 / self.shape) * acc
    }
}

/// GPD parameter estimation technique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Mle,
    Mom,
    Pwm,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitMethod::Mle => write!(f, "mle"),
            FitMethod::Mom => write!(f, "mom"),
            FitMethod::Pwm => write!(f, "pwm"),
        }
    }
}

/// A fitted GPD tail.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GpdFit {
    pub shape: f64,
    pub scale: f64,
    pub method: FitMethod,
    pub n_excesses: usize,
    /// Threshold the excesses were taken over; 0 when fitting raw excesses.
    pub threshold: f64,
}

impl GpdFit {
    pub fn excess_law(&self) -> GpdExcess {
        GpdExcess { shape: self.shape, scale: self.scale }
    }
}

/// Method-of-moments inversion from (mean, variance) of the excess law.
///
/// Exact for population moments with shape < 1/2; the returned shape is
/// below 1/2 by construction.
pub fn gpd_mom_from_moments(mean: f64, variance: f64) -> (f64, f64) {
    let ratio = mean * mean / variance;
    let shape = 0.5 * (1.0 - ratio);
    let scale = 0.5 * mean * (ratio + 1.0);
    (shape, scale)
}

/// Probability-weighted-moment inversion from `a0 = E[X]` and
/// `a1 = E[X (1 - F(X))]`. Exact for population moments with shape < 1.
pub fn gpd_pwm_from_moments(a0: f64, a1: f64) -> (f64, f64) {
    let d = a0 - 2.0 * a1;
    let shape = 2.0 - a0 / d;
    let scale = 2.0 * a0 * a1 / d;
    (shape, scale)
}

const MIN_EXCESSES: usize = 10;

/// Fit a two-parameter GPD to positive excesses.
pub fn gpd_fit(excesses: &[f64], method: FitMethod) -> Result<GpdFit> {
    if excesses.len() < MIN_EXCESSES {
        return Err(Error::InsufficientTailData { have: excesses.len(), need: MIN_EXCESSES });
    }
    if excesses.iter().any(|&y| !(y > 0.0) || !y.is_finite()) {
        return Err(Error::InvalidArgument {
            message: "excesses must be finite and strictly positive".into(),
        });
    }
    let m = excesses.len();
    let mean = excesses.iter().sum::<f64>() / m as f64;
    let var = excesses.iter().map(|&y| (y - mean) * (y - mean)).sum::<f64>() / (m - 1) as f64;
    if var == 0.0 {
        return Err(Error::DegenerateData { message: "zero variance in excesses".into() });
    }

    let (shape, scale) = match method {
        FitMethod::Mom => gpd_mom_from_moments(mean, var),
        FitMethod::Pwm => pwm_estimate(excesses, mean),
        FitMethod::Mle => mle_estimate(excesses, mean)?,
    };
    if !(scale > 0.0) || !shape.is_finite() {
        return Err(Error::DegenerateData {
            message: format!("{method} fit produced shape {shape}, scale {scale}"),
        });
    }
    Ok(GpdFit { shape, scale, method, n_excesses: m, threshold: 0.0 })
}

/// Sample PWM estimate using the plotting-position form: ascending order
/// statistics weighted by `(m - i) / (m - 1)`.
fn pwm_estimate(excesses: &[f64], mean: f64) -> (f64, f64) {
    let m = excesses.len();
    let mut sorted = excesses.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut a1 = 0.0;
    for (i, &y) in sorted.iter().enumerate() {
        // i is 0-based; 1-based rank i+1 gives weight (m - (i+1)) / (m - 1)
        a1 += y * (m - 1 - i) as f64 / (m - 1) as f64;
    }
    a1 /= m as f64;
    gpd_pwm_from_moments(mean, a1)
}

const MLE_XI_LO: f64 = -0.9;
const MLE_XI_HI: f64 = 5.0;

/// Profile MLE over the shape, with a golden-section scale search per
/// shape value, warm-started at the PWM estimate.
fn mle_estimate(excesses: &[f64], mean: f64) -> Result<(f64, f64)> {
    let y_max = excesses.iter().cloned().fold(0.0, f64::max);

    let profile = |xi: f64| -> (f64, f64) {
        // scale floor keeps 1 + xi*y/scale > 0 for all excesses
        let floor = if xi < 0.0 { -xi * y_max } else { 0.0 };
        let obj = |t: f64| {
            let scale = floor + t.exp();
            -GpdExcess { shape: xi, scale }.log_likelihood(excesses)
        };
        let lo = (1e-8 * mean).max(1e-300).ln();
        let hi = (1e4 * mean).ln();
        let (t, neg_ll) = numeric::golden_min(&obj, lo, hi, 1e-11);
        (floor + t.exp(), -neg_ll)
    };

    let (pwm_shape, pwm_scale) = pwm_estimate(excesses, mean);
    let mut candidates: Vec<f64> = Vec::new();
    let mut xi = MLE_XI_LO;
    while xi <= MLE_XI_HI + 1e-9 {
        candidates.push(xi);
        xi += 0.2;
    }
    if pwm_shape.is_finite() {
        candidates.push(pwm_shape.clamp(MLE_XI_LO, MLE_XI_HI));
    }

    let mut best = (f64::NAN, f64::NAN, f64::NEG_INFINITY);
    for &c in &candidates {
        let (scale, ll) = profile(c);
        if ll > best.2 {
            best = (c, scale, ll);
        }
    }
    if !best.2.is_finite() {
        return Err(Error::MleNonConvergence { best_shape: best.0, best_scale: best.1 });
    }

    // golden-section refinement of the shape around the best grid point
    let lo = (best.0 - 0.25).max(MLE_XI_LO);
    let hi = (best.0 + 0.25).min(MLE_XI_HI);
    let (xi_star, neg_ll) = numeric::golden_min(&|x| -profile(x).1, lo, hi, 1e-10);
    let (scale_star, ll_star) = profile(xi_star);
    let (mut shape, mut scale, mut ll) = if ll_star >= best.2 {
        (xi_star, scale_star, ll_star)
    } else {
        (best.0, best.1, best.2)
    };
    let _ = neg_ll;

    // never return a point worse than the PWM warm start
    if pwm_scale > 0.0 {
        let pwm_ll = GpdExcess { shape: pwm_shape, scale: pwm_scale }.log_likelihood(excesses);
        if pwm_ll > ll {
            shape = pwm_shape;
            scale = pwm_scale;
            ll = pwm_ll;
        }
    }
    if !ll.is_finite() {
        return Err(Error::MleNonConvergence { best_shape: shape, best_scale: scale });
    }
    Ok((shape, scale))
}

/// Which index estimator produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexEstimator {
    Pickands,
    Moment,
}

impl std::fmt::Display for IndexEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IndexEstimator::Pickands => write!(f, "pickands"),
            IndexEstimator::Moment => write!(f, "moment"),
        }
    }
}

/// One `(k, xi_hat)` point; `xi_hat` is `NaN` when the estimate is
/// undefined at that k (ties or non-positive order statistics).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IndexPoint {
    pub k: usize,
    pub xi_hat: f64,
}

/// A tail-index estimate series over increasing k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexSeries {
    pub estimator: IndexEstimator,
    pub points: Vec<IndexPoint>,
}

impl IndexSeries {
    /// Defined (finite) points with k inside `[window.0, window.1]`.
    pub fn defined_in(&self, window: (usize, usize)) -> impl Iterator<Item = &IndexPoint> {
        self.points
            .iter()
            .filter(move |p| p.k >= window.0 && p.k <= window.1 && p.xi_hat.is_finite())
    }
}

fn descending_sorted(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn normalized_ks(k_values: &[usize]) -> Vec<usize> {
    let mut ks: Vec<usize> = k_values.iter().copied().filter(|&k| k >= 1).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Pickands estimator: `xi_k = ln((X(k) - X(2k)) / (X(2k) - X(4k))) / ln 2`
/// over descending order statistics.
pub fn pickands_series(data: &[f64], k_values: &[usize]) -> Result<IndexSeries> {
    let ks = normalized_ks(k_values);
    let n = data.len();
    let k_max = ks.last().copied().unwrap_or(0);
    if k_max == 0 || 4 * k_max > n {
        return Err(Error::InvalidArgument {
            message: format!("pickands needs 4*max(k) <= N, got max(k) = {k_max}, N = {n}"),
        });
    }
    let desc = descending_sorted(data);
    let points = ks
        .into_iter()
        .map(|k| {
            let num = desc[k - 1] - desc[2 * k - 1];
            let den = desc[2 * k - 1] - desc[4 * k - 1];
            let xi_hat = if den > 0.0 && num > 0.0 { (num / den).ln() / std::f64::consts::LN_2 } else { f64::NAN };
            IndexPoint { k, xi_hat }
        })
        .collect();
    Ok(IndexSeries { estimator: IndexEstimator::Pickands, points })
}

/// Moment estimator: with `M_r = (1/k) sum_{i<=k} (ln X(i) - ln X(k+1))^r`,
/// `xi_k = M_1 + 1 - (1 - M_1^2 / M_2)^(-1) / 2`.
pub fn moment_series(data: &[f64], k_values: &[usize]) -> Result<IndexSeries> {
    let ks = normalized_ks(k_values);
    let n = data.len();
    let k_max = ks.last().copied().unwrap_or(0);
    if k_max == 0 || k_max + 1 > n {
        return Err(Error::InvalidArgument {
            message: format!("moment estimator needs max(k) + 1 <= N, got max(k) = {k_max}, N = {n}"),
        });
    }
    let desc = descending_sorted(data);
    let points = ks
        .into_iter()
        .map(|k| {
            let pivot = desc[k];
            if !(pivot > 0.0) {
                return IndexPoint { k, xi_hat: f64::NAN };
            }
            let ln_pivot = pivot.ln();
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for x in desc.iter().take(k) {
                let d = x.ln() - ln_pivot;
                m1 += d;
                m2 += d * d;
            }
            m1 /= k as f64;
            m2 /= k as f64;
            let xi_hat = if m2 > 0.0 { m1 + 1.0 - 0.5 / (1.0 - m1 * m1 / m2) } else { f64::NAN };
            IndexPoint { k, xi_hat }
        })
        .collect();
    Ok(IndexSeries { estimator: IndexEstimator::Moment, points })
}

/// Outcome of the heavy-tail risk detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    /// Majority of index estimates notably above 0: under-estimation risk.
    HeavyRisk,
    /// Index estimates consistent with a light tail.
    LightSafe,
}

/// Classification options; the margin operationalizes "notably above 0".
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub margin: f64,
    pub min_points: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { margin: 0.05, min_points: 10 }
    }
}

/// Default classification window `[N/100, N/10]` for a sample of size N.
pub fn default_k_window(n: usize) -> (usize, usize) {
    ((n / 100).max(1), (n / 10).max(2))
}

/// HeavyRisk iff strictly more than half of the defined `xi_hat` in the
/// window exceed the margin.
pub fn classify_tail(
    series: &IndexSeries,
    k_window: (usize, usize),
    opts: ClassifyOptions,
) -> Result<TailVerdict> {
    let defined: Vec<f64> = series.defined_in(k_window).map(|p| p.xi_hat).collect();
    if defined.len() < opts.min_points {
        return Err(Error::Inconclusive { defined: defined.len(), need: opts.min_points });
    }
    let above = defined.iter().filter(|&&x| x > opts.margin).count();
    if 2 * above > defined.len() {
        Ok(TailVerdict::HeavyRisk)
    } else {
        Ok(TailVerdict::LightSafe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mom_formulas_recover_exponential() {
        // Exponential(1) is GPD(0, 1): population mean 1, variance 1.
        let (shape, scale) = gpd_mom_from_moments(1.0, 1.0);
        assert!(shape.abs() < 1e-15);
        assert!((scale - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pwm_formulas_invert_exactly() {
        // xi = 0.25, sigma = 1: a0 = 4/3, a1 = 2/7.
        let (shape, scale) = gpd_pwm_from_moments(4.0 / 3.0, 2.0 / 7.0);
        assert!((shape - 0.25).abs() < 1e-14);
        assert!((scale - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fit_rejects_short_or_nonpositive_input() {
        let short = vec![1.0; 9];
        assert!(matches!(gpd_fit(&short, FitMethod::Mom), Err(Error::InsufficientTailData { .. })));
        let bad = vec![1.0, 2.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        assert!(matches!(gpd_fit(&bad, FitMethod::Mom), Err(Error::InvalidArgument { .. })));
        let flat = vec![2.0; 12];
        assert!(matches!(gpd_fit(&flat, FitMethod::Mom), Err(Error::DegenerateData { .. })));
    }

    #[test]
    fn pickands_is_exact_on_exponential_quantiles() {
        let n = 2000;
        let data: Vec<f64> = (1..=n).map(|i| -(i as f64 / n as f64).ln()).collect();
        let ks: Vec<usize> = (1..=n / 4).step_by(7).collect();
        let series = pickands_series(&data, &ks).unwrap();
        for p in &series.points {
            assert!(p.xi_hat.abs() < 1e-10, "k = {}, xi = {}", p.k, p.xi_hat);
        }
    }

    #[test]
    fn pickands_is_exact_on_gpd_quantiles() {
        let (xi, sigma) = (0.35, 2.0);
        let law = GpdExcess { shape: xi, scale: sigma };
        let n = 4000;
        let data: Vec<f64> = (1..=n).map(|i| law.quantile(1.0 - i as f64 / n as f64)).collect();
        let ks: Vec<usize> = (1..=n / 4).step_by(13).collect();
        let series = pickands_series(&data, &ks).unwrap();
        for p in &series.points {
            assert!((p.xi_hat - xi).abs() < 1e-10, "k = {}, xi = {}", p.k, p.xi_hat);
        }
    }

    #[test]
    fn pickands_marks_tied_stats_undefined() {
        // X(2) = X(4) makes the denominator vanish
        let mut data = vec![5.0];
        data.extend(vec![3.0; 15]);
        let series = pickands_series(&data, &[1]).unwrap();
        assert!(series.points[0].xi_hat.is_nan());
    }

    #[test]
    fn moment_skips_nonpositive_pivot() {
        let data = vec![-1.0, 2.0, 3.0, 4.0];
        let series = moment_series(&data, &[3]).unwrap();
        assert!(series.points[0].xi_hat.is_nan());
    }

    #[test]
    fn classify_unanimous_series() {
        let mk = |v: f64| IndexSeries {
            estimator: IndexEstimator::Moment,
            points: (10..30).map(|k| IndexPoint { k, xi_hat: v }).collect(),
        };
        let opts = ClassifyOptions::default();
        assert_eq!(classify_tail(&mk(0.4), (10, 29), opts).unwrap(), TailVerdict::HeavyRisk);
        assert_eq!(classify_tail(&mk(-0.2), (10, 29), opts).unwrap(), TailVerdict::LightSafe);
    }

    #[test]
    fn classify_needs_enough_defined_points() {
        let series = IndexSeries {
            estimator: IndexEstimator::Moment,
            points: (10..15).map(|k| IndexPoint { k, xi_hat: 0.3 }).collect(),
        };
        assert!(matches!(
            classify_tail(&series, (10, 14), ClassifyOptions::default()),
            Err(Error::Inconclusive { .. })
        ));
    }
}
