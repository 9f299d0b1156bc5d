//! Python bindings: the distribution type plus the estimation,
//! asymptotics, EVT and bootstrap entry points, with results returned as
//! plain dicts/lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use raretail::asymptotics::{
    heavy_asymptotic, light_asymptotic, min_sample_size, reliable_truncation_level, solve_tilt,
    Inequality, SampleSizeRegime, TruncationRule,
};
use raretail::bootstrap::InnerEstimator;
use raretail::distributions::{empirical_from, make_family, Dist, FamilySpec, FiniteLattice};
use raretail::estimators as est;
use raretail::evt;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().unbind().into_any(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.unbind().into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.unbind().into_any()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.unbind().into_any(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.unbind().into_any()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.unbind().into_any()
        }
    })
}

fn to_py_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = serde_json::to_value(value).map_err(value_err)?;
    json_to_py(py, &json)
}

fn parse_inequality(strict: bool) -> Inequality {
    if strict {
        Inequality::Strict
    } else {
        Inequality::NonStrict
    }
}

fn parse_fit_method(name: &str) -> PyResult<evt::FitMethod> {
    match name {
        "mle" => Ok(evt::FitMethod::Mle),
        "mom" => Ok(evt::FitMethod::Mom),
        "pwm" => Ok(evt::FitMethod::Pwm),
        other => Err(value_err(format!("unknown fit method '{other}' (use mle/mom/pwm)"))),
    }
}

fn parse_inner(estimator: &str, replications: u64) -> PyResult<InnerEstimator> {
    match estimator {
        "crude" => Ok(InnerEstimator::Crude { replications }),
        "cond_mc_ak" => Ok(InnerEstimator::CondMcAk { replications }),
        "tilted_is" => Ok(InnerEstimator::TiltedIs { replications }),
        other => Err(value_err(format!(
            "unknown estimator '{other}' (use crude/cond_mc_ak/tilted_is)"
        ))),
    }
}

/// An immutable input model over the reals.
#[pyclass(name = "Distribution", frozen)]
struct PyDistribution {
    inner: Dist,
}

#[pymethods]
impl PyDistribution {
    /// Build from a family spec JSON string: {"family": ..., "params": {...}}.
    #[staticmethod]
    fn from_json(spec: &str) -> PyResult<Self> {
        let spec: FamilySpec = serde_json::from_str(spec).map_err(value_err)?;
        Ok(Self { inner: make_family(&spec).map_err(value_err)? })
    }

    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        Ok(Self { inner: Dist::exponential(rate).map_err(value_err)? })
    }

    #[staticmethod]
    fn normal(mean: f64, variance: f64) -> PyResult<Self> {
        Ok(Self { inner: Dist::normal(mean, variance).map_err(value_err)? })
    }

    #[staticmethod]
    fn half_normal() -> Self {
        Self { inner: Dist::half_normal() }
    }

    #[staticmethod]
    fn generalized_pareto(shape: f64) -> PyResult<Self> {
        Ok(Self { inner: Dist::generalized_pareto(shape).map_err(value_err)? })
    }

    #[staticmethod]
    fn half_student_t(degrees: f64) -> PyResult<Self> {
        Ok(Self { inner: Dist::half_student_t(degrees).map_err(value_err)? })
    }

    #[staticmethod]
    fn weibull(shape: f64) -> PyResult<Self> {
        Ok(Self { inner: Dist::weibull(shape).map_err(value_err)? })
    }

    #[staticmethod]
    fn log_normal(log_mean: f64, log_variance: f64) -> PyResult<Self> {
        Ok(Self { inner: Dist::log_normal(log_mean, log_variance).map_err(value_err)? })
    }

    #[staticmethod]
    fn gamma(shape: f64, rate: f64) -> PyResult<Self> {
        Ok(Self { inner: Dist::gamma(shape, rate).map_err(value_err)? })
    }

    #[staticmethod]
    fn lattice(points: Vec<f64>, masses: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: Dist::lattice(&points, &masses).map_err(value_err)? })
    }

    /// Empirical distribution of a data set (equal mass per point).
    #[staticmethod]
    fn empirical(data: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: empirical_from(&data).map_err(value_err)? })
    }

    /// Empirical body below the (1 - tail_quantile) quantile with a GPD
    /// tail fitted to the excesses by the given method.
    #[staticmethod]
    fn spliced(data: Vec<f64>, tail_quantile: f64, method: &str) -> PyResult<Self> {
        let method = parse_fit_method(method)?;
        let dist =
            raretail::bootstrap::splice_resample(&data, tail_quantile, method).map_err(value_err)?;
        Ok(Self { inner: dist })
    }

    fn family(&self) -> &'static str {
        self.inner.family()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn sf(&self, x: f64) -> f64 {
        self.inner.sf(x)
    }

    fn quantile(&self, q: f64) -> f64 {
        self.inner.quantile(q)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    fn is_discrete(&self) -> bool {
        self.inner.is_discrete()
    }

    fn mgf_domain_sup(&self) -> f64 {
        self.inner.mgf_domain_sup()
    }

    fn log_mgf(&self, theta: f64) -> PyResult<f64> {
        self.inner.log_mgf(theta).map_err(value_err)
    }

    fn log_mgf_d1(&self, theta: f64) -> PyResult<f64> {
        self.inner.log_mgf_d1(theta).map_err(value_err)
    }

    fn log_mgf_d2(&self, theta: f64) -> PyResult<f64> {
        self.inner.log_mgf_d2(theta).map_err(value_err)
    }

    /// Deterministic sample of the given size from a seeded stream.
    fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = raretail::streams::child_rng(seed, 0x70, 0);
        self.inner.sample_many(count, &mut rng)
    }

    /// Law of X conditional on X <= level.
    fn truncate(&self, level: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.truncate(level).map_err(value_err)? })
    }

    /// Exponentially tilted law.
    fn tilt(&self, theta: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.tilt(theta).map_err(value_err)? })
    }

    fn __repr__(&self) -> String {
        format!("Distribution({})", self.inner.family())
    }
}

/// Root of psi'(theta) = b with the rate and curvature at the root.
#[pyfunction(name = "solve_tilt")]
fn py_solve_tilt(py: Python<'_>, dist: &PyDistribution, b: f64) -> PyResult<Py<PyAny>> {
    let sol = solve_tilt(&dist.inner, b).map_err(value_err)?;
    to_py_dict(py, &sol)
}

/// Exact light-tail asymptotic for P(S_n > n b) (or >= with strict=False).
#[pyfunction(name = "light_asymptotic", signature = (dist, n, b, strict = true, span = None))]
fn py_light_asymptotic(
    dist: &PyDistribution,
    n: u64,
    b: f64,
    strict: bool,
    span: Option<f64>,
) -> PyResult<f64> {
    light_asymptotic(&dist.inner, n, b, parse_inequality(strict), span).map_err(value_err)
}

/// One-big-jump approximation n * sf(gamma - (n-1) mu).
#[pyfunction(name = "heavy_asymptotic")]
fn py_heavy_asymptotic(dist: &PyDistribution, n: u64, gamma: f64) -> PyResult<f64> {
    heavy_asymptotic(&dist.inner, n, gamma).map_err(value_err)
}

/// Minimal reliable truncation level under the input family's rule.
#[pyfunction(name = "reliable_truncation_level", signature = (dist, n, b, safety = 1.1, beta = 1.5, c_floor = 1.0))]
fn py_reliable_truncation_level(
    dist: &PyDistribution,
    n: u64,
    b: f64,
    safety: f64,
    beta: f64,
    c_floor: f64,
) -> PyResult<f64> {
    reliable_truncation_level(&dist.inner, n, b, TruncationRule { safety, beta, c_floor })
        .map_err(value_err)
}

/// Minimum data size for reliable estimation; `regime` is a JSON object
/// like {"regime": "exponential_like", "rate": 1.0}.
#[pyfunction(name = "min_sample_size", signature = (regime, n, b, mu, target_p = None))]
fn py_min_sample_size(
    regime: &str,
    n: u64,
    b: f64,
    mu: f64,
    target_p: Option<f64>,
) -> PyResult<f64> {
    let regime: SampleSizeRegime = serde_json::from_str(regime).map_err(value_err)?;
    min_sample_size(regime, n, b, mu, target_p).map_err(value_err)
}

/// Crude Monte Carlo estimate of P(S_n > gamma).
#[pyfunction(name = "crude_mc")]
fn py_crude_mc(
    py: Python<'_>,
    dist: &PyDistribution,
    n: u64,
    gamma: f64,
    replications: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let r = est::crude_mc(&dist.inner, n, gamma, replications, seed).map_err(value_err)?;
    to_py_dict(py, &r)
}

/// Conditional Monte Carlo estimate of P(S_n > gamma).
#[pyfunction(name = "cond_mc_ak")]
fn py_cond_mc_ak(
    py: Python<'_>,
    dist: &PyDistribution,
    n: u64,
    gamma: f64,
    replications: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let r = est::cond_mc_ak(&dist.inner, n, gamma, replications, seed).map_err(value_err)?;
    to_py_dict(py, &r)
}

/// Exponential-tilting importance sampling estimate of P(S_n > n b).
#[pyfunction(name = "is_tilted_mc")]
fn py_is_tilted_mc(
    py: Python<'_>,
    dist: &PyDistribution,
    n: u64,
    b: f64,
    replications: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let r = est::is_tilted_mc(&dist.inner, n, b, replications, seed).map_err(value_err)?;
    to_py_dict(py, &r)
}

/// Exact P(S_n > gamma) (or >=) for a finite lattice by convolution.
#[pyfunction(name = "exact_convolution", signature = (points, masses, n, gamma, strict = true))]
fn py_exact_convolution(
    points: Vec<f64>,
    masses: Vec<f64>,
    n: u64,
    gamma: f64,
    strict: bool,
) -> PyResult<f64> {
    let lattice = FiniteLattice::new(&points, &masses).map_err(value_err)?;
    est::exact_convolution(&lattice, n, gamma, parse_inequality(strict)).map_err(value_err)
}

/// Conditional-MC bias bound factor 1 - (1 - 1/N)^n.
#[pyfunction(name = "cond_mc_bias_bound")]
fn py_cond_mc_bias_bound(n: u64, support_points: u64) -> f64 {
    est::cond_mc_bias_bound(n, support_points)
}

/// Fit a two-parameter GPD to positive excesses ("mle", "mom" or "pwm").
#[pyfunction(name = "gpd_fit")]
fn py_gpd_fit(py: Python<'_>, excesses: Vec<f64>, method: &str) -> PyResult<Py<PyAny>> {
    let fit = evt::gpd_fit(&excesses, parse_fit_method(method)?).map_err(value_err)?;
    to_py_dict(py, &fit)
}

fn series_to_py(py: Python<'_>, series: &evt::IndexSeries) -> PyResult<Py<PyAny>> {
    let list = PyList::empty(py);
    for p in &series.points {
        let xi: Py<PyAny> = if p.xi_hat.is_finite() {
            p.xi_hat.into_pyobject(py)?.unbind().into_any()
        } else {
            py.None()
        };
        list.append((p.k, xi))?;
    }
    Ok(list.unbind().into_any())
}

/// Pickands extreme-value-index series as [(k, xi_hat or None), ...].
#[pyfunction(name = "pickands_series")]
fn py_pickands_series(py: Python<'_>, data: Vec<f64>, k_values: Vec<usize>) -> PyResult<Py<PyAny>> {
    let series = evt::pickands_series(&data, &k_values).map_err(value_err)?;
    series_to_py(py, &series)
}

/// Moment-estimator series as [(k, xi_hat or None), ...].
#[pyfunction(name = "moment_series")]
fn py_moment_series(py: Python<'_>, data: Vec<f64>, k_values: Vec<usize>) -> PyResult<Py<PyAny>> {
    let series = evt::moment_series(&data, &k_values).map_err(value_err)?;
    series_to_py(py, &series)
}

/// Classify a tail-index series: "heavy_risk" when strictly more than
/// half of the defined points in the window exceed the margin.
#[pyfunction(name = "classify_tail", signature = (points, k_min, k_max, margin = 0.05))]
fn py_classify_tail(
    points: Vec<(usize, Option<f64>)>,
    k_min: usize,
    k_max: usize,
    margin: f64,
) -> PyResult<&'static str> {
    let series = evt::IndexSeries {
        estimator: evt::IndexEstimator::Moment,
        points: points
            .into_iter()
            .map(|(k, xi)| evt::IndexPoint { k, xi_hat: xi.unwrap_or(f64::NAN) })
            .collect(),
    };
    let opts = evt::ClassifyOptions { margin, ..Default::default() };
    match evt::classify_tail(&series, (k_min, k_max), opts).map_err(value_err)? {
        evt::TailVerdict::HeavyRisk => Ok("heavy_risk"),
        evt::TailVerdict::LightSafe => Ok("light_safe"),
    }
}

/// Nonparametric percentile bootstrap CI for P(S_n > gamma).
#[pyfunction(name = "nonparam_bootstrap_ci", signature = (data, resamples, n, gamma, inner_estimator, inner_replications, level = 0.95, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn py_nonparam_bootstrap_ci(
    py: Python<'_>,
    data: Vec<f64>,
    resamples: usize,
    n: u64,
    gamma: f64,
    inner_estimator: &str,
    inner_replications: u64,
    level: f64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let inner = parse_inner(inner_estimator, inner_replications)?;
    let ci =
        raretail::bootstrap::nonparam_bootstrap_ci(&data, resamples, n, gamma, &inner, level, seed)
            .map_err(value_err)?;
    to_py_dict(py, &ci)
}

/// GPD-spliced percentile bootstrap CI for P(S_n > gamma).
#[pyfunction(name = "gpd_bootstrap_ci", signature = (data, resamples, n, gamma, tail_quantile, fit_method, inner_estimator, inner_replications, level = 0.95, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn py_gpd_bootstrap_ci(
    py: Python<'_>,
    data: Vec<f64>,
    resamples: usize,
    n: u64,
    gamma: f64,
    tail_quantile: f64,
    fit_method: &str,
    inner_estimator: &str,
    inner_replications: u64,
    level: f64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let inner = parse_inner(inner_estimator, inner_replications)?;
    let ci = raretail::bootstrap::gpd_bootstrap_ci(
        &data,
        resamples,
        n,
        gamma,
        tail_quantile,
        parse_fit_method(fit_method)?,
        &inner,
        level,
        seed,
    )
    .map_err(value_err)?;
    to_py_dict(py, &ci)
}

#[pymodule]
fn raretail_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistribution>()?;
    m.add_function(wrap_pyfunction!(py_solve_tilt, m)?)?;
    m.add_function(wrap_pyfunction!(py_light_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(py_heavy_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(py_reliable_truncation_level, m)?)?;
    m.add_function(wrap_pyfunction!(py_min_sample_size, m)?)?;
    m.add_function(wrap_pyfunction!(py_crude_mc, m)?)?;
    m.add_function(wrap_pyfunction!(py_cond_mc_ak, m)?)?;
    m.add_function(wrap_pyfunction!(py_is_tilted_mc, m)?)?;
    m.add_function(wrap_pyfunction!(py_exact_convolution, m)?)?;
    m.add_function(wrap_pyfunction!(py_cond_mc_bias_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_gpd_fit, m)?)?;
    m.add_function(wrap_pyfunction!(py_pickands_series, m)?)?;
    m.add_function(wrap_pyfunction!(py_moment_series, m)?)?;
    m.add_function(wrap_pyfunction!(py_classify_tail, m)?)?;
    m.add_function(wrap_pyfunction!(py_nonparam_bootstrap_ci, m)?)?;
    m.add_function(wrap_pyfunction!(py_gpd_bootstrap_ci, m)?)?;
    Ok(())
}
