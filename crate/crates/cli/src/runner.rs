//! Config-driven experiment runners. Each runner writes a `report.json`
//! echoing the full config, one or more CSV files, and deterministic SVG
//! plots into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use raretail::asymptotics::{
    light_asymptotic, min_sample_size, unreliable_truncation_level, Inequality, SampleSizeRegime,
};
use raretail::bootstrap::{
    coverage_study, gpd_bootstrap_ci, nonparam_bootstrap_ci, CoverageReport,
};
use raretail::distributions::{make_family, Dist, FamilySpec};
use raretail::estimators::{cond_mc_ak, cond_mc_bias_bound, is_tilted_mc, EstimateResult};
use raretail::evt::{
    classify_tail, default_k_window, moment_series, pickands_series, ClassifyOptions,
    IndexEstimator, IndexSeries, TailVerdict,
};
use raretail::streams::{child_rng, child_seed, domain};

use crate::boxstats::BoxStats;
use crate::config::*;
use crate::plot;

pub type RunError = String;

fn err<T>(msg: impl std::fmt::Display) -> Result<T, RunError> {
    Err(msg.to_string())
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, RunError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn write_report(
    dir: &Path,
    config: &ExperimentConfig,
    body: serde_json::Value,
) -> Result<(), RunError> {
    let report = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "kind": config.kind(),
        "seed": config.seed(),
        "config": config,
        "results": body,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    write_file(dir, "report.json", &(text + "\n"))?;
    Ok(())
}

fn family_label(spec: &FamilySpec) -> String {
    match spec {
        FamilySpec::GeneralizedPareto { shape } => format!("gpd({:.3})", 1.0 / shape),
        FamilySpec::HalfStudentT { degrees } => format!("t({degrees})"),
        FamilySpec::Exponential { rate } => format!("exp({rate})"),
        FamilySpec::Normal { mean, variance } => format!("normal({mean};{variance})"),
        FamilySpec::HalfNormal => "gauss".into(),
        FamilySpec::Weibull { shape } => {
            if *shape < 1.0 {
                format!("h.weib({shape})")
            } else {
                format!("l.weib({shape})")
            }
        }
        FamilySpec::LogNormal { .. } => "log.n".into(),
        FamilySpec::Gamma { shape, rate } => format!("gamma({shape};{rate})"),
        FamilySpec::FiniteLattice { .. } => "lattice".into(),
    }
}

/// Level solved from a target probability: `gamma = n b` with the route
/// used to invert it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelSolution {
    pub b: f64,
    pub gamma: f64,
    pub asymptotic_p: f64,
    pub light: bool,
}

/// Invert the appropriate tail approximation to find the level with
/// `P(S_n > n b) ~ target_p`.
pub fn solve_level(dist: &Dist, n: u64, target_p: f64) -> Result<LevelSolution, RunError> {
    let mu = dist.mean();
    let nf = n as f64;
    if dist.mgf_domain_sup() > 0.0 {
        // bisect the light-tail asymptotic in b
        let value = |b: f64| light_asymptotic(dist, n, b, Inequality::Strict, None);
        let mut lo = mu + 1e-6 * mu.abs().max(1.0);
        let mut hi = lo;
        let mut guard = 0;
        loop {
            let step = (hi - mu).max(0.5);
            hi = mu + 2.0 * step;
            match value(hi) {
                Ok(p) if p < target_p => break,
                Ok(_) => {}
                Err(_) => {
                    hi = mu + step * 1.2;
                    break;
                }
            }
            guard += 1;
            if guard > 200 {
                return err("could not bracket the target probability");
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            match value(mid) {
                Ok(p) if p > target_p => lo = mid,
                Ok(_) => hi = mid,
                Err(_) => hi = mid,
            }
            if (hi - lo) < 1e-12 * hi.abs().max(1.0) {
                break;
            }
        }
        let b = 0.5 * (lo + hi);
        let p = value(b).map_err(|e| e.to_string())?;
        Ok(LevelSolution { b, gamma: nf * b, asymptotic_p: p, light: true })
    } else {
        // one-big-jump inversion, valid across the subexponential class
        let gamma = (nf - 1.0) * mu + dist.quantile(1.0 - target_p / nf);
        let p = nf * dist.sf(gamma - (nf - 1.0) * mu);
        Ok(LevelSolution { b: gamma / nf, gamma, asymptotic_p: p, light: false })
    }
}

/// Variance-reduced estimate of `P(S_n > gamma)` under `dist`: tilting
/// where the mgf allows it, conditional Monte Carlo otherwise.
pub fn reduced_estimate(
    dist: &Dist,
    n: u64,
    gamma: f64,
    replications: u64,
    seed: u64,
) -> Result<(EstimateResult, &'static str), RunError> {
    if dist.mgf_domain_sup() > 0.0 {
        match is_tilted_mc(dist, n, gamma / n as f64, replications, seed) {
            Ok(r) => return Ok((r, "tilted_is")),
            Err(raretail::Error::NoMgf { .. }) | Err(raretail::Error::UnattainableLevel { .. }) => {}
            Err(e) => return err(e),
        }
    }
    cond_mc_ak(dist, n, gamma, replications, seed).map(|r| (r, "cond_mc_ak")).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// truncation study

#[derive(Debug, Serialize)]
struct TruncationRow {
    family: String,
    spec: FamilySpec,
    n: u64,
    b: f64,
    gamma: f64,
    truncation_level: f64,
    p: f64,
    p_std_error: f64,
    p_truncated: f64,
    p_truncated_std_error: f64,
    relative_error: f64,
    relative_error_std_error: f64,
    estimator: String,
    replications: u64,
}

pub fn run_truncation_study(cfg: &TruncationStudyConfig, out: &Path) -> Result<(), RunError> {
    let mut rows: Vec<TruncationRow> = Vec::new();
    for (ci, spec) in cfg.distributions.iter().enumerate() {
        let dist = make_family(spec).map_err(|e| e.to_string())?;
        let level = solve_level(&dist, cfg.n, cfg.target_p)?;
        let u = dist.quantile(1.0 - cfg.truncation_tail);
        let truncated = dist.truncate(u).map_err(|e| e.to_string())?;

        let seed_p = child_seed(cfg.seed, domain::STUDY_CELL, (2 * ci) as u64);
        let seed_u = child_seed(cfg.seed, domain::STUDY_CELL, (2 * ci + 1) as u64);
        let (p_est, est_name) = reduced_estimate(&dist, cfg.n, level.gamma, cfg.replications, seed_p)?;
        let (pu_est, _) = reduced_estimate(&truncated, cfg.n, level.gamma, cfg.replications, seed_u)?;

        let p = p_est.estimate;
        let pu = pu_est.estimate;
        let rel = (p - pu).abs() / p;
        // delta-method standard error of |p - p_u| / p
        let rel_se = ((pu_est.std_error / p).powi(2)
            + (pu * p_est.std_error / (p * p)).powi(2))
        .sqrt();

        rows.push(TruncationRow {
            family: family_label(spec),
            spec: spec.clone(),
            n: cfg.n,
            b: level.b,
            gamma: level.gamma,
            truncation_level: u,
            p,
            p_std_error: p_est.std_error,
            p_truncated: pu,
            p_truncated_std_error: pu_est.std_error,
            relative_error: rel,
            relative_error_std_error: rel_se,
            estimator: est_name.into(),
            replications: cfg.replications,
        });
    }

    let mut csv = String::from(
        "family,n,b,gamma,truncation_level,p,p_std_error,p_truncated,p_truncated_std_error,relative_error,relative_error_std_error,estimator,replications\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.family,
            r.n,
            r.b,
            r.gamma,
            r.truncation_level,
            r.p,
            r.p_std_error,
            r.p_truncated,
            r.p_truncated_std_error,
            r.relative_error,
            r.relative_error_std_error,
            r.estimator,
            r.replications
        ));
    }
    write_file(out, "truncation.csv", &csv)?;

    let bars: Vec<(String, f64, Option<f64>)> = rows
        .iter()
        .map(|r| (r.family.clone(), r.relative_error, Some(r.relative_error_std_error)))
        .collect();
    let svg = plot::bar_chart(
        "Relative error |p - p_u| / p from tail truncation",
        "relative error",
        &bars,
    );
    write_file(out, "truncation_relative_error.svg", &svg)?;

    let probs: Vec<(String, f64, Option<f64>)> =
        rows.iter().map(|r| (r.family.clone(), r.p, Some(r.p_std_error))).collect();
    write_file(
        out,
        "truncation_probabilities.svg",
        &plot::bar_chart("Probability estimates (untruncated)", "p", &probs),
    )?;

    write_report(
        out,
        &ExperimentConfig::TruncationStudy(cfg.clone()),
        serde_json::to_value(&rows).map_err(|e| e.to_string())?,
    )
}

// ---------------------------------------------------------------------------
// empirical study

#[derive(Debug, Serialize)]
struct EmpiricalCell {
    family: String,
    spec: FamilySpec,
    n: u64,
    data_size: usize,
    replications: usize,
    estimator: String,
    inner_replications: u64,
    truth: f64,
    truth_std_error: f64,
    bias_bound_factor: f64,
    stats: BoxStats,
    box_covers_zero: bool,
}

pub fn run_empirical_study(cfg: &EmpiricalStudyConfig, out: &Path) -> Result<(), RunError> {
    let mut cells: Vec<EmpiricalCell> = Vec::new();
    let mut raw = String::from("family,data_size,replication,estimate,relative_error\n");

    for (di, spec) in cfg.distributions.iter().enumerate() {
        let dist = make_family(spec).map_err(|e| e.to_string())?;
        let level = solve_level(&dist, cfg.n, cfg.target_p)?;
        let truth_seed = child_seed(cfg.seed, domain::STUDY_CELL, di as u64);
        let (truth, _) = reduced_estimate(&dist, cfg.n, level.gamma, cfg.oracle_replications, truth_seed)?;

        for (ni, &n_data) in cfg.data_sizes.iter().enumerate() {
            let cell_tag = (di * cfg.data_sizes.len() + ni) as u64;
            let use_ak = match cfg.estimator {
                EmpiricalEstimatorPolicy::CondMcAk => true,
                EmpiricalEstimatorPolicy::Crude => false,
                EmpiricalEstimatorPolicy::Auto => n_data >= cfg.ak_min_data,
            };
            let mut errors = Vec::with_capacity(cfg.replications);
            for rep in 0..cfg.replications {
                let stream_tag = cell_tag * cfg.replications as u64 + rep as u64;
                let mut rng = child_rng(cfg.seed, domain::STUDY_DATA, stream_tag);
                let data = dist.sample_many(n_data, &mut rng);
                let emp = raretail::distributions::empirical_from(&data)
                    .map_err(|e| e.to_string())?;
                let inner_seed = child_seed(cfg.seed, domain::STUDY_CI, stream_tag);
                let est = if use_ak {
                    cond_mc_ak(&emp, cfg.n, level.gamma, cfg.inner_replications, inner_seed)
                } else {
                    raretail::estimators::crude_mc(
                        &emp,
                        cfg.n,
                        level.gamma,
                        cfg.crude_replications,
                        inner_seed,
                    )
                }
                .map_err(|e| e.to_string())?;
                let rel = (est.estimate - truth.estimate) / truth.estimate;
                errors.push(rel);
                raw.push_str(&format!(
                    "{},{},{},{},{}\n",
                    family_label(spec),
                    n_data,
                    rep,
                    est.estimate,
                    rel
                ));
            }
            let stats = BoxStats::from_values(&errors).expect("replications >= 1");
            cells.push(EmpiricalCell {
                family: family_label(spec),
                spec: spec.clone(),
                n: cfg.n,
                data_size: n_data,
                replications: cfg.replications,
                estimator: if use_ak { "cond_mc_ak" } else { "crude" }.into(),
                inner_replications: if use_ak { cfg.inner_replications } else { cfg.crude_replications },
                truth: truth.estimate,
                truth_std_error: truth.std_error,
                bias_bound_factor: cond_mc_bias_bound(cfg.n, n_data as u64),
                box_covers_zero: stats.box_covers(0.0),
                stats,
            });
        }
    }

    let mut csv = String::from(
        "family,n,data_size,replications,estimator,inner_replications,truth,truth_std_error,bias_bound_factor,median,q25,q75,whisker_low,whisker_high,outliers,box_covers_zero\n",
    );
    for c in &cells {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.family,
            c.n,
            c.data_size,
            c.replications,
            c.estimator,
            c.inner_replications,
            c.truth,
            c.truth_std_error,
            c.bias_bound_factor,
            c.stats.median,
            c.stats.q25,
            c.stats.q75,
            c.stats.whisker_low,
            c.stats.whisker_high,
            c.stats.outliers.len(),
            c.box_covers_zero
        ));
    }
    write_file(out, "empirical_cells.csv", &csv)?;
    write_file(out, "empirical_errors.csv", &raw)?;

    for &n_data in &cfg.data_sizes {
        let items: Vec<(String, BoxStats)> = cells
            .iter()
            .filter(|c| c.data_size == n_data)
            .map(|c| (c.family.clone(), c.stats.clone()))
            .collect();
        let svg = plot::box_plot(
            &format!("Relative errors with empirical input, N = {n_data}"),
            "relative error",
            &items,
        );
        write_file(out, &format!("empirical_N{n_data}.svg"), &svg)?;
    }

    write_report(
        out,
        &ExperimentConfig::EmpiricalStudy(cfg.clone()),
        serde_json::to_value(&cells).map_err(|e| e.to_string())?,
    )
}

// ---------------------------------------------------------------------------
// bootstrap coverage studies

#[derive(Debug, Serialize)]
struct CoverageRow {
    data_size: usize,
    tail_quantile: Option<f64>,
    fit_method: Option<String>,
    coverage: f64,
    mean_width: f64,
    mean_width_over_p: f64,
    replications: usize,
    resamples: usize,
    true_p: f64,
}

fn resolve_truth(
    dist: &Dist,
    n: u64,
    gamma: f64,
    override_p: Option<f64>,
    oracle_replications: u64,
    seed: u64,
) -> Result<(f64, String), RunError> {
    if let Some(p) = override_p {
        return Ok((p, "config".into()));
    }
    let (est, name) = reduced_estimate(dist, n, gamma, oracle_replications, seed)?;
    Ok((est.estimate, format!("{name} oracle, R = {oracle_replications}")))
}

fn coverage_row(report: &CoverageReport, row: &mut CoverageRow) {
    row.coverage = report.coverage;
    row.mean_width = report.mean_width;
    row.mean_width_over_p =
        report.width_over_p.iter().sum::<f64>() / report.width_over_p.len() as f64;
}

pub fn run_bootstrap_coverage(cfg: &BootstrapCoverageConfig, out: &Path) -> Result<(), RunError> {
    let dist = make_family(&cfg.distribution).map_err(|e| e.to_string())?;
    let level = solve_level(&dist, cfg.n, cfg.target_p)?;
    let truth_seed = child_seed(cfg.seed, domain::STUDY_CELL, u64::MAX);
    let (true_p, truth_source) =
        resolve_truth(&dist, cfg.n, level.gamma, cfg.true_p, cfg.oracle_replications, truth_seed)?;

    let mut rows = Vec::new();
    for (ni, &n_data) in cfg.data_sizes.iter().enumerate() {
        let study_seed = child_seed(cfg.seed, domain::STUDY_CELL, ni as u64);
        let inner = cfg.inner;
        let report = coverage_study(
            &dist,
            true_p,
            n_data,
            cfg.replications,
            study_seed,
            json!({
                "data_size": n_data,
                "resamples": cfg.resamples,
                "inner": inner,
                "level": cfg.level,
                "gamma": level.gamma,
            }),
            |data, seed| {
                let ci = nonparam_bootstrap_ci(
                    data,
                    cfg.resamples,
                    cfg.n,
                    level.gamma,
                    &inner,
                    cfg.level,
                    seed,
                )?;
                Ok((ci.lower, ci.upper))
            },
        )
        .map_err(|e| e.to_string())?;
        let mut row = CoverageRow {
            data_size: n_data,
            tail_quantile: None,
            fit_method: None,
            coverage: 0.0,
            mean_width: 0.0,
            mean_width_over_p: 0.0,
            replications: cfg.replications,
            resamples: cfg.resamples,
            true_p,
        };
        coverage_row(&report, &mut row);
        rows.push(row);
    }

    let mut csv = String::from(
        "data_size,coverage,mean_width,mean_width_over_p,replications,resamples,true_p\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.data_size, r.coverage, r.mean_width, r.mean_width_over_p, r.replications, r.resamples, r.true_p
        ));
    }
    write_file(out, "coverage.csv", &csv)?;

    let series = vec![(
        family_label(&cfg.distribution),
        rows.iter().map(|r| ((r.data_size as f64).log10(), r.coverage)).collect::<Vec<_>>(),
    )];
    write_file(
        out,
        "coverage.svg",
        &plot::line_plot("Bootstrap CI coverage", "log10 N", "coverage", &series),
    )?;

    write_report(
        out,
        &ExperimentConfig::BootstrapCoverage(cfg.clone()),
        json!({"rows": rows, "truth_source": truth_source, "level_solution": level}),
    )
}

pub fn run_gpd_bootstrap_coverage(
    cfg: &GpdBootstrapCoverageConfig,
    out: &Path,
) -> Result<(), RunError> {
    let dist = make_family(&cfg.distribution).map_err(|e| e.to_string())?;
    let level = solve_level(&dist, cfg.n, cfg.target_p)?;
    let truth_seed = child_seed(cfg.seed, domain::STUDY_CELL, u64::MAX);
    let (true_p, truth_source) =
        resolve_truth(&dist, cfg.n, level.gamma, cfg.true_p, cfg.oracle_replications, truth_seed)?;

    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &tail_q in &cfg.tail_quantiles {
        for method in &cfg.fit_methods {
            for &n_data in &cfg.data_sizes {
                let study_seed = child_seed(cfg.seed, domain::STUDY_CELL, cell);
                cell += 1;
                let inner = cfg.inner;
                let method = *method;
                let report = coverage_study(
                    &dist,
                    true_p,
                    n_data,
                    cfg.replications,
                    study_seed,
                    json!({
                        "data_size": n_data,
                        "tail_quantile": tail_q,
                        "fit_method": method,
                        "resamples": cfg.resamples,
                        "inner": inner,
                        "level": cfg.level,
                        "gamma": level.gamma,
                    }),
                    |data, seed| {
                        let ci = gpd_bootstrap_ci(
                            data,
                            cfg.resamples,
                            cfg.n,
                            level.gamma,
                            tail_q,
                            method,
                            &inner,
                            cfg.level,
                            seed,
                        )?;
                        Ok((ci.lower, ci.upper))
                    },
                )
                .map_err(|e| e.to_string())?;
                let mut row = CoverageRow {
                    data_size: n_data,
                    tail_quantile: Some(tail_q),
                    fit_method: Some(method.to_string()),
                    coverage: 0.0,
                    mean_width: 0.0,
                    mean_width_over_p: 0.0,
                    replications: cfg.replications,
                    resamples: cfg.resamples,
                    true_p,
                };
                coverage_row(&report, &mut row);
                rows.push(row);
            }
        }
    }

    let mut csv = String::from(
        "tail_quantile,fit_method,data_size,coverage,mean_width,mean_width_over_p,replications,resamples,true_p\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.tail_quantile.unwrap(),
            r.fit_method.as_deref().unwrap(),
            r.data_size,
            r.coverage,
            r.mean_width,
            r.mean_width_over_p,
            r.replications,
            r.resamples,
            r.true_p
        ));
    }
    write_file(out, "gpd_coverage.csv", &csv)?;

    let mut series = Vec::new();
    for &tail_q in &cfg.tail_quantiles {
        for method in &cfg.fit_methods {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.tail_quantile == Some(tail_q) && r.fit_method.as_deref() == Some(&method.to_string()))
                .map(|r| ((r.data_size as f64).log10(), r.coverage))
                .collect();
            series.push((format!("q={tail_q} {method}"), pts));
        }
    }
    write_file(
        out,
        "gpd_coverage.svg",
        &plot::line_plot("GPD-spliced bootstrap CI coverage", "log10 N", "coverage", &series),
    )?;

    write_report(
        out,
        &ExperimentConfig::GpdBootstrapCoverage(cfg.clone()),
        json!({"rows": rows, "truth_source": truth_source, "level_solution": level}),
    )
}

// ---------------------------------------------------------------------------
// evt detection

#[derive(Debug, Serialize)]
struct VerdictRow {
    family: String,
    data_size: usize,
    pickands: Option<TailVerdict>,
    moment: Option<TailVerdict>,
    estimators_disagree: bool,
}

fn k_grid(cap: usize) -> Vec<usize> {
    let k_max = cap.max(8);
    let step = (k_max / 400).max(1);
    (2..=k_max).step_by(step).collect()
}

pub fn run_evt_detection(cfg: &EvtDetectionConfig, out: &Path) -> Result<(), RunError> {
    type PlotSlot = ((usize, IndexEstimator), Vec<(String, Vec<(f64, f64)>)>);
    let mut series_csv = String::from("estimator,family,data_size,k,xi_hat\n");
    let mut verdicts: Vec<VerdictRow> = Vec::new();
    let mut plots: Vec<PlotSlot> = Vec::new();

    for &n_data in &cfg.data_sizes {
        for estimator in [IndexEstimator::Pickands, IndexEstimator::Moment] {
            plots.push(((n_data, estimator), Vec::new()));
        }
    }

    for (di, spec) in cfg.distributions.iter().enumerate() {
        let dist = make_family(spec).map_err(|e| e.to_string())?;
        for (ni, &n_data) in cfg.data_sizes.iter().enumerate() {
            let tag = (di * cfg.data_sizes.len() + ni) as u64;
            let mut rng = child_rng(cfg.seed, domain::STUDY_DATA, tag);
            let data = dist.sample_many(n_data, &mut rng);

            let window = match cfg.k_window_fractions {
                Some((lo, hi)) => (((n_data as f64 * lo) as usize).max(1), (n_data as f64 * hi) as usize),
                None => default_k_window(n_data),
            };
            let opts = ClassifyOptions { margin: cfg.margin, ..Default::default() };

            let mut row = VerdictRow {
                family: family_label(spec),
                data_size: n_data,
                pickands: None,
                moment: None,
                estimators_disagree: false,
            };

            for estimator in [IndexEstimator::Pickands, IndexEstimator::Moment] {
                let series: IndexSeries = match estimator {
                    IndexEstimator::Pickands => {
                        pickands_series(&data, &k_grid(n_data / 4)).map_err(|e| e.to_string())?
                    }
                    IndexEstimator::Moment => {
                        moment_series(&data, &k_grid(n_data / 4)).map_err(|e| e.to_string())?
                    }
                };
                for p in &series.points {
                    series_csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        estimator,
                        family_label(spec),
                        n_data,
                        p.k,
                        if p.xi_hat.is_finite() { p.xi_hat.to_string() } else { "".into() }
                    ));
                }
                let verdict = classify_tail(&series, window, opts).ok();
                match estimator {
                    IndexEstimator::Pickands => row.pickands = verdict,
                    IndexEstimator::Moment => row.moment = verdict,
                }
                let pts: Vec<(f64, f64)> =
                    series.points.iter().map(|p| (p.k as f64, p.xi_hat)).collect();
                let slot = plots
                    .iter_mut()
                    .find(|((nd, est), _)| *nd == n_data && *est == estimator)
                    .expect("plot slot exists");
                slot.1.push((family_label(spec), pts));
            }
            row.estimators_disagree = match (row.pickands, row.moment) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            };
            verdicts.push(row);
        }
    }

    write_file(out, "index_series.csv", &series_csv)?;

    let mut verdict_csv = String::from("family,data_size,pickands,moment,estimators_disagree\n");
    for v in &verdicts {
        let show = |o: Option<TailVerdict>| match o {
            Some(TailVerdict::HeavyRisk) => "heavy_risk",
            Some(TailVerdict::LightSafe) => "light_safe",
            None => "inconclusive",
        };
        verdict_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            v.family,
            v.data_size,
            show(v.pickands),
            show(v.moment),
            v.estimators_disagree
        ));
    }
    write_file(out, "verdicts.csv", &verdict_csv)?;

    for ((n_data, estimator), series) in &plots {
        let svg = plot::line_plot(
            &format!("{estimator} extreme-value-index estimates, N = {n_data}"),
            "k",
            "xi_hat",
            series,
        );
        write_file(out, &format!("index_{estimator}_N{n_data}.svg"), &svg)?;
    }

    write_report(
        out,
        &ExperimentConfig::EvtDetection(cfg.clone()),
        serde_json::to_value(&verdicts).map_err(|e| e.to_string())?,
    )
}

// ---------------------------------------------------------------------------
// thresholds

#[derive(Debug, Serialize)]
struct ThresholdRow {
    regime: String,
    n: u64,
    b: f64,
    mu: f64,
    reliable_u: f64,
    /// Heavy tails only: estimation is void below this level (order of
    /// magnitude, free constant set to 1).
    unreliable_below_u: Option<f64>,
    max_order: String,
    min_n: f64,
    min_n_given_p: Option<f64>,
}

pub fn run_thresholds(cfg: &ThresholdsConfig, out: &Path) -> Result<(), RunError> {
    let mut rows = Vec::new();
    for q in &cfg.queries {
        let (regime_name, reliable_u, max_order) = match q.regime {
            SampleSizeRegime::HeavyPowerLaw { alpha, beta } => (
                format!("heavy(alpha={alpha};beta={beta})"),
                (q.n as f64 * (q.b - q.mu)).powf(beta),
                format!("N^(1/{alpha})"),
            ),
            SampleSizeRegime::ExponentialLike { rate } => (
                format!("exponential(rate={rate})"),
                q.b * (q.n as f64).ln(),
                format!("ln(N)/{rate}"),
            ),
            SampleSizeRegime::NormalLike { variance, c } => (
                format!("normal(var={variance};c={c})"),
                c * (q.n as f64).ln(),
                format!("sqrt({} ln N)", 2.0 * variance),
            ),
        };
        let unreliable_below_u = match q.regime {
            SampleSizeRegime::HeavyPowerLaw { .. } => {
                Some(unreliable_truncation_level(q.mu, q.n, q.n as f64 * q.b).map_err(|e| e.to_string())?)
            }
            _ => None,
        };
        let min_n = min_sample_size(q.regime, q.n, q.b, q.mu, None).map_err(|e| e.to_string())?;
        let min_n_given_p = match q.target_p {
            Some(p) => {
                Some(min_sample_size(q.regime, q.n, q.b, q.mu, Some(p)).map_err(|e| e.to_string())?)
            }
            None => None,
        };
        rows.push(ThresholdRow {
            regime: regime_name,
            n: q.n,
            b: q.b,
            mu: q.mu,
            reliable_u,
            unreliable_below_u,
            max_order,
            min_n,
            min_n_given_p,
        });
    }

    let mut csv = String::from(
        "regime,n,b,mu,reliable_u,unreliable_below_u,sample_max_order,min_n,min_n_given_p\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.regime,
            r.n,
            r.b,
            r.mu,
            r.reliable_u,
            r.unreliable_below_u.map(|v| v.to_string()).unwrap_or_default(),
            r.max_order,
            r.min_n,
            r.min_n_given_p.map(|v| v.to_string()).unwrap_or_default()
        ));
    }
    write_file(out, "thresholds.csv", &csv)?;

    write_report(
        out,
        &ExperimentConfig::Thresholds(cfg.clone()),
        serde_json::to_value(&rows).map_err(|e| e.to_string())?,
    )
}

// ---------------------------------------------------------------------------
// dispatch

pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(out_dir).map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    match cfg {
        ExperimentConfig::TruncationStudy(c) => run_truncation_study(c, out_dir),
        ExperimentConfig::EmpiricalStudy(c) => run_empirical_study(c, out_dir),
        ExperimentConfig::BootstrapCoverage(c) => run_bootstrap_coverage(c, out_dir),
        ExperimentConfig::GpdBootstrapCoverage(c) => run_gpd_bootstrap_coverage(c, out_dir),
        ExperimentConfig::EvtDetection(c) => run_evt_detection(c, out_dir),
        ExperimentConfig::Thresholds(c) => run_thresholds(c, out_dir),
    }
}
