//! Command-line front end: direct estimation and asymptotics commands,
//! plus config-driven experiment runners with CSV/JSON/SVG outputs.
//!
//! `RARETAIL_WORKERS` caps the worker pool; results are byte-identical
//! for any worker count because every Monte Carlo unit draws from a
//! stream derived from its own coordinates.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use raretail::asymptotics::{heavy_asymptotic, light_asymptotic, solve_tilt, Inequality};
use raretail::distributions::{make_family, Dist, FamilySpec};
use raretail::estimators::{cond_mc_ak, crude_mc, is_tilted_mc};

use raretail_cli::config::{load_config, ExperimentConfig};
use raretail_cli::runner;

#[derive(Parser)]
#[command(name = "raretail", version, about = "Rare-event estimation for i.i.d. sums with tail-uncertainty quantification")]
struct Cli {
    /// Override the seed from configs or defaults
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Crude,
    CondMcAk,
    TiltedIs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Auto,
    Light,
    Heavy,
}

#[derive(Clone, Copy, ValueEnum)]
enum InequalityArg {
    Strict,
    NonStrict,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to a JSON experiment config
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV/JSON/SVG outputs
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate of P(S_n > gamma)
    Estimate {
        /// Family spec JSON, inline or @file
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: u64,
        /// Absolute level gamma (alternative to --b)
        #[arg(long, conflicts_with = "b")]
        gamma: Option<f64>,
        /// Per-summand level b, gamma = n b
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        #[arg(long, default_value_t = 100_000)]
        replications: u64,
        /// Write the JSON result here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form tail asymptotics and the tilt solution
    Asymptotic {
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: u64,
        #[arg(long, conflicts_with = "b")]
        gamma: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
        regime: RegimeArg,
        #[arg(long, value_enum, default_value_t = InequalityArg::Strict)]
        inequality: InequalityArg,
        /// Lattice span override
        #[arg(long)]
        span: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Data-size threshold table (closed form, no simulation)
    Thresholds(ConfigArgs),
    /// Compare truncated against untruncated rare-event probabilities
    TruncationStudy(ConfigArgs),
    /// Relative-error box plots with empirical input models
    EmpiricalStudy(ConfigArgs),
    /// Bootstrap CI coverage studies (plain or GPD-spliced configs)
    Bootstrap(ConfigArgs),
    /// Tail-index series and heavy-tail detection
    Evt(ConfigArgs),
    /// Run any experiment config
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    /// Run the experiment a config file describes
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn parse_dist(text: &str) -> Result<Dist, String> {
    let body = if let Some(path) = text.strip_prefix('@') {
        fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?
    } else {
        text.to_string()
    };
    let spec: FamilySpec =
        serde_json::from_str(&body).map_err(|e| format!("invalid distribution spec: {e}"))?;
    make_family(&spec).map_err(|e| e.to_string())
}

fn emit(out: Option<PathBuf>, value: serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(&value).map_err(|e| e.to_string())? + "\n";
    match out {
        Some(path) => {
            fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve_gamma(n: u64, gamma: Option<f64>, b: Option<f64>) -> Result<(f64, f64), String> {
    match (gamma, b) {
        (Some(g), None) => Ok((g, g / n as f64)),
        (None, Some(b)) => Ok((n as f64 * b, b)),
        _ => Err("exactly one of --gamma or --b is required".into()),
    }
}

fn load_and_seed(args: &ConfigArgs, seed: Option<u64>) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let mut cfg = load_config(&text)?;
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

fn expect_kind(cfg: &ExperimentConfig, allowed: &[&str]) -> Result<(), String> {
    if allowed.contains(&cfg.kind()) {
        Ok(())
    } else {
        Err(format!("config kind '{}' not valid here (expected one of {:?})", cfg.kind(), allowed))
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Estimate { dist, n, gamma, b, estimator, replications, out } => {
            let dist = parse_dist(&dist)?;
            let (gamma, b) = resolve_gamma(n, gamma, b)?;
            let seed = cli.seed.unwrap_or(0);
            let result = match estimator {
                EstimatorArg::Crude => crude_mc(&dist, n, gamma, replications, seed),
                EstimatorArg::CondMcAk => cond_mc_ak(&dist, n, gamma, replications, seed),
                EstimatorArg::TiltedIs => is_tilted_mc(&dist, n, b, replications, seed),
            }
            .map_err(|e| e.to_string())?;
            let mut payload = json!({"gamma": gamma, "b": b, "result": result});
            if dist.is_discrete() && matches!(estimator, EstimatorArg::CondMcAk) {
                // discrete inputs carry the conditional-MC bias; report the
                // bound factor next to the estimate
                let points = match &dist {
                    Dist::Empirical(e) => e.len() as u64,
                    Dist::Lattice(l) => l.points().len() as u64,
                    _ => 0,
                };
                if points > 0 {
                    payload["bias_bound_factor"] =
                        json!(raretail::estimators::cond_mc_bias_bound(n, points));
                }
            }
            emit(out, payload)
        }
        Command::Asymptotic { dist, n, gamma, b, regime, inequality, span, out } => {
            let dist = parse_dist(&dist)?;
            let (gamma, b) = resolve_gamma(n, gamma, b)?;
            let ineq = match inequality {
                InequalityArg::Strict => Inequality::Strict,
                InequalityArg::NonStrict => Inequality::NonStrict,
            };
            let light = match regime {
                RegimeArg::Light => true,
                RegimeArg::Heavy => false,
                RegimeArg::Auto => dist.mgf_domain_sup() > 0.0,
            };
            let value = if light {
                let sol = solve_tilt(&dist, b).map_err(|e| e.to_string())?;
                let v = light_asymptotic(&dist, n, b, ineq, span).map_err(|e| e.to_string())?;
                json!({
                    "regime": "light",
                    "value": v,
                    "theta_star": sol.theta_star,
                    "rate": sol.rate,
                    "psi2": sol.psi2,
                    "converged": sol.converged,
                })
            } else {
                let v = heavy_asymptotic(&dist, n, gamma).map_err(|e| e.to_string())?;
                json!({"regime": "heavy", "value": v})
            };
            emit(out, json!({"n": n, "gamma": gamma, "b": b, "asymptotic": value}))
        }
        Command::Thresholds(args) => {
            let cfg = load_and_seed(&args, cli.seed)?;
            expect_kind(&cfg, &["thresholds"])?;
            runner::run_experiment(&cfg, &args.out_dir)
        }
        Command::TruncationStudy(args) => {
            let cfg = load_and_seed(&args, cli.seed)?;
            expect_kind(&cfg, &["truncation_study"])?;
            runner::run_experiment(&cfg, &args.out_dir)
        }
        Command::EmpiricalStudy(args) => {
            let cfg = load_and_seed(&args, cli.seed)?;
            expect_kind(&cfg, &["empirical_study"])?;
            runner::run_experiment(&cfg, &args.out_dir)
        }
        Command::Bootstrap(args) => {
            let cfg = load_and_seed(&args, cli.seed)?;
            expect_kind(&cfg, &["bootstrap_coverage", "gpd_bootstrap_coverage"])?;
            runner::run_experiment(&cfg, &args.out_dir)
        }
        Command::Evt(args) => {
            let cfg = load_and_seed(&args, cli.seed)?;
            expect_kind(&cfg, &["evt_detection"])?;
            runner::run_experiment(&cfg, &args.out_dir)
        }
        Command::Experiment { action } => match action {
            ExperimentAction::Run { config, out_dir } => {
                let args = ConfigArgs { config, out_dir };
                let cfg = load_and_seed(&args, cli.seed)?;
                runner::run_experiment(&cfg, &args.out_dir)
            }
        },
    }
}

fn main() {
    if let Ok(workers) = std::env::var("RARETAIL_WORKERS") {
        match workers.parse::<usize>() {
            Ok(w) if w > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
            }
            _ => {
                eprintln!("{}", json!({"error": format!("invalid RARETAIL_WORKERS: {workers}")}));
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    if let Err(message) = run(cli) {
        eprintln!("{}", json!({ "error": message }));
        std::process::exit(1);
    }
}
