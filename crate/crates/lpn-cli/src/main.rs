//! `lpn`: simulate noisy parity oracles, run solvers, and reproduce the
//! benchmark figures.

use anyhow::Context;
use clap::{Parser, Subcommand};
use lpn_core::bounds::{no_postselect_bound, postselected_bound, typicality_probability, BoundParams};
use lpn_core::harness::{self, ConfigError, ExperimentConfig, Figure, HarnessError};
use lpn_core::rng::SeedStream;
use lpn_core::solvers::{
    solve_c_bayes, solve_c_digital, solve_q_analog, solve_q_digital, solve_qprime_analog,
    KeyEstimate, QueryBatch, SolverId,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lpn", version, about = "Noisy parity-oracle simulator and solver benchmark")]
struct Cli {
    /// Worker threads for resampling (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate query pools and calibrations without solving.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one full batch per requested solver and print the estimates.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Use only the first N records of the pool.
        #[arg(long)]
        n_queries: Option<usize>,
    },
    /// Error curves for a single-point config.
    Curve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep campaign (config must contain a sweep block).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the analytic query-count bounds.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eta_a: f64,
        #[arg(long)]
        eta_d: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0.05)]
        delta_prime: f64,
        #[arg(long, default_value_t = 0.05)]
        delta_dprime: f64,
        /// Also report the typicality probability at this postselected count.
        #[arg(long)]
        n_prime: Option<u64>,
    },
    /// Reproduce a canned figure campaign (fig2, fig3 or fig4).
    Repro {
        figure: Figure,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| anyhow::Error::new(ConfigSyntax(e.to_string())))?;
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    Ok(config)
}

/// A config that failed to parse; treated like any other validation failure.
#[derive(Debug)]
struct ConfigSyntax(String);

impl std::fmt::Display for ConfigSyntax {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config parse error: {}", self.0)
    }
}

impl std::error::Error for ConfigSyntax {}

fn is_config_error(err: &anyhow::Error) -> bool {
    err.downcast_ref::<ConfigSyntax>().is_some()
        || err.downcast_ref::<ConfigError>().is_some()
        || matches!(err.downcast_ref::<HarnessError>(), Some(HarnessError::Config(_)))
}

fn print_estimate(solver: SolverId, est: &KeyEstimate, true_key: &str) {
    println!(
        "{}",
        serde_json::json!({
            "solver": solver.as_str(),
            "estimate": est.key.to_string(),
            "score": est.score,
            "tie_broken": est.tie_broken,
            "true_key": true_key,
        })
    );
}

fn run_solve(config: &ExperimentConfig, n_queries: Option<usize>) -> anyhow::Result<()> {
    let tmp = tempdir_in_out()?;
    let output = harness::run_simulate(config, tmp.path())?;
    let resolved = &output.resolved;
    let key = &resolved.keys[0];
    let n = config.n;
    let take = n_queries.unwrap_or(config.pool_size).min(config.pool_size);
    // reread the first pool of each mode from the records file
    let text = std::fs::read_to_string(tmp.path().join("records.ndjson"))?;
    for &mode in &resolved.modes {
        let mut records = Vec::with_capacity(take);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line)?;
            let is_unit = v["point"] == 0
                && v["key"] == key.to_string().as_str()
                && v["mode"] == format!("{mode:?}").as_str();
            if is_unit {
                records.push(lpn_core::readout::QueryRecord {
                    v_a: v["v_a"].as_f64().unwrap(),
                    v_d: v["v_d"]
                        .as_array()
                        .unwrap()
                        .iter()
                        .map(|x| x.as_f64().unwrap())
                        .collect(),
                });
                if records.len() == take {
                    break;
                }
            }
        }
        let calibration = output
            .calibrations
            .iter()
            .find(|c| c.point == 0 && &c.key == key && c.mode == mode)
            .expect("calibration for first unit")
            .calibration
            .clone();
        let batch = QueryBatch {
            n,
            records,
            calibration,
        };
        let mut rng = SeedStream::new(config.master_seed).child(99).rng();
        let eta_a = resolved.points[0].model.eta_a;
        for &solver in &config.solvers {
            if solver.mode() != mode {
                continue;
            }
            let est = match solver {
                SolverId::CDigital => solve_c_digital(&batch, &mut rng)?,
                SolverId::CBayes => solve_c_bayes(&batch, &mut rng)?,
                SolverId::QDigital => solve_q_digital(&batch, &mut rng)?,
                SolverId::QAnalog => solve_q_analog(&batch, eta_a, &mut rng)?,
                SolverId::QPrimeAnalog => solve_qprime_analog(&batch, &mut rng)?,
            };
            print_estimate(solver, &est, &key.to_string());
        }
    }
    Ok(())
}

fn tempdir_in_out() -> anyhow::Result<tempfile_shim::TempDir> {
    tempfile_shim::TempDir::new()
}

/// Minimal scoped temp directory (avoids a dependency in the binary).
mod tempfile_shim {
    use std::path::{Path, PathBuf};

    pub struct TempDir(PathBuf);

    impl TempDir {
        pub fn new() -> anyhow::Result<Self> {
            let base = std::env::temp_dir().join(format!(
                "lpn-solve-{}-{:x}",
                std::process::id(),
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .unwrap()
                    .as_nanos()
            ));
            std::fs::create_dir_all(&base)?;
            Ok(TempDir(base))
        }

        pub fn path(&self) -> &Path {
            &self.0
        }
    }

    impl Drop for TempDir {
        fn drop(&mut self) {
            let _ = std::fs::remove_dir_all(&self.0);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.cmd {
        Cmd::Simulate { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            harness::run_simulate(&cfg, &out)?;
            Ok(())
        }
        Cmd::Solve {
            config,
            seed,
            n_queries,
        } => {
            let cfg = load_config(&config, seed)?;
            run_solve(&cfg, n_queries)
        }
        Cmd::Curve { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            if cfg.sweep.is_some() {
                anyhow::bail!(ConfigSyntax(
                    "curve expects a single-point config; use `sweep` for sweep configs".into()
                ));
            }
            harness::run_campaign(&cfg, &out)?;
            Ok(())
        }
        Cmd::Sweep { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            if cfg.sweep.is_none() {
                anyhow::bail!(ConfigSyntax("sweep config lacks a sweep block".into()));
            }
            harness::run_campaign(&cfg, &out)?;
            Ok(())
        }
        Cmd::Bounds {
            n,
            eta_a,
            eta_d,
            sigma,
            delta,
            delta_prime,
            delta_dprime,
            n_prime,
        } => {
            let params = BoundParams {
                n,
                eta_a,
                eta_d,
                sigma,
                delta,
                delta_prime,
                delta_dprime,
            };
            let post = postselected_bound(&params)?;
            let nopost = no_postselect_bound(&params)?;
            let mut out = serde_json::json!({
                "params": params,
                "postselected_bound": post,
                "no_postselect_bound": nopost,
            });
            if let Some(np) = n_prime {
                let (p, clamped) = typicality_probability(params.eta_bar_a(), np, delta_prime);
                out["typicality_probability"] = serde_json::json!(p);
                out["typicality_clamped"] = serde_json::json!(clamped);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(())
        }
        Cmd::Repro { figure, seed, out } => {
            harness::run_figure(figure, seed, &out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_config_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
