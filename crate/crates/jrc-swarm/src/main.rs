//! Command-line front end: validate configs, run a single deployment, or
//! execute a comparison sweep.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use jrc_swarm::harness::{
    self, metrics_csv, run_sweep, summary_csv, trace_csv, Method, MetricsRecord, SweepKind,
    SweepSpec,
};
use jrc_swarm::physics::InterferenceMode;
use jrc_swarm::scenario::{ConfigError, ScenarioConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Djrc,
    Froc,
    Orfc,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Djrc => Method::Djrc,
            MethodArg::Froc => Method::Froc,
            MethodArg::Orfc => Method::Orfc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InterferenceArg {
    Full,
    None,
}

impl From<InterferenceArg> for InterferenceMode {
    fn from(i: InterferenceArg) -> Self {
        match i {
            InterferenceArg::Full => InterferenceMode::Full,
            InterferenceArg::None => InterferenceMode::None,
        }
    }
}

#[derive(Parser)]
#[command(name = "jrc-swarm", version, about = "JRC UAV swarm deployment simulator")]
struct Cli {
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Deployment method (run: method to execute; sweep: restrict to one).
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
    /// Overrides the config interference mode.
    #[arg(long, global = true, value_enum)]
    interference: Option<InterferenceArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one deployment and emit its trace and metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Per-iteration trace CSV output path.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Single-record metrics CSV output path.
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Run a comparison sweep and emit metrics (and optionally a summary).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep specification (JSON).
        #[arg(long)]
        sweep: PathBuf,
        /// Metrics CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Per-point mean/min/max summary CSV output path.
        #[arg(long)]
        summary_out: Option<PathBuf>,
        /// Emit measured wall times instead of zeros. Off by default so that
        /// identical inputs produce byte-identical CSVs.
        #[arg(long)]
        timings: bool,
    },
    /// Check a config file and list every violation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(
    path: &PathBuf,
    seed: Option<u64>,
    interference: Option<InterferenceArg>,
) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::from_path(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(mode) = interference {
        cfg.interference = mode.into();
    }
    Ok(cfg)
}

fn config_failure(err: &ConfigError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(1)
}

fn runtime_failure(err: &dyn std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, trace_out, metrics_out } => {
            let cfg = match load_config(&config, cli.seed, cli.interference) {
                Ok(cfg) => cfg,
                Err(err) => return config_failure(&err),
            };
            let method: Method = cli.method.map(Into::into).unwrap_or(Method::Djrc);
            let start = std::time::Instant::now();
            let run = match method.solve(&cfg) {
                Ok(run) => run,
                Err(err) => return config_failure(&err),
            };
            let wall = start.elapsed().as_secs_f64();

            println!(
                "{method}: converged={} iterations={} eta_total={:.6e} rate_total={:.6e} bit/s",
                run.converged,
                run.iterations_used,
                run.objective,
                run.trace.last().map_or(0.0, |t| t.rate_total),
            );
            if let Some(path) = trace_out {
                if let Err(err) = harness::write_file(&path, &trace_csv(&run.trace)) {
                    return runtime_failure(&err);
                }
            }
            if let Some(path) = metrics_out {
                let record = MetricsRecord::from_run(
                    &run,
                    &cfg,
                    method,
                    SweepKind::TargetCount,
                    cfg.targets.len() as f64,
                    0,
                    wall,
                );
                if let Err(err) = harness::write_file(&path, &metrics_csv(&[record])) {
                    return runtime_failure(&err);
                }
            }
            ExitCode::SUCCESS
        }
        Command::Sweep { config, sweep, out, summary_out, timings } => {
            let cfg = match load_config(&config, cli.seed, cli.interference) {
                Ok(cfg) => cfg,
                Err(err) => return config_failure(&err),
            };
            let mut spec = match SweepSpec::from_path(&sweep) {
                Ok(spec) => spec,
                Err(err) => return config_failure(&err),
            };
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            if let Some(method) = cli.method {
                spec.methods = vec![method.into()];
            }
            let mut records = run_sweep(&cfg, &spec);
            if !timings {
                for r in &mut records {
                    r.wall_time_s = 0.0;
                }
            }
            if let Err(err) = harness::write_file(&out, &metrics_csv(&records)) {
                return runtime_failure(&err);
            }
            if let Some(path) = summary_out {
                if let Err(err) = harness::write_file(&path, &summary_csv(&records)) {
                    return runtime_failure(&err);
                }
            }
            println!("{} records written to {}", records.len(), out.display());
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load_config(&config, cli.seed, cli.interference) {
            Ok(cfg) => {
                println!(
                    "configuration valid: {} targets, box [{}, {}] x [{}, {}] x (0, {}] m, p_t = {} W",
                    cfg.targets.len(),
                    cfg.bounds.x_min,
                    cfg.bounds.x_max,
                    cfg.bounds.y_min,
                    cfg.bounds.y_max,
                    cfg.bounds.h_max,
                    cfg.total_power,
                );
                ExitCode::SUCCESS
            }
            Err(err) => config_failure(&err),
        },
    }
}
