//! Experiment orchestration: seeded target generation, the two comparison
//! sweeps (target count and per-UAV power), metric aggregation, and CSV
//! emission for plotting.
//!
//! Sweep cells are independent and run in parallel; records are assembled in
//! a fixed (method, value, trial) order so concurrency never changes output
//! bytes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

use crate::baselines::{froc_solve, orfc_solve};
use crate::numeric::canonical_sum;
use crate::physics::Position3D;
use crate::scenario::{swarm_link_metrics, Bounds, ConfigError, ScenarioConfig, Violation};
use crate::solver::{djrc_run, IterationTrace, RunResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("target packing infeasible: placed {placed} of {requested} targets at separation {min_separation} m within the draw budget")]
    PackingInfeasible {
        requested: usize,
        placed: usize,
        min_separation: f64,
    },
}

// ---------------------------------------------------------------------------
// Sweep specification
// ---------------------------------------------------------------------------

/// Which scenario dimension a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    TargetCount,
    TotalPower,
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepKind::TargetCount => write!(f, "target_count"),
            SweepKind::TotalPower => write!(f, "total_power"),
        }
    }
}

/// A deployment method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Djrc,
    Froc,
    Orfc,
}

impl Method {
    pub fn all() -> [Method; 3] {
        [Method::Djrc, Method::Froc, Method::Orfc]
    }

    pub fn solve(&self, cfg: &ScenarioConfig) -> Result<RunResult, ConfigError> {
        match self {
            Method::Djrc => djrc_run(cfg),
            Method::Froc => froc_solve(cfg),
            Method::Orfc => orfc_solve(cfg),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Djrc => write!(f, "djrc"),
            Method::Froc => write!(f, "froc"),
            Method::Orfc => write!(f, "orfc"),
        }
    }
}

/// A sweep: which dimension, which values, which methods, how many paired
/// trials per point.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials_per_point: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SweepSpec {
    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        let spec: SweepSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut violations = Vec::new();
        if self.values.is_empty() {
            violations.push(Violation {
                field: "values".into(),
                found: "0 entries".into(),
                expected: "a non-empty, strictly increasing list".into(),
            });
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            violations.push(Violation {
                field: "values".into(),
                found: format!("{:?}", self.values),
                expected: "strictly increasing values".into(),
            });
        }
        if self.kind == SweepKind::TargetCount {
            for v in &self.values {
                if v.fract() != 0.0 || *v < 1.0 {
                    violations.push(Violation {
                        field: "values".into(),
                        found: v.to_string(),
                        expected: "positive integer target counts".into(),
                    });
                }
            }
        }
        if self.methods.is_empty() {
            violations.push(Violation {
                field: "methods".into(),
                found: "0 entries".into(),
                expected: "at least one of djrc/froc/orfc".into(),
            });
        }
        if self.trials_per_point < 1 {
            violations.push(Violation {
                field: "trials_per_point".into(),
                found: self.trials_per_point.to_string(),
                expected: ">= 1".into(),
            });
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(violations))
        }
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// End-of-run aggregates for one (method, sweep value, trial) cell.
#[derive(Debug, Clone, Copy)]
pub struct MetricsRecord {
    pub method: Method,
    pub sweep_kind: SweepKind,
    pub sweep_value: f64,
    pub trial: usize,
    /// Priority-weighted total received radar SNR of the final state (the
    /// problem objective; with uniform weights, the mean per-UAV SNR).
    pub eta_total: f64,
    /// Total uplink rate of the final state, bit/s.
    pub rate_total: f64,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time_s: f64,
}

impl MetricsRecord {
    pub fn from_run(
        run: &RunResult,
        cfg: &ScenarioConfig,
        method: Method,
        sweep_kind: SweepKind,
        sweep_value: f64,
        trial: usize,
        wall_time_s: f64,
    ) -> Self {
        let metrics = swarm_link_metrics(&run.final_state, cfg);
        Self {
            method,
            sweep_kind,
            sweep_value,
            trial,
            eta_total: run.objective,
            rate_total: crate::scenario::rate_total(&metrics),
            converged: run.converged,
            iterations: run.iterations_used,
            wall_time_s,
        }
    }

    fn failed(method: Method, sweep_kind: SweepKind, sweep_value: f64, trial: usize) -> Self {
        Self {
            method,
            sweep_kind,
            sweep_value,
            trial,
            eta_total: 0.0,
            rate_total: 0.0,
            converged: false,
            iterations: 0,
            wall_time_s: 0.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Target generation
// ---------------------------------------------------------------------------

/// Total rejection-sampling draws before a layout is declared unpackable.
const DRAW_BUDGET: usize = 100_000;

/// Uniformly samples `n` ground targets inside the box with pairwise
/// horizontal separation at least `min_separation`, deterministically in
/// `seed`.
pub fn generate_targets(
    n: usize,
    bounds: &Bounds,
    min_separation: f64,
    seed: u64,
) -> Result<Vec<Position3D>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets: Vec<Position3D> = Vec::with_capacity(n);
    let mut draws = 0;
    while targets.len() < n {
        if draws >= DRAW_BUDGET {
            return Err(HarnessError::PackingInfeasible {
                requested: n,
                placed: targets.len(),
                min_separation,
            });
        }
        draws += 1;
        let candidate = Position3D::new(
            rng.gen_range(bounds.x_min..bounds.x_max),
            rng.gen_range(bounds.y_min..bounds.y_max),
            0.0,
        );
        if targets
            .iter()
            .all(|t| t.horizontal_distance_to(&candidate) >= min_separation)
        {
            targets.push(candidate);
        }
    }
    Ok(targets)
}

/// splitmix64-style mixing for layout sub-seeds, so every (value, trial)
/// cell draws an independent deterministic stream.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base ^ a.rotate_left(17) ^ b.rotate_left(41);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

fn derive_config(
    base: &ScenarioConfig,
    spec: &SweepSpec,
    value: f64,
    trial: usize,
) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = base.clone();
    let min_sep = 2.0 * base.safe_distance;
    match spec.kind {
        SweepKind::TargetCount => {
            let n = value as usize;
            let layout_seed = derive_seed(spec.seed, value.to_bits(), trial as u64);
            cfg.targets = generate_targets(n, &base.bounds, min_sep, layout_seed)?;
            cfg.weights = vec![1.0 / n as f64; n];
        }
        SweepKind::TotalPower => {
            // One layout per trial, shared across every power value so the
            // power trend is read off identical geometry.
            let n = base.targets.len();
            let layout_seed = derive_seed(spec.seed, 0, trial as u64);
            cfg.targets = generate_targets(n, &base.bounds, min_sep, layout_seed)?;
            cfg.weights = vec![1.0 / n as f64; n];
            cfg.total_power = value;
        }
    }
    Ok(cfg)
}

/// Runs every (value, trial, method) cell of the sweep and returns records
/// sorted by (method, value, trial). Per-trial layouts are shared across
/// methods (paired comparison); failures are recorded as unconverged cells,
/// never aborting the sweep.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Vec<MetricsRecord> {
    let cells: Vec<(f64, usize)> = spec
        .values
        .iter()
        .flat_map(|&v| (0..spec.trials_per_point).map(move |t| (v, t)))
        .collect();

    let mut records: Vec<MetricsRecord> = cells
        .par_iter()
        .flat_map(|&(value, trial)| {
            let cfg = derive_config(base, spec, value, trial);
            spec.methods
                .iter()
                .map(|&method| match &cfg {
                    Ok(cfg) => {
                        let start = Instant::now();
                        match method.solve(cfg) {
                            Ok(run) => MetricsRecord::from_run(
                                &run,
                                cfg,
                                method,
                                spec.kind,
                                value,
                                trial,
                                start.elapsed().as_secs_f64(),
                            ),
                            Err(_) => MetricsRecord::failed(method, spec.kind, value, trial),
                        }
                    }
                    Err(_) => MetricsRecord::failed(method, spec.kind, value, trial),
                })
                .collect::<Vec<_>>()
        })
        .collect();

    records.sort_by(|a, b| {
        (a.method, a.sweep_value.to_bits(), a.trial).cmp(&(b.method, b.sweep_value.to_bits(), b.trial))
    });
    records
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// Round-trip float rendering: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Metrics CSV: one row per record, fixed column order.
pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(
        "method,sweep_kind,sweep_value,trial,eta_total,rate_total_bps,converged,iterations,wall_time_s\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.sweep_kind,
            fmt_float(r.sweep_value),
            r.trial,
            fmt_float(r.eta_total),
            fmt_float(r.rate_total),
            r.converged,
            r.iterations,
            fmt_float(r.wall_time_s),
        ));
    }
    out
}

/// Trace CSV: one row per UAV per logged iteration.
pub fn trace_csv(trace: &[IterationTrace]) -> String {
    let mut out = String::from(
        "iteration,eta_total,rate_total_bps,fbs_x,fbs_y,fbs_h,uav_index,x,y,h,gamma,action\n",
    );
    for entry in trace {
        for (m, pos) in entry.uav_positions.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                entry.iteration,
                fmt_float(entry.eta_total),
                fmt_float(entry.rate_total),
                fmt_float(entry.fbs.x),
                fmt_float(entry.fbs.y),
                fmt_float(entry.fbs.h),
                m,
                fmt_float(pos.x),
                fmt_float(pos.y),
                fmt_float(pos.h),
                fmt_float(entry.gammas[m]),
                entry.actions[m].kind.label(),
            ));
        }
    }
    out
}

/// Companion summary: per (method, value) mean and min/max over trials.
pub fn summary_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(
        "method,sweep_kind,sweep_value,trials,eta_total_mean,eta_total_min,eta_total_max,rate_total_bps_mean,rate_total_bps_min,rate_total_bps_max,all_converged\n",
    );
    let mut groups: Vec<(Method, SweepKind, u64)> = records
        .iter()
        .map(|r| (r.method, r.sweep_kind, r.sweep_value.to_bits()))
        .collect();
    groups.dedup();
    for (method, kind, value_bits) in groups {
        let value = f64::from_bits(value_bits);
        let cells: Vec<&MetricsRecord> = records
            .iter()
            .filter(|r| r.method == method && r.sweep_value.to_bits() == value_bits)
            .collect();
        let n = cells.len() as f64;
        let eta_mean = canonical_sum(cells.iter().map(|r| r.eta_total)) / n;
        let eta_min = cells.iter().map(|r| r.eta_total).fold(f64::INFINITY, f64::min);
        let eta_max = cells.iter().map(|r| r.eta_total).fold(f64::NEG_INFINITY, f64::max);
        let rate_mean = canonical_sum(cells.iter().map(|r| r.rate_total)) / n;
        let rate_min = cells.iter().map(|r| r.rate_total).fold(f64::INFINITY, f64::min);
        let rate_max = cells.iter().map(|r| r.rate_total).fold(f64::NEG_INFINITY, f64::max);
        let all_converged = cells.iter().all(|r| r.converged);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            method,
            kind,
            fmt_float(value),
            cells.len(),
            fmt_float(eta_mean),
            fmt_float(eta_min),
            fmt_float(eta_max),
            fmt_float(rate_mean),
            fmt_float(rate_min),
            fmt_float(rate_max),
            all_converged,
        ));
    }
    out
}

/// Writes a rendered CSV (or any text) to disk, surfacing the path on
/// failure.
pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
