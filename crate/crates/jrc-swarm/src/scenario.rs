//! Problem instances: configuration ingestion and validation, target
//! assignment, initial swarm construction, and the C1-C8 constraint checker.
//!
//! All types are immutable values after construction; snapshots can be
//! shared across threads freely.

use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::numeric::canonical_sum;
use crate::physics::{
    self, CommParams, InterferenceMode, Position3D, RadarParams,
};

/// Tolerance when judging a constraint that holds with equality at a
/// boundary placement: a few float ulps must not flip pass into fail.
pub const SLACK_EPS: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Config types
// ---------------------------------------------------------------------------

/// Axis-aligned flight box shared by UAVs and the FBS. Altitude must be in
/// (0, h_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub h_max: f64,
}

impl Bounds {
    /// Inclusive box membership, with the strict h > 0 floor for airborne
    /// nodes.
    pub fn contains(&self, p: &Position3D) -> bool {
        p.x >= self.x_min
            && p.x <= self.x_max
            && p.y >= self.y_min
            && p.y <= self.y_max
            && p.h > 0.0
            && p.h <= self.h_max
    }

    pub fn contains_ground(&self, p: &Position3D) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Projects a point into the box (altitude clamped to (0, h_max] via a
    /// tiny positive floor).
    pub fn clamp(&self, p: &Position3D) -> Position3D {
        Position3D {
            x: p.x.clamp(self.x_min, self.x_max),
            y: p.y.clamp(self.y_min, self.y_max),
            h: p.h.clamp(f64::MIN_POSITIVE, self.h_max),
        }
    }

    /// 3D diagonal of the box, used to scale the FBS ascent step.
    pub fn diagonal(&self) -> f64 {
        let dx = self.x_max - self.x_min;
        let dy = self.y_max - self.y_min;
        (dx * dx + dy * dy + self.h_max * self.h_max).sqrt()
    }
}

/// Step sizes and iteration caps for the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoParams {
    /// Power split increment per a1 action.
    pub gamma_step: f64,
    /// Straight-line movement per a2 action, meters.
    pub move_step: f64,
    /// FBS ascent step scale: first step length = learning_rate * box diagonal.
    pub learning_rate: f64,
    /// FBS termination: relative gradient-norm tolerance (scaled by |f|).
    pub grad_tolerance: f64,
    /// Central-difference probe half-width, meters.
    pub fd_step: f64,
    /// Outer iteration cap.
    pub max_outer_iters: usize,
    /// FBS ascent iteration cap per outer iteration.
    pub max_fbs_iters: usize,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            gamma_step: 0.01,
            move_step: 2.0,
            learning_rate: 1e-3,
            grad_tolerance: 1e-3,
            fd_step: 0.5,
            max_outer_iters: 500,
            max_fbs_iters: 100,
        }
    }
}

/// Immutable full problem description. Constructed by [`validate_config`]
/// (or the `from_*` helpers), never directly from a file: the dB-valued
/// noise figure has already been converted to linear and defaults filled.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Ground targets (h = 0), one UAV per target.
    pub targets: Vec<Position3D>,
    pub bounds: Bounds,
    /// Total transmit power per UAV, W.
    pub total_power: f64,
    /// Safe inter-UAV distance, meters. Also the initial hover altitude.
    pub safe_distance: f64,
    /// Minimum FBS clearance above the highest UAV, meters.
    pub fbs_clearance: f64,
    /// Per-UAV priority weights, summing to 1.
    pub weights: Vec<f64>,
    pub radar: RadarParams,
    pub comm: CommParams,
    pub algo: AlgoParams,
    pub seed: u64,
    pub interference: InterferenceMode,
    /// Fixed power split used by both baseline strategies.
    pub baseline_gamma: f64,
}

impl ScenarioConfig {
    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        let raw: RawScenarioConfig = serde_json::from_str(s)?;
        validate_config(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Comm transmit power of a UAV with power split `gamma`, W.
    pub fn comm_power(&self, gamma: f64) -> f64 {
        gamma * self.total_power
    }

    /// Radar transmit power of a UAV with power split `gamma`, W.
    pub fn radar_power(&self, gamma: f64) -> f64 {
        (1.0 - gamma) * self.total_power
    }
}

// ---------------------------------------------------------------------------
// File schema (strict: unknown keys are rejected)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPosition {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub h: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub h_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRadarParams {
    #[serde(rename = "tx_gain_gT")]
    pub tx_gain: f64,
    #[serde(rename = "rx_gain_gR")]
    pub rx_gain: f64,
    #[serde(rename = "carrier_freq_fc")]
    pub carrier_freq: f64,
    #[serde(rename = "rcs_sigma")]
    pub rcs: f64,
    #[serde(rename = "radar_bandwidth_Br")]
    pub bandwidth: f64,
    #[serde(rename = "boltzmann_k", default = "default_boltzmann")]
    pub boltzmann: f64,
    #[serde(rename = "noise_temp_T0")]
    pub noise_temp: f64,
    /// The one dB-valued field in the schema; converted to linear at load.
    #[serde(rename = "noise_figure_F")]
    pub noise_figure_db: f64,
    #[serde(rename = "probing_loss_l")]
    pub probing_loss: f64,
    #[serde(rename = "snr_min_eta", default = "default_snr_min")]
    pub snr_min: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCommParams {
    #[serde(rename = "carrier_freq_fc")]
    pub carrier_freq: f64,
    #[serde(rename = "light_speed_C", default = "default_light_speed")]
    pub light_speed: f64,
    #[serde(rename = "comm_bandwidth_Bc")]
    pub bandwidth: f64,
    #[serde(rename = "los_prob_xi")]
    pub los_prob: f64,
    #[serde(rename = "nlos_prob_xi")]
    pub nlos_prob: f64,
    #[serde(rename = "los_atten_mu")]
    pub los_atten: f64,
    #[serde(rename = "nlos_atten_mu")]
    pub nlos_atten: f64,
    #[serde(rename = "noise_density_delta0")]
    pub noise_density: f64,
    #[serde(rename = "rate_min_Rmin")]
    pub rate_min: f64,
    #[serde(rename = "fbs_rx_gain_ghR")]
    pub fbs_rx_gain: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawAlgoParams {
    pub delta_gamma: f64,
    pub delta_r: f64,
    pub learning_rate_alpha: f64,
    pub grad_tolerance_eps: f64,
    pub fd_step: f64,
    #[serde(rename = "max_outer_iters_Tm")]
    pub max_outer_iters: usize,
    #[serde(rename = "max_fbs_iters_TF")]
    pub max_fbs_iters: usize,
}

impl Default for RawAlgoParams {
    fn default() -> Self {
        let d = AlgoParams::default();
        Self {
            delta_gamma: d.gamma_step,
            delta_r: d.move_step,
            learning_rate_alpha: d.learning_rate,
            grad_tolerance_eps: d.grad_tolerance,
            fd_step: d.fd_step,
            max_outer_iters: d.max_outer_iters,
            max_fbs_iters: d.max_fbs_iters,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenarioConfig {
    pub targets: Vec<RawPosition>,
    pub bounds: RawBounds,
    pub total_power_pt: f64,
    pub safe_distance_dg: f64,
    #[serde(default = "default_fbs_clearance")]
    pub fbs_clearance_dh: f64,
    #[serde(default)]
    pub weights_w: Option<Vec<f64>>,
    pub radar: RawRadarParams,
    pub comm: RawCommParams,
    #[serde(default)]
    pub algo: RawAlgoParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub interference: InterferenceMode,
    #[serde(default = "default_baseline_gamma")]
    pub baseline_gamma: f64,
}

fn default_boltzmann() -> f64 {
    1.38e-23
}
fn default_snr_min() -> f64 {
    10.0
}
fn default_light_speed() -> f64 {
    3.0e8
}
fn default_fbs_clearance() -> f64 {
    10.0
}
fn default_baseline_gamma() -> f64 {
    0.5
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// One rejected invariant: the offending field, what was found, and what was
/// expected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub found: String,
    pub expected: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: found {}, expected {}", self.field, self.found, self.expected)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration ({} violation{}):{}", .0.len(),
            if .0.len() == 1 { "" } else { "s" },
            .0.iter().map(|v| format!("\n  - {v}")).collect::<String>())]
    Invalid(Vec<Violation>),
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn new() -> Self {
        Self { violations: Vec::new() }
    }

    fn require(&mut self, ok: bool, field: &str, found: impl fmt::Display, expected: &str) {
        if !ok {
            self.violations.push(Violation {
                field: field.to_string(),
                found: found.to_string(),
                expected: expected.to_string(),
            });
        }
    }
}

/// Checks every invariant of the raw config and returns the normalized
/// [`ScenarioConfig`] (noise figure converted dB to linear, weights
/// defaulted to uniform), or the complete list of violations.
pub fn validate_config(raw: RawScenarioConfig) -> Result<ScenarioConfig, ConfigError> {
    let mut c = Checker::new();
    let b = &raw.bounds;

    c.require(b.x_min < b.x_max, "bounds.x_min/x_max",
        format!("[{}, {}]", b.x_min, b.x_max), "x_min < x_max (degenerate flight box)");
    c.require(b.y_min < b.y_max, "bounds.y_min/y_max",
        format!("[{}, {}]", b.y_min, b.y_max), "y_min < y_max (degenerate flight box)");
    c.require(b.h_max > 0.0, "bounds.h_max", b.h_max, "> 0");

    c.require(!raw.targets.is_empty(), "targets", "0 entries", ">= 1 target");
    for (i, t) in raw.targets.iter().enumerate() {
        let field = format!("targets[{i}]");
        let finite = t.x.is_finite() && t.y.is_finite() && t.h.is_finite();
        c.require(finite, &field, format!("({}, {}, {})", t.x, t.y, t.h), "finite coordinates");
        if finite {
            c.require(t.h == 0.0, &format!("{field}.h"), t.h, "0 (targets are on the ground)");
            c.require(
                t.x >= b.x_min && t.x <= b.x_max && t.y >= b.y_min && t.y <= b.y_max,
                &field,
                format!("({}, {})", t.x, t.y),
                "inside the flight box",
            );
        }
    }

    let weights = match &raw.weights_w {
        Some(w) => {
            c.require(
                w.len() == raw.targets.len(),
                "weights_w",
                format!("{} entries", w.len()),
                &format!("{} entries (one per target)", raw.targets.len()),
            );
            for (i, wi) in w.iter().enumerate() {
                c.require(*wi >= 0.0 && wi.is_finite(), &format!("weights_w[{i}]"), wi, ">= 0");
            }
            let sum: f64 = canonical_sum(w.iter().copied());
            c.require(
                (sum - 1.0).abs() <= 1e-9,
                "weights_w",
                format!("sum {sum}"),
                "sum 1 within 1e-9",
            );
            w.clone()
        }
        None => vec![1.0 / raw.targets.len().max(1) as f64; raw.targets.len()],
    };

    c.require(raw.total_power_pt > 0.0, "total_power_pt", raw.total_power_pt, "> 0 W");
    c.require(raw.safe_distance_dg > 0.0, "safe_distance_dg", raw.safe_distance_dg, "> 0 m");
    c.require(raw.fbs_clearance_dh > 0.0, "fbs_clearance_dh", raw.fbs_clearance_dh, "> 0 m");

    let r = &raw.radar;
    for (name, v) in [
        ("radar.tx_gain_gT", r.tx_gain),
        ("radar.rx_gain_gR", r.rx_gain),
        ("radar.carrier_freq_fc", r.carrier_freq),
        ("radar.rcs_sigma", r.rcs),
        ("radar.radar_bandwidth_Br", r.bandwidth),
        ("radar.boltzmann_k", r.boltzmann),
        ("radar.noise_temp_T0", r.noise_temp),
        ("radar.probing_loss_l", r.probing_loss),
        ("radar.snr_min_eta", r.snr_min),
    ] {
        c.require(v > 0.0 && v.is_finite(), name, v, "> 0");
    }
    c.require(r.noise_figure_db.is_finite(), "radar.noise_figure_F", r.noise_figure_db, "finite dB value");
    c.require(
        r.bandwidth < r.carrier_freq,
        "radar.radar_bandwidth_Br",
        r.bandwidth,
        "below the carrier frequency",
    );

    let m = &raw.comm;
    for (name, v) in [
        ("comm.carrier_freq_fc", m.carrier_freq),
        ("comm.light_speed_C", m.light_speed),
        ("comm.comm_bandwidth_Bc", m.bandwidth),
        ("comm.los_atten_mu", m.los_atten),
        ("comm.nlos_atten_mu", m.nlos_atten),
        ("comm.noise_density_delta0", m.noise_density),
        ("comm.fbs_rx_gain_ghR", m.fbs_rx_gain),
    ] {
        c.require(v > 0.0 && v.is_finite(), name, v, "> 0");
    }
    for (name, v) in [("comm.los_prob_xi", m.los_prob), ("comm.nlos_prob_xi", m.nlos_prob)] {
        c.require((0.0..=1.0).contains(&v), name, v, "in [0, 1]");
    }
    c.require(
        m.los_prob * m.los_atten + m.nlos_prob * m.nlos_atten > 0.0,
        "comm.los_prob_xi/nlos_prob_xi",
        "zero attenuation mix",
        "xi_LoS*mu_LoS + xi_NLoS*mu_NLoS > 0",
    );
    // rate_min 0 is legal: it makes the rate constraint vacuous.
    c.require(m.rate_min >= 0.0 && m.rate_min.is_finite(), "comm.rate_min_Rmin", m.rate_min, ">= 0 bit/s");

    let a = &raw.algo;
    for (name, v) in [
        ("algo.delta_gamma", a.delta_gamma),
        ("algo.delta_r", a.delta_r),
        ("algo.learning_rate_alpha", a.learning_rate_alpha),
        ("algo.grad_tolerance_eps", a.grad_tolerance_eps),
        ("algo.fd_step", a.fd_step),
    ] {
        c.require(v > 0.0 && v.is_finite(), name, v, "> 0");
    }
    c.require(a.delta_gamma <= 1.0, "algo.delta_gamma", a.delta_gamma, "<= 1");
    c.require(a.max_outer_iters >= 1, "algo.max_outer_iters_Tm", a.max_outer_iters, ">= 1");
    c.require(a.max_fbs_iters >= 1, "algo.max_fbs_iters_TF", a.max_fbs_iters, ">= 1");

    c.require(
        raw.baseline_gamma > 0.0 && raw.baseline_gamma < 1.0,
        "baseline_gamma",
        raw.baseline_gamma,
        "in (0, 1) so both baseline link budgets stay powered",
    );

    if !c.violations.is_empty() {
        return Err(ConfigError::Invalid(c.violations));
    }

    Ok(ScenarioConfig {
        targets: raw
            .targets
            .iter()
            .map(|t| Position3D::new(t.x, t.y, t.h))
            .collect(),
        bounds: Bounds {
            x_min: b.x_min,
            x_max: b.x_max,
            y_min: b.y_min,
            y_max: b.y_max,
            h_max: b.h_max,
        },
        total_power: raw.total_power_pt,
        safe_distance: raw.safe_distance_dg,
        fbs_clearance: raw.fbs_clearance_dh,
        weights,
        radar: RadarParams {
            tx_gain: r.tx_gain,
            rx_gain: r.rx_gain,
            carrier_freq_hz: r.carrier_freq,
            rcs_m2: r.rcs,
            bandwidth_hz: r.bandwidth,
            boltzmann: r.boltzmann,
            noise_temp_k: r.noise_temp,
            noise_figure: 10f64.powf(r.noise_figure_db / 10.0),
            probing_loss: r.probing_loss,
            snr_min: r.snr_min,
        },
        comm: CommParams {
            carrier_freq_hz: m.carrier_freq,
            light_speed: m.light_speed,
            bandwidth_hz: m.bandwidth,
            los_prob: m.los_prob,
            nlos_prob: m.nlos_prob,
            los_atten: m.los_atten,
            nlos_atten: m.nlos_atten,
            noise_density: m.noise_density,
            rate_min: m.rate_min,
            fbs_rx_gain: m.fbs_rx_gain,
        },
        algo: AlgoParams {
            gamma_step: a.delta_gamma,
            move_step: a.delta_r,
            learning_rate: a.learning_rate_alpha,
            grad_tolerance: a.grad_tolerance_eps,
            fd_step: a.fd_step,
            max_outer_iters: a.max_outer_iters,
            max_fbs_iters: a.max_fbs_iters,
        },
        seed: raw.seed,
        interference: raw.interference,
        baseline_gamma: raw.baseline_gamma,
    })
}

// ---------------------------------------------------------------------------
// Swarm state
// ---------------------------------------------------------------------------

/// One UAV: 3D position, power split, and assigned target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub pos: Position3D,
    /// Fraction of total power given to communication, in [0, 1].
    pub gamma: f64,
    pub target_index: usize,
}

/// All UAV states plus the FBS position at one iteration. The unit of
/// snapshot-based updates: solvers read one immutable `SwarmState` per round
/// and commit a new one.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub uavs: Vec<UavState>,
    pub fbs: Position3D,
    pub iteration: usize,
}

impl SwarmState {
    pub fn uav_count(&self) -> usize {
        self.uavs.len()
    }

    pub fn max_uav_altitude(&self) -> f64 {
        self.uavs.iter().map(|u| u.pos.h).fold(0.0, f64::max)
    }
}

/// Pre-defined one-to-one UAV/target pairing: UAV m detects target m.
pub fn assign_targets(cfg: &ScenarioConfig) -> Vec<(usize, usize)> {
    (0..cfg.targets.len()).map(|m| (m, m)).collect()
}

/// Starting state: each UAV hovers directly above its target at the safe
/// distance with all power on radar; the FBS sits over the target centroid,
/// one clearance above the highest UAV, clamped into the flight box.
pub fn initial_swarm(cfg: &ScenarioConfig) -> Result<SwarmState, ConfigError> {
    if cfg.safe_distance > cfg.bounds.h_max {
        return Err(ConfigError::Infeasible(format!(
            "initial UAV altitude d_g = {} m exceeds h_max = {} m",
            cfg.safe_distance, cfg.bounds.h_max
        )));
    }
    let uavs: Vec<UavState> = assign_targets(cfg)
        .into_iter()
        .map(|(_m, n)| UavState {
            pos: Position3D::new(cfg.targets[n].x, cfg.targets[n].y, cfg.safe_distance),
            gamma: 0.0,
            target_index: n,
        })
        .collect();

    let count = cfg.targets.len() as f64;
    let cx = canonical_sum(cfg.targets.iter().map(|t| t.x)) / count;
    let cy = canonical_sum(cfg.targets.iter().map(|t| t.y)) / count;
    let max_h = uavs.iter().map(|u| u.pos.h).fold(0.0, f64::max);
    let fbs_h = (max_h + cfg.fbs_clearance).min(cfg.bounds.h_max);
    if fbs_h <= max_h {
        return Err(ConfigError::Infeasible(format!(
            "no altitude above the UAVs is available for the FBS (max UAV altitude {} m, h_max {} m)",
            max_h, cfg.bounds.h_max
        )));
    }
    let fbs = cfg.bounds.clamp(&Position3D::new(cx, cy, fbs_h));

    Ok(SwarmState { uavs, fbs, iteration: 0 })
}

// ---------------------------------------------------------------------------
// Link metrics
// ---------------------------------------------------------------------------

/// Everything the link budget says about one UAV in a given state.
#[derive(Debug, Clone, Copy)]
pub struct LinkMetrics {
    pub dist_to_target: f64,
    pub dist_to_fbs: f64,
    pub radar_power: f64,
    pub comm_power: f64,
    pub channel_gain: f64,
    pub radar_snr: f64,
    /// Radar range at the current radar power; 0 when all power is on comm.
    pub radar_range: f64,
    pub sinr: f64,
    pub rate: f64,
}

/// Evaluates the full link budget for every UAV in `state`. Total: a UAV
/// sitting exactly on the FBS gets infinite gain rather than an error (the
/// solver's feasibility filter keeps that from ever occurring).
pub fn swarm_link_metrics(state: &SwarmState, cfg: &ScenarioConfig) -> Vec<LinkMetrics> {
    let comm_powers: Vec<f64> = state.uavs.iter().map(|u| cfg.comm_power(u.gamma)).collect();
    let gains: Vec<f64> = state
        .uavs
        .iter()
        .map(|u| {
            physics::channel_gain(u.pos.distance_to(&state.fbs), &cfg.comm)
                .unwrap_or(f64::INFINITY)
        })
        .collect();

    state
        .uavs
        .iter()
        .enumerate()
        .map(|(m, u)| {
            let target = &cfg.targets[u.target_index];
            let dist_to_target = u.pos.distance_to(target);
            let radar_power = cfg.radar_power(u.gamma);
            let snr = physics::radar_snr(radar_power, dist_to_target, &cfg.radar)
                .unwrap_or(f64::INFINITY);
            let range = physics::radar_range(radar_power, &cfg.radar).unwrap_or(0.0);
            let sinr = physics::sinr(
                m,
                &comm_powers,
                &gains,
                &cfg.comm,
                cfg.radar.tx_gain,
                cfg.interference,
            );
            LinkMetrics {
                dist_to_target,
                dist_to_fbs: u.pos.distance_to(&state.fbs),
                radar_power,
                comm_power: comm_powers[m],
                channel_gain: gains[m],
                radar_snr: snr,
                radar_range: range,
                sinr,
                rate: physics::data_rate(sinr, &cfg.comm),
            }
        })
        .collect()
}

/// Unweighted total received radar SNR.
pub fn eta_total(metrics: &[LinkMetrics]) -> f64 {
    canonical_sum(metrics.iter().map(|m| m.radar_snr))
}

/// Total uplink rate, bit/s.
pub fn rate_total(metrics: &[LinkMetrics]) -> f64 {
    canonical_sum(metrics.iter().map(|m| m.rate))
}

/// The problem objective: priority-weighted radar SNR.
pub fn weighted_eta(metrics: &[LinkMetrics], weights: &[f64]) -> f64 {
    canonical_sum(metrics.iter().zip(weights).map(|(m, w)| w * m.radar_snr))
}

// ---------------------------------------------------------------------------
// Constraint checker
// ---------------------------------------------------------------------------

/// The eight constraint families of the deployment problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintId {
    /// Target within radar range: d_mn <= R_mn.
    C1,
    /// Uplink rate floor: r_m >= R_min.
    C2,
    /// Inter-UAV separation: d_mm' >= d_g.
    C3,
    /// x within the flight box (UAVs and FBS).
    C4,
    /// y within the flight box (UAVs and FBS).
    C5,
    /// Altitude in (0, h_max] (UAVs and FBS).
    C6,
    /// FBS strictly above every UAV.
    C7,
    /// Power split within [0, 1].
    C8,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Which node a constraint entry refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Uav(usize),
    Fbs,
}

/// One evaluated constraint: pass/fail plus the measured slack in the
/// constraint's native unit (meters, bit/s, or dimensionless). Slack is
/// positive when satisfied with margin.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintEntry {
    pub id: ConstraintId,
    pub node: Node,
    pub pass: bool,
    pub slack: f64,
}

/// Full evaluation of a state against C1-C8. Reporting only: nothing is
/// enforced here.
#[derive(Debug, Clone)]
pub struct ConstraintReport {
    pub entries: Vec<ConstraintEntry>,
    pub all_satisfied: bool,
}

impl ConstraintReport {
    pub fn entry(&self, id: ConstraintId, node: Node) -> Option<&ConstraintEntry> {
        self.entries.iter().find(|e| e.id == id && e.node == node)
    }

    pub fn passes(&self, id: ConstraintId) -> bool {
        self.entries.iter().filter(|e| e.id == id).all(|e| e.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ConstraintEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

/// Evaluates every constraint of the deployment problem on `state`.
pub fn check_constraints(state: &SwarmState, cfg: &ScenarioConfig) -> ConstraintReport {
    let metrics = swarm_link_metrics(state, cfg);
    let mut entries = Vec::new();
    let b = &cfg.bounds;

    for (m, (u, lm)) in state.uavs.iter().zip(&metrics).enumerate() {
        let node = Node::Uav(m);

        // C1: within radar range.
        let slack = lm.radar_range - lm.dist_to_target;
        entries.push(ConstraintEntry { id: ConstraintId::C1, node, pass: slack >= -SLACK_EPS, slack });

        // C2: rate floor.
        let slack = lm.rate - cfg.comm.rate_min;
        entries.push(ConstraintEntry { id: ConstraintId::C2, node, pass: slack >= -SLACK_EPS, slack });

        // C3: separation from every other UAV (vacuous for a single UAV).
        let slack = state
            .uavs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != m)
            .map(|(_, v)| u.pos.distance_to(&v.pos) - cfg.safe_distance)
            .fold(f64::INFINITY, f64::min);
        entries.push(ConstraintEntry { id: ConstraintId::C3, node, pass: slack >= -SLACK_EPS, slack });

        // C4/C5: horizontal box.
        let slack = (u.pos.x - b.x_min).min(b.x_max - u.pos.x);
        entries.push(ConstraintEntry { id: ConstraintId::C4, node, pass: slack >= -SLACK_EPS, slack });
        let slack = (u.pos.y - b.y_min).min(b.y_max - u.pos.y);
        entries.push(ConstraintEntry { id: ConstraintId::C5, node, pass: slack >= -SLACK_EPS, slack });

        // C6: altitude in (0, h_max]. The floor is strict.
        let slack = u.pos.h.min(b.h_max - u.pos.h);
        entries.push(ConstraintEntry {
            id: ConstraintId::C6,
            node,
            pass: u.pos.h > 0.0 && b.h_max - u.pos.h >= -SLACK_EPS,
            slack,
        });

        // C8: power split in [0, 1].
        let slack = u.gamma.min(1.0 - u.gamma);
        entries.push(ConstraintEntry {
            id: ConstraintId::C8,
            node,
            pass: (0.0..=1.0).contains(&u.gamma),
            slack,
        });
    }

    // FBS box membership and altitude ordering.
    let f = &state.fbs;
    let slack = (f.x - b.x_min).min(b.x_max - f.x);
    entries.push(ConstraintEntry { id: ConstraintId::C4, node: Node::Fbs, pass: slack >= -SLACK_EPS, slack });
    let slack = (f.y - b.y_min).min(b.y_max - f.y);
    entries.push(ConstraintEntry { id: ConstraintId::C5, node: Node::Fbs, pass: slack >= -SLACK_EPS, slack });
    let slack = f.h.min(b.h_max - f.h);
    entries.push(ConstraintEntry {
        id: ConstraintId::C6,
        node: Node::Fbs,
        pass: f.h > 0.0 && b.h_max - f.h >= -SLACK_EPS,
        slack,
    });
    let slack = f.h - state.max_uav_altitude();
    entries.push(ConstraintEntry { id: ConstraintId::C7, node: Node::Fbs, pass: slack > 0.0, slack });

    let all_satisfied = entries.iter().all(|e| e.pass);
    ConstraintReport { entries, all_satisfied }
}
