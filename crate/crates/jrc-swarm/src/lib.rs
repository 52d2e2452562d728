//! Joint radar-communication (JRC) UAV swarm deployment library.
//!
//! A two-tier swarm of dual-function UAVs senses ground targets with
//! monostatic radar while uplinking the sensed data to a flying base
//! station (FBS). Each UAV owns a 3D position and a power split factor
//! `gamma` dividing its transmit power between radar (`1 - gamma`) and
//! communication (`gamma`).
//!
//! The crate provides:
//!
//! - [`physics`]: the link-budget formulas (radar SNR and range, channel
//!   gain, SINR, Shannon rate), all pure functions on linear SI units.
//! - [`scenario`]: problem instances (config ingestion and validation,
//!   target assignment, initial swarm construction) and the C1-C8
//!   constraint checker.
//! - [`solver`]: the distributed JRC algorithm - snapshot-parallel
//!   per-UAV reward steps plus projected gradient ascent for the FBS.
//! - [`baselines`]: the FROC (fixed radar, optimized communications) and
//!   ORFC (optimized radar, fixed communications) placement strategies.
//! - [`harness`]: seeded scenario generation, sweep execution, and CSV
//!   emission for plotting.
//!
//! Everything is deterministic: the same config and seed produce
//! byte-identical outputs.

pub mod baselines;
pub mod harness;
mod numeric;
pub mod physics;
pub mod scenario;
pub mod solver;

pub use physics::{CommParams, InterferenceMode, PhysicsError, Position3D, RadarParams};
pub use scenario::{
    check_constraints, initial_swarm, AlgoParams, Bounds, ConfigError, ConstraintReport,
    ScenarioConfig, SwarmState, UavState,
};
pub use solver::{djrc_run, IterationTrace, RunResult};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::physics::{CommParams, InterferenceMode, Position3D, RadarParams};
    use crate::scenario::{AlgoParams, Bounds, ScenarioConfig};

    /// Baseline simulation constants shared by the unit tests: 1 km x 1 km
    /// box, 30 W per UAV, 5 GHz carrier, 40 MHz comm / 20 MHz radar bands.
    pub fn table1_config(targets: Vec<Position3D>) -> ScenarioConfig {
        let n = targets.len();
        ScenarioConfig {
            targets,
            bounds: Bounds {
                x_min: 0.0,
                x_max: 1000.0,
                y_min: 0.0,
                y_max: 1000.0,
                h_max: 100.0,
            },
            total_power: 30.0,
            safe_distance: 40.0,
            fbs_clearance: 10.0,
            weights: vec![1.0 / n as f64; n],
            radar: RadarParams {
                tx_gain: 20.0,
                rx_gain: 20.0,
                carrier_freq_hz: 5.0e9,
                rcs_m2: 1.0,
                bandwidth_hz: 20.0e6,
                boltzmann: 1.38e-23,
                noise_temp_k: 290.0,
                noise_figure: 10f64.powf(0.5),
                probing_loss: 0.8,
                snr_min: 10.0,
            },
            comm: CommParams {
                carrier_freq_hz: 5.0e9,
                light_speed: 3.0e8,
                bandwidth_hz: 40.0e6,
                los_prob: 0.95,
                nlos_prob: 0.5,
                los_atten: 0.5,
                nlos_atten: 2.0,
                noise_density: 0.5e-10,
                rate_min: 0.1e6,
                fbs_rx_gain: 20.0,
            },
            algo: AlgoParams::default(),
            seed: 0,
            interference: InterferenceMode::Full,
            baseline_gamma: 0.5,
        }
    }
}
