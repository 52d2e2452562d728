//! The two comparison strategies, reconstructed as deterministic placement
//! procedures with a fixed power split:
//!
//! - FROC (fixed radar, optimized communications): every UAV sits exactly at
//!   the radar-range boundary on the ray from its target toward the FBS,
//!   surrendering detection margin for uplink throughput.
//! - ORFC (optimized radar, fixed communications): every UAV stays as close
//!   to its target as the rate floor allows, stepping toward the FBS only
//!   until the floor first holds.
//!
//! Both alternate UAV placement with the same FBS optimizer the solver uses,
//! so the three methods differ only in UAV strategy.

use crate::physics::{self, Position3D};
use crate::scenario::{
    check_constraints, initial_swarm, swarm_link_metrics, ConfigError, ScenarioConfig, SwarmState,
    SLACK_EPS,
};
use crate::solver::{fbs_optimize, finish_run, trace_entry, IterationTrace, RunResult, UavAction};

/// Positions are considered settled when no node moves more than this
/// between placement sweeps, meters.
const SETTLE_TOL: f64 = 0.1;

/// Placement sweep cap for both baselines.
const MAX_SWEEPS: usize = 50;

/// How a FROC placement was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementAdjustment {
    /// Exactly at the range boundary on the target-to-FBS ray.
    Exact,
    /// The boundary point left the flight box and was clamped to it.
    BoxClamped,
    /// Backed off along the ray to restore inter-UAV separation.
    CollisionBackoff,
}

/// One FROC UAV placement.
#[derive(Debug, Clone, Copy)]
pub struct FrocPlacement {
    pub pos: Position3D,
    pub adjustment: PlacementAdjustment,
}

/// Pure FROC placement geometry for a given FBS position: each UAV at
/// distance exactly `radar_range(p_radar)` from its target along the
/// target-to-FBS ray, clamped into the flight box, then separated by
/// backing later-indexed UAVs off along their rays.
pub fn froc_placements(cfg: &ScenarioConfig, fbs: &Position3D) -> Vec<FrocPlacement> {
    let p_radar = cfg.radar_power(cfg.baseline_gamma);
    let range = physics::radar_range(p_radar, &cfg.radar).expect("baseline_gamma < 1");

    let place = |target: &Position3D, s: f64| -> (Position3D, bool) {
        let len = target.distance_to(fbs);
        let u = (
            (fbs.x - target.x) / len,
            (fbs.y - target.y) / len,
            (fbs.h - target.h) / len,
        );
        let raw = Position3D::new(target.x + s * u.0, target.y + s * u.1, target.h + s * u.2);
        let clamped = cfg.bounds.clamp(&raw);
        (clamped, clamped != raw)
    };

    let mut placements: Vec<FrocPlacement> = cfg
        .targets
        .iter()
        .map(|t| {
            let (pos, was_clamped) = place(t, range);
            FrocPlacement {
                pos,
                adjustment: if was_clamped {
                    PlacementAdjustment::BoxClamped
                } else {
                    PlacementAdjustment::Exact
                },
            }
        })
        .collect();

    // Later-indexed UAVs back off along their own ray until separated from
    // every earlier one. s shrinks by the movement step each try, so the
    // loop is bounded by range / move_step.
    for m in 1..placements.len() {
        let mut s = range;
        while placements[..m]
            .iter()
            .any(|p| placements[m].pos.distance_to(&p.pos) < cfg.safe_distance - SLACK_EPS)
        {
            s -= cfg.algo.move_step;
            if s <= cfg.algo.move_step {
                break;
            }
            let (pos, _) = place(&cfg.targets[m], s);
            placements[m].pos = pos;
            placements[m].adjustment = PlacementAdjustment::CollisionBackoff;
        }
    }
    placements
}

fn baseline_trace_row(n: usize) -> Vec<UavAction> {
    vec![
        UavAction {
            kind: crate::solver::ActionKind::Hold,
            predicted_reward: 0.0,
            stalled: false,
        };
        n
    ]
}

/// Shared fixed-point loop: re-place the UAVs against the current FBS, then
/// re-optimize the FBS, until nothing moves more than [`SETTLE_TOL`].
fn alternate_placement<F>(cfg: &ScenarioConfig, mut place_all: F) -> Result<RunResult, ConfigError>
where
    F: FnMut(&SwarmState) -> Vec<Position3D>,
{
    let mut state = initial_swarm(cfg)?;
    for u in &mut state.uavs {
        u.gamma = cfg.baseline_gamma;
    }
    let mut trace: Vec<IterationTrace> = Vec::new();
    let mut sweeps = 0;

    for sweep in 1..=MAX_SWEEPS {
        sweeps = sweep;
        let snapshot = state.clone();
        let new_positions = place_all(&snapshot);
        let uav_shift = new_positions
            .iter()
            .zip(&snapshot.uavs)
            .map(|(p, u)| p.distance_to(&u.pos))
            .fold(0.0, f64::max);
        for (u, p) in state.uavs.iter_mut().zip(&new_positions) {
            u.pos = *p;
        }
        state.iteration = sweep;
        state.fbs = crate::solver::project_fbs(&state.fbs, &state, cfg);

        let rate_before_fbs = {
            let metrics = swarm_link_metrics(&state, cfg);
            crate::scenario::rate_total(&metrics)
        };
        let fbs_result = fbs_optimize(&state, cfg);
        let fbs_shift = state.fbs.distance_to(&fbs_result.pos);
        state.fbs = fbs_result.pos;

        trace.push(trace_entry(
            sweep,
            &state,
            cfg,
            baseline_trace_row(state.uav_count()),
            rate_before_fbs,
            fbs_result.converged,
        ));

        if uav_shift.max(fbs_shift) < SETTLE_TOL {
            break;
        }
    }

    let converged = check_constraints(&state, cfg).all_satisfied;
    Ok(finish_run(state, cfg, converged, sweeps, trace))
}

/// Fixed radar, optimized communications: UAVs pinned to the radar-range
/// boundary toward the (iteratively re-optimized) FBS.
pub fn froc_solve(cfg: &ScenarioConfig) -> Result<RunResult, ConfigError> {
    alternate_placement(cfg, |snapshot| {
        froc_placements(cfg, &snapshot.fbs)
            .into_iter()
            .map(|p| p.pos)
            .collect()
    })
}

/// Optimized radar, fixed communications: each UAV walks from its hover
/// point toward the FBS in movement-step increments, stopping as soon as its
/// rate clears the floor (or the next step would break range, box, or
/// separation from an already-placed UAV).
pub fn orfc_solve(cfg: &ScenarioConfig) -> Result<RunResult, ConfigError> {
    let p_radar = cfg.radar_power(cfg.baseline_gamma);
    let range = physics::radar_range(p_radar, &cfg.radar).expect("baseline_gamma < 1");
    let comm_power = cfg.comm_power(cfg.baseline_gamma);

    alternate_placement(cfg, |snapshot| {
        // Interference background per UAV, frozen from the sweep snapshot.
        let gains: Vec<f64> = snapshot
            .uavs
            .iter()
            .map(|u| {
                physics::channel_gain(u.pos.distance_to(&snapshot.fbs), &cfg.comm)
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        let comm_powers = vec![comm_power; snapshot.uav_count()];

        let rate_at = |m: usize, pos: &Position3D| -> f64 {
            let mut g = gains.clone();
            g[m] = physics::channel_gain(pos.distance_to(&snapshot.fbs), &cfg.comm)
                .unwrap_or(f64::INFINITY);
            let sinr = physics::sinr(
                m,
                &comm_powers,
                &g,
                &cfg.comm,
                cfg.radar.tx_gain,
                cfg.interference,
            );
            physics::data_rate(sinr, &cfg.comm)
        };

        let mut placed: Vec<Position3D> = Vec::with_capacity(snapshot.uav_count());
        for (m, target) in cfg.targets.iter().enumerate() {
            let mut pos = Position3D::new(target.x, target.y, cfg.safe_distance);
            let max_steps =
                (pos.distance_to(&snapshot.fbs) / cfg.algo.move_step).ceil() as usize + 1;
            for _ in 0..max_steps {
                if rate_at(m, &pos) >= cfg.comm.rate_min {
                    break;
                }
                let dist = pos.distance_to(&snapshot.fbs);
                if dist == 0.0 {
                    break;
                }
                let scale = cfg.algo.move_step / dist;
                let next = Position3D::new(
                    pos.x + scale * (snapshot.fbs.x - pos.x),
                    pos.y + scale * (snapshot.fbs.y - pos.y),
                    pos.h + scale * (snapshot.fbs.h - pos.h),
                );
                let next_ok = cfg.bounds.contains(&next)
                    && next.distance_to(target) <= range + SLACK_EPS
                    && placed
                        .iter()
                        .all(|p| next.distance_to(p) >= cfg.safe_distance - SLACK_EPS);
                if !next_ok {
                    break;
                }
                pos = next;
            }
            placed.push(pos);
        }
        placed
    })
}
