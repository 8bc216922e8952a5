//! Geometry to tap timeline.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::geometry::{NodeTrajectory, TerrainBounds};
use super::models::{delay_to_tap, fading_taps, pathloss_gain, ChannelModelParams, CompilerError};
use crate::channel::{CirTaps, Tap, TAP_SLOTS};
use crate::scenario::{RfScenario, TapUpdate};
use crate::SPEED_OF_LIGHT_M_S;

pub struct CompileRequest<'a> {
    pub scenario_id: String,
    pub trajectories: &'a [NodeTrajectory],
    pub params: &'a ChannelModelParams,
    pub terrain: &'a TerrainBounds,
    pub sample_rate_hz: f64,
    pub carrier_hz: f64,
    pub duration_ms: u64,
    pub update_period_ms: u64,
    pub noise_power_dbfs: f64,
}

/// Compile trajectories into an RF scenario: one tap update per period, each
/// directed pair carrying a delay tap at round(d/c*fs) with pathloss gain and
/// the configured fading. Deterministic for a given seed.
pub fn compile(req: &CompileRequest) -> Result<RfScenario, CompilerError> {
    req.params.validate()?;
    req.terrain.validate()?;
    if req.duration_ms == 0 {
        return Err(CompilerError::ZeroDuration);
    }
    if req.update_period_ms == 0 {
        return Err(CompilerError::InvalidParams {
            field: "update_period_ms",
            message: "update period must be > 0".into(),
        });
    }
    let n = req.trajectories.len();
    if n < 2 {
        return Err(CompilerError::NodeCount(format!(
            "need at least 2 trajectories, got {n}"
        )));
    }
    let mut by_id: BTreeMap<usize, &NodeTrajectory> = BTreeMap::new();
    for traj in req.trajectories {
        traj.validate()?;
        if by_id.insert(traj.node_id, traj).is_some() {
            return Err(CompilerError::NodeCount(format!(
                "duplicate trajectory for node {}",
                traj.node_id
            )));
        }
    }
    if by_id.keys().copied().ne(0..n) {
        return Err(CompilerError::NodeCount(format!(
            "trajectories must cover node ids 0..{n} exactly"
        )));
    }
    let nodes: Vec<&NodeTrajectory> = (0..n).map(|id| by_id[&id]).collect();

    // Upfront budget check on the ground diagonal; per-pair distances (which
    // include altitude) are re-checked as they are compiled.
    let diag_tap = req.terrain.diagonal_m() / SPEED_OF_LIGHT_M_S * req.sample_rate_hz;
    let max_tap = (TAP_SLOTS - 1) as f64;
    if diag_tap > max_tap {
        return Err(CompilerError::DelayBudget {
            distance_m: req.terrain.diagonal_m(),
            tap: diag_tap,
            max_m: max_tap / req.sample_rate_hz * SPEED_OF_LIGHT_M_S,
        });
    }

    let mut updates = Vec::new();
    let mut t_ms = 0u64;
    while t_ms < req.duration_ms {
        let positions: Vec<(f64, f64, f64)> = nodes
            .iter()
            .map(|traj| {
                let p = traj.position_at(t_ms);
                if !req.terrain.contains(p.0, p.1, p.2) {
                    Err(CompilerError::TerrainViolation {
                        node: traj.node_id,
                        t_ms,
                        x: p.0,
                        y: p.1,
                        z: p.2,
                    })
                } else {
                    Ok(p)
                }
            })
            .collect::<Result<_, _>>()?;

        let mut links = Vec::with_capacity(n * (n - 1));
        for tx in 0..n {
            for rx in 0..n {
                if tx == rx {
                    continue;
                }
                let (ax, ay, az) = positions[tx];
                let (bx, by, bz) = positions[rx];
                let d3 = ((ax - bx).powi(2) + (ay - by).powi(2) + (az - bz).powi(2)).sqrt();
                // Near-field clamp: inside the reference distance the model
                // is anchored to its d0 value.
                let d = d3.max(req.params.reference_distance_m);
                let base = pathloss_gain(d, req.carrier_hz, req.params)?;
                let link_id = (tx * n + rx) as u64;
                let components = fading_taps(base, req.carrier_hz, req.params, t_ms, link_id)?;
                let mut slots: BTreeMap<u16, Complex64> = BTreeMap::new();
                for comp in components {
                    let total_m = d + comp.excess_delay_s * SPEED_OF_LIGHT_M_S;
                    let k = delay_to_tap(total_m, req.sample_rate_hz)?;
                    *slots.entry(k).or_insert(Complex64::new(0.0, 0.0)) += comp.gain;
                }
                let taps: Vec<Tap> = slots.into_iter().map(|(k, g)| Tap::new(k, g)).collect();
                links.push(CirTaps::new(tx, rx, taps));
            }
        }
        updates.push(TapUpdate {
            t_ms,
            carrier_hz: None,
            links,
        });
        t_ms = t_ms.saturating_add(req.update_period_ms);
    }

    let scenario = RfScenario {
        id: req.scenario_id.clone(),
        n_nodes: n,
        duration_ms: req.duration_ms,
        sample_rate_hz: req.sample_rate_hz,
        carrier_hz: req.carrier_hz,
        noise_power_dbfs: req.noise_power_dbfs,
        updates,
    };
    scenario.validate()?;
    Ok(scenario)
}
