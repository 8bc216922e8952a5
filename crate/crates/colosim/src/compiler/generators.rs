//! Built-in scenario family generators.

use num_complex::Complex64;

use super::compile::{compile, CompileRequest};
use super::geometry::{NodeTrajectory, TerrainBounds, Waypoint};
use super::models::{snr_to_gain, ChannelModelParams, CompilerError};
use crate::channel::CirTaps;
use crate::scenario::{
    FlowEvent, FlowEventKind, FlowPattern, RfScenario, TapUpdate, TrafficScenario,
};

/// Ten-node qualification run: full-mesh links whose SNR steps down
/// 20/15/10/5 dB every two minutes, then a carrier shift to 1.1 GHz with SNR
/// back at 20 dB for the final two minutes. Comes with a constant-bitrate
/// ring traffic scenario.
pub fn gen_sce_qualification(
    sample_rate_hz: f64,
    noise_power_dbfs: f64,
) -> Result<(RfScenario, TrafficScenario), CompilerError> {
    if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
        return Err(CompilerError::InvalidParams {
            field: "sample_rate_hz",
            message: format!("sample rate must be > 0, got {sample_rate_hz}"),
        });
    }
    if !noise_power_dbfs.is_finite() {
        return Err(CompilerError::InvalidParams {
            field: "noise_power_dbfs",
            message: "the SNR schedule needs a finite receiver noise level".into(),
        });
    }
    const N: usize = 10;
    let epochs: [(u64, f64, Option<f64>); 5] = [
        (0, 20.0, None),
        (120_000, 15.0, None),
        (240_000, 10.0, None),
        (360_000, 5.0, None),
        (480_000, 20.0, Some(1.1e9)),
    ];
    let updates = epochs
        .iter()
        .map(|&(t_ms, snr_db, carrier_hz)| {
            let gain = snr_to_gain(snr_db, noise_power_dbfs, 0.0);
            let mut links = Vec::with_capacity(N * (N - 1));
            for tx in 0..N {
                for rx in 0..N {
                    if tx != rx {
                        links.push(CirTaps::single(tx, rx, 0, Complex64::new(gain, 0.0)));
                    }
                }
            }
            TapUpdate {
                t_ms,
                carrier_hz,
                links,
            }
        })
        .collect();
    let rf = RfScenario {
        id: "sce_qual_v1".into(),
        n_nodes: N,
        duration_ms: 600_000,
        sample_rate_hz,
        carrier_hz: 1.0e9,
        noise_power_dbfs,
        updates,
    };
    rf.validate()?;

    // Constant-bitrate UDP around the ring: 20 pps of 500 B per node.
    let events = (0..N)
        .map(|i| FlowEvent {
            t_ms: 0,
            flow_id: i as u32 + 1,
            kind: FlowEventKind::On {
                src_node: i,
                dst_node: (i + 1) % N,
                pattern: FlowPattern::Periodic,
                rate_pps: 20.0,
                size_bytes: 500,
            },
        })
        .collect();
    let traffic = TrafficScenario {
        id: "sce_qual_v1".into(),
        events,
    };
    traffic.validate()?;
    Ok((rf, traffic))
}

/// Five squads of ten nodes on a 1 km x 1 km terrain: nine walkers in a row
/// formation at 1.5 m/s plus one orbiting aerial relay each, 15 minutes in
/// three traffic stages of escalating load.
///
/// Stage rates default to 16 kbps / 266 kbps / 1 Mbps per node; the orbit
/// radius (30 m), altitude (50 m) and 10 s tap update period are generator
/// parameters rather than canon.
pub fn gen_alleys(sample_rate_hz: f64) -> Result<(RfScenario, TrafficScenario), CompilerError> {
    const DURATION_MS: u64 = 900_000;
    const STAGE_MS: u64 = 300_000;
    const SQUADS: usize = 5;
    const SQUAD_SIZE: usize = 10;
    let trajectories = alleys_trajectories();
    let params = ChannelModelParams {
        rng_seed: 0xA11E75,
        ..Default::default()
    };
    let terrain = TerrainBounds::new(1000.0, 1000.0);
    let rf = compile(&CompileRequest {
        scenario_id: "alleys_v1".into(),
        trajectories: &trajectories,
        params: &params,
        terrain: &terrain,
        sample_rate_hz,
        carrier_hz: 1.0e9,
        duration_ms: DURATION_MS,
        update_period_ms: 10_000,
        noise_power_dbfs: -80.0,
    })?;

    // Stage rates: voice, voice+image/video, high rate.
    let stage_load: [(f64, usize); 3] = [(20.0, 100), (25.0, 1330), (100.0, 1250)];
    let mut events = Vec::new();
    for (stage, &(rate_pps, size_bytes)) in stage_load.iter().enumerate() {
        let t_on = stage as u64 * STAGE_MS;
        // Close the previous stage before opening the next.
        if stage > 0 {
            for node in 0..SQUADS * SQUAD_SIZE {
                events.push(FlowEvent {
                    t_ms: t_on,
                    flow_id: (node * 3 + stage) as u32,
                    kind: FlowEventKind::Off,
                });
            }
        }
        for node in 0..SQUADS * SQUAD_SIZE {
            let squad = node / SQUAD_SIZE;
            let dst = squad * SQUAD_SIZE + (node % SQUAD_SIZE + 1) % SQUAD_SIZE;
            events.push(FlowEvent {
                t_ms: t_on,
                flow_id: (node * 3 + stage + 1) as u32,
                kind: FlowEventKind::On {
                    src_node: node,
                    dst_node: dst,
                    pattern: FlowPattern::Periodic,
                    rate_pps,
                    size_bytes,
                },
            });
        }
    }
    let traffic = TrafficScenario {
        id: "alleys_v1".into(),
        events,
    };
    traffic.validate()?;
    Ok((rf, traffic))
}

fn alleys_trajectories() -> Vec<NodeTrajectory> {
    const SQUADS: usize = 5;
    const SQUAD_SIZE: usize = 10;
    const WALKERS: usize = 9;
    const DURATION_MS: u64 = 900_000;
    const WALK_SPEED: f64 = 1.5; // m/s
    const ORBIT_RADIUS: f64 = 30.0;
    const ORBIT_PERIOD_MS: u64 = 60_000;
    const UAV_ALTITUDE: f64 = 50.0;

    // Walkers march +x from x = 50 for 600 s (900 m at 1.5 m/s), then turn
    // back for the final 300 s, staying inside the terrain.
    let walker_x = |t_ms: u64| -> f64 {
        if t_ms <= 600_000 {
            50.0 + WALK_SPEED * t_ms as f64 / 1000.0
        } else {
            950.0 - WALK_SPEED * (t_ms - 600_000) as f64 / 1000.0
        }
    };

    let mut trajectories = Vec::with_capacity(SQUADS * SQUAD_SIZE);
    for squad in 0..SQUADS {
        let lane_y = 100.0 + squad as f64 * 180.0;
        for walker in 0..WALKERS {
            let y = lane_y + (walker as f64 - 4.0) * 5.0;
            trajectories.push(NodeTrajectory {
                node_id: squad * SQUAD_SIZE + walker,
                waypoints: vec![
                    Waypoint {
                        t_ms: 0,
                        x: walker_x(0),
                        y,
                        z: 0.0,
                    },
                    Waypoint {
                        t_ms: 600_000,
                        x: walker_x(600_000),
                        y,
                        z: 0.0,
                    },
                    Waypoint {
                        t_ms: DURATION_MS,
                        x: walker_x(DURATION_MS),
                        y,
                        z: 0.0,
                    },
                ],
            });
        }
        // The aerial relay circles the squad's moving row center.
        let mut waypoints = Vec::new();
        let mut t = 0u64;
        while t <= DURATION_MS {
            let angle =
                std::f64::consts::TAU * (t % ORBIT_PERIOD_MS) as f64 / ORBIT_PERIOD_MS as f64;
            waypoints.push(Waypoint {
                t_ms: t,
                x: walker_x(t) + ORBIT_RADIUS * angle.cos(),
                y: lane_y + ORBIT_RADIUS * angle.sin(),
                z: UAV_ALTITUDE,
            });
            t += 5_000;
        }
        trajectories.push(NodeTrajectory {
            node_id: squad * SQUAD_SIZE + WALKERS,
            waypoints,
        });
    }
    trajectories
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceClass {
    Close,
    Medium,
    Far,
}

impl DistanceClass {
    pub fn radius_m(&self) -> f64 {
        match self {
            DistanceClass::Close => 20.0,
            DistanceClass::Medium => 50.0,
            DistanceClass::Far => 100.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DistanceClass::Close => "close",
            DistanceClass::Medium => "medium",
            DistanceClass::Far => "far",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeedClass {
    Static,
    Moderate,
    Fast,
}

impl SpeedClass {
    pub fn speed_m_s(&self) -> f64 {
        match self {
            SpeedClass::Static => 0.0,
            SpeedClass::Moderate => 3.0,
            SpeedClass::Fast => 5.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SpeedClass::Static => "static",
            SpeedClass::Moderate => "moderate",
            SpeedClass::Fast => "fast",
        }
    }
}

/// Cellular deployment: `n_bs` base stations (8 to 10) serving four mobile
/// users each. Users sit within the distance class radius of their serving
/// station and either hold position or orbit it at the class speed. Downlink
/// video-like traffic runs at 1 Mbps per user.
pub fn gen_cellular(
    n_bs: usize,
    distance: DistanceClass,
    speed: SpeedClass,
    sample_rate_hz: f64,
) -> Result<(RfScenario, TrafficScenario), CompilerError> {
    if !(8..=10).contains(&n_bs) {
        return Err(CompilerError::InvalidParams {
            field: "n_bs",
            message: format!("base station count must be in [8, 10], got {n_bs}"),
        });
    }
    const UES_PER_BS: usize = 4;
    const DURATION_MS: u64 = 600_000;
    let speed_m_s = speed.speed_m_s();
    let trajectories = cellular_trajectories(n_bs, distance.radius_m(), speed_m_s);
    let params = ChannelModelParams {
        rng_seed: 0xCE11,
        ..Default::default()
    };
    let terrain = TerrainBounds::new(1000.0, 1000.0);
    let update_period_ms = if speed_m_s == 0.0 { DURATION_MS } else { 1_000 };
    let id = format!(
        "cellular_{n_bs}bs_{}_{}_v1",
        distance.as_str(),
        speed.as_str()
    );
    let rf = compile(&CompileRequest {
        scenario_id: id.clone(),
        trajectories: &trajectories,
        params: &params,
        terrain: &terrain,
        sample_rate_hz,
        carrier_hz: 1.0e9,
        duration_ms: DURATION_MS,
        update_period_ms,
        noise_power_dbfs: -80.0,
    })?;

    // 1 Mbps downlink per user: 100 pps of 1250 B.
    let mut events = Vec::new();
    for b in 0..n_bs {
        for u in 0..UES_PER_BS {
            let ue = n_bs + b * UES_PER_BS + u;
            events.push(FlowEvent {
                t_ms: 0,
                flow_id: (b * UES_PER_BS + u) as u32 + 1,
                kind: FlowEventKind::On {
                    src_node: b,
                    dst_node: ue,
                    pattern: FlowPattern::Periodic,
                    rate_pps: 100.0,
                    size_bytes: 1250,
                },
            });
        }
    }
    let traffic = TrafficScenario { id, events };
    traffic.validate()?;
    Ok((rf, traffic))
}

fn cellular_trajectories(n_bs: usize, radius: f64, speed_m_s: f64) -> Vec<NodeTrajectory> {
    const UES_PER_BS: usize = 4;
    const DURATION_MS: u64 = 600_000;
    // Users at staggered fractions of the class radius; the outermost sits at
    // the full radius, so the class bound is tight.
    const RADIUS_FRACTION: [f64; UES_PER_BS] = [1.0, 0.75, 0.5, 0.25];

    let bs_pos = |b: usize| -> (f64, f64) {
        (
            200.0 + (b % 4) as f64 * 200.0,
            200.0 + (b / 4) as f64 * 250.0,
        )
    };

    let mut trajectories = Vec::with_capacity(n_bs * (1 + UES_PER_BS));
    for b in 0..n_bs {
        let (x, y) = bs_pos(b);
        trajectories.push(NodeTrajectory::fixed(b, x, y, 0.0));
    }
    for b in 0..n_bs {
        let (cx, cy) = bs_pos(b);
        for (u, &fraction) in RADIUS_FRACTION.iter().enumerate() {
            let node_id = n_bs + b * UES_PER_BS + u;
            let r = radius * fraction;
            let angle0 = u as f64 * std::f64::consts::FRAC_PI_2 + b as f64 * 0.3;
            let waypoints = if speed_m_s == 0.0 {
                vec![Waypoint {
                    t_ms: 0,
                    x: cx + r * angle0.cos(),
                    y: cy + r * angle0.sin(),
                    z: 0.0,
                }]
            } else {
                let omega = speed_m_s / r; // rad/s around the serving station
                let mut wps = Vec::new();
                let mut t = 0u64;
                while t <= DURATION_MS {
                    let angle = angle0 + omega * t as f64 / 1000.0;
                    wps.push(Waypoint {
                        t_ms: t,
                        x: cx + r * angle.cos(),
                        y: cy + r * angle.sin(),
                        z: 0.0,
                    });
                    t += 2_000;
                }
                wps
            };
            trajectories.push(NodeTrajectory { node_id, waypoints });
        }
    }
    trajectories
}
