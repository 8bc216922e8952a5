//! Trajectories, terrain bounds and the `.geo.json` input format.

use serde::{Deserialize, Serialize};

use super::models::CompilerError;
use crate::scenario::classify_json;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub t_ms: u64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Piecewise-linear node motion. A single waypoint means the node is static;
/// positions are held at the first/last waypoint outside the listed span.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeTrajectory {
    #[serde(rename = "id")]
    pub node_id: usize,
    pub waypoints: Vec<Waypoint>,
}

impl NodeTrajectory {
    pub fn fixed(node_id: usize, x: f64, y: f64, z: f64) -> Self {
        NodeTrajectory {
            node_id,
            waypoints: vec![Waypoint { t_ms: 0, x, y, z }],
        }
    }

    pub fn validate(&self) -> Result<(), CompilerError> {
        let bad = |message: String| CompilerError::InvalidParams {
            field: "waypoints",
            message,
        };
        if self.waypoints.is_empty() {
            return Err(bad(format!(
                "node {}: at least one waypoint required",
                self.node_id
            )));
        }
        let mut prev: Option<u64> = None;
        for w in &self.waypoints {
            if ![w.x, w.y, w.z].iter().all(|v| v.is_finite()) {
                return Err(bad(format!(
                    "node {}: non-finite coordinate at t = {} ms",
                    self.node_id, w.t_ms
                )));
            }
            if let Some(p) = prev {
                if w.t_ms <= p {
                    return Err(bad(format!(
                        "node {}: waypoint times must be strictly increasing ({p} then {})",
                        self.node_id, w.t_ms
                    )));
                }
            }
            prev = Some(w.t_ms);
        }
        Ok(())
    }

    /// Interpolated position at `t_ms`.
    pub fn position_at(&self, t_ms: u64) -> (f64, f64, f64) {
        let wps = &self.waypoints;
        if t_ms <= wps[0].t_ms {
            return (wps[0].x, wps[0].y, wps[0].z);
        }
        for pair in wps.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if t_ms <= b.t_ms {
                let span = (b.t_ms - a.t_ms) as f64;
                let frac = (t_ms - a.t_ms) as f64 / span;
                return (
                    a.x + (b.x - a.x) * frac,
                    a.y + (b.y - a.y) * frac,
                    a.z + (b.z - a.z) * frac,
                );
            }
        }
        let last = wps.last().unwrap();
        (last.x, last.y, last.z)
    }
}

/// Emulation area; nodes must stay inside `[0, width] x [0, height]` at
/// non-negative altitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainBounds {
    #[serde(rename = "w")]
    pub width_m: f64,
    #[serde(rename = "h")]
    pub height_m: f64,
}

impl TerrainBounds {
    pub fn new(width_m: f64, height_m: f64) -> Self {
        TerrainBounds { width_m, height_m }
    }

    pub fn validate(&self) -> Result<(), CompilerError> {
        if !self.width_m.is_finite()
            || !self.height_m.is_finite()
            || self.width_m <= 0.0
            || self.height_m <= 0.0
        {
            return Err(CompilerError::InvalidParams {
                field: "terrain",
                message: format!(
                    "terrain sides must be > 0, got {} x {}",
                    self.width_m, self.height_m
                ),
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64, z: f64) -> bool {
        (0.0..=self.width_m).contains(&x) && (0.0..=self.height_m).contains(&y) && z >= 0.0
    }

    /// Longest ground-plane distance the terrain can demand.
    pub fn diagonal_m(&self) -> f64 {
        self.width_m.hypot(self.height_m)
    }
}

/// Geometry input document (`.geo.json`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub terrain: TerrainBounds,
    pub nodes: Vec<NodeTrajectory>,
}

pub fn parse_geometry(bytes: &[u8]) -> Result<Geometry, CompilerError> {
    let geo: Geometry = serde_json::from_slice(bytes).map_err(classify_json)?;
    geo.terrain.validate()?;
    for node in &geo.nodes {
        node.validate()?;
    }
    Ok(geo)
}

pub fn serialize_geometry(geo: &Geometry) -> Vec<u8> {
    let value = serde_json::to_value(geo).expect("geometry is always serializable");
    let mut out = serde_json::to_string_pretty(&value)
        .expect("value serialization cannot fail")
        .into_bytes();
    out.push(b'\n');
    out
}
