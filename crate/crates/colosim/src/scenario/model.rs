//! In-memory scenario types and their invariants.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::channel::{CirTaps, MAX_DIRECTED_PAIRS};

/// Largest UDP payload a flow may declare.
pub const MAX_UDP_PAYLOAD: usize = 65_507;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invariant violation at {path}: {message}")]
    Invariant { path: String, message: String },
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("unknown scenario id {id:?}")]
    UnknownScenario { id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One timed update: the links listed here replace those pairs' taps at
/// scenario time `t_ms`; an optional carrier override retunes the emulation.
#[derive(Clone, Debug, PartialEq)]
pub struct TapUpdate {
    pub t_ms: u64,
    pub carrier_hz: Option<f64>,
    pub links: Vec<CirTaps>,
}

/// A complete RF scenario: global parameters plus the update timeline.
#[derive(Clone, Debug, PartialEq)]
pub struct RfScenario {
    pub id: String,
    pub n_nodes: usize,
    pub duration_ms: u64,
    pub sample_rate_hz: f64,
    pub carrier_hz: f64,
    /// Per-receiver AWGN level; `-inf` means noise-free.
    pub noise_power_dbfs: f64,
    pub updates: Vec<TapUpdate>,
}

impl RfScenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let inv = |path: String, message: String| ScenarioError::Invariant { path, message };
        if self.id.is_empty() {
            return Err(inv("id".into(), "scenario id must not be empty".into()));
        }
        if self.n_nodes < 2 {
            return Err(inv(
                "n_nodes".into(),
                format!("n_nodes >= 2 required, got {}", self.n_nodes),
            ));
        }
        let pairs = self.n_nodes * (self.n_nodes - 1);
        if pairs > MAX_DIRECTED_PAIRS {
            return Err(inv(
                "n_nodes".into(),
                format!(
                    "{} nodes give {pairs} directed pairs, limit is {MAX_DIRECTED_PAIRS}",
                    self.n_nodes
                ),
            ));
        }
        if self.duration_ms == 0 {
            return Err(inv("duration_ms".into(), "duration must be > 0".into()));
        }
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(inv(
                "sample_rate_hz".into(),
                format!("sample rate must be > 0, got {}", self.sample_rate_hz),
            ));
        }
        if !self.carrier_hz.is_finite() || self.carrier_hz <= 0.0 {
            return Err(inv(
                "carrier_hz".into(),
                format!("carrier must be > 0, got {}", self.carrier_hz),
            ));
        }
        if self.noise_power_dbfs.is_nan() || self.noise_power_dbfs == f64::INFINITY {
            return Err(inv(
                "noise_power_dbfs".into(),
                "noise power must be finite or -inf".into(),
            ));
        }
        if self.updates.is_empty() || self.updates[0].t_ms != 0 {
            return Err(inv(
                "updates".into(),
                "first update must be at t_ms = 0".into(),
            ));
        }
        let mut prev = 0u64;
        for (u_idx, update) in self.updates.iter().enumerate() {
            let path = |rest: String| format!("updates[{u_idx}]{rest}");
            if update.t_ms >= self.duration_ms {
                return Err(inv(
                    path(String::new()),
                    format!("t_ms {} outside [0, {})", update.t_ms, self.duration_ms),
                ));
            }
            if update.t_ms < prev {
                return Err(inv(
                    path(String::new()),
                    format!("updates out of order ({prev} then {})", update.t_ms),
                ));
            }
            prev = update.t_ms;
            if let Some(c) = update.carrier_hz {
                if !c.is_finite() || c <= 0.0 {
                    return Err(inv(
                        path(".carrier_hz".into()),
                        format!("carrier override must be > 0, got {c}"),
                    ));
                }
            }
            for (l_idx, link) in update.links.iter().enumerate() {
                link.validate(self.n_nodes)
                    .map_err(|e| inv(path(format!(".links[{l_idx}]")), e.to_string()))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowPattern {
    Periodic,
    Poisson,
    Burst,
}

impl FlowPattern {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowPattern::Periodic => "PERIODIC",
            FlowPattern::Poisson => "POISSON",
            FlowPattern::Burst => "BURST",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "PERIODIC" => Some(FlowPattern::Periodic),
            "POISSON" => Some(FlowPattern::Poisson),
            "BURST" => Some(FlowPattern::Burst),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlowEventKind {
    On {
        src_node: usize,
        dst_node: usize,
        pattern: FlowPattern,
        rate_pps: f64,
        size_bytes: usize,
    },
    Off,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowEvent {
    pub t_ms: u64,
    pub flow_id: u32,
    pub kind: FlowEventKind,
}

/// A set of timed packet flows.
#[derive(Clone, Debug, PartialEq)]
pub struct TrafficScenario {
    pub id: String,
    pub events: Vec<FlowEvent>,
}

impl TrafficScenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let inv = |path: String, message: String| ScenarioError::Invariant { path, message };
        let mut prev = 0u64;
        let mut seen_on: BTreeSet<u32> = BTreeSet::new();
        let mut active: BTreeSet<u32> = BTreeSet::new();
        for (idx, ev) in self.events.iter().enumerate() {
            let path = format!("events[{idx}]");
            if ev.t_ms < prev {
                return Err(inv(
                    path,
                    format!("events out of order ({prev} then {})", ev.t_ms),
                ));
            }
            prev = ev.t_ms;
            match &ev.kind {
                FlowEventKind::On {
                    rate_pps,
                    size_bytes,
                    ..
                } => {
                    if seen_on.contains(&ev.flow_id) {
                        return Err(inv(path, format!("duplicate ON for flow {}", ev.flow_id)));
                    }
                    if !rate_pps.is_finite() || *rate_pps <= 0.0 {
                        return Err(inv(path, format!("rate_pps > 0 required, got {rate_pps}")));
                    }
                    if *size_bytes < 1 || *size_bytes > MAX_UDP_PAYLOAD {
                        return Err(inv(
                            path,
                            format!(
                                "size_bytes must be in [1, {MAX_UDP_PAYLOAD}], got {size_bytes}"
                            ),
                        ));
                    }
                    seen_on.insert(ev.flow_id);
                    active.insert(ev.flow_id);
                }
                FlowEventKind::Off => {
                    if !active.remove(&ev.flow_id) {
                        return Err(inv(
                            path,
                            format!("OFF for flow {} without a prior ON", ev.flow_id),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// The span [on, off) of a flow; `None` end means it runs indefinitely.
    pub fn flow_windows(&self) -> BTreeMap<u32, (u64, Option<u64>)> {
        let mut windows = BTreeMap::new();
        for ev in &self.events {
            match ev.kind {
                FlowEventKind::On { .. } => {
                    windows.insert(ev.flow_id, (ev.t_ms, None));
                }
                FlowEventKind::Off => {
                    if let Some(w) = windows.get_mut(&ev.flow_id) {
                        w.1 = Some(ev.t_ms);
                    }
                }
            }
        }
        windows
    }
}

/// Per-node role and command for a batch job.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub role: String,
    pub command: String,
}

/// Batch experiment request.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchJobSpec {
    pub duration_s: u64,
    pub rf_scenario: String,
    pub traffic_scenario: Option<String>,
    pub n_nodes: usize,
    pub nodes: Vec<NodeSpec>,
    /// Free-form parameters handed to the node programs untouched.
    pub params: BTreeMap<String, serde_json::Value>,
    pub team: String,
}

impl BatchJobSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let inv = |path: &str, message: String| ScenarioError::Invariant {
            path: path.into(),
            message,
        };
        if self.duration_s == 0 {
            return Err(inv("duration_s", "duration must be > 0".into()));
        }
        if self.rf_scenario.is_empty() {
            return Err(inv(
                "rf_scenario",
                "rf_scenario id must not be empty".into(),
            ));
        }
        if self.n_nodes == 0 {
            return Err(inv("n_nodes", "n_nodes must be > 0".into()));
        }
        if self.nodes.len() != self.n_nodes {
            return Err(inv(
                "nodes",
                format!(
                    "{} node entries for n_nodes = {}",
                    self.nodes.len(),
                    self.n_nodes
                ),
            ));
        }
        if self.team.is_empty() {
            return Err(inv("team", "team must not be empty".into()));
        }
        Ok(())
    }
}
