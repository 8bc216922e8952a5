//! `.job.json` batch job descriptions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{BatchJobSpec, NodeSpec, ScenarioError};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchJobDoc {
    duration_s: u64,
    rf_scenario: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    traffic_scenario: Option<String>,
    n_nodes: u32,
    nodes: Vec<NodeSpec>,
    #[serde(default)]
    params: BTreeMap<String, serde_json::Value>,
    team: String,
}

/// Parse and validate a job document. Scenario ids are resolved against the
/// catalogue at submit time, not here.
pub fn parse_batch_job(bytes: &[u8]) -> Result<BatchJobSpec, ScenarioError> {
    let doc: BatchJobDoc = serde_json::from_slice(bytes).map_err(super::classify_json)?;
    let spec = BatchJobSpec {
        duration_s: doc.duration_s,
        rf_scenario: doc.rf_scenario,
        traffic_scenario: doc.traffic_scenario,
        n_nodes: doc.n_nodes as usize,
        nodes: doc.nodes,
        params: doc.params,
        team: doc.team,
    };
    spec.validate()?;
    Ok(spec)
}

/// Canonical job document bytes.
pub fn serialize_batch_job(spec: &BatchJobSpec) -> Vec<u8> {
    let doc = BatchJobDoc {
        duration_s: spec.duration_s,
        rf_scenario: spec.rf_scenario.clone(),
        traffic_scenario: spec.traffic_scenario.clone(),
        n_nodes: spec.n_nodes as u32,
        nodes: spec.nodes.clone(),
        params: spec.params.clone(),
        team: spec.team.clone(),
    };
    let value = serde_json::to_value(&doc).expect("job document is always serializable");
    let mut out = serde_json::to_string_pretty(&value)
        .expect("value serialization cannot fail")
        .into_bytes();
    out.push(b'\n');
    out
}
