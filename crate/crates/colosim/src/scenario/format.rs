//! `.rfscn` interchange format: JSON with canonical output.
//!
//! Canonical form: keys sorted, two-space indent, gains and noise levels as
//! shortest round-trip decimal strings, trailing newline. Parsing twice
//! through `serialize` is byte-stable by construction.

use serde::{Deserialize, Serialize};

use super::model::{RfScenario, ScenarioError, TapUpdate};
use super::{format_f64, parse_f64};
use crate::channel::{CirTaps, Tap};
use num_complex::Complex64;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RfScenarioDoc {
    id: String,
    n_nodes: u32,
    duration_ms: u64,
    sample_rate_hz: f64,
    carrier_hz: f64,
    noise_power_dbfs: String,
    updates: Vec<TapUpdateDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TapUpdateDoc {
    t_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    carrier_hz: Option<f64>,
    links: Vec<LinkDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    tx: u32,
    rx: u32,
    taps: Vec<TapDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TapDoc {
    k: u16,
    re: String,
    im: String,
}

use super::classify_json as classify;

fn doc_to_scenario(doc: RfScenarioDoc) -> Result<RfScenario, ScenarioError> {
    let noise_power_dbfs =
        parse_f64(&doc.noise_power_dbfs).map_err(|m| ScenarioError::Invariant {
            path: "noise_power_dbfs".into(),
            message: m,
        })?;
    let mut updates = Vec::with_capacity(doc.updates.len());
    for (u_idx, u) in doc.updates.into_iter().enumerate() {
        let mut links = Vec::with_capacity(u.links.len());
        for (l_idx, l) in u.links.into_iter().enumerate() {
            let path = |field: &str| format!("updates[{u_idx}].links[{l_idx}]{field}");
            let mut taps = Vec::with_capacity(l.taps.len());
            for (t_idx, t) in l.taps.into_iter().enumerate() {
                let re = parse_f64(&t.re).map_err(|m| ScenarioError::Invariant {
                    path: path(&format!(".taps[{t_idx}].re")),
                    message: m,
                })?;
                let im = parse_f64(&t.im).map_err(|m| ScenarioError::Invariant {
                    path: path(&format!(".taps[{t_idx}].im")),
                    message: m,
                })?;
                if !re.is_finite() || !im.is_finite() {
                    return Err(ScenarioError::Invariant {
                        path: path(&format!(".taps[{t_idx}]")),
                        message: "tap gains must be finite".into(),
                    });
                }
                taps.push(Tap::new(t.k, Complex64::new(re, im)));
            }
            links.push(CirTaps::new(l.tx as usize, l.rx as usize, taps));
        }
        updates.push(TapUpdate {
            t_ms: u.t_ms,
            carrier_hz: u.carrier_hz,
            links,
        });
    }
    Ok(RfScenario {
        id: doc.id,
        n_nodes: doc.n_nodes as usize,
        duration_ms: doc.duration_ms,
        sample_rate_hz: doc.sample_rate_hz,
        carrier_hz: doc.carrier_hz,
        noise_power_dbfs,
        updates,
    })
}

fn scenario_to_doc(s: &RfScenario) -> RfScenarioDoc {
    RfScenarioDoc {
        id: s.id.clone(),
        n_nodes: s.n_nodes as u32,
        duration_ms: s.duration_ms,
        sample_rate_hz: s.sample_rate_hz,
        carrier_hz: s.carrier_hz,
        noise_power_dbfs: format_f64(s.noise_power_dbfs),
        updates: s
            .updates
            .iter()
            .map(|u| TapUpdateDoc {
                t_ms: u.t_ms,
                carrier_hz: u.carrier_hz,
                links: u
                    .links
                    .iter()
                    .map(|l| LinkDoc {
                        tx: l.tx as u32,
                        rx: l.rx as u32,
                        taps: l
                            .taps
                            .iter()
                            .map(|t| TapDoc {
                                k: t.delay,
                                re: format_f64(t.gain.re),
                                im: format_f64(t.gain.im),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Parse and fully validate an `.rfscn` document.
pub fn parse_rf_scenario(bytes: &[u8]) -> Result<RfScenario, ScenarioError> {
    let doc: RfScenarioDoc = serde_json::from_slice(bytes).map_err(classify)?;
    let scenario = doc_to_scenario(doc)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Canonical `.rfscn` bytes for a valid scenario.
pub fn serialize_rf_scenario(scenario: &RfScenario) -> Vec<u8> {
    let doc = scenario_to_doc(scenario);
    // Routing through Value sorts object keys (serde_json maps are BTreeMaps).
    let value = serde_json::to_value(&doc).expect("scenario document is always serializable");
    let mut out = serde_json::to_string_pretty(&value)
        .expect("value serialization cannot fail")
        .into_bytes();
    out.push(b'\n');
    out
}
