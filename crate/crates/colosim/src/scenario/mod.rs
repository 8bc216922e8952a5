//! Scenario data model, interchange formats and the catalogue.
//!
//! Three on-disk artifacts are defined here:
//!
//! - `.rfscn` — an RF scenario: global emulation parameters plus a timed
//!   sequence of tap/carrier updates (JSON, canonical form);
//! - `.tgen` — a traffic scenario: MGEN-style event lines turning flows on
//!   and off;
//! - `.job.json` — a batch job description.
//!
//! Serialization is canonical (sorted keys, shortest round-trip number
//! strings), so `serialize . parse . serialize` is byte-identical and
//! fixtures stay diffable.

mod catalogue;
mod format;
mod job;
mod model;
mod tgen;

pub use catalogue::{Catalogue, ScenarioSummary};
pub use format::{parse_rf_scenario, serialize_rf_scenario};
pub use job::{parse_batch_job, serialize_batch_job};
pub use model::{
    BatchJobSpec, FlowEvent, FlowEventKind, FlowPattern, NodeSpec, RfScenario, ScenarioError,
    TapUpdate, TrafficScenario, MAX_UDP_PAYLOAD,
};
pub use tgen::{parse_traffic_script, serialize_traffic_script};

/// Map a serde_json error onto the scenario error taxonomy, keeping the
/// line/column the parser reported.
pub(crate) fn classify_json(err: serde_json::Error) -> ScenarioError {
    let (line, column) = (err.line(), err.column());
    match err.classify() {
        serde_json::error::Category::Data => ScenarioError::Schema {
            line,
            column,
            message: err.to_string(),
        },
        _ => ScenarioError::Syntax {
            line,
            column,
            message: err.to_string(),
        },
    }
}

/// Canonical shortest decimal form for a gain/level value; `-inf` is the
/// spelled-out noise-free marker. Round-trips exactly through [`parse_f64`].
pub fn format_f64(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Inverse of [`format_f64`]; rejects NaN and positive infinity.
pub fn parse_f64(s: &str) -> Result<f64, String> {
    if s == "-inf" {
        return Ok(f64::NEG_INFINITY);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("non-finite value {v}")),
        Err(_) => Err(format!("not a decimal number: {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_strings_round_trip() {
        for v in [0.0, 1.0, -2.5, 1e-3, 2.39e-4, 123456.789, f64::NEG_INFINITY] {
            let s = format_f64(v);
            let back = parse_f64(&s).unwrap();
            assert_eq!(back, v, "via {s:?}");
            assert_eq!(format_f64(back), s, "canonical form stable");
        }
    }

    #[test]
    fn f64_rejects_junk() {
        assert!(parse_f64("inf").is_err());
        assert!(parse_f64("nan").is_err());
        assert!(parse_f64("1.2.3").is_err());
    }
}
