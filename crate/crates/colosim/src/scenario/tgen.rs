//! `.tgen` traffic scripts: MGEN-style event lines.
//!
//! ```text
//! # downlink video
//! 0.0 ON 1 SRC 0 DST 1 PERIODIC [10 1024]
//! 30.0 OFF 1
//! ```

use super::model::{FlowEvent, FlowEventKind, FlowPattern, ScenarioError, TrafficScenario};

fn line_err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Script {
        line,
        message: message.into(),
    }
}

fn parse_time_ms(tok: &str, line: usize) -> Result<u64, ScenarioError> {
    let secs: f64 = tok
        .parse()
        .map_err(|_| line_err(line, format!("bad event time {tok:?}")))?;
    if !secs.is_finite() || secs < 0.0 {
        return Err(line_err(
            line,
            format!("event time must be >= 0, got {tok}"),
        ));
    }
    Ok((secs * 1000.0).round() as u64)
}

/// Parse a traffic script. The scenario id is left empty; callers that load
/// from a catalogue set it from the file name.
pub fn parse_traffic_script(text: &str) -> Result<TrafficScenario, ScenarioError> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() < 3 {
            return Err(line_err(line_no, format!("incomplete event line {raw:?}")));
        }
        let t_ms = parse_time_ms(tokens[0], line_no)?;
        let flow_id: u32 = tokens[2]
            .parse()
            .map_err(|_| line_err(line_no, format!("bad flow id {:?}", tokens[2])))?;
        match tokens[1] {
            "ON" => {
                if tokens.len() != 10 {
                    return Err(line_err(
                        line_no,
                        "ON events take: <t> ON <flow> SRC <node> DST <node> <PATTERN> [<pps> <bytes>]",
                    ));
                }
                if tokens[3] != "SRC" || tokens[5] != "DST" {
                    return Err(line_err(line_no, "expected SRC <node> DST <node>"));
                }
                let src_node: usize = tokens[4]
                    .parse()
                    .map_err(|_| line_err(line_no, format!("bad SRC node {:?}", tokens[4])))?;
                let dst_node: usize = tokens[6]
                    .parse()
                    .map_err(|_| line_err(line_no, format!("bad DST node {:?}", tokens[6])))?;
                let pattern = FlowPattern::parse(tokens[7])
                    .ok_or_else(|| line_err(line_no, format!("unknown pattern {:?}", tokens[7])))?;
                let rate_tok = tokens[8].strip_prefix('[').ok_or_else(|| {
                    line_err(
                        line_no,
                        "pattern parameters must be bracketed: [<pps> <bytes>]",
                    )
                })?;
                let size_tok = tokens[9].strip_suffix(']').ok_or_else(|| {
                    line_err(
                        line_no,
                        "pattern parameters must be bracketed: [<pps> <bytes>]",
                    )
                })?;
                let rate_pps: f64 = rate_tok
                    .parse()
                    .map_err(|_| line_err(line_no, format!("bad packet rate {rate_tok:?}")))?;
                let size_bytes: usize = size_tok
                    .parse()
                    .map_err(|_| line_err(line_no, format!("bad packet size {size_tok:?}")))?;
                events.push(FlowEvent {
                    t_ms,
                    flow_id,
                    kind: FlowEventKind::On {
                        src_node,
                        dst_node,
                        pattern,
                        rate_pps,
                        size_bytes,
                    },
                });
            }
            "OFF" => {
                if tokens.len() != 3 {
                    return Err(line_err(line_no, "OFF events take: <t> OFF <flow>"));
                }
                events.push(FlowEvent {
                    t_ms,
                    flow_id,
                    kind: FlowEventKind::Off,
                });
            }
            other => return Err(line_err(line_no, format!("unknown event kind {other:?}"))),
        }
    }
    let scenario = TrafficScenario {
        id: String::new(),
        events,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Canonical script form; `parse(serialize(s))` restores `s` exactly.
pub fn serialize_traffic_script(scenario: &TrafficScenario) -> String {
    let mut out = String::new();
    for ev in &scenario.events {
        let t_s = ev.t_ms as f64 / 1000.0;
        match &ev.kind {
            FlowEventKind::On {
                src_node,
                dst_node,
                pattern,
                rate_pps,
                size_bytes,
            } => {
                out.push_str(&format!(
                    "{t_s} ON {} SRC {src_node} DST {dst_node} {} [{rate_pps} {size_bytes}]\n",
                    ev.flow_id,
                    pattern.as_str(),
                ));
            }
            FlowEventKind::Off => {
                out.push_str(&format!("{t_s} OFF {}\n", ev.flow_id));
            }
        }
    }
    out
}
