//! Flow scheduling, delivery logging and per-flow metrics.
//!
//! Packets are in-memory records handed to node harnesses rather than kernel
//! sockets; schedules are pure functions of (scenario, seed), so an
//! experiment's offered load replays identically.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::rng::{domain, Key};
use crate::scenario::{FlowEventKind, FlowPattern, TrafficScenario};

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("flow {flow_id} seq {seq}: delivery already recorded")]
    DuplicateDelivery { flow_id: u32, seq: u64 },
    #[error("flow {flow_id} seq {seq}: never sent")]
    UnknownPacket { flow_id: u32, seq: u64 },
    #[error(
        "flow {flow_id} seq {seq}: received at {received_at_ms} ms before send at {sent_at_ms} ms"
    )]
    ReceiveBeforeSend {
        flow_id: u32,
        seq: u64,
        sent_at_ms: f64,
        received_at_ms: f64,
    },
    #[error("metrics window must be > 0 ms")]
    EmptyWindow,
}

/// One scheduled packet. The payload is deterministic filler generated on
/// demand (see [`payload_byte`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Packet {
    pub flow_id: u32,
    pub seq: u64,
    pub src_node: usize,
    pub dst_node: usize,
    pub size_bytes: usize,
    pub sent_at_ms: f64,
}

/// Deterministic payload filler for byte `index` of a packet.
pub fn payload_byte(flow_id: u32, seq: u64, index: usize) -> u8 {
    (Key::new(flow_id as u64).word(seq).bits(index as u64) & 0xFF) as u8
}

/// Burst flows run a 50% duty cycle over this period.
pub const BURST_PERIOD_MS: f64 = 1000.0;

/// Number of sends a rate fits into a half-open window: #(i >= 0 : i/rate <
/// duration). Snaps near-integer products so a packet landing exactly on the
/// window edge is excluded regardless of rounding direction.
fn sends_within(duration_ms: f64, rate_pps: f64) -> u64 {
    if duration_ms <= 0.0 {
        return 0;
    }
    let n = duration_ms * rate_pps / 1000.0;
    let snapped = n.round();
    if (n - snapped).abs() < 1e-9 * n.max(1.0) {
        snapped as u64
    } else {
        n.ceil() as u64
    }
}

/// Scheduled send events for a traffic scenario. Construction is cheap; the
/// event list materializes per horizon.
pub struct PacketSource {
    scenario: TrafficScenario,
    seed: u64,
}

/// Build the packet source for a validated scenario.
pub fn schedule(scenario: &TrafficScenario, seed: u64) -> PacketSource {
    PacketSource {
        scenario: scenario.clone(),
        seed,
    }
}

impl PacketSource {
    /// All send events in `[0, horizon_ms)`, sorted by send time (ties broken
    /// by flow id then sequence). Pure: calling twice yields identical events.
    pub fn events(&self, horizon_ms: u64) -> Vec<Packet> {
        let mut packets = Vec::new();
        let windows = self.scenario.flow_windows();
        for ev in &self.scenario.events {
            let FlowEventKind::On {
                src_node,
                dst_node,
                pattern,
                rate_pps,
                size_bytes,
            } = ev.kind
            else {
                continue;
            };
            let (on_ms, off_ms) = windows[&ev.flow_id];
            let end_ms = off_ms.unwrap_or(horizon_ms).min(horizon_ms) as f64;
            let on = on_ms as f64;
            let interval = 1000.0 / rate_pps;
            let mut seq = 0u64;
            let mut push = |t: f64, seq: &mut u64| {
                packets.push(Packet {
                    flow_id: ev.flow_id,
                    seq: *seq,
                    src_node,
                    dst_node,
                    size_bytes,
                    sent_at_ms: t,
                });
                *seq += 1;
            };
            match pattern {
                FlowPattern::Periodic => {
                    // Times computed from the index, not accumulated, so long
                    // runs carry no drift.
                    let count = sends_within(end_ms - on, rate_pps);
                    for i in 0..count {
                        push(on + i as f64 * interval, &mut seq);
                    }
                }
                FlowPattern::Poisson => {
                    let key = Key::new(self.seed)
                        .word(domain::POISSON)
                        .word(ev.flow_id as u64);
                    let mut t = on;
                    loop {
                        t += key.word(seq).exponential(0) * interval;
                        if t >= end_ms {
                            break;
                        }
                        push(t, &mut seq);
                    }
                }
                FlowPattern::Burst => {
                    // Rate applies during the first half of each period.
                    let per_gate = sends_within(BURST_PERIOD_MS / 2.0, rate_pps);
                    let mut period = 0u64;
                    'outer: loop {
                        let period_start = on + period as f64 * BURST_PERIOD_MS;
                        if period_start >= end_ms {
                            break;
                        }
                        for i in 0..per_gate {
                            let t = period_start + i as f64 * interval;
                            if t >= end_ms {
                                break 'outer;
                            }
                            push(t, &mut seq);
                        }
                        period += 1;
                    }
                }
            }
        }
        packets.sort_by(|a, b| {
            a.sent_at_ms
                .total_cmp(&b.sent_at_ms)
                .then(a.flow_id.cmp(&b.flow_id))
                .then(a.seq.cmp(&b.seq))
        });
        packets
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeliveryOutcome {
    ReceivedAt(f64),
    Lost,
}

#[derive(Clone, Copy, Debug)]
struct LogEntry {
    sent_at_ms: f64,
    size_bytes: usize,
    outcome: Option<DeliveryOutcome>,
}

/// Per-flow delivery ledger: every sent packet, what happened to it, when.
#[derive(Default)]
pub struct FlowLog {
    flows: BTreeMap<u32, BTreeMap<u64, LogEntry>>,
}

/// Computed per-flow metrics over a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowMetrics {
    pub sent: u64,
    pub delivered: u64,
    pub lost: u64,
    pub throughput_bps: f64,
    pub loss_rate: f64,
    pub latency_p50_ms: Option<f64>,
    pub latency_p95_ms: Option<f64>,
}

impl FlowLog {
    pub fn new() -> Self {
        FlowLog::default()
    }

    /// Register a packet as sent. Idempotence is not expected: each seq may
    /// be sent once.
    pub fn record_send(&mut self, packet: &Packet) {
        self.flows.entry(packet.flow_id).or_default().insert(
            packet.seq,
            LogEntry {
                sent_at_ms: packet.sent_at_ms,
                size_bytes: packet.size_bytes,
                outcome: None,
            },
        );
    }

    /// Record the fate of a previously sent packet, exactly once per seq.
    pub fn record_delivery(
        &mut self,
        flow_id: u32,
        seq: u64,
        outcome: DeliveryOutcome,
    ) -> Result<(), TrafficError> {
        let entry = self
            .flows
            .get_mut(&flow_id)
            .and_then(|f| f.get_mut(&seq))
            .ok_or(TrafficError::UnknownPacket { flow_id, seq })?;
        if entry.outcome.is_some() {
            return Err(TrafficError::DuplicateDelivery { flow_id, seq });
        }
        if let DeliveryOutcome::ReceivedAt(t) = outcome {
            if t < entry.sent_at_ms {
                return Err(TrafficError::ReceiveBeforeSend {
                    flow_id,
                    seq,
                    sent_at_ms: entry.sent_at_ms,
                    received_at_ms: t,
                });
            }
        }
        entry.outcome = Some(outcome);
        Ok(())
    }

    /// Close the log: anything still in flight is counted as lost.
    pub fn close(&mut self) {
        for flow in self.flows.values_mut() {
            for entry in flow.values_mut() {
                entry.outcome.get_or_insert(DeliveryOutcome::Lost);
            }
        }
    }

    /// Per-flow metrics over `[0, window_ms)` of send time. Throughput counts
    /// delivered payload bytes; percentiles use the nearest-rank rule.
    pub fn metrics(&self, window_ms: u64) -> Result<BTreeMap<u32, FlowMetrics>, TrafficError> {
        if window_ms == 0 {
            return Err(TrafficError::EmptyWindow);
        }
        let window_s = window_ms as f64 / 1000.0;
        let mut out = BTreeMap::new();
        for (&flow_id, entries) in &self.flows {
            let mut sent = 0u64;
            let mut delivered = 0u64;
            let mut lost = 0u64;
            let mut bytes = 0u64;
            let mut latencies: Vec<f64> = Vec::new();
            for entry in entries.values() {
                if entry.sent_at_ms >= window_ms as f64 {
                    continue;
                }
                sent += 1;
                match entry.outcome {
                    Some(DeliveryOutcome::ReceivedAt(t)) => {
                        delivered += 1;
                        bytes += entry.size_bytes as u64;
                        latencies.push(t - entry.sent_at_ms);
                    }
                    Some(DeliveryOutcome::Lost) | None => lost += 1,
                }
            }
            latencies.sort_by(f64::total_cmp);
            let pct = |p: f64| -> Option<f64> {
                if latencies.is_empty() {
                    None
                } else {
                    let rank = ((p / 100.0 * latencies.len() as f64).ceil() as usize).max(1);
                    Some(latencies[rank - 1])
                }
            };
            out.insert(
                flow_id,
                FlowMetrics {
                    sent,
                    delivered,
                    lost,
                    throughput_bps: bytes as f64 * 8.0 / window_s,
                    loss_rate: if sent == 0 {
                        0.0
                    } else {
                        lost as f64 / sent as f64
                    },
                    latency_p50_ms: pct(50.0),
                    latency_p95_ms: pct(95.0),
                },
            );
        }
        Ok(out)
    }

    /// Export `flow,seq,sent_ms,recv_ms,size` rows, sorted by (flow, seq);
    /// lost packets leave `recv_ms` empty. Stable byte-for-byte for a given
    /// log, which is what batch replay compares.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "flow,seq,sent_ms,recv_ms,size")?;
        for (flow_id, entries) in &self.flows {
            for (seq, entry) in entries {
                let recv = match entry.outcome {
                    Some(DeliveryOutcome::ReceivedAt(t)) => format!("{t}"),
                    _ => String::new(),
                };
                writeln!(
                    w,
                    "{flow_id},{seq},{},{recv},{}",
                    entry.sent_at_ms, entry.size_bytes
                )?;
            }
        }
        Ok(())
    }
}
