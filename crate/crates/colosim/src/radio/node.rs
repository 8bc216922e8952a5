//! Node harnesses: the in-process stand-ins for radio nodes running a user
//! stack. One harness per node, one produce/consume pair per engine tick.

use std::collections::VecDeque;

use num_complex::Complex64;

use super::estimator::estimate_snr_with_lag;
use super::modem::{modem_tx, ModemFrame, ModemReceiver};
use super::probe::{node_probe_seed, PnProbe};
use super::RadioError;
use crate::channel::{SampleBlock, TAP_SLOTS};
use crate::traffic::{payload_byte, Packet};

/// What a node does each tick.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeRole {
    /// All-zero transmit blocks; receive path ignored.
    Silent,
    /// Emits this node's PN probe at the start of every probe epoch.
    ProbeTx,
    /// Listens for the probes of the given transmitters and logs SNR
    /// estimates once per epoch.
    ProbeRx { watch: Vec<usize> },
    /// Carries traffic-generator packets over the modem.
    ModemEndpoint,
}

impl NodeRole {
    /// Role names accepted in job documents and on the CLI.
    pub fn parse(role: &str) -> Result<NodeRole, RadioError> {
        match role {
            "silent" => Ok(NodeRole::Silent),
            "probe_tx" => Ok(NodeRole::ProbeTx),
            "probe_rx" => Ok(NodeRole::ProbeRx { watch: Vec::new() }),
            "modem_endpoint" => Ok(NodeRole::ModemEndpoint),
            other => Err(RadioError::UnknownRole {
                role: other.to_string(),
            }),
        }
    }
}

/// Shared per-experiment wiring parameters.
#[derive(Clone, Copy, Debug)]
pub struct NodeContext {
    pub sample_rate_hz: f64,
    pub block_size: usize,
    pub experiment_seed: u64,
    /// Probe epoch cadence for probe_tx/probe_rx roles.
    pub probe_period_ms: u64,
}

impl NodeContext {
    pub fn probe_period_samples(&self) -> u64 {
        ((self.probe_period_ms as f64 / 1000.0 * self.sample_rate_hz).round() as u64).max(1)
    }

    pub fn probe_len(&self) -> usize {
        (self.probe_period_samples() as usize).min(10_000)
    }

    /// Receive window per probe epoch: the probe plus room for the channel's
    /// delay spread, clamped to the epoch.
    pub fn probe_window(&self) -> usize {
        (self.probe_len() + TAP_SLOTS - 1).min(self.probe_period_samples() as usize)
    }
}

/// A packet delivery observed by a receiving node.
#[derive(Clone, Debug, PartialEq)]
pub struct Delivery {
    pub flow_id: u32,
    pub seq: u64,
    pub dst_node: usize,
    pub received_at_ms: f64,
}

/// One SNR reading taken by a probe_rx node.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrReading {
    pub t_ms: f64,
    pub tx_node: usize,
    /// `None` when the probe was not found.
    pub snr_db: Option<f64>,
}

pub struct NodeHarness {
    node_id: usize,
    role: NodeRole,
    ctx: NodeContext,
    ticks: u64,
    own_probe: PnProbe,
    watch_probes: Vec<(usize, PnProbe)>,
    epoch_window: Vec<Complex64>,
    readings: Vec<SnrReading>,
    outbox: VecDeque<Packet>,
    tx_queue: VecDeque<Complex64>,
    receiver: ModemReceiver,
    events: Vec<String>,
}

impl NodeHarness {
    pub fn new(node_id: usize, role: NodeRole, ctx: NodeContext) -> Self {
        let probe_len = ctx.probe_len();
        let own_probe = PnProbe::new(node_probe_seed(ctx.experiment_seed, node_id), probe_len);
        let watch_probes = match &role {
            NodeRole::ProbeRx { watch } => watch
                .iter()
                .map(|&tx| {
                    (
                        tx,
                        PnProbe::new(node_probe_seed(ctx.experiment_seed, tx), probe_len),
                    )
                })
                .collect(),
            _ => Vec::new(),
        };
        NodeHarness {
            node_id,
            role,
            ctx,
            ticks: 0,
            own_probe,
            watch_probes,
            epoch_window: vec![Complex64::new(0.0, 0.0); ctx.probe_window()],
            readings: Vec::new(),
            outbox: VecDeque::new(),
            tx_queue: VecDeque::new(),
            receiver: ModemReceiver::new(),
            events: Vec::new(),
        }
    }

    pub fn node_id(&self) -> usize {
        self.node_id
    }

    pub fn role(&self) -> &NodeRole {
        &self.role
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn readings(&self) -> &[SnrReading] {
        &self.readings
    }

    pub fn frames_dropped(&self) -> usize {
        self.receiver.dropped()
    }

    fn now_ms(&self, sample: u64) -> f64 {
        sample as f64 / self.ctx.sample_rate_hz * 1000.0
    }

    fn log(&mut self, t_ms: f64, message: String) {
        self.events.push(format!("[{t_ms:.3} ms] {message}"));
    }

    /// Hand the node a packet to carry. Packets a modem frame cannot hold and
    /// packets given to non-modem roles are dropped here; the flow log then
    /// counts them lost.
    pub fn enqueue_packet(&mut self, packet: &Packet) {
        let t = packet.sent_at_ms;
        let (flow, seq) = (packet.flow_id, packet.seq);
        match self.role {
            NodeRole::ModemEndpoint => {
                if packet.size_bytes > super::modem::MAX_PAYLOAD_BYTES {
                    self.log(t, format!("dropping packet flow={flow} seq={seq}: {} B exceeds the modem frame limit", packet.size_bytes));
                } else {
                    self.outbox.push_back(packet.clone());
                }
            }
            _ => {
                self.log(
                    t,
                    format!("dropping packet flow={flow} seq={seq}: role cannot transmit"),
                );
            }
        }
    }

    /// Transmit samples for the block starting at absolute sample `t0`.
    pub fn produce(&mut self, t0: u64) -> Vec<Complex64> {
        let b = self.ctx.block_size;
        let zero = Complex64::new(0.0, 0.0);
        match &self.role {
            NodeRole::Silent | NodeRole::ProbeRx { .. } => vec![zero; b],
            NodeRole::ProbeTx => {
                let period = self.ctx.probe_period_samples();
                let len = self.own_probe.len() as u64;
                let mut out = Vec::with_capacity(b);
                for i in 0..b as u64 {
                    let phase = (t0 + i) % period;
                    if phase < len {
                        out.push(self.own_probe.chip(phase as usize));
                    } else {
                        out.push(zero);
                    }
                    if phase == 0 {
                        let t = self.now_ms(t0 + i);
                        self.log(t, "probe epoch start".to_string());
                    }
                }
                out
            }
            NodeRole::ModemEndpoint => {
                let mut out = Vec::with_capacity(b);
                for _ in 0..b {
                    if self.tx_queue.is_empty() {
                        if let Some(packet) = self.outbox.pop_front() {
                            let frame = packet_to_frame(&packet);
                            // Frame sizes are capped well under the payload
                            // limit by the traffic validator.
                            let samples = modem_tx(&frame).expect("frame within payload limit");
                            self.tx_queue.extend(samples);
                            let t = packet.sent_at_ms;
                            self.log(t, format!("tx flow={} seq={}", packet.flow_id, packet.seq));
                        }
                    }
                    out.push(self.tx_queue.pop_front().unwrap_or(zero));
                }
                out
            }
        }
    }

    /// Absorb the received block for the tick; returns any packet deliveries
    /// destined to this node.
    pub fn consume(&mut self, block: &SampleBlock) -> Vec<Delivery> {
        let mut deliveries = Vec::new();
        match &self.role {
            NodeRole::Silent | NodeRole::ProbeTx => {}
            NodeRole::ProbeRx { .. } => {
                let period = self.ctx.probe_period_samples();
                let window = self.epoch_window.len() as u64;
                let max_lag = self.epoch_window.len() - self.ctx.probe_len();
                for (i, s) in block.samples.iter().enumerate() {
                    let abs = block.t0 + i as u64;
                    let phase = abs % period;
                    if phase < window {
                        self.epoch_window[phase as usize] = *s;
                    }
                    if phase == window - 1 {
                        let t = self.now_ms(abs);
                        let epoch_readings: Vec<SnrReading> = self
                            .watch_probes
                            .iter()
                            .map(|(tx, probe)| {
                                match estimate_snr_with_lag(probe, &self.epoch_window, max_lag) {
                                    Ok((est, _)) => SnrReading {
                                        t_ms: t,
                                        tx_node: *tx,
                                        snr_db: Some(est.snr_db),
                                    },
                                    Err(_) => SnrReading {
                                        t_ms: t,
                                        tx_node: *tx,
                                        snr_db: None,
                                    },
                                }
                            })
                            .collect();
                        for r in &epoch_readings {
                            match r.snr_db {
                                Some(db) => self.log(t, format!("snr tx={} {db:.2} dB", r.tx_node)),
                                None => {
                                    self.log(t, format!("snr tx={} probe not found", r.tx_node))
                                }
                            }
                        }
                        self.readings.extend(epoch_readings);
                    }
                }
            }
            NodeRole::ModemEndpoint => {
                for decoded in self.receiver.push(&block.samples) {
                    if let Some((flow_id, seq, _src, dst)) = frame_to_packet(&decoded.frame) {
                        let t = self.now_ms(decoded.end_sample);
                        if dst as usize == self.node_id {
                            self.log(t, format!("rx flow={flow_id} seq={seq}"));
                            deliveries.push(Delivery {
                                flow_id,
                                seq: seq as u64,
                                dst_node: dst as usize,
                                received_at_ms: t,
                            });
                        }
                    }
                }
            }
        }
        self.ticks += 1;
        deliveries
    }
}

const PACKET_HEADER_BYTES: usize = 12;

/// Serialize a packet into a frame payload: 12-byte header followed by
/// deterministic filler up to the declared size.
fn packet_to_frame(packet: &Packet) -> ModemFrame {
    let total = packet.size_bytes.max(PACKET_HEADER_BYTES);
    let mut payload = Vec::with_capacity(total);
    payload.extend_from_slice(&packet.flow_id.to_le_bytes());
    payload.extend_from_slice(&(packet.seq as u32).to_le_bytes());
    payload.extend_from_slice(&(packet.src_node as u16).to_le_bytes());
    payload.extend_from_slice(&(packet.dst_node as u16).to_le_bytes());
    for i in PACKET_HEADER_BYTES..total {
        payload.push(payload_byte(packet.flow_id, packet.seq, i));
    }
    ModemFrame::new(payload)
}

fn frame_to_packet(frame: &ModemFrame) -> Option<(u32, u32, u16, u16)> {
    let p = &frame.payload;
    if p.len() < PACKET_HEADER_BYTES {
        return None;
    }
    let flow_id = u32::from_le_bytes(p[0..4].try_into().unwrap());
    let seq = u32::from_le_bytes(p[4..8].try_into().unwrap());
    let src = u16::from_le_bytes(p[8..10].try_into().unwrap());
    let dst = u16::from_le_bytes(p[10..12].try_into().unwrap());
    Some((flow_id, seq, src, dst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> NodeContext {
        NodeContext {
            sample_rate_hz: 100_000.0,
            block_size: 512,
            experiment_seed: 7,
            probe_period_ms: 100,
        }
    }

    #[test]
    fn silent_role_is_all_zero() {
        let mut node = NodeHarness::new(0, NodeRole::Silent, ctx());
        let out = node.produce(0);
        assert!(out.iter().all(|s| *s == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn probe_tx_emits_every_period() {
        let c = ctx();
        let mut node = NodeHarness::new(0, NodeRole::ProbeTx, c);
        let period = c.probe_period_samples();
        assert_eq!(period, 10_000);
        let mut stream = Vec::new();
        for blk in 0..((period * 2) / c.block_size as u64) {
            stream.extend(node.produce(blk * c.block_size as u64));
        }
        // Epoch starts at samples 0 and period are probe chips.
        let probe = PnProbe::new(node_probe_seed(7, 0), c.probe_len());
        assert_eq!(stream[0], probe.chip(0));
        assert_eq!(stream[period as usize], probe.chip(0));
        assert_eq!(
            node.events()
                .iter()
                .filter(|e| e.contains("probe epoch"))
                .count(),
            2
        );
    }

    #[test]
    fn modem_endpoints_carry_packets_end_to_end() {
        let c = NodeContext {
            sample_rate_hz: 100_000.0,
            block_size: 512,
            experiment_seed: 7,
            probe_period_ms: 100,
        };
        let mut tx = NodeHarness::new(0, NodeRole::ModemEndpoint, c);
        let mut rx = NodeHarness::new(1, NodeRole::ModemEndpoint, c);
        let packet = Packet {
            flow_id: 4,
            seq: 9,
            src_node: 0,
            dst_node: 1,
            size_bytes: 256,
            sent_at_ms: 0.0,
        };
        tx.enqueue_packet(&packet);
        let mut deliveries = Vec::new();
        for blk in 0..10u64 {
            let t0 = blk * 512;
            let samples = tx.produce(t0);
            // Identity channel: hand the block straight over.
            let block = SampleBlock::new(1, t0, samples);
            deliveries.extend(rx.consume(&block));
            tx.consume(&SampleBlock::silent(0, t0, 512));
        }
        assert_eq!(deliveries.len(), 1);
        assert_eq!(deliveries[0].flow_id, 4);
        assert_eq!(deliveries[0].seq, 9);
        assert!(deliveries[0].received_at_ms > 0.0);
        assert_eq!(tx.ticks(), 10);
        assert_eq!(rx.ticks(), 10);
    }

    #[test]
    fn non_modem_role_drops_traffic() {
        let mut node = NodeHarness::new(2, NodeRole::Silent, ctx());
        let packet = Packet {
            flow_id: 1,
            seq: 0,
            src_node: 2,
            dst_node: 0,
            size_bytes: 64,
            sent_at_ms: 5.0,
        };
        node.enqueue_packet(&packet);
        assert!(node.events().iter().any(|e| e.contains("cannot transmit")));
    }

    #[test]
    fn oversize_packet_dropped_not_panicked() {
        let mut node = NodeHarness::new(0, NodeRole::ModemEndpoint, ctx());
        let packet = Packet {
            flow_id: 1,
            seq: 0,
            src_node: 0,
            dst_node: 1,
            size_bytes: 60_000,
            sent_at_ms: 0.0,
        };
        node.enqueue_packet(&packet);
        let out = node.produce(0);
        assert!(
            out.iter().all(|s| *s == Complex64::new(0.0, 0.0)),
            "nothing goes on air"
        );
        assert!(node
            .events()
            .iter()
            .any(|e| e.contains("modem frame limit")));
    }

    #[test]
    fn probe_rx_reads_snr_through_identity_channel() {
        let c = NodeContext {
            sample_rate_hz: 100_000.0,
            block_size: 1000,
            experiment_seed: 7,
            probe_period_ms: 100,
        };
        let mut tx = NodeHarness::new(0, NodeRole::ProbeTx, c);
        let mut rx = NodeHarness::new(1, NodeRole::ProbeRx { watch: vec![0] }, c);
        for blk in 0..10u64 {
            let t0 = blk * 1000;
            let samples = tx.produce(t0);
            rx.consume(&SampleBlock::new(1, t0, samples));
            tx.consume(&SampleBlock::silent(0, t0, 1000));
        }
        let readings = rx.readings();
        assert!(!readings.is_empty());
        // Identity, noise-free: floor-limited 60 dB.
        assert_eq!(readings[0].snr_db, Some(60.0));
    }

    #[test]
    fn packet_frame_round_trip() {
        let packet = Packet {
            flow_id: 77,
            seq: 1234,
            src_node: 3,
            dst_node: 5,
            size_bytes: 100,
            sent_at_ms: 0.0,
        };
        let frame = packet_to_frame(&packet);
        assert_eq!(frame.payload.len(), 100);
        let (flow, seq, src, dst) = frame_to_packet(&frame).unwrap();
        assert_eq!((flow, seq, src, dst), (77, 1234, 3, 5));
    }

    #[test]
    fn tiny_packets_still_carry_the_header() {
        let packet = Packet {
            flow_id: 1,
            seq: 0,
            src_node: 0,
            dst_node: 1,
            size_bytes: 4,
            sent_at_ms: 0.0,
        };
        let frame = packet_to_frame(&packet);
        assert_eq!(frame.payload.len(), PACKET_HEADER_BYTES);
    }
}
