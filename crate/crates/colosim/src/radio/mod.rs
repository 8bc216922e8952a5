//! Reference virtual nodes: probe transmitters, SNR/SINR estimators and a
//! minimal BPSK packet modem, so traffic and measurements traverse the
//! sample-domain channel end to end.

mod estimator;
mod modem;
mod node;
mod probe;

pub use estimator::{
    estimate_sinr, estimate_sinr_with_lag, estimate_snr, estimate_snr_with_lag, SnrEstimate,
    SNR_REPORT_FLOOR_DB,
};
pub use modem::{
    acquire, crc32, demod_bits, modem_rx, modem_tx, DecodedFrame, ModemFrame, ModemReceiver,
    ACQUISITION_THRESHOLD, MAX_PAYLOAD_BYTES, MODEM_PREAMBLE_LEN,
};
pub use node::{Delivery, NodeContext, NodeHarness, NodeRole};
pub use probe::{node_probe_seed, PnProbe};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RadioError {
    #[error("probe not found: correlation metric {metric:.3} below threshold")]
    ProbeNotFound { metric: f64 },
    #[error("received window ({received} samples) does not match the probe length ({probe})")]
    LengthMismatch { probe: usize, received: usize },
    #[error("payload of {size} bytes exceeds the {MAX_PAYLOAD_BYTES}-byte frame limit")]
    PayloadTooLarge { size: usize },
    #[error("unknown node role {role:?}")]
    UnknownRole { role: String },
    #[error(
        "node {node} fell out of lock-step: {node_ticks} ticks vs {engine_blocks} engine blocks"
    )]
    TickStarvation {
        node: usize,
        node_ticks: u64,
        engine_blocks: u64,
    },
}
