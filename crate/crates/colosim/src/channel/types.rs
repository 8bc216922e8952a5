//! Domain types and validation for the channel engine.

use num_complex::Complex64;
use thiserror::Error;

/// One complex baseband sample (dimensionless full-scale amplitude).
pub type ComplexSample = Complex64;

/// Length of the FIR delay line per directed pair.
pub const TAP_SLOTS: usize = 512;

/// Maximum number of non-zero taps per directed pair.
pub const MAX_ACTIVE_TAPS: usize = 4;

/// Cap on the number of directed channels an engine may carry.
pub const MAX_DIRECTED_PAIRS: usize = 65_535;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid config: {field}: {message}")]
    InvalidConfig {
        field: &'static str,
        message: String,
    },
    #[error("invalid taps for link {tx}->{rx}: {message}")]
    InvalidTaps {
        tx: usize,
        rx: usize,
        message: String,
    },
    #[error("unknown node id {node_id}")]
    UnknownNode { node_id: usize },
    #[error("block mismatch: {0}")]
    BlockMismatch(String),
    #[error("non-finite sample from node {node_id} at offset {index}")]
    NonFiniteSample { node_id: usize, index: usize },
}

/// One FIR tap: delay slot index plus complex gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub delay: u16,
    pub gain: Complex64,
}

impl Tap {
    pub fn new(delay: u16, gain: Complex64) -> Self {
        Tap { delay, gain }
    }
}

/// Sparse channel impulse response for one directed pair.
///
/// Taps must be sorted by strictly increasing delay, fit in the 512-slot
/// window, and number at most [`MAX_ACTIVE_TAPS`].
#[derive(Clone, Debug, PartialEq)]
pub struct CirTaps {
    pub tx: usize,
    pub rx: usize,
    pub taps: Vec<Tap>,
}

impl CirTaps {
    pub fn new(tx: usize, rx: usize, taps: Vec<Tap>) -> Self {
        CirTaps { tx, rx, taps }
    }

    /// Convenience: a single tap at `delay` with the given gain.
    pub fn single(tx: usize, rx: usize, delay: u16, gain: Complex64) -> Self {
        CirTaps {
            tx,
            rx,
            taps: vec![Tap::new(delay, gain)],
        }
    }

    pub fn validate(&self, n_nodes: usize) -> Result<(), ChannelError> {
        let err = |message: String| ChannelError::InvalidTaps {
            tx: self.tx,
            rx: self.rx,
            message,
        };
        if self.tx == self.rx {
            return Err(err("self-channel (tx == rx) is not allowed".into()));
        }
        if self.tx >= n_nodes {
            return Err(ChannelError::UnknownNode { node_id: self.tx });
        }
        if self.rx >= n_nodes {
            return Err(ChannelError::UnknownNode { node_id: self.rx });
        }
        if self.taps.len() > MAX_ACTIVE_TAPS {
            return Err(err(format!(
                "more than {MAX_ACTIVE_TAPS} non-zero taps ({} given)",
                self.taps.len()
            )));
        }
        let mut prev: Option<u16> = None;
        for tap in &self.taps {
            if usize::from(tap.delay) >= TAP_SLOTS {
                return Err(err(format!(
                    "tap index {} outside the {TAP_SLOTS}-slot window",
                    tap.delay
                )));
            }
            if let Some(p) = prev {
                if tap.delay <= p {
                    return Err(err(format!(
                        "tap delays must be strictly increasing ({p} then {})",
                        tap.delay
                    )));
                }
            }
            if !tap.gain.re.is_finite() || !tap.gain.im.is_finite() {
                return Err(err(format!("non-finite gain at delay {}", tap.delay)));
            }
            prev = Some(tap.delay);
        }
        Ok(())
    }
}

/// Engine construction parameters.
///
/// `noise_power_dbfs` holds one value per receiver; `f64::NEG_INFINITY`
/// means noise-free.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub n_nodes: usize,
    pub sample_rate_hz: f64,
    pub block_size: usize,
    pub noise_power_dbfs: Vec<f64>,
    pub rng_seed: u64,
}

impl EngineConfig {
    /// Noise-free configuration.
    pub fn new(n_nodes: usize, sample_rate_hz: f64, block_size: usize, rng_seed: u64) -> Self {
        EngineConfig {
            n_nodes,
            sample_rate_hz,
            block_size,
            noise_power_dbfs: vec![f64::NEG_INFINITY; n_nodes],
            rng_seed,
        }
    }

    /// Same noise power at every receiver.
    pub fn with_noise_dbfs(mut self, dbfs: f64) -> Self {
        self.noise_power_dbfs = vec![dbfs; self.n_nodes];
        self
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad =
            |field: &'static str, message: String| ChannelError::InvalidConfig { field, message };
        if self.n_nodes < 2 {
            return Err(bad(
                "n_nodes",
                format!("n_nodes >= 2 required, got {}", self.n_nodes),
            ));
        }
        let pairs = self.n_nodes * (self.n_nodes - 1);
        if pairs > MAX_DIRECTED_PAIRS {
            return Err(bad(
                "n_nodes",
                format!(
                    "{} nodes give {pairs} directed pairs, limit is {MAX_DIRECTED_PAIRS}",
                    self.n_nodes
                ),
            ));
        }
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(bad(
                "sample_rate_hz",
                format!("sample_rate_hz > 0 required, got {}", self.sample_rate_hz),
            ));
        }
        if self.block_size < 1 {
            return Err(bad("block_size", "block size B >= 1 required".into()));
        }
        if self.noise_power_dbfs.len() != self.n_nodes {
            return Err(bad(
                "noise_power_dbfs",
                format!(
                    "expected {} per-receiver entries, got {}",
                    self.n_nodes,
                    self.noise_power_dbfs.len()
                ),
            ));
        }
        for (j, p) in self.noise_power_dbfs.iter().enumerate() {
            if p.is_nan() || *p == f64::INFINITY {
                return Err(bad(
                    "noise_power_dbfs",
                    format!("receiver {j}: noise power must be finite or -inf"),
                ));
            }
        }
        Ok(())
    }
}

/// Receiver/transmitter tuning; links whose endpoints are tuned more than
/// half the sample rate away from the emulated carrier contribute nothing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeTuning {
    pub node_id: usize,
    pub tuned_freq_hz: f64,
}

impl NodeTuning {
    pub fn new(node_id: usize, tuned_freq_hz: f64) -> Self {
        NodeTuning {
            node_id,
            tuned_freq_hz,
        }
    }
}

/// One node's samples for one engine tick. `t0` is the absolute index of the
/// first sample and must be a multiple of the engine block size.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBlock {
    pub node_id: usize,
    pub t0: u64,
    pub samples: Vec<ComplexSample>,
}

impl SampleBlock {
    pub fn new(node_id: usize, t0: u64, samples: Vec<ComplexSample>) -> Self {
        SampleBlock {
            node_id,
            t0,
            samples,
        }
    }

    /// All-zero block, used by silent transmitters.
    pub fn silent(node_id: usize, t0: u64, len: usize) -> Self {
        SampleBlock {
            node_id,
            t0,
            samples: vec![Complex64::new(0.0, 0.0); len],
        }
    }
}
