//! The block-processing engine.

use num_complex::Complex64;

use super::types::{ChannelError, CirTaps, EngineConfig, NodeTuning, SampleBlock, Tap, TAP_SLOTS};
use crate::rng::{domain, Key};
use crate::SPEED_OF_LIGHT_M_S;

/// Longest emulable propagation delay for a configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayBudget {
    pub seconds: f64,
    pub meters: f64,
}

impl EngineConfig {
    /// Delay budget of the 512-slot window: (TAP_SLOTS - 1) / fs, and the
    /// distance light covers in that time.
    pub fn max_emulable_delay(&self) -> DelayBudget {
        let seconds = (TAP_SLOTS - 1) as f64 / self.sample_rate_hz;
        DelayBudget {
            seconds,
            meters: seconds * SPEED_OF_LIGHT_M_S,
        }
    }
}

struct PendingUpdate {
    links: Vec<CirTaps>,
    carrier_hz: f64,
}

/// Deterministic sample-domain channel engine.
///
/// A single logical writer drives the engine block by block. Receivers are
/// mutually independent; the implementation keeps the sequential reference
/// order (transmitters ascending, taps ascending) so results are reproducible
/// bit for bit.
///
/// ```
/// use colosim::channel::{CirTaps, Engine, EngineConfig, SampleBlock};
/// use num_complex::Complex64;
///
/// let mut engine = Engine::new(EngineConfig::new(2, 1e6, 256, 7))?;
/// engine.set_taps(&[CirTaps::single(0, 1, 100, Complex64::new(0.5, 0.0))], 1e9)?;
/// let mut tx0 = SampleBlock::silent(0, 0, 256);
/// tx0.samples[0] = Complex64::new(1.0, 0.0);
/// let out = engine.process_block(&[tx0, SampleBlock::silent(1, 0, 256)])?;
/// assert_eq!(out[1].samples[100], Complex64::new(0.5, 0.0));
/// # Ok::<(), colosim::channel::ChannelError>(())
/// ```
pub struct Engine {
    config: EngineConfig,
    /// Flattened tap table, index `tx * n + rx`; empty = all-zero channel.
    taps: Vec<Vec<Tap>>,
    carrier_hz: f64,
    pending: Vec<PendingUpdate>,
    /// `None` means the node tracks the emulated carrier.
    tuning: Vec<Option<f64>>,
    /// Last `TAP_SLOTS - 1` input samples per transmitter, oldest first.
    history: Vec<Vec<Complex64>>,
    /// Per-receiver linear noise amplitude per complex sample (0 = off).
    noise_sigma: Vec<f64>,
    clock: u64,
    tap_visits: u64,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self, ChannelError> {
        config.validate()?;
        let n = config.n_nodes;
        let noise_sigma = config
            .noise_power_dbfs
            .iter()
            .map(|&dbfs| {
                if dbfs == f64::NEG_INFINITY {
                    0.0
                } else {
                    10f64.powf(dbfs / 20.0)
                }
            })
            .collect();
        Ok(Engine {
            taps: vec![Vec::new(); n * n],
            carrier_hz: 0.0,
            pending: Vec::new(),
            tuning: vec![None; n],
            history: vec![vec![Complex64::new(0.0, 0.0); TAP_SLOTS - 1]; n],
            noise_sigma,
            clock: 0,
            tap_visits: 0,
            config,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Absolute sample index of the next block boundary.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Emulated carrier currently in effect.
    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    /// Total tap multiply-accumulates performed so far. One visit is one
    /// (receiver, transmitter, tap, sample) product, so cost stays O(N * 4)
    /// per receiver per sample rather than O(N * 512).
    pub fn tap_visits(&self) -> u64 {
        self.tap_visits
    }

    /// Stage a tap update. It takes effect at the next block boundary,
    /// atomically for the whole list, together with the new carrier.
    pub fn set_taps(&mut self, updates: &[CirTaps], carrier_hz: f64) -> Result<(), ChannelError> {
        for u in updates {
            u.validate(self.config.n_nodes)?;
        }
        if !carrier_hz.is_finite() {
            return Err(ChannelError::InvalidConfig {
                field: "carrier_hz",
                message: format!("carrier must be finite, got {carrier_hz}"),
            });
        }
        self.pending.push(PendingUpdate {
            links: updates.to_vec(),
            carrier_hz,
        });
        Ok(())
    }

    /// Set node tunings. Effective from the next processed block.
    pub fn set_tuning(&mut self, tunings: &[NodeTuning]) -> Result<(), ChannelError> {
        for t in tunings {
            if t.node_id >= self.config.n_nodes {
                return Err(ChannelError::UnknownNode { node_id: t.node_id });
            }
            if !t.tuned_freq_hz.is_finite() || t.tuned_freq_hz <= 0.0 {
                return Err(ChannelError::InvalidConfig {
                    field: "tuned_freq_hz",
                    message: format!("node {}: tuned frequency must be > 0", t.node_id),
                });
            }
        }
        for t in tunings {
            self.tuning[t.node_id] = Some(t.tuned_freq_hz);
        }
        Ok(())
    }

    /// Clear histories and the sample clock; taps, tunings, and any staged
    /// updates are retained.
    pub fn reset(&mut self) {
        for h in &mut self.history {
            h.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
        }
        self.clock = 0;
    }

    /// Jump the clock to `sample` (a block boundary at or after the current
    /// clock) as if silence had been fed in and the outputs discarded. Since
    /// noise is keyed on absolute sample index, later output is identical to
    /// having actually processed the silence.
    pub fn skip_to(&mut self, sample: u64) -> Result<(), ChannelError> {
        let b = self.config.block_size as u64;
        if sample < self.clock || !sample.is_multiple_of(b) {
            return Err(ChannelError::BlockMismatch(format!(
                "cannot skip to sample {sample} from clock {} with block size {b}",
                self.clock
            )));
        }
        if sample > self.clock {
            self.apply_pending();
            for h in &mut self.history {
                h.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
            }
            self.clock = sample;
        }
        Ok(())
    }

    fn apply_pending(&mut self) {
        let n = self.config.n_nodes;
        for update in self.pending.drain(..) {
            for link in update.links {
                self.taps[link.tx * n + link.rx] = link.taps;
            }
            self.carrier_hz = update.carrier_hz;
        }
    }

    fn link_active(&self, tx: usize, rx: usize) -> bool {
        let half_band = self.config.sample_rate_hz / 2.0;
        let matched = |node: usize| match self.tuning[node] {
            None => true,
            Some(f) => (f - self.carrier_hz).abs() <= half_band,
        };
        matched(tx) && matched(rx)
    }

    /// Process one block: exactly one input block per node, all starting at
    /// the engine clock. Returns one output block per node at the same t0.
    pub fn process_block(
        &mut self,
        tx_blocks: &[SampleBlock],
    ) -> Result<Vec<SampleBlock>, ChannelError> {
        let n = self.config.n_nodes;
        let b = self.config.block_size;
        if tx_blocks.len() != n {
            return Err(ChannelError::BlockMismatch(format!(
                "expected {n} blocks (one per node), got {}",
                tx_blocks.len()
            )));
        }
        for (i, blk) in tx_blocks.iter().enumerate() {
            if blk.node_id != i {
                return Err(ChannelError::BlockMismatch(format!(
                    "block {i} carries node_id {}; blocks must be ordered by node",
                    blk.node_id
                )));
            }
            if blk.t0 != self.clock {
                return Err(ChannelError::BlockMismatch(format!(
                    "node {i}: t0 {} does not match engine clock {}",
                    blk.t0, self.clock
                )));
            }
            if blk.samples.len() != b {
                return Err(ChannelError::BlockMismatch(format!(
                    "node {i}: block length {} != configured {b}",
                    blk.samples.len()
                )));
            }
            for (idx, s) in blk.samples.iter().enumerate() {
                if !s.re.is_finite() || !s.im.is_finite() {
                    return Err(ChannelError::NonFiniteSample {
                        node_id: i,
                        index: idx,
                    });
                }
            }
        }

        self.apply_pending();

        // Extended input per transmitter: history followed by this block.
        let hist_len = TAP_SLOTS - 1;
        let ext: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let mut e = Vec::with_capacity(hist_len + b);
                e.extend_from_slice(&self.history[i]);
                e.extend_from_slice(&tx_blocks[i].samples);
                e
            })
            .collect();

        let zero = Complex64::new(0.0, 0.0);
        let mut outputs = Vec::with_capacity(n);
        let mut contribution = vec![zero; b];
        for rx in 0..n {
            let mut out = vec![zero; b];
            #[allow(clippy::needless_range_loop)] // tx drives the tap-table lookup
            for tx in 0..n {
                if tx == rx {
                    continue;
                }
                let taps = &self.taps[tx * n + rx];
                if taps.is_empty() || !self.link_active(tx, rx) {
                    continue;
                }
                // Per-transmitter subtotal keeps superposition exact: the
                // all-active output equals the elementwise sum of solo runs.
                contribution.iter_mut().for_each(|s| *s = zero);
                let src = &ext[tx];
                for tap in taps {
                    let g = tap.gain;
                    let base = hist_len - usize::from(tap.delay);
                    for (dst, x) in contribution.iter_mut().zip(&src[base..base + b]) {
                        *dst += g * x;
                    }
                    self.tap_visits += b as u64;
                }
                for (o, c) in out.iter_mut().zip(&contribution) {
                    *o += c;
                }
            }
            let sigma = self.noise_sigma[rx];
            if sigma > 0.0 {
                let key = Key::new(self.config.rng_seed)
                    .word(domain::NOISE)
                    .word(rx as u64);
                for (offset, o) in out.iter_mut().enumerate() {
                    *o += sigma * key.word(self.clock + offset as u64).complex_normal();
                }
            }
            outputs.push(SampleBlock::new(rx, self.clock, out));
        }

        for (history, extended) in self.history.iter_mut().zip(&ext) {
            history.copy_from_slice(&extended[b..b + hist_len]);
        }
        self.clock += b as u64;
        Ok(outputs)
    }
}
