//! Unit-power PN probe sequences.

use num_complex::Complex64;

use crate::rng::{domain, Key};

/// Deterministic +/-1 chip sequence with unit power per sample. The chip
/// signs come from a keyed counter, so probes with different seeds are
/// uncorrelated enough for projection-based SINR measurement.
#[derive(Clone, Debug)]
pub struct PnProbe {
    seed: u64,
    chips: Vec<Complex64>,
}

impl PnProbe {
    pub fn new(seed: u64, len: usize) -> Self {
        let key = Key::new(seed).word(domain::PN_CHIP);
        let chips = (0..len)
            .map(|i| {
                let sign = if key.bits(i as u64) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                };
                Complex64::new(sign, 0.0)
            })
            .collect();
        PnProbe { seed, chips }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn chips(&self) -> &[Complex64] {
        &self.chips
    }

    /// Chip at absolute position `i` within the probe.
    pub fn chip(&self, i: usize) -> Complex64 {
        self.chips[i]
    }
}

/// Probe seed assigned to a node within an experiment; distinct per node so
/// concurrent probes stay separable.
pub fn node_probe_seed(experiment_seed: u64, node_id: usize) -> u64 {
    Key::new(experiment_seed)
        .word(domain::PN_CHIP)
        .word(node_id as u64)
        .bits(0)
}
