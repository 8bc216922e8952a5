//! Shared test oracles and generators. Everything here is independent of the
//! implementation paths it checks: convolution by direct summation over the
//! whole stream, matching by permutation enumeration, randomness from the
//! same keyed counters the library exposes.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)] // oracle code is deliberately index-style

use num_complex::Complex64;

use colosim::channel::{CirTaps, Engine, SampleBlock, Tap, TAP_SLOTS};
use colosim::radio::{estimate_snr_with_lag, PnProbe, RadioError, SnrEstimate};
use colosim::rng::Key;

/// Direct convolution oracle: y_j[n] = sum_i sum_(k,g) g * x_i[n-k] computed
/// over the whole stream at once, no blocks, no history buffers.
pub fn direct_convolution(
    n_nodes: usize,
    links: &[CirTaps],
    inputs: &[Vec<Complex64>],
) -> Vec<Vec<Complex64>> {
    let len = inputs[0].len();
    let mut outputs = vec![vec![Complex64::new(0.0, 0.0); len]; n_nodes];
    for rx in 0..n_nodes {
        for tx in 0..n_nodes {
            if tx == rx {
                continue;
            }
            for link in links.iter().filter(|l| l.tx == tx && l.rx == rx) {
                for tap in &link.taps {
                    let k = usize::from(tap.delay);
                    for n in k..len {
                        outputs[rx][n] += tap.gain * inputs[tx][n - k];
                    }
                }
            }
        }
    }
    outputs
}

/// Drive a full input stream through the engine in blocks, returning each
/// node's received stream trimmed to the input length.
pub fn run_engine_stream(engine: &mut Engine, inputs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = inputs.len();
    let b = engine.config().block_size;
    let len = inputs[0].len();
    let blocks = len.div_ceil(b);
    let mut outputs = vec![Vec::with_capacity(blocks * b); n];
    for blk in 0..blocks {
        let t0 = engine.clock();
        let tx: Vec<SampleBlock> = (0..n)
            .map(|i| {
                let samples = (0..b)
                    .map(|s| {
                        *inputs[i]
                            .get(blk * b + s)
                            .unwrap_or(&Complex64::new(0.0, 0.0))
                    })
                    .collect();
                SampleBlock::new(i, t0, samples)
            })
            .collect();
        let out = engine
            .process_block(&tx)
            .expect("engine accepts well-formed blocks");
        for i in 0..n {
            outputs[i].extend_from_slice(&out[i].samples);
        }
    }
    for o in &mut outputs {
        o.truncate(len);
    }
    outputs
}

/// Random sparse link set over all directed pairs with up to 4 taps each.
pub fn random_links(key: Key, n_nodes: usize) -> Vec<CirTaps> {
    let mut links = Vec::new();
    for tx in 0..n_nodes {
        for rx in 0..n_nodes {
            if tx == rx {
                continue;
            }
            let pair_key = key.word(tx as u64).word(rx as u64);
            if pair_key.uniform01(100) < 0.3 {
                continue; // leave some pairs as zero channels
            }
            let n_taps = 1 + (pair_key.bits(101) % 4) as usize;
            let mut delays: Vec<u16> = Vec::new();
            let mut probe = 0u64;
            while delays.len() < n_taps {
                let d = (pair_key.bits(200 + probe) % TAP_SLOTS as u64) as u16;
                probe += 1;
                if !delays.contains(&d) {
                    delays.push(d);
                }
            }
            delays.sort_unstable();
            let taps = delays
                .iter()
                .enumerate()
                .map(|(m, &d)| {
                    let re = pair_key.uniform01(300 + m as u64) * 2.0 - 1.0;
                    let im = pair_key.uniform01(400 + m as u64) * 2.0 - 1.0;
                    Tap::new(d, Complex64::new(re, im))
                })
                .collect();
            links.push(CirTaps::new(tx, rx, taps));
        }
    }
    links
}

/// Random complex input stream, components uniform in [-1, 1].
pub fn random_stream(key: Key, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| {
            let k = key.word(i as u64);
            Complex64::new(k.uniform01(0) * 2.0 - 1.0, k.uniform01(1) * 2.0 - 1.0)
        })
        .collect()
}

/// Unit-power white stream (random +/-1, +/-i chips).
pub fn white_unit_stream(key: Key, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| match key.word(i as u64).bits(0) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(-1.0, 0.0),
            2 => Complex64::new(0.0, 1.0),
            _ => Complex64::new(0.0, -1.0),
        })
        .collect()
}

/// Measure one link's SNR through the engine with a PN probe: `tx` transmits
/// the probe, everyone else stays silent, `rx` estimates over a window wide
/// enough for any tap delay. The engine clock advances by the blocks used.
pub fn measure_link_snr(
    engine: &mut Engine,
    tx: usize,
    rx: usize,
    probe_seed: u64,
    probe_len: usize,
) -> Result<SnrEstimate, RadioError> {
    let n = engine.config().n_nodes;
    let b = engine.config().block_size;
    let probe = PnProbe::new(probe_seed, probe_len);
    let window = probe_len + TAP_SLOTS - 1;
    let blocks = window.div_ceil(b);
    let mut captured = Vec::with_capacity(blocks * b);
    for blk in 0..blocks {
        let t0 = engine.clock();
        let tx_blocks: Vec<SampleBlock> = (0..n)
            .map(|node| {
                if node == tx {
                    let samples = (0..b)
                        .map(|s| {
                            let pos = blk * b + s;
                            if pos < probe_len {
                                probe.chip(pos)
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        })
                        .collect();
                    SampleBlock::new(node, t0, samples)
                } else {
                    SampleBlock::silent(node, t0, b)
                }
            })
            .collect();
        let out = engine
            .process_block(&tx_blocks)
            .expect("well-formed blocks");
        captured.extend_from_slice(&out[rx].samples);
    }
    estimate_snr_with_lag(&probe, &captured[..window], TAP_SLOTS - 1).map(|(est, _)| est)
}

/// Exhaustive maximum-weight assignment by trying every injective map of
/// rows into columns. Exponential, fine for rows <= 7.
pub fn brute_force_best_total(weights: &[Vec<f64>]) -> f64 {
    fn recurse(weights: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == weights.len() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for col in 0..weights[0].len() {
            if !used[col] {
                used[col] = true;
                let total = weights[row][col] + recurse(weights, row + 1, used);
                used[col] = false;
                if total > best {
                    best = total;
                }
            }
        }
        best
    }
    let mut used = vec![false; weights[0].len()];
    recurse(weights, 0, &mut used)
}

/// Gaussian tail probability Q(x) via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Random but always-valid RF scenario, fully determined by the key.
pub fn random_scenario(key: Key) -> colosim::scenario::RfScenario {
    use colosim::scenario::{RfScenario, TapUpdate};
    let n_nodes = 2 + (key.bits(0) % 5) as usize;
    let duration_ms = 1_000 + key.bits(1) % 600_000;
    let n_updates = 1 + (key.bits(2) % 4) as usize;
    let mut t = 0u64;
    let updates: Vec<TapUpdate> = (0..n_updates)
        .map(|u| {
            let uk = key.word(10 + u as u64);
            let update = TapUpdate {
                t_ms: t,
                carrier_hz: if uk.bits(0).is_multiple_of(3) {
                    Some(0.9e9 + uk.uniform01(1) * 0.4e9)
                } else {
                    None
                },
                links: random_links(uk.word(2), n_nodes),
            };
            t += 1 + uk.bits(3) % ((duration_ms - t) / (n_updates as u64) + 1).max(1);
            update
        })
        .collect();
    RfScenario {
        id: format!("gen_{:08x}", key.bits(99)),
        n_nodes,
        duration_ms,
        sample_rate_hz: 1e5 + key.uniform01(4) * 9.9e7,
        carrier_hz: 0.5e9 + key.uniform01(5) * 5e9,
        noise_power_dbfs: if key.bits(6).is_multiple_of(4) {
            f64::NEG_INFINITY
        } else {
            -120.0 + key.uniform01(7) * 100.0
        },
        updates,
    }
}
