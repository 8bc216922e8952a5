//! SINR matrix measurement and the relay-selection comparison.

use std::io::Write;

use num_complex::Complex64;

use super::matching::{max_weight_matching, random_assignment};
use super::{NetappsError, SinrMatrix};
use crate::channel::{Engine, EngineConfig, SampleBlock, TAP_SLOTS};
use crate::radio::{estimate_sinr_with_lag, node_probe_seed, PnProbe};
use crate::scenario::RfScenario;

/// One squad: candidate relays and the destinations they must cover.
#[derive(Clone, Debug)]
pub struct Squad {
    pub relays: Vec<usize>,
    pub destinations: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SquadReport {
    pub squad: usize,
    pub matching_mean_db: f64,
    pub random_mean_db: f64,
}

/// Measure the pairwise SINR matrix for a relay set: one probe epoch per
/// relay. `co_transmitters[e]` lists nodes transmitting their own probes
/// concurrently during epoch `e` (the interference environment). Any
/// undetectable pair aborts the measurement.
pub fn measure_sinr_matrix(
    engine: &mut Engine,
    relays: &[usize],
    destinations: &[usize],
    co_transmitters: &[Vec<usize>],
    probe_len: usize,
    seed: u64,
) -> Result<SinrMatrix, NetappsError> {
    let n = engine.config().n_nodes;
    let block = engine.config().block_size;
    // Capture the probe plus the full delay spread; the estimator finds the
    // channel's lag within it.
    let window = probe_len + TAP_SLOTS - 1;
    let blocks_needed = window.div_ceil(block);
    let mut weights = vec![vec![0.0; destinations.len()]; relays.len()];

    for (epoch, &relay) in relays.iter().enumerate() {
        let mut active: Vec<usize> = vec![relay];
        if let Some(co) = co_transmitters.get(epoch) {
            active.extend(co.iter().copied().filter(|&node| node != relay));
        }
        let probes: Vec<(usize, PnProbe)> = active
            .iter()
            .map(|&node| (node, PnProbe::new(node_probe_seed(seed, node), probe_len)))
            .collect();

        engine.reset();
        let mut captured: Vec<Vec<Complex64>> =
            vec![Vec::with_capacity(window); destinations.len()];
        for blk in 0..blocks_needed {
            let t0 = (blk * block) as u64;
            let tx_blocks: Vec<SampleBlock> = (0..n)
                .map(|node| match probes.iter().find(|(id, _)| *id == node) {
                    Some((_, probe)) => {
                        let samples = (0..block)
                            .map(|i| {
                                let pos = blk * block + i;
                                if pos < probe_len {
                                    probe.chip(pos)
                                } else {
                                    Complex64::new(0.0, 0.0)
                                }
                            })
                            .collect();
                        SampleBlock::new(node, t0, samples)
                    }
                    None => SampleBlock::silent(node, t0, block),
                })
                .collect();
            let out = engine.process_block(&tx_blocks)?;
            for (d, &dest) in destinations.iter().enumerate() {
                captured[d].extend_from_slice(&out[dest].samples);
            }
        }

        let relay_probe = &probes[0].1;
        for (d, &dest) in destinations.iter().enumerate() {
            let (est, _lag) =
                estimate_sinr_with_lag(relay_probe, &captured[d][..window], TAP_SLOTS - 1)
                    .map_err(|source| NetappsError::ProbeFailure {
                        relay,
                        destination: dest,
                        source,
                    })?;
            weights[epoch][d] = est.snr_db;
        }
    }
    SinrMatrix::new(weights)
}

/// Run the relay-selection comparison on a scenario's opening channel state:
/// measure each squad's SINR matrix under inter-squad interference, then
/// report the mean assigned SINR for maximum weighted matching vs. random
/// allocation. Deterministic for given seeds.
pub fn run_relay_experiment(
    scenario: &RfScenario,
    squads: &[Squad],
    block_size: usize,
    probe_len: usize,
    seed: u64,
) -> Result<Vec<SquadReport>, NetappsError> {
    let config = EngineConfig::new(scenario.n_nodes, scenario.sample_rate_hz, block_size, seed)
        .with_noise_dbfs(scenario.noise_power_dbfs);
    let mut engine = Engine::new(config)?;
    let first = &scenario.updates[0];
    engine.set_taps(
        &first.links,
        first.carrier_hz.unwrap_or(scenario.carrier_hz),
    )?;

    let mut reports = Vec::with_capacity(squads.len());
    for (s, squad) in squads.iter().enumerate() {
        // While squad s probes its e-th relay, every other squad's e-th relay
        // (mod its size) transmits too: inter-squad interference.
        let co: Vec<Vec<usize>> = (0..squad.relays.len())
            .map(|e| {
                squads
                    .iter()
                    .enumerate()
                    .filter(|(other, _)| *other != s)
                    .map(|(_, sq)| sq.relays[e % sq.relays.len()])
                    .collect()
            })
            .collect();
        let matrix = measure_sinr_matrix(
            &mut engine,
            &squad.relays,
            &squad.destinations,
            &co,
            probe_len,
            seed,
        )?;
        let matching = max_weight_matching(&matrix)?;
        let random = random_assignment(&matrix, seed ^ (s as u64))?;
        reports.push(SquadReport {
            squad: s,
            matching_mean_db: matrix.total(&matching) / matching.len() as f64,
            random_mean_db: matrix.total(&random) / random.len() as f64,
        });
    }
    Ok(reports)
}

/// Export `squad,strategy,mean_sinr_db` rows.
pub fn write_report_csv(reports: &[SquadReport], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "squad,strategy,mean_sinr_db")?;
    for r in reports {
        writeln!(w, "{},matching,{}", r.squad, r.matching_mean_db)?;
        writeln!(w, "{},random,{}", r.squad, r.random_mean_db)?;
    }
    Ok(())
}
