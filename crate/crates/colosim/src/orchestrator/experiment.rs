//! Experiment lifecycle: run an engine + nodes + traffic wiring to
//! completion, then archive the log tree under an immutable manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::playback::ScenarioPlayer;
use super::OrchestratorError;
use crate::channel::{Engine, EngineConfig, IqDumpWriter};
use crate::radio::{NodeContext, NodeHarness, NodeRole};
use crate::scenario::{serialize_rf_scenario, RfScenario, TrafficScenario};
use crate::traffic::{schedule, DeliveryOutcome, FlowLog, FlowMetrics};

pub struct ExperimentSpec {
    pub experiment_id: String,
    pub rf: RfScenario,
    pub traffic: Option<TrafficScenario>,
    /// One role per scenario node; shorter lists are padded with `Silent`.
    pub roles: Vec<NodeRole>,
    pub duration_ms: u64,
    pub seed: u64,
    pub block_size: usize,
    pub probe_period_ms: u64,
    pub dump_iq: bool,
}

impl ExperimentSpec {
    pub fn new(
        experiment_id: impl Into<String>,
        rf: RfScenario,
        duration_ms: u64,
        seed: u64,
    ) -> Self {
        ExperimentSpec {
            experiment_id: experiment_id.into(),
            rf,
            traffic: None,
            roles: Vec::new(),
            duration_ms,
            seed,
            block_size: 2048,
            probe_period_ms: 100,
            dump_iq: false,
        }
    }
}

pub struct ExperimentOutcome {
    pub log_dir: PathBuf,
    pub metrics: BTreeMap<u32, FlowMetrics>,
    pub blocks: u64,
}

/// Run an experiment to completion, writing per-node logs, the flow CSV and
/// a canonical scenario copy into `work_dir`. Fully deterministic for a
/// given spec: the flow CSV replays byte for byte.
pub fn run_experiment(
    spec: &ExperimentSpec,
    work_dir: &Path,
) -> Result<ExperimentOutcome, OrchestratorError> {
    spec.rf.validate()?;
    if spec.duration_ms == 0 {
        return Err(OrchestratorError::Validation(
            "experiment duration must be > 0".into(),
        ));
    }
    if spec.duration_ms > spec.rf.duration_ms {
        return Err(OrchestratorError::Validation(format!(
            "experiment duration {} ms exceeds the scenario's {} ms",
            spec.duration_ms, spec.rf.duration_ms
        )));
    }
    let n = spec.rf.n_nodes;
    if spec.roles.len() > n {
        return Err(OrchestratorError::Validation(format!(
            "{} roles for a {n}-node scenario",
            spec.roles.len()
        )));
    }

    let mut roles = spec.roles.clone();
    roles.resize(n, NodeRole::Silent);
    // probe_rx nodes with no explicit watch list listen to every probe_tx.
    let probe_txs: Vec<usize> = roles
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == NodeRole::ProbeTx)
        .map(|(i, _)| i)
        .collect();
    for role in roles.iter_mut() {
        if let NodeRole::ProbeRx { watch } = role {
            if watch.is_empty() {
                *watch = probe_txs.clone();
            }
        }
    }

    let config = EngineConfig::new(n, spec.rf.sample_rate_hz, spec.block_size, spec.seed)
        .with_noise_dbfs(spec.rf.noise_power_dbfs);
    let mut engine = Engine::new(config)?;
    let mut player = ScenarioPlayer::new(&spec.rf, &engine)?;

    let ctx = NodeContext {
        sample_rate_hz: spec.rf.sample_rate_hz,
        block_size: spec.block_size,
        experiment_seed: spec.seed,
        probe_period_ms: spec.probe_period_ms,
    };
    let mut nodes: Vec<NodeHarness> = roles
        .iter()
        .enumerate()
        .map(|(i, role)| NodeHarness::new(i, role.clone(), ctx))
        .collect();

    let packets = match &spec.traffic {
        Some(traffic) => schedule(traffic, spec.seed).events(spec.duration_ms),
        None => Vec::new(),
    };
    let mut next_packet = 0usize;
    let mut log = FlowLog::new();

    fs::create_dir_all(work_dir)?;
    let mut iq_writers: Vec<Option<IqDumpWriter>> = if spec.dump_iq {
        (0..n)
            .map(|i| IqDumpWriter::create(work_dir, i).map(Some))
            .collect::<Result<_, _>>()?
    } else {
        (0..n).map(|_| None).collect()
    };

    let fs_hz = spec.rf.sample_rate_hz;
    let total_samples = (spec.duration_ms as f64 / 1000.0 * fs_hz).ceil() as u64;
    let blocks = total_samples.div_ceil(spec.block_size as u64);

    for _ in 0..blocks {
        player.stage_due(&mut engine)?;
        let t0 = engine.clock();
        let block_end_ms = (t0 + spec.block_size as u64) as f64 / fs_hz * 1000.0;
        while next_packet < packets.len() && packets[next_packet].sent_at_ms < block_end_ms {
            let packet = &packets[next_packet];
            log.record_send(packet);
            if packet.src_node < n {
                nodes[packet.src_node].enqueue_packet(packet);
            }
            next_packet += 1;
        }

        let tx_blocks: Vec<_> = nodes
            .iter_mut()
            .map(|node| crate::channel::SampleBlock::new(node.node_id(), t0, node.produce(t0)))
            .collect();
        let rx_blocks = engine.process_block(&tx_blocks)?;
        for (node, rx) in nodes.iter_mut().zip(&rx_blocks) {
            if let Some(w) = iq_writers[rx.node_id].as_mut() {
                w.write(&rx.samples)?;
            }
            for delivery in node.consume(rx) {
                log.record_delivery(
                    delivery.flow_id,
                    delivery.seq,
                    DeliveryOutcome::ReceivedAt(delivery.received_at_ms),
                )?;
            }
        }
    }

    // Lock-step check: every node must have ticked once per engine block.
    for node in &nodes {
        if node.ticks() != blocks {
            return Err(crate::radio::RadioError::TickStarvation {
                node: node.node_id(),
                node_ticks: node.ticks(),
                engine_blocks: blocks,
            }
            .into());
        }
    }

    log.close();
    let metrics = log.metrics(spec.duration_ms)?;

    for node in &nodes {
        let dir = work_dir.join(format!("node{}", node.node_id()));
        fs::create_dir_all(&dir)?;
        let mut f = fs::File::create(dir.join("events.log"))?;
        for line in node.events() {
            writeln!(f, "{line}")?;
        }
    }
    let mut csv = fs::File::create(work_dir.join("flows.csv"))?;
    log.write_csv(&mut csv)?;
    fs::write(
        work_dir.join("scenario.rfscn"),
        serialize_rf_scenario(&spec.rf),
    )?;
    let metrics_doc: BTreeMap<String, serde_json::Value> = metrics
        .iter()
        .map(|(flow, m)| {
            (
                flow.to_string(),
                serde_json::json!({
                    "sent": m.sent,
                    "delivered": m.delivered,
                    "lost": m.lost,
                    "throughput_bps": m.throughput_bps,
                    "loss_rate": m.loss_rate,
                    "latency_p50_ms": m.latency_p50_ms,
                    "latency_p95_ms": m.latency_p95_ms,
                }),
            )
        })
        .collect();
    fs::write(
        work_dir.join("metrics.json"),
        serde_json::to_string_pretty(&metrics_doc).expect("metrics serialize") + "\n",
    )?;
    for w in iq_writers.into_iter().flatten() {
        w.finish()?;
    }

    Ok(ExperimentOutcome {
        log_dir: work_dir.to_path_buf(),
        metrics,
        blocks,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifestEntry {
    pub path: String,
    pub size: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub experiment: String,
    pub files: Vec<ManifestEntry>,
}

fn walk_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk_files(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

fn sha256_hex(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>())
}

/// Move a finished experiment's log tree into the archive and write its
/// manifest. Archives are immutable: re-archiving the same id fails, and a
/// failed move leaves the source logs in place.
pub fn collect_logs(
    experiment_id: &str,
    source_dir: &Path,
    archive_root: &Path,
) -> Result<Manifest, OrchestratorError> {
    let dest = archive_root.join(experiment_id);
    if dest.exists() {
        return Err(OrchestratorError::AlreadyArchived {
            id: experiment_id.to_string(),
        });
    }
    fs::create_dir_all(archive_root)?;
    fs::rename(source_dir, &dest).map_err(|source| OrchestratorError::ArchiveFailed {
        id: experiment_id.to_string(),
        source,
    })?;

    let mut files = Vec::new();
    walk_files(&dest, &dest, &mut files)?;
    files.sort();
    let entries = files
        .iter()
        .map(|rel| {
            let full = dest.join(rel);
            Ok(ManifestEntry {
                path: rel.to_string_lossy().into_owned(),
                size: fs::metadata(&full)?.len(),
                sha256: sha256_hex(&full)?,
            })
        })
        .collect::<Result<Vec<_>, std::io::Error>>()?;
    let manifest = Manifest {
        experiment: experiment_id.to_string(),
        files: entries,
    };
    let value = serde_json::to_value(&manifest).expect("manifest serialize");
    fs::write(
        dest.join("manifest.json"),
        serde_json::to_string_pretty(&value).expect("manifest serialize") + "\n",
    )?;
    Ok(manifest)
}

/// Parse a manifest back and re-verify every checksum against the archive.
pub fn verify_manifest(archive_dir: &Path) -> Result<Manifest, OrchestratorError> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(archive_dir.join("manifest.json"))?)
        .map_err(|e| OrchestratorError::Validation(format!("manifest unreadable: {e}")))?;
    for entry in &manifest.files {
        let full = archive_dir.join(&entry.path);
        let size = fs::metadata(&full)?.len();
        if size != entry.size {
            return Err(OrchestratorError::Validation(format!(
                "{}: size {size} does not match manifest {}",
                entry.path, entry.size
            )));
        }
        let digest = sha256_hex(&full)?;
        if digest != entry.sha256 {
            return Err(OrchestratorError::Validation(format!(
                "{}: checksum mismatch",
                entry.path
            )));
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CirTaps;
    use crate::scenario::{parse_traffic_script, TapUpdate};
    use num_complex::Complex64;

    fn identity_scenario(fs_hz: f64) -> RfScenario {
        RfScenario {
            id: "identity".into(),
            n_nodes: 2,
            duration_ms: 60_000,
            sample_rate_hz: fs_hz,
            carrier_hz: 1e9,
            noise_power_dbfs: f64::NEG_INFINITY,
            updates: vec![TapUpdate {
                t_ms: 0,
                carrier_hz: None,
                links: vec![
                    CirTaps::single(0, 1, 0, Complex64::new(1.0, 0.0)),
                    CirTaps::single(1, 0, 0, Complex64::new(1.0, 0.0)),
                ],
            }],
        }
    }

    fn modem_spec(id: &str, dir_seed: u64) -> ExperimentSpec {
        let traffic = parse_traffic_script("0.0 ON 1 SRC 0 DST 1 PERIODIC [10 256]\n").unwrap();
        let mut spec = ExperimentSpec::new(id, identity_scenario(100_000.0), 2_000, dir_seed);
        spec.traffic = Some(traffic);
        spec.roles = vec![NodeRole::ModemEndpoint, NodeRole::ModemEndpoint];
        spec.block_size = 1000;
        spec
    }

    #[test]
    fn identity_channel_delivers_everything() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_experiment(&modem_spec("t1", 7), dir.path()).unwrap();
        let m = &outcome.metrics[&1];
        assert_eq!(m.sent, 20);
        assert_eq!(m.delivered, 20);
        assert_eq!(m.loss_rate, 0.0);
        assert!(dir.path().join("node0/events.log").is_file());
        assert!(dir.path().join("flows.csv").is_file());
        assert!(dir.path().join("scenario.rfscn").is_file());
    }

    #[test]
    fn flow_csv_replays_byte_identically() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_experiment(&modem_spec("a", 7), a.path()).unwrap();
        run_experiment(&modem_spec("b", 7), b.path()).unwrap();
        let csv_a = fs::read(a.path().join("flows.csv")).unwrap();
        let csv_b = fs::read(b.path().join("flows.csv")).unwrap();
        assert!(!csv_a.is_empty());
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn iq_dump_written_when_enabled() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = modem_spec("iq", 3);
        spec.dump_iq = true;
        spec.duration_ms = 500;
        run_experiment(&spec, dir.path()).unwrap();
        let samples = crate::channel::read_iq_file(&dir.path().join("node1.iq")).unwrap();
        assert_eq!(samples.len(), 50_000, "one rx sample per engine sample");
    }

    #[test]
    fn archive_is_immutable() {
        let state = tempfile::tempdir().unwrap();
        let work = state.path().join("running/exp1");
        run_experiment(&modem_spec("exp1", 1), &work).unwrap();
        let archive_root = state.path().join("archive");
        let manifest = collect_logs("exp1", &work, &archive_root).unwrap();
        assert!(manifest.files.iter().any(|f| f.path == "flows.csv"));
        assert!(manifest.files.iter().any(|f| f.path.starts_with("node0")));
        assert!(!work.exists(), "source moved into the archive");
        let verified = verify_manifest(&archive_root.join("exp1")).unwrap();
        assert_eq!(verified, manifest);

        // A second archive attempt must fail.
        let work2 = state.path().join("running/exp1b");
        run_experiment(&modem_spec("exp1", 1), &work2).unwrap();
        let err = collect_logs("exp1", &work2, &archive_root).unwrap_err();
        assert!(matches!(err, OrchestratorError::AlreadyArchived { .. }));
        assert!(work2.exists(), "failed archive keeps source logs");
    }

    #[test]
    fn duration_beyond_scenario_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = modem_spec("long", 1);
        spec.duration_ms = 120_000;
        assert!(matches!(
            run_experiment(&spec, dir.path()),
            Err(OrchestratorError::Validation(_))
        ));
    }
}
