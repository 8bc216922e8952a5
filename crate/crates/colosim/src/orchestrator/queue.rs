//! Batch queue, scheduler and the orchestrator facade over the state
//! directory.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::experiment::{
    collect_logs, run_experiment, ExperimentOutcome, ExperimentSpec, Manifest,
};
use super::ledger::TokenLedger;
use super::reservation::{Reservation, ReservationState};
use super::state::write_atomic;
use super::OrchestratorError;
use crate::radio::NodeRole;
use crate::scenario::{parse_batch_job, serialize_batch_job, BatchJobSpec, Catalogue};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct OrchestratorConfig {
    pub pool_size: usize,
    pub rate_tokens_per_node_hour: f64,
    pub default_team_budget: f64,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig {
            pool_size: 16,
            rate_tokens_per_node_hour: 10.0,
            default_team_budget: 1000.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum JobState {
    Pending,
    Running,
    Archived,
    Failed,
}

/// Everything persisted about one batch job.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub seq: u64,
    pub team: String,
    pub n_nodes: usize,
    pub duration_s: u64,
    pub state: JobState,
    pub submitted_at_s: i64,
    pub started_at_s: Option<i64>,
    pub ends_at_s: Option<i64>,
    pub error: Option<String>,
    /// Per-flow metrics summary, filled in once the experiment has run.
    #[serde(default)]
    pub metrics: Option<serde_json::Value>,
    /// Canonical job document, so the queue directory is self-describing.
    pub spec_json: String,
}

struct JobEntry {
    record: JobRecord,
    spec: BatchJobSpec,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TickReport {
    pub started: Vec<String>,
    pub finished: Vec<String>,
    pub failed: Vec<String>,
}

fn metrics_summary(
    metrics: &std::collections::BTreeMap<u32, crate::traffic::FlowMetrics>,
) -> serde_json::Value {
    let map: std::collections::BTreeMap<String, serde_json::Value> = metrics
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
                }),
            )
        })
        .collect();
    serde_json::json!(map)
}

#[derive(Serialize, Deserialize)]
struct LedgerFile {
    config: OrchestratorConfig,
    ledger: TokenLedger,
    reservations: Vec<Reservation>,
    next_reservation: u64,
    next_job: u64,
    next_run: u64,
}

/// Single-owner facade over a state directory: catalogue, ledger, pool,
/// queue and archive. All mutation goes through one instance at a time
/// (see [`super::StateLock`]); reads of the directory are always safe.
pub struct Orchestrator {
    state_dir: PathBuf,
    config: OrchestratorConfig,
    ledger: TokenLedger,
    reservations: Vec<Reservation>,
    next_reservation: u64,
    next_job: u64,
    next_run: u64,
    jobs: Vec<JobEntry>,
}

impl Orchestrator {
    /// Open (or initialize) a state directory.
    pub fn open(
        state_dir: impl Into<PathBuf>,
        default_config: OrchestratorConfig,
    ) -> Result<Self, OrchestratorError> {
        let state_dir = state_dir.into();
        fs::create_dir_all(&state_dir)?;
        let ledger_path = state_dir.join("ledger.json");
        let file: LedgerFile = if ledger_path.is_file() {
            serde_json::from_slice(&fs::read(&ledger_path)?).map_err(|e| {
                OrchestratorError::Validation(format!("ledger.json unreadable: {e}"))
            })?
        } else {
            LedgerFile {
                config: default_config,
                ledger: TokenLedger::new(),
                reservations: Vec::new(),
                next_reservation: 1,
                next_job: 1,
                next_run: 1,
            }
        };

        let mut jobs = Vec::new();
        let queue_dir = state_dir.join("queue");
        if queue_dir.is_dir() {
            for entry in fs::read_dir(&queue_dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "json") {
                    let record: JobRecord =
                        serde_json::from_slice(&fs::read(&path)?).map_err(|e| {
                            OrchestratorError::Validation(format!("{}: {e}", path.display()))
                        })?;
                    let spec = parse_batch_job(record.spec_json.as_bytes())?;
                    jobs.push(JobEntry { record, spec });
                }
            }
        }
        jobs.sort_by_key(|j| j.record.seq);

        let orch = Orchestrator {
            state_dir,
            config: file.config,
            ledger: file.ledger,
            reservations: file.reservations,
            next_reservation: file.next_reservation,
            next_job: file.next_job,
            next_run: file.next_run,
            jobs,
        };
        orch.save_ledger()?;
        Ok(orch)
    }

    pub fn config(&self) -> &OrchestratorConfig {
        &self.config
    }

    pub fn catalogue(&self) -> Catalogue {
        Catalogue::open(self.state_dir.join("catalogue"))
    }

    pub fn archive_root(&self) -> PathBuf {
        self.state_dir.join("archive")
    }

    fn running_dir(&self, id: &str) -> PathBuf {
        self.state_dir.join("running").join(id)
    }

    fn save_ledger(&self) -> Result<(), OrchestratorError> {
        let file = LedgerFile {
            config: self.config,
            ledger: self.ledger.clone(),
            reservations: self.reservations.clone(),
            next_reservation: self.next_reservation,
            next_job: self.next_job,
            next_run: self.next_run,
        };
        let value = serde_json::to_value(&file).expect("ledger serialize");
        let bytes = serde_json::to_string_pretty(&value).expect("ledger serialize") + "\n";
        write_atomic(&self.state_dir.join("ledger.json"), bytes.as_bytes())?;
        Ok(())
    }

    fn save_job(&self, record: &JobRecord) -> Result<(), OrchestratorError> {
        let value = serde_json::to_value(record).expect("job serialize");
        let bytes = serde_json::to_string_pretty(&value).expect("job serialize") + "\n";
        write_atomic(
            &self
                .state_dir
                .join("queue")
                .join(format!("{}.json", record.id)),
            bytes.as_bytes(),
        )?;
        Ok(())
    }

    /// Nodes not held by running jobs or active reservations.
    pub fn free_nodes(&self) -> usize {
        let held: usize = self
            .jobs
            .iter()
            .filter(|j| j.record.state == JobState::Running)
            .map(|j| j.record.n_nodes)
            .sum::<usize>()
            + self
                .reservations
                .iter()
                .filter(|r| r.holds_nodes())
                .map(|r| r.n_nodes)
                .sum::<usize>();
        self.config.pool_size.saturating_sub(held)
    }

    pub fn ensure_team(&mut self, team: &str, now_s: i64) -> Result<(), OrchestratorError> {
        self.ledger
            .ensure_team(team, self.config.default_team_budget, now_s);
        self.save_ledger()
    }

    pub fn tokens(&self, team: &str) -> Result<(f64, f64), OrchestratorError> {
        let account = self.ledger.account(team)?;
        Ok((account.balance, account.budget))
    }

    /// Reserve nodes for a team, debiting rate * nodes * hours up front.
    pub fn reserve(
        &mut self,
        team: &str,
        n_nodes: usize,
        duration_h: f64,
        now_s: i64,
    ) -> Result<Reservation, OrchestratorError> {
        if n_nodes == 0 || !duration_h.is_finite() || duration_h <= 0.0 {
            return Err(OrchestratorError::Validation(
                "reservation needs nodes > 0 and hours > 0".into(),
            ));
        }
        self.ledger
            .ensure_team(team, self.config.default_team_budget, now_s);
        self.ledger.weekly_reset(now_s);
        let free = self.free_nodes();
        if n_nodes > free {
            return Err(OrchestratorError::InsufficientNodes {
                requested: n_nodes,
                free,
                pool: self.config.pool_size,
            });
        }
        let cost = self.config.rate_tokens_per_node_hour * n_nodes as f64 * duration_h;
        self.ledger.charge(team, cost)?;
        let reservation = Reservation {
            id: self.next_reservation,
            team: team.to_string(),
            n_nodes,
            start_s: now_s,
            duration_h,
            state: ReservationState::Active,
        };
        self.next_reservation += 1;
        self.reservations.push(reservation.clone());
        self.save_ledger()?;
        Ok(reservation)
    }

    pub fn reservations(&self) -> &[Reservation] {
        &self.reservations
    }

    /// Validate a job against the catalogue and enqueue it. The team is
    /// charged when the job starts, not at submit; affordability is
    /// pre-checked here so hopeless jobs are rejected early.
    pub fn submit_job(
        &mut self,
        spec: BatchJobSpec,
        now_s: i64,
    ) -> Result<String, OrchestratorError> {
        spec.validate()?;
        let catalogue = self.catalogue();
        let rf = catalogue.info(&spec.rf_scenario)?;
        if let Some(tid) = &spec.traffic_scenario {
            catalogue.traffic(tid)?;
        }
        if spec.n_nodes > rf.n_nodes {
            return Err(OrchestratorError::Validation(format!(
                "job wants {} nodes but scenario {} has {}",
                spec.n_nodes, rf.id, rf.n_nodes
            )));
        }
        if spec.duration_s * 1000 > rf.duration_ms {
            return Err(OrchestratorError::Validation(format!(
                "job duration {} s exceeds scenario duration {} ms",
                spec.duration_s, rf.duration_ms
            )));
        }
        for node in &spec.nodes {
            NodeRole::parse(&node.role)?;
        }
        self.ledger
            .ensure_team(&spec.team, self.config.default_team_budget, now_s);
        let cost = self.job_cost(&spec);
        let balance = self.ledger.balance(&spec.team)?;
        if cost > balance {
            return Err(OrchestratorError::InsufficientTokens {
                team: spec.team.clone(),
                balance,
                needed: cost,
            });
        }

        let seq = self.next_job;
        self.next_job += 1;
        let id = format!("job-{seq:04}");
        let record = JobRecord {
            id: id.clone(),
            seq,
            team: spec.team.clone(),
            n_nodes: spec.n_nodes,
            duration_s: spec.duration_s,
            state: JobState::Pending,
            submitted_at_s: now_s,
            started_at_s: None,
            ends_at_s: None,
            error: None,
            metrics: None,
            spec_json: String::from_utf8(serialize_batch_job(&spec))
                .expect("canonical json is utf-8"),
        };
        self.save_job(&record)?;
        self.jobs.push(JobEntry { record, spec });
        self.save_ledger()?;
        Ok(id)
    }

    fn job_cost(&self, spec: &BatchJobSpec) -> f64 {
        self.config.rate_tokens_per_node_hour * spec.n_nodes as f64 * spec.duration_s as f64
            / 3600.0
    }

    fn experiment_spec(
        &self,
        id: &str,
        spec: &BatchJobSpec,
    ) -> Result<ExperimentSpec, OrchestratorError> {
        let catalogue = self.catalogue();
        let rf = catalogue.info(&spec.rf_scenario)?;
        let traffic = spec
            .traffic_scenario
            .as_deref()
            .map(|tid| catalogue.traffic(tid))
            .transpose()?;
        let roles = spec
            .nodes
            .iter()
            .map(|n| NodeRole::parse(&n.role))
            .collect::<Result<Vec<_>, _>>()?;
        let param_u64 = |key: &str, default: u64| -> u64 {
            spec.params
                .get(key)
                .and_then(|v| v.as_u64())
                .unwrap_or(default)
        };
        let mut xp = ExperimentSpec::new(id, rf, spec.duration_s * 1000, param_u64("seed", 0));
        xp.traffic = traffic;
        xp.roles = roles;
        xp.block_size = param_u64("block_size", 2048) as usize;
        xp.dump_iq = spec
            .params
            .get("dump_iq")
            .and_then(|v| v.as_bool())
            .unwrap_or(false);
        Ok(xp)
    }

    /// One scheduler pass at simulated/wall time `now_s`:
    /// finish due jobs and reservations first (nodes return to the pool this
    /// tick), then start head-of-queue jobs strictly in order. A head that
    /// does not fit blocks everything behind it: no backfill.
    pub fn scheduler_tick(&mut self, now_s: i64) -> Result<TickReport, OrchestratorError> {
        let mut report = TickReport::default();
        self.ledger.weekly_reset(now_s);

        // Finish phase.
        let archive_root = self.archive_root();
        for idx in 0..self.jobs.len() {
            let (state, ends_at, id) = {
                let r = &self.jobs[idx].record;
                (r.state, r.ends_at_s, r.id.clone())
            };
            if state == JobState::Running && ends_at.is_some_and(|t| t <= now_s) {
                let running = self.running_dir(&id);
                match collect_logs(&id, &running, &archive_root) {
                    Ok(_) => {
                        self.jobs[idx].record.state = JobState::Archived;
                        report.finished.push(id);
                    }
                    Err(e) => {
                        self.jobs[idx].record.state = JobState::Failed;
                        self.jobs[idx].record.error = Some(e.to_string());
                        report.failed.push(id);
                    }
                }
                self.save_job(&self.jobs[idx].record)?;
            }
        }
        for r in self.reservations.iter_mut() {
            if r.state == ReservationState::Active && r.ends_at_s() <= now_s {
                r.state = ReservationState::Done;
            }
        }

        // Start phase: strict FIFO from the head.
        while let Some(idx) = self
            .jobs
            .iter()
            .position(|j| j.record.state == JobState::Pending)
        {
            let (n_nodes, cost, id) = {
                let entry = &self.jobs[idx];
                (
                    entry.record.n_nodes,
                    self.job_cost(&entry.spec),
                    entry.record.id.clone(),
                )
            };
            if n_nodes > self.free_nodes() {
                break;
            }
            if self.ledger.balance(&self.jobs[idx].record.team)? < cost {
                break;
            }
            let team = self.jobs[idx].record.team.clone();
            self.ledger.charge(&team, cost)?;
            let xp = self.experiment_spec(&id, &self.jobs[idx].spec)?;
            let work_dir = self.running_dir(&id);
            match run_experiment(&xp, &work_dir) {
                Ok(outcome) => {
                    let record = &mut self.jobs[idx].record;
                    record.state = JobState::Running;
                    record.started_at_s = Some(now_s);
                    record.ends_at_s = Some(now_s + record.duration_s as i64);
                    record.metrics = Some(metrics_summary(&outcome.metrics));
                    report.started.push(id);
                }
                Err(e) => {
                    let record = &mut self.jobs[idx].record;
                    record.state = JobState::Failed;
                    record.started_at_s = Some(now_s);
                    record.error = Some(e.to_string());
                    report.failed.push(id);
                }
            }
            self.save_job(&self.jobs[idx].record)?;
        }
        self.save_ledger()?;
        Ok(report)
    }

    pub fn job_status(&self, id: &str) -> Result<&JobRecord, OrchestratorError> {
        self.jobs
            .iter()
            .map(|j| &j.record)
            .find(|r| r.id == id)
            .ok_or_else(|| OrchestratorError::UnknownJob { id: id.to_string() })
    }

    pub fn jobs(&self) -> impl Iterator<Item = &JobRecord> {
        self.jobs.iter().map(|j| &j.record)
    }

    /// Interactive-mode run: execute immediately (outside the queue and the
    /// token system) and archive the logs.
    pub fn run_interactive(
        &mut self,
        rf_id: &str,
        traffic_id: Option<&str>,
        roles: Vec<NodeRole>,
        duration_s: u64,
        seed: u64,
        dump_iq: bool,
    ) -> Result<(String, ExperimentOutcome, Manifest), OrchestratorError> {
        let catalogue = self.catalogue();
        let rf = catalogue.info(rf_id)?;
        let traffic = traffic_id.map(|tid| catalogue.traffic(tid)).transpose()?;
        let id = format!("run-{:04}", self.next_run);
        self.next_run += 1;
        self.save_ledger()?;

        let mut xp = ExperimentSpec::new(&id, rf, duration_s * 1000, seed);
        xp.traffic = traffic;
        xp.roles = roles;
        xp.dump_iq = dump_iq;
        let work_dir = self.running_dir(&id);
        let outcome = run_experiment(&xp, &work_dir)?;
        let manifest = collect_logs(&id, &work_dir, &self.archive_root())?;
        let archived = self.archive_root().join(&id);
        Ok((
            id,
            ExperimentOutcome {
                log_dir: archived,
                ..outcome
            },
            manifest,
        ))
    }
}
