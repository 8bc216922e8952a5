//! `colosim` — drive the emulator from the command line: browse the
//! scenario catalogue, compile geometry into scenarios, generate the built-in
//! families, run interactive experiments and manage the batch queue.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use colosim::compiler::{
    compile, gen_alleys, gen_cellular, gen_sce_qualification, parse_geometry, ChannelModelParams,
    CompileRequest, CompilerError, DistanceClass, FadingModel, PathlossModel, SpeedClass,
};
use colosim::orchestrator::{Orchestrator, OrchestratorConfig, OrchestratorError, StateLock};
use colosim::radio::{NodeRole, RadioError};
use colosim::scenario::{parse_batch_job, serialize_rf_scenario, Catalogue, ScenarioError};

#[derive(Parser)]
#[command(
    name = "colosim",
    version,
    about = "Desk-scale wireless network emulator"
)]
struct Cli {
    /// State directory (catalogue, queue, ledger, archive).
    #[arg(
        long,
        global = true,
        env = "COLOSIM_STATE",
        default_value = "colosim-state"
    )]
    state: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Browse the scenario catalogue.
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// Compile a geometry file into an RF scenario.
    Compile(CompileArgs),
    /// Generate a built-in scenario family into a directory.
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
    /// Run an experiment right now and archive its logs.
    Run(RunArgs),
    /// Batch job queue.
    Job {
        #[command(subcommand)]
        cmd: JobCmd,
    },
    /// Show a team's token balance.
    Tokens {
        #[arg(long)]
        team: String,
    },
    /// Reserve nodes for a team (tokens are debited up front).
    Reserve {
        #[arg(long)]
        team: String,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        hours: f64,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// List installed RF scenarios.
    List,
    /// Show one scenario's metadata.
    Info { id: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Fspl,
    Logdist,
}

#[derive(Clone, Copy, ValueEnum)]
enum FadingArg {
    None,
    Rayleigh,
    Rician,
}

#[derive(Args)]
struct CompileArgs {
    /// Geometry input (.geo.json).
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long, value_enum, default_value = "fspl")]
    model: ModelArg,
    /// Pathloss exponent (logdist model only).
    #[arg(long, default_value_t = 2.7)]
    exponent: f64,
    /// Reference distance in meters.
    #[arg(long, default_value_t = 1.0)]
    d0: f64,
    #[arg(long, value_enum, default_value = "none")]
    fading: FadingArg,
    /// Rician K factor in dB.
    #[arg(long, default_value_t = 6.0)]
    k_db: f64,
    /// Engine sample rate in Hz.
    #[arg(long)]
    fs: f64,
    /// Emulated carrier in Hz.
    #[arg(long)]
    carrier: f64,
    #[arg(long, default_value_t = 60_000)]
    duration_ms: u64,
    #[arg(long, default_value_t = 1_000)]
    period_ms: u64,
    #[arg(long, default_value_t = -80.0, allow_hyphen_values = true)]
    noise_dbfs: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scenario id (defaults to the output file stem).
    #[arg(long)]
    id: Option<String>,
    /// Output .rfscn path.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Ten-node qualification schedule with stepped SNR and a carrier shift.
    Sce {
        #[arg(long, default_value_t = 1e6)]
        fs: f64,
        #[arg(long, default_value_t = -80.0, allow_hyphen_values = true)]
        noise_dbfs: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Five squads of walkers plus aerial relays, three traffic stages.
    Alleys {
        #[arg(long, default_value_t = 1e6)]
        fs: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Cellular deployment: 8-10 base stations, four users each.
    Cellular {
        #[arg(long, default_value_t = 10)]
        n_bs: usize,
        #[arg(long, value_enum, default_value = "close")]
        distance: DistanceArg,
        #[arg(long, value_enum, default_value = "static")]
        speed: SpeedArg,
        #[arg(long, default_value_t = 1e6)]
        fs: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    Close,
    Medium,
    Far,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpeedArg {
    Static,
    Moderate,
    Fast,
}

#[derive(Args)]
struct RunArgs {
    /// RF scenario id from the catalogue.
    #[arg(long)]
    rf: String,
    /// Traffic scenario id from the catalogue.
    #[arg(long)]
    traffic: Option<String>,
    /// Comma-separated node roles (silent, probe_tx, probe_rx, modem_endpoint).
    #[arg(long)]
    nodes: String,
    /// Experiment duration in seconds.
    #[arg(long)]
    duration: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write per-node raw IQ captures.
    #[arg(long, default_value_t = false)]
    dump_iq: bool,
}

#[derive(Subcommand)]
enum JobCmd {
    /// Validate and enqueue a batch job document, then run the scheduler.
    Submit { file: PathBuf },
    /// Show one job.
    Status { id: String },
    /// Show the queue (runs the scheduler first).
    Queue,
}

/// Exit codes: 0 ok, 2 validation, 3 insufficient resources/tokens, 4 runtime.
fn exit_code(err: &OrchestratorError) -> u8 {
    match err {
        OrchestratorError::InsufficientTokens { .. }
        | OrchestratorError::InsufficientNodes { .. } => 3,
        OrchestratorError::Validation(_)
        | OrchestratorError::UnknownTeam { .. }
        | OrchestratorError::UnknownJob { .. }
        | OrchestratorError::Scenario(_)
        | OrchestratorError::Channel(_)
        | OrchestratorError::Radio(RadioError::UnknownRole { .. })
        | OrchestratorError::Traffic(_) => 2,
        _ => 4,
    }
}

fn compiler_exit(err: &CompilerError) -> u8 {
    match err {
        CompilerError::Scenario(ScenarioError::Io(_)) => 4,
        _ => 2,
    }
}

fn now_s() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0)
}

fn fail(code: u8, message: String) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    // Die quietly when the output pipe closes (e.g. piping into `head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => fail(code, message),
    }
}

type CliResult = Result<(), (u8, String)>;

fn orch_err(e: OrchestratorError) -> (u8, String) {
    (exit_code(&e), e.to_string())
}

fn scn_err(e: ScenarioError) -> (u8, String) {
    let code = match &e {
        ScenarioError::Io(_) => 4,
        _ => 2,
    };
    (code, e.to_string())
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Scenario { cmd } => {
            let catalogue = Catalogue::open(cli.state.join("catalogue"));
            match cmd {
                ScenarioCmd::List => {
                    let list = catalogue.list().map_err(scn_err)?;
                    if list.is_empty() {
                        println!("catalogue is empty");
                    }
                    for s in list {
                        println!(
                            "{:<28} nodes={:<4} duration={:>7.1} s  carrier={:.3} GHz",
                            s.id,
                            s.n_nodes,
                            s.duration_ms as f64 / 1000.0,
                            s.carrier_hz / 1e9
                        );
                    }
                    Ok(())
                }
                ScenarioCmd::Info { id } => {
                    let s = catalogue.info(&id).map_err(scn_err)?;
                    println!("id:              {}", s.id);
                    println!("nodes:           {}", s.n_nodes);
                    println!("duration:        {} ms", s.duration_ms);
                    println!("sample rate:     {} Hz", s.sample_rate_hz);
                    println!("carrier:         {} Hz", s.carrier_hz);
                    println!(
                        "noise:           {} dBFS",
                        colosim::scenario::format_f64(s.noise_power_dbfs)
                    );
                    println!("updates:         {}", s.updates.len());
                    let links: usize = s.updates.iter().map(|u| u.links.len()).sum();
                    println!("links (total):   {links}");
                    Ok(())
                }
            }
        }
        Command::Compile(args) => {
            let bytes = std::fs::read(&args.geometry)
                .map_err(|e| (4u8, format!("{}: {e}", args.geometry.display())))?;
            let geometry =
                parse_geometry(&bytes).map_err(|e| (compiler_exit(&e), e.to_string()))?;
            let params = ChannelModelParams {
                model: match args.model {
                    ModelArg::Fspl => PathlossModel::Fspl,
                    ModelArg::Logdist => PathlossModel::LogDistance {
                        exponent: args.exponent,
                    },
                },
                reference_distance_m: args.d0,
                fading: match args.fading {
                    FadingArg::None => FadingModel::None,
                    FadingArg::Rayleigh => FadingModel::Rayleigh,
                    FadingArg::Rician => FadingModel::Rician {
                        k_factor_db: args.k_db,
                    },
                },
                multipath_profile: Vec::new(),
                rng_seed: args.seed,
            };
            let id = args
                .id
                .or_else(|| {
                    args.out
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                })
                .unwrap_or_else(|| "compiled".to_string());
            let scenario = compile(&CompileRequest {
                scenario_id: id,
                trajectories: &geometry.nodes,
                params: &params,
                terrain: &geometry.terrain,
                sample_rate_hz: args.fs,
                carrier_hz: args.carrier,
                duration_ms: args.duration_ms,
                update_period_ms: args.period_ms,
                noise_power_dbfs: args.noise_dbfs,
            })
            .map_err(|e| (compiler_exit(&e), e.to_string()))?;
            std::fs::write(&args.out, serialize_rf_scenario(&scenario))
                .map_err(|e| (4u8, format!("{}: {e}", args.out.display())))?;
            println!(
                "compiled {}: {} nodes, {} updates -> {}",
                scenario.id,
                scenario.n_nodes,
                scenario.updates.len(),
                args.out.display()
            );
            Ok(())
        }
        Command::Gen { family } => {
            let (rf, traffic, out) = match family {
                GenCmd::Sce {
                    fs,
                    noise_dbfs,
                    out,
                } => {
                    let (rf, tg) = gen_sce_qualification(fs, noise_dbfs)
                        .map_err(|e| (compiler_exit(&e), e.to_string()))?;
                    (rf, tg, out)
                }
                GenCmd::Alleys { fs, out } => {
                    let (rf, tg) =
                        gen_alleys(fs).map_err(|e| (compiler_exit(&e), e.to_string()))?;
                    (rf, tg, out)
                }
                GenCmd::Cellular {
                    n_bs,
                    distance,
                    speed,
                    fs,
                    out,
                } => {
                    let distance = match distance {
                        DistanceArg::Close => DistanceClass::Close,
                        DistanceArg::Medium => DistanceClass::Medium,
                        DistanceArg::Far => DistanceClass::Far,
                    };
                    let speed = match speed {
                        SpeedArg::Static => SpeedClass::Static,
                        SpeedArg::Moderate => SpeedClass::Moderate,
                        SpeedArg::Fast => SpeedClass::Fast,
                    };
                    let (rf, tg) = gen_cellular(n_bs, distance, speed, fs)
                        .map_err(|e| (compiler_exit(&e), e.to_string()))?;
                    (rf, tg, out)
                }
            };
            let catalogue = Catalogue::open(&out);
            let rf_path = catalogue.install_rf(&rf).map_err(scn_err)?;
            let tg_path = catalogue.install_traffic(&traffic).map_err(scn_err)?;
            println!("wrote {}", rf_path.display());
            println!("wrote {}", tg_path.display());
            Ok(())
        }
        Command::Run(args) => {
            let _lock = StateLock::acquire(&cli.state).map_err(orch_err)?;
            let mut orch =
                Orchestrator::open(&cli.state, OrchestratorConfig::default()).map_err(orch_err)?;
            let roles = args
                .nodes
                .split(',')
                .map(|r| NodeRole::parse(r.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| (2u8, e.to_string()))?;
            let (id, outcome, manifest) = orch
                .run_interactive(
                    &args.rf,
                    args.traffic.as_deref(),
                    roles,
                    args.duration,
                    args.seed,
                    args.dump_iq,
                )
                .map_err(orch_err)?;
            println!("experiment {id} archived at {}", outcome.log_dir.display());
            println!("manifest: {} files", manifest.files.len());
            for (flow, m) in &outcome.metrics {
                println!(
                    "flow {flow}: sent={} delivered={} loss={:.3} throughput={:.0} bps p50={} ms",
                    m.sent,
                    m.delivered,
                    m.loss_rate,
                    m.throughput_bps,
                    m.latency_p50_ms
                        .map_or("-".to_string(), |v| format!("{v:.2}")),
                );
            }
            Ok(())
        }
        Command::Job { cmd } => match cmd {
            JobCmd::Submit { file } => {
                let bytes =
                    std::fs::read(&file).map_err(|e| (4u8, format!("{}: {e}", file.display())))?;
                let spec = parse_batch_job(&bytes).map_err(scn_err)?;
                let _lock = StateLock::acquire(&cli.state).map_err(orch_err)?;
                let mut orch = Orchestrator::open(&cli.state, OrchestratorConfig::default())
                    .map_err(orch_err)?;
                let now = now_s();
                let id = orch.submit_job(spec, now).map_err(orch_err)?;
                println!("queued {id}");
                let report = orch.scheduler_tick(now).map_err(orch_err)?;
                for started in report.started {
                    println!("started {started}");
                }
                for failed in report.failed {
                    println!("failed {failed}");
                }
                Ok(())
            }
            JobCmd::Status { id } => {
                let orch = Orchestrator::open(&cli.state, OrchestratorConfig::default())
                    .map_err(orch_err)?;
                let r = orch.job_status(&id).map_err(orch_err)?;
                println!("id:        {}", r.id);
                println!("team:      {}", r.team);
                println!("state:     {:?}", r.state);
                println!("nodes:     {}", r.n_nodes);
                println!("duration:  {} s", r.duration_s);
                if let Some(t) = r.started_at_s {
                    println!("started:   {t}");
                }
                if let Some(e) = &r.error {
                    println!("error:     {e}");
                }
                if let Some(m) = &r.metrics {
                    println!("metrics:   {m}");
                }
                Ok(())
            }
            JobCmd::Queue => {
                let _lock = StateLock::acquire(&cli.state).map_err(orch_err)?;
                let mut orch = Orchestrator::open(&cli.state, OrchestratorConfig::default())
                    .map_err(orch_err)?;
                let report = orch.scheduler_tick(now_s()).map_err(orch_err)?;
                for finished in report.finished {
                    println!("finished {finished}");
                }
                for started in report.started {
                    println!("started {started}");
                }
                let mut any = false;
                for r in orch.jobs() {
                    any = true;
                    println!(
                        "{:<10} {:<9} team={:<12} nodes={:<3} duration={} s",
                        r.id,
                        format!("{:?}", r.state),
                        r.team,
                        r.n_nodes,
                        r.duration_s
                    );
                }
                if !any {
                    println!("queue is empty");
                }
                Ok(())
            }
        },
        Command::Tokens { team } => {
            let orch =
                Orchestrator::open(&cli.state, OrchestratorConfig::default()).map_err(orch_err)?;
            let (balance, budget) = orch.tokens(&team).map_err(orch_err)?;
            println!("team {team}: {balance} of {budget} tokens");
            Ok(())
        }
        Command::Reserve { team, nodes, hours } => {
            let _lock = StateLock::acquire(&cli.state).map_err(orch_err)?;
            let mut orch =
                Orchestrator::open(&cli.state, OrchestratorConfig::default()).map_err(orch_err)?;
            let reservation = orch
                .reserve(&team, nodes, hours, now_s())
                .map_err(orch_err)?;
            let (balance, _) = orch.tokens(&team).map_err(orch_err)?;
            println!(
                "reservation {} active: {} nodes for {} h (balance now {balance})",
                reservation.id, reservation.n_nodes, reservation.duration_h
            );
            Ok(())
        }
    }
}
