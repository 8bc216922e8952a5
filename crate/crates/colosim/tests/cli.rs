//! End-to-end CLI tests: commands against a scratch state directory, exit
//! codes per the contract (0 ok, 2 validation, 3 resources/tokens, 4 runtime).

use std::path::Path;
use std::process::{Command, Output};

fn colosim(state: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colosim"))
        .arg("--state")
        .arg(state)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn install_fixtures(state: &Path) {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let catalogue = state.join("catalogue");
    std::fs::create_dir_all(&catalogue).unwrap();
    std::fs::copy(
        fixtures.join("identity.rfscn"),
        catalogue.join("identity.rfscn"),
    )
    .unwrap();
    std::fs::write(
        catalogue.join("oneflow.tgen"),
        "0 ON 1 SRC 0 DST 1 PERIODIC [10 300]\n",
    )
    .unwrap();
}

#[test]
fn scenario_list_and_info() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path();

    let out = colosim(state, &["scenario", "list"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("catalogue is empty"));

    let gen = colosim(
        state,
        &[
            "gen",
            "sce",
            "-o",
            state.join("catalogue").to_str().unwrap(),
        ],
    );
    assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));

    let out = colosim(state, &["scenario", "list"]);
    assert!(stdout(&out).contains("sce_qual_v1"));

    let out = colosim(state, &["scenario", "info", "sce_qual_v1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("nodes:           10"), "{text}");
    assert!(text.contains("duration:        600000 ms"), "{text}");

    let out = colosim(state, &["scenario", "info", "missing"]);
    assert_eq!(code(&out), 2, "unknown scenario is a validation error");
}

#[test]
fn compile_from_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path();
    let geo = state.join("pair.geo.json");
    std::fs::write(
        &geo,
        r#"{"terrain":{"w":1000.0,"h":1000.0},
            "nodes":[{"id":0,"waypoints":[{"t_ms":0,"x":0.0,"y":10.0,"z":0.0}]},
                     {"id":1,"waypoints":[{"t_ms":0,"x":300.0,"y":10.0,"z":0.0}]}]}"#,
    )
    .unwrap();
    let out_path = state.join("pair.rfscn");
    let out = colosim(
        state,
        &[
            "compile",
            "--geometry",
            geo.to_str().unwrap(),
            "--model",
            "fspl",
            "--fs",
            "100000000",
            "--carrier",
            "1000000000",
            "-o",
            out_path.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let scenario =
        colosim::scenario::parse_rf_scenario(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(scenario.updates[0].links[0].taps[0].delay, 100);

    // Geometry that exceeds the delay budget is a validation failure.
    std::fs::write(
        &geo,
        r#"{"terrain":{"w":5000.0,"h":5000.0},
            "nodes":[{"id":0,"waypoints":[{"t_ms":0,"x":0.0,"y":10.0,"z":0.0}]},
                     {"id":1,"waypoints":[{"t_ms":0,"x":3000.0,"y":10.0,"z":0.0}]}]}"#,
    )
    .unwrap();
    let out = colosim(
        state,
        &[
            "compile",
            "--geometry",
            geo.to_str().unwrap(),
            "--model",
            "fspl",
            "--fs",
            "100000000",
            "--carrier",
            "1000000000",
            "-o",
            out_path.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 2);

    // An unreadable input is a runtime failure, not a validation one.
    let out = colosim(
        state,
        &[
            "compile",
            "--geometry",
            state.join("nope.geo.json").to_str().unwrap(),
            "--model",
            "fspl",
            "--fs",
            "1000000",
            "--carrier",
            "1000000000",
            "-o",
            out_path.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 4);
}

#[test]
fn interactive_run_archives_logs() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path();
    install_fixtures(state);
    let out = colosim(
        state,
        &[
            "run",
            "--rf",
            "identity",
            "--traffic",
            "oneflow",
            "--nodes",
            "modem_endpoint,modem_endpoint",
            "--duration",
            "2",
            "--seed",
            "7",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("archived"), "{text}");
    assert!(text.contains("flow 1: sent=20 delivered=20"), "{text}");
    let archive = state.join("archive/run-0001");
    assert!(archive.join("manifest.json").is_file());
    assert!(archive.join("flows.csv").is_file());
    assert!(archive.join("node0/events.log").is_file());
    colosim::orchestrator::verify_manifest(&archive).expect("manifest checksums verify");

    // Unknown roles are validation errors.
    let out = colosim(
        state,
        &[
            "run",
            "--rf",
            "identity",
            "--nodes",
            "bogus_role,silent",
            "--duration",
            "1",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn job_lifecycle_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path();
    install_fixtures(state);

    let job = state.join("small.job.json");
    std::fs::write(
        &job,
        r#"{"duration_s": 2, "rf_scenario": "identity", "traffic_scenario": "oneflow",
            "n_nodes": 2,
            "nodes": [{"role": "modem_endpoint", "command": ""},
                      {"role": "modem_endpoint", "command": ""}],
            "params": {"seed": 3, "block_size": 1000}, "team": "wings"}"#,
    )
    .unwrap();
    let out = colosim(state, &["job", "submit", job.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("queued job-0001"), "{text}");
    assert!(text.contains("started job-0001"), "{text}");

    let out = colosim(state, &["job", "status", "job-0001"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("Running"));

    // Ticking later archives the finished job.
    std::thread::sleep(std::time::Duration::from_secs(3));
    let out = colosim(state, &["job", "queue"]);
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).contains("finished job-0001"),
        "{}",
        stdout(&out)
    );
    assert!(state.join("archive/job-0001/flows.csv").is_file());

    // Tokens were debited for the run.
    let out = colosim(state, &["tokens", "--team", "wings"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("of 1000 tokens"));

    // Malformed job document: validation exit code.
    std::fs::write(&job, r#"{"rf_scenario": "identity"}"#).unwrap();
    let out = colosim(state, &["job", "submit", job.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    // Unknown job id.
    let out = colosim(state, &["job", "status", "job-9999"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reservations_and_token_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path();

    let out = colosim(
        state,
        &["reserve", "--team", "wings", "--nodes", "2", "--hours", "3"],
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("balance now 940"), "{}", stdout(&out));

    // 940 tokens left; 40 node-hours costs 400, three more exhausts.
    colosim(
        state,
        &[
            "reserve", "--team", "wings", "--nodes", "10", "--hours", "4",
        ],
    );
    let out = colosim(
        state,
        &[
            "reserve", "--team", "wings", "--nodes", "4", "--hours", "20",
        ],
    );
    assert_eq!(
        code(&out),
        3,
        "token exhaustion must exit 3: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // Pool exhaustion also exits 3.
    let out = colosim(
        state,
        &[
            "reserve", "--team", "other", "--nodes", "12", "--hours", "1",
        ],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    let out = colosim(state, &["tokens", "--team", "wings"]);
    assert!(stdout(&out).contains("540 of 1000"), "{}", stdout(&out));

    // Unknown team reads are validation errors.
    let out = colosim(state, &["tokens", "--team", "ghosts"]);
    assert_eq!(code(&out), 2);
}
