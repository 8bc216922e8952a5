//! Regenerate the golden fixtures under tests/fixtures/. Run after a
//! deliberate format or generator change, then review the diff:
//!
//! ```text
//! cargo run --example make_fixtures
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use colosim::channel::{CirTaps, Tap};
use colosim::compiler::gen_sce_qualification;
use colosim::scenario::{
    serialize_batch_job, serialize_rf_scenario, serialize_traffic_script, BatchJobSpec, NodeSpec,
    RfScenario, TapUpdate,
};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    fs::create_dir_all(&dir).expect("create fixtures dir");

    let identity = RfScenario {
        id: "identity".into(),
        n_nodes: 2,
        duration_ms: 60_000,
        sample_rate_hz: 1e6,
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
    };
    identity.validate().unwrap();
    fs::write(dir.join("identity.rfscn"), serialize_rf_scenario(&identity)).unwrap();

    let (rf, traffic) = gen_sce_qualification(1e6, -80.0).unwrap();
    fs::write(dir.join("sce_qual_v1.rfscn"), serialize_rf_scenario(&rf)).unwrap();
    fs::write(
        dir.join("sce_qual_v1.tgen"),
        serialize_traffic_script(&traffic),
    )
    .unwrap();

    // A format-stressing fixture: multipath taps, negative and tiny gains,
    // a carrier override, the noise-free marker.
    let multipath = RfScenario {
        id: "multipath".into(),
        n_nodes: 3,
        duration_ms: 120_000,
        sample_rate_hz: 80e6,
        carrier_hz: 2.4e9,
        noise_power_dbfs: f64::NEG_INFINITY,
        updates: vec![
            TapUpdate {
                t_ms: 0,
                carrier_hz: None,
                links: vec![
                    CirTaps::new(
                        0,
                        1,
                        vec![
                            Tap::new(0, Complex64::new(2.39e-4, 0.0)),
                            Tap::new(107, Complex64::new(-1.7e-5, 3.3e-5)),
                            Tap::new(350, Complex64::new(1e-6, -1e-6)),
                            Tap::new(511, Complex64::new(-5e-7, 0.0)),
                        ],
                    ),
                    CirTaps::single(2, 0, 42, Complex64::new(0.125, -0.25)),
                ],
            },
            TapUpdate {
                t_ms: 60_000,
                carrier_hz: Some(2.45e9),
                links: vec![CirTaps::single(0, 1, 0, Complex64::new(0.001953125, 0.0))],
            },
        ],
    };
    multipath.validate().unwrap();
    fs::write(
        dir.join("multipath.rfscn"),
        serialize_rf_scenario(&multipath),
    )
    .unwrap();

    let mut params = BTreeMap::new();
    params.insert("seed".to_string(), serde_json::json!(5));
    let job = BatchJobSpec {
        duration_s: 60,
        rf_scenario: "sce_qual_v1".into(),
        traffic_scenario: Some("sce_qual_v1".into()),
        n_nodes: 2,
        nodes: vec![
            NodeSpec {
                role: "modem_endpoint".into(),
                command: "user-stack --mode a".into(),
            },
            NodeSpec {
                role: "modem_endpoint".into(),
                command: "user-stack --mode b".into(),
            },
        ],
        params,
        team: "wings".into(),
    };
    job.validate().unwrap();
    fs::write(dir.join("sample.job.json"), serialize_batch_job(&job)).unwrap();

    println!("fixtures written to {}", dir.display());
}
