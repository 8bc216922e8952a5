//! Property tests for the engine's algebraic invariants and the format and
//! matching guarantees.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use colosim::channel::{CirTaps, Engine, EngineConfig, Tap};
use colosim::netapps::{max_weight_matching, SinrMatrix};
use colosim::rng::Key;
use colosim::scenario::{parse_rf_scenario, serialize_rf_scenario};

use common::*;

fn engine_with(links: &[CirTaps], n: usize, b: usize, seed: u64) -> Engine {
    let mut engine = Engine::new(EngineConfig::new(n, 1e6, b, seed)).unwrap();
    engine.set_taps(links, 1e9).unwrap();
    engine
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Linearity with noise off: process(a*x + b*x') equals
    /// a*process(x) + b*process(x') within accumulated rounding.
    #[test]
    fn engine_is_linear(seed in any::<u64>(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
        const N: usize = 3;
        const LEN: usize = 2000;
        let key = Key::new(seed);
        let links = random_links(key.word(1), N);
        let x: Vec<Vec<Complex64>> = (0..N).map(|i| random_stream(key.word(2).word(i as u64), LEN)).collect();
        let y: Vec<Vec<Complex64>> = (0..N).map(|i| random_stream(key.word(3).word(i as u64), LEN)).collect();
        let mixed: Vec<Vec<Complex64>> = (0..N)
            .map(|i| x[i].iter().zip(&y[i]).map(|(p, q)| a * p + b * q).collect())
            .collect();

        let out_mixed = run_engine_stream(&mut engine_with(&links, N, 250, 0), &mixed);
        let out_x = run_engine_stream(&mut engine_with(&links, N, 250, 0), &x);
        let out_y = run_engine_stream(&mut engine_with(&links, N, 250, 0), &y);

        for rx in 0..N {
            for s in 0..LEN {
                let combined = a * out_x[rx][s] + b * out_y[rx][s];
                let err = (out_mixed[rx][s] - combined).norm();
                prop_assert!(
                    err <= 1e-9 * (1.0 + combined.norm()),
                    "rx {} sample {}: {} vs {}", rx, s, out_mixed[rx][s], combined
                );
            }
        }
    }

    /// Counter-based noise and per-transmitter history make output streams
    /// bit-identical across block sizes.
    #[test]
    fn block_size_invariance(seed in any::<u64>(), b_small in 1usize..=64) {
        const N: usize = 2;
        let len = b_small * 2 * 8; // eight blocks of the doubled size
        let key = Key::new(seed);
        let links = random_links(key.word(1), N);
        let inputs: Vec<Vec<Complex64>> =
            (0..N).map(|i| random_stream(key.word(2).word(i as u64), len)).collect();

        let noisy = |b: usize| {
            let config = EngineConfig::new(N, 1e6, b, seed).with_noise_dbfs(-25.0);
            let mut engine = Engine::new(config).unwrap();
            engine.set_taps(&links, 1e9).unwrap();
            run_engine_stream(&mut engine, &inputs)
        };
        let small = noisy(b_small);
        let doubled = noisy(b_small * 2);
        prop_assert_eq!(small, doubled);
    }

    /// Identical seeds and inputs reproduce output bit for bit.
    #[test]
    fn engine_is_deterministic(seed in any::<u64>()) {
        const N: usize = 3;
        const LEN: usize = 1500;
        let key = Key::new(seed);
        let links = random_links(key.word(1), N);
        let inputs: Vec<Vec<Complex64>> =
            (0..N).map(|i| random_stream(key.word(2).word(i as u64), LEN)).collect();
        let run = || {
            let config = EngineConfig::new(N, 1e6, 500, seed).with_noise_dbfs(-30.0);
            let mut engine = Engine::new(config).unwrap();
            engine.set_taps(&links, 1e9).unwrap();
            run_engine_stream(&mut engine, &inputs)
        };
        prop_assert_eq!(run(), run());
    }

    /// parse(serialize(s)) == s and double serialization is byte-stable for
    /// arbitrary valid scenarios.
    #[test]
    fn scenario_round_trip(seed in any::<u64>()) {
        let scenario = random_scenario(Key::new(seed));
        prop_assert!(scenario.validate().is_ok());
        let bytes = serialize_rf_scenario(&scenario);
        let parsed = parse_rf_scenario(&bytes).unwrap();
        prop_assert_eq!(&parsed, &scenario);
        prop_assert_eq!(serialize_rf_scenario(&parsed), bytes);
    }

    /// The augmenting-path matching equals exhaustive enumeration for every
    /// matrix with at most 7 rows.
    #[test]
    fn matching_equals_brute_force(
        rows in 1usize..=7,
        extra_cols in 0usize..=3,
        cells in prop::collection::vec(-40.0f64..40.0, 7 * 10),
    ) {
        let cols = rows + extra_cols;
        let weights: Vec<Vec<f64>> =
            (0..rows).map(|r| (0..cols).map(|c| cells[r * 10 + c]).collect()).collect();
        let matrix = SinrMatrix::new(weights.clone()).unwrap();
        let assignment = max_weight_matching(&matrix).unwrap();
        // Injective.
        let mut seen = assignment.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), rows);
        let total = matrix.total(&assignment);
        let brute = brute_force_best_total(&weights);
        prop_assert!((total - brute).abs() <= 1e-9 * (1.0 + brute.abs()),
            "matching {} vs brute force {}", total, brute);
    }

    /// Traffic scripts round-trip: parse . serialize restores the scenario
    /// and the canonical text is stable.
    #[test]
    fn traffic_script_round_trip(
        n_flows in 1usize..=6,
        rates in prop::collection::vec(0.25f64..200.0, 6),
        sizes in prop::collection::vec(1usize..=65_507, 6),
        spans in prop::collection::vec((0u64..30_000, prop::option::of(1u64..60_000)), 6),
    ) {
        use colosim::scenario::{FlowEvent, FlowEventKind, FlowPattern, TrafficScenario};
        let patterns = [FlowPattern::Periodic, FlowPattern::Poisson, FlowPattern::Burst];
        let mut events = Vec::new();
        for f in 0..n_flows {
            let (on, off) = spans[f];
            events.push(FlowEvent {
                t_ms: on,
                flow_id: f as u32 + 1,
                kind: FlowEventKind::On {
                    src_node: f,
                    dst_node: f + 1,
                    pattern: patterns[f % 3],
                    rate_pps: rates[f],
                    size_bytes: sizes[f],
                },
            });
            if let Some(gap) = off {
                events.push(FlowEvent { t_ms: on + gap, flow_id: f as u32 + 1, kind: FlowEventKind::Off });
            }
        }
        events.sort_by_key(|e| (e.t_ms, matches!(e.kind, FlowEventKind::On { .. })));
        let scenario = TrafficScenario { id: String::new(), events };
        prop_assume!(scenario.validate().is_ok());
        let text = colosim::scenario::serialize_traffic_script(&scenario);
        let parsed = colosim::scenario::parse_traffic_script(&text).unwrap();
        prop_assert_eq!(&parsed, &scenario);
        prop_assert_eq!(colosim::scenario::serialize_traffic_script(&parsed), text);
    }

    /// Scheduled PERIODIC send times carry zero jitter: every timestamp is an
    /// exact multiple of the interval.
    #[test]
    fn periodic_schedule_has_zero_jitter(rate in 1u32..=50, window_s in 1u64..=30) {
        let script = format!("0.0 ON 1 SRC 0 DST 1 PERIODIC [{rate} 100]\n");
        let scenario = colosim::scenario::parse_traffic_script(&script).unwrap();
        let events = colosim::traffic::schedule(&scenario, 0).events(window_s * 1000);
        prop_assert_eq!(events.len() as u64, u64::from(rate) * window_s);
        let interval = 1000.0 / f64::from(rate);
        for (i, p) in events.iter().enumerate() {
            prop_assert_eq!(p.sent_at_ms, i as f64 * interval, "packet {}", i);
        }
    }
}

/// Unit-power white input through a sparse channel converges to the tap
/// energy sum.
#[test]
fn output_power_matches_tap_energy() {
    const LEN: usize = 100_000;
    let taps = vec![
        Tap::new(0, Complex64::new(0.8, 0.1)),
        Tap::new(17, Complex64::new(-0.3, 0.4)),
        Tap::new(211, Complex64::new(0.05, -0.55)),
        Tap::new(500, Complex64::new(0.2, 0.2)),
    ];
    let expected: f64 = taps.iter().map(|t| t.gain.norm_sqr()).sum();
    let links = vec![CirTaps::new(0, 1, taps)];
    let mut engine = engine_with(&links, 2, 1000, 3);
    let input = white_unit_stream(Key::new(0xE4E1), LEN);
    let silent = vec![Complex64::new(0.0, 0.0); LEN];
    let out = run_engine_stream(&mut engine, &[input, silent]);
    let power: f64 = out[1].iter().map(|s| s.norm_sqr()).sum::<f64>() / LEN as f64;
    let ratio = power / expected;
    assert!((ratio - 1.0).abs() <= 0.05, "output power ratio {ratio}");
}

/// Tap updates staged against a common boundary leave the two block sizes
/// bit-identical too.
#[test]
fn block_size_invariance_with_mid_run_update() {
    const N: usize = 2;
    const LEN: usize = 4096;
    let key = Key::new(77);
    let inputs: Vec<Vec<Complex64>> = (0..N)
        .map(|i| random_stream(key.word(i as u64), LEN))
        .collect();
    let half = LEN / 2; // a multiple of both block sizes under test
    let run = |b: usize| {
        let config = EngineConfig::new(N, 1e6, b, 9).with_noise_dbfs(-20.0);
        let mut engine = Engine::new(config).unwrap();
        engine
            .set_taps(&[CirTaps::single(0, 1, 3, Complex64::new(0.5, 0.0))], 1e9)
            .unwrap();
        let first: Vec<Vec<Complex64>> = inputs.iter().map(|s| s[..half].to_vec()).collect();
        let out1 = run_engine_stream(&mut engine, &first);
        engine
            .set_taps(&[CirTaps::single(0, 1, 3, Complex64::new(-0.25, 0.5))], 1e9)
            .unwrap();
        let second: Vec<Vec<Complex64>> = inputs.iter().map(|s| s[half..].to_vec()).collect();
        let out2 = run_engine_stream(&mut engine, &second);
        (out1, out2)
    };
    assert_eq!(run(64), run(128));
}
