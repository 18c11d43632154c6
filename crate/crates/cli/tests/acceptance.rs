//! Acceptance suite: one test per release criterion, each printing a
//! `ACCEPTANCE <name>: PASS` line (run with `--nocapture` to see them all).

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use neurohome_core::blink::{detect_blinks, BlinkConfig};
use neurohome_core::config::SessionConfig;
use neurohome_core::controller::{Controller, HomeModel, Phase};
use neurohome_core::filter::{apply_filter, design_bandpass};
use neurohome_core::localization::{
    format_reading, parse_reading, resolve, simulate_rssi, BeaconReading, PathLossModel,
};
use neurohome_core::session::{aggregate, Session, TrialOutcome};
use neurohome_core::spectrum::{autocorrelate, power_spectrum};
use neurohome_core::ssvep::{decide, select_from_scores, tau_from_scores, ClassId, SsvepDecision};
use neurohome_core::synth::{generate_blink_channel, generate_ssvep_channel, BlinkPulse, Scenario};
use neurohome_core::{SignalWindow, StimulusTable};

fn pass(name: &str, detail: String) {
    println!("ACCEPTANCE {name}: PASS ({detail})");
}

fn toggled_outcome(rt: f64) -> TrialOutcome {
    TrialOutcome {
        intended_class: Some(1),
        intended_room: "room_a".into(),
        selected_class: Some(1),
        confirmed: true,
        toggled_device: Some("lamp_a".into()),
        response_time_s: Some(rt),
    }
}

/// Reported response times must reproduce the reported transfer rates.
#[test]
fn transfer_rate_arithmetic() {
    let started = Instant::now();
    let rows = [(4.8, 12.5), (5.5, 10.9), (5.7, 10.52), (4.8, 12.5)];
    for (response_time, expected_rate) in rows {
        let metrics = aggregate(&[toggled_outcome(response_time)]).unwrap();
        let rate = metrics.transfer_rate_cmd_per_min.unwrap();
        assert!(
            (rate - expected_rate).abs() <= 0.05,
            "{response_time} s -> {rate} cmd/min, expected {expected_rate}"
        );
        assert_eq!(metrics.mean_response_time_s, Some(response_time));
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        "transfer_rate_arithmetic",
        format!("4 rows within 0.05 cmd/min in {elapsed:?}"),
    );
}

/// 500 seeded trials at amplitude = 2x noise RMS select the scripted class
/// at >= 99%; 500 no-stimulus trials false-select in <= 5%.
#[test]
fn ssvep_selection_accuracy() {
    let started = Instant::now();
    let stim_cfg = SessionConfig {
        trials: 500,
        seed: 2000,
        ssvep_amplitude: 1.0,
        noise_rms: 0.5,
        blink_offsets: Vec::new(),
        ..SessionConfig::default()
    };
    let report = Session::new(stim_cfg).unwrap().run().unwrap();
    let correct = report
        .trials
        .iter()
        .filter(|o| o.selected_class == o.intended_class)
        .count();
    assert!(
        correct * 100 >= report.trials.len() * 99,
        "selection accuracy {correct}/500"
    );

    let noise_cfg = SessionConfig {
        trials: 500,
        seed: 3000,
        gaze: Vec::new(),
        blink_offsets: Vec::new(),
        ..SessionConfig::default()
    };
    let report = Session::new(noise_cfg).unwrap().run().unwrap();
    let false_selections = report
        .trials
        .iter()
        .filter(|o| o.selected_class.is_some())
        .count();
    assert!(
        false_selections * 100 <= report.trials.len() * 5,
        "false selections {false_selections}/500"
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    pass(
        "ssvep_selection_accuracy",
        format!("{correct}/500 correct, {false_selections}/500 false fires in {elapsed:?}"),
    );
}

/// 500 trials with three scripted 250 ms blinks confirm every time; with
/// 150 ms spikes nothing confirms.
#[test]
fn blink_confirmation_rates() {
    let started = Instant::now();
    let blink_cfg = SessionConfig {
        trials: 500,
        seed: 4000,
        ..SessionConfig::default()
    };
    let report = Session::new(blink_cfg).unwrap().run().unwrap();
    let selections = report
        .trials
        .iter()
        .filter(|o| o.selected_class.is_some())
        .count();
    let confirmed = report.trials.iter().filter(|o| o.confirmed).count();
    assert_eq!(selections, 500, "every high-SNR trial should select");
    assert_eq!(confirmed, selections, "confirmation rate must be 100%");

    let spike_cfg = SessionConfig {
        trials: 500,
        seed: 5000,
        blink_offsets: vec![(0.5, 150.0), (1.3, 150.0), (2.1, 150.0)],
        ..SessionConfig::default()
    };
    let report = Session::new(spike_cfg).unwrap().run().unwrap();
    let spurious = report.trials.iter().filter(|o| o.confirmed).count();
    assert_eq!(spurious, 0, "150 ms spikes must never confirm");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        "blink_confirmation_rates",
        format!("500/500 confirmed, 0/500 spike confirmations in {elapsed:?}"),
    );
}

/// The 4th-order 1-10 Hz bandpass at 512 Hz: -3 dB +/- 0.5 at both corners,
/// at most -30 dB at 0.1 and 50 Hz, impulse response below 1e-6 within 10 s.
#[test]
fn bandpass_filter_response() {
    let spec = design_bandpass(4, 1.0, 10.0, 512.0).unwrap();
    for corner in [1.0, 10.0] {
        let db = spec.gain_db_at(corner);
        assert!((db + 3.0).abs() <= 0.5, "corner {corner} Hz: {db:.3} dB");
    }
    let low_stop = spec.gain_db_at(0.1);
    let high_stop = spec.gain_db_at(50.0);
    assert!(low_stop <= -30.0, "0.1 Hz: {low_stop:.2} dB");
    assert!(high_stop <= -30.0, "50 Hz: {high_stop:.2} dB");

    let mut impulse = vec![0.0; 10 * 512];
    impulse[0] = 1.0;
    let w = SignalWindow::new(impulse, 512, "Fp2").unwrap();
    let response = apply_filter(&spec, &w).unwrap();
    let tail_max = response.samples()[5120 - 512..]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(tail_max < 1e-6, "tail still at {tail_max:e}");
    pass(
        "bandpass_filter_response",
        format!(
            "corners {:.2}/{:.2} dB, stopband {low_stop:.1}/{high_stop:.1} dB, tail {tail_max:.1e}",
            spec.gain_db_at(1.0),
            spec.gain_db_at(10.0)
        ),
    );
}

/// FFT magnitudes match a naive O(L^2) DFT within 1e-9 relative error on 100
/// random 32-sample windows; autocorrelation matches direct summation
/// within 1e-12.
#[test]
fn spectral_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut worst_dft = 0.0f64;
    let mut worst_acf = 0.0f64;
    for _ in 0..100 {
        let samples: Vec<f64> = (0..32).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = SignalWindow::new(samples.clone(), 512, "O2").unwrap();

        let p = power_spectrum(&w, 32).unwrap();
        for (k, &got) in p.magnitudes().iter().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in samples.iter().enumerate() {
                let angle = -2.0 * PI * (k * t) as f64 / 32.0;
                re += x * angle.cos();
                im += x * angle.sin();
            }
            let want = re.hypot(im);
            worst_dft = worst_dft.max((got - want).abs() / want.abs().max(1.0));
        }

        let acf = autocorrelate(&w);
        for (lag, &got) in acf.samples().iter().enumerate() {
            let want: f64 =
                (0..32 - lag).map(|t| samples[t] * samples[t + lag]).sum::<f64>() / 32.0;
            worst_acf = worst_acf.max((got - want).abs());
        }
    }
    assert!(worst_dft < 1e-9, "worst DFT deviation {worst_dft:e}");
    assert!(worst_acf < 1e-12, "worst ACF deviation {worst_acf:e}");
    pass(
        "spectral_oracle_equivalence",
        format!("max relative DFT error {worst_dft:.2e}, max ACF error {worst_acf:.2e}"),
    );
}

/// Positive scaling never changes a selection or a blink event set over 200
/// random windows; equal scores with c = 2 never select.
#[test]
fn decision_invariances() {
    let table = StimulusTable::new(&[(1, 6.0), (2, 8.2)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let blink_cfg = BlinkConfig::default();
    let mut selections = 0;
    for i in 0..200 {
        let alpha: f64 = rng.random_range(0.1..10.0);
        let stimulated = i % 2 == 0;
        let sc = Scenario {
            duration_s: 4.0,
            rng_seed: 7000 + i,
            ssvep_amplitude: if stimulated { 1.0 } else { 0.0 },
            gaze_script: if stimulated {
                vec![neurohome_core::synth::GazeInterval {
                    start_s: 2.0,
                    end_s: 4.0,
                    class_id: Some(ClassId(1 + (i % 4 == 0) as u16)),
                }]
            } else {
                Vec::new()
            },
            ..Scenario::default()
        };
        let w = generate_ssvep_channel(&sc, &table).unwrap();
        let w2 = w.slice_seconds(2.0, 4.0).unwrap();
        let base = decide(&w2, &w, &table).unwrap();
        selections += usize::from(base.selected.is_some());
        let scaled = SignalWindow::new(
            w.samples().iter().map(|v| v * alpha).collect(),
            w.sample_rate(),
            w.channel(),
        )
        .unwrap();
        let s2 = scaled.slice_seconds(2.0, 4.0).unwrap();
        let got = decide(&s2, &scaled, &table).unwrap();
        assert_eq!(got.selected, base.selected, "alpha {alpha} flipped a decision");

        let blink_sc = Scenario {
            duration_s: 6.0,
            rng_seed: 9000 + i,
            blink_script: vec![
                BlinkPulse { onset_s: 2.5, width_ms: 250.0 },
                BlinkPulse { onset_s: 3.3, width_ms: 150.0 },
                BlinkPulse { onset_s: 4.1, width_ms: 250.0 },
            ],
            ..Scenario::default()
        };
        let b = generate_blink_channel(&blink_sc).unwrap();
        let base_events = detect_blinks(&b, &blink_cfg).unwrap();
        let scaled_b = SignalWindow::new(
            b.samples().iter().map(|v| v * alpha).collect(),
            b.sample_rate(),
            b.channel(),
        )
        .unwrap();
        let got_events = detect_blinks(&scaled_b, &blink_cfg).unwrap();
        assert_eq!(got_events.len(), base_events.len());
        for (a, b) in got_events.iter().zip(&base_events) {
            assert_eq!(a.onset_s, b.onset_s);
            assert_eq!(a.width_ms, b.width_ms);
        }
    }
    assert!(selections > 0, "invariance must be exercised on live selections");

    // equal-score rejection, forced by tau = c * mean with c = 2, m = 2
    for _ in 0..200 {
        let a: f64 = rng.random_range(1e-6..1e6);
        let scores = [(ClassId(1), a), (ClassId(2), a)];
        let tau = tau_from_scores(&scores, 2.0);
        assert_eq!(select_from_scores(&scores, tau), None);
    }
    let zeros = SignalWindow::new(vec![0.0; 2048], 512, "O2").unwrap();
    let z2 = zeros.slice_seconds(2.0, 4.0).unwrap();
    assert_eq!(decide(&z2, &zeros, &table).unwrap().selected, None);
    pass(
        "decision_invariances",
        format!("200 scaled windows ({selections} with live selections), 200 equal-score rejections"),
    );
}

/// Zero-noise path loss always resolves the nearer room; 2 dB shadowing at
/// a 3:1 distance ratio stays >= 99% over 10,000 resolves; the wire format
/// round-trips 1,000 fuzzed readings.
#[test]
fn localization_accuracy_and_roundtrip() {
    let noiseless = PathLossModel::noiseless();
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    for _ in 0..200 {
        let near: f64 = rng.random_range(0.5..10.0);
        let far: f64 = near * rng.random_range(1.1..5.0);
        let readings = [
            BeaconReading {
                beacon_id: "near".into(),
                room_id: "room_near".into(),
                rssi_dbm: simulate_rssi(near, &noiseless, &mut rng).unwrap(),
                timestamp_ms: 0,
            },
            BeaconReading {
                beacon_id: "far".into(),
                room_id: "room_far".into(),
                rssi_dbm: simulate_rssi(far, &noiseless, &mut rng).unwrap(),
                timestamp_ms: 0,
            },
        ];
        assert_eq!(
            resolve(&readings, 0, 2000).room_id.as_deref(),
            Some("room_near")
        );
    }

    let shadowed = PathLossModel::default();
    let mut correct = 0;
    for _ in 0..10_000 {
        let readings = [
            BeaconReading {
                beacon_id: "own".into(),
                room_id: "room_own".into(),
                rssi_dbm: simulate_rssi(2.0, &shadowed, &mut rng).unwrap(),
                timestamp_ms: 0,
            },
            BeaconReading {
                beacon_id: "other".into(),
                room_id: "room_other".into(),
                rssi_dbm: simulate_rssi(6.0, &shadowed, &mut rng).unwrap(),
                timestamp_ms: 0,
            },
        ];
        if resolve(&readings, 0, 2000).room_id.as_deref() == Some("room_own") {
            correct += 1;
        }
    }
    assert!(correct >= 9_900, "room accuracy {correct}/10000");

    for i in 0..1_000 {
        let r = BeaconReading {
            beacon_id: format!("b_{}", i % 37),
            room_id: format!("room_{}", i % 11),
            rssi_dbm: rng.random_range(-120.0..0.0),
            timestamp_ms: rng.random_range(0..u64::MAX / 2),
        };
        assert_eq!(parse_reading(&format_reading(&r)).unwrap(), r);
    }
    pass(
        "localization_accuracy_and_roundtrip",
        format!("noiseless 200/200, shadowed {correct}/10000, 1000 round-trips"),
    );
}

/// 10,000 random event traces: no toggle without a selection confirmed
/// inside its window, and the confirmation phase never outlives 4 s.
#[test]
fn controller_safety_traces() {
    let table = StimulusTable::new(&[(1, 6.0), (2, 8.2)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    for trace in 0..10_000 {
        let home = HomeModel::new(
            &["room_a".into(), "room_b".into()],
            &table,
            &["lamp".into(), "fan".into()],
        )
        .unwrap();
        let mut controller = Controller::new(home, 4.0);
        let mut now = 4.0;
        let mut power_state: std::collections::BTreeMap<String, bool> = controller
            .model()
            .devices()
            .map(|(_, d)| (d.device_id().to_string(), d.powered()))
            .collect();
        for _ in 0..rng.random_range(3..30usize) {
            now += rng.random_range(0.0..3.0);
            let pre_phase = controller.phase().clone();
            let mut legal_toggle = false;
            match rng.random_range(0..3u8) {
                0 => {
                    let selected = rng.random_bool(0.7).then(|| ClassId(rng.random_range(1..=2)));
                    let has_fix = rng.random_bool(0.8);
                    let decision = SsvepDecision {
                        scores: vec![(ClassId(1), 1.0), (ClassId(2), 0.5)],
                        threshold_tau: 0.9,
                        selected,
                        window_start: now - 2.0,
                    };
                    let fix = neurohome_core::localization::RoomFix {
                        room_id: has_fix.then(|| {
                            if rng.random_bool(0.5) { "room_a" } else { "room_b" }.to_string()
                        }),
                        winning_rssi: -50.0,
                        readings_considered: usize::from(has_fix),
                        resolved_at_ms: (now * 1000.0) as u64,
                    };
                    controller.on_ssvep(&decision, &fix);
                }
                1 => {
                    let confirmed = rng.random_bool(0.5);
                    legal_toggle = confirmed
                        && matches!(
                            &pre_phase,
                            Phase::AwaitConfirm { feedback_time_s, .. } if now <= feedback_time_s + 4.0
                        );
                    controller.on_blinks(confirmed, now);
                }
                _ => {
                    controller.tick(now);
                }
            }
            let toggled_now: Vec<String> = controller
                .model()
                .devices()
                .filter(|(_, d)| power_state[d.device_id()] != d.powered())
                .map(|(_, d)| d.device_id().to_string())
                .collect();
            if !toggled_now.is_empty() {
                assert!(
                    legal_toggle,
                    "trace {trace}: toggle outside select-confirm at t={now:.2}"
                );
                assert_eq!(toggled_now.len(), 1, "trace {trace}: multiple devices moved");
            }
            for (_, d) in controller.model().devices() {
                power_state.insert(d.device_id().to_string(), d.powered());
            }
            if let Phase::AwaitConfirm {
                feedback_time_s, ..
            } = controller.phase()
            {
                assert!(
                    now <= feedback_time_s + 4.0,
                    "trace {trace}: confirmation window outlived its 4 s at t={now:.2}"
                );
            }
        }
    }
    pass("controller_safety_traces", "10000 traces, no illegal toggle".into());
}

/// `simulate --trials 100 --seed 7` twice produces byte-identical reports.
#[test]
fn simulate_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |path: &std::path::Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_neurohome"))
            .args(["simulate", "--trials", "100", "--seed", "7", "--out"])
            .arg(path)
            .status()
            .expect("binary runs");
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let a = run(&dir.path().join("a.json"));
    let b = run(&dir.path().join("b.json"));
    assert_eq!(a, b, "reports differ between runs");
    assert!(!a.is_empty());
    pass(
        "simulate_determinism",
        format!("two runs, {} identical bytes", a.len()),
    );
}
