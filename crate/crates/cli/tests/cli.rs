//! Command-line behavior: subcommand outputs, exit codes, config loading.

use std::fs;
use std::process::{Command, Output};

use neurohome_core::signal::write_signal;
use neurohome_core::ssvep::ClassId;
use neurohome_core::synth::{
    generate_blink_channel, generate_ssvep_channel, BlinkPulse, GazeInterval, Scenario,
};
use neurohome_core::StimulusTable;

fn neurohome(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neurohome"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_temp_signal(dir: &std::path::Path, name: &str, w: &neurohome_core::SignalWindow) -> String {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_signal(w, &mut buf).unwrap();
    fs::write(&path, buf).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn detect_names_the_six_hz_class() {
    let table = StimulusTable::new(&[(1, 6.0), (2, 8.2)]).unwrap();
    let sc = Scenario {
        duration_s: 5.0,
        rng_seed: 42,
        gaze_script: vec![GazeInterval {
            start_s: 3.0,
            end_s: 5.0,
            class_id: Some(ClassId(1)),
        }],
        ..Scenario::default()
    };
    let w = generate_ssvep_channel(&sc, &table).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp_signal(dir.path(), "o2.txt", &w);
    let out = neurohome(&["detect", &path, "--freqs", "6,8.2"]);
    let v = stdout_json(&out);
    assert_eq!(v["selected_class"].as_u64(), Some(1));
    assert_eq!(v["selected_frequency_hz"].as_f64(), Some(6.0));
    assert_eq!(v["scores"].as_array().unwrap().len(), 2);
}

#[test]
fn detect_rejects_short_files() {
    let w = neurohome_core::SignalWindow::new(vec![0.5; 512], 512, "O2").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp_signal(dir.path(), "short.txt", &w);
    let out = neurohome(&["detect", &path]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("short.txt"), "{stderr}");
}

#[test]
fn blinks_reports_three_events() {
    let sc = Scenario {
        duration_s: 6.0,
        rng_seed: 5,
        blink_script: vec![
            BlinkPulse { onset_s: 2.5, width_ms: 250.0 },
            BlinkPulse { onset_s: 3.3, width_ms: 250.0 },
            BlinkPulse { onset_s: 4.1, width_ms: 250.0 },
        ],
        ..Scenario::default()
    };
    let w = generate_blink_channel(&sc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp_signal(dir.path(), "fp2.txt", &w);
    let v = stdout_json(&neurohome(&["blinks", &path]));
    assert_eq!(v["sigma_events"].as_u64(), Some(3));
    for e in v["events"].as_array().unwrap() {
        assert!(e["width_ms"].as_f64().unwrap() > 200.0);
    }
}

#[test]
fn spectrum_orders_band_powers() {
    let table = StimulusTable::new(&[(1, 6.0), (2, 8.2)]).unwrap();
    let sc = Scenario {
        duration_s: 2.0,
        noise_rms: 0.0,
        gaze_script: vec![GazeInterval {
            start_s: 0.0,
            end_s: 2.0,
            class_id: Some(ClassId(1)),
        }],
        ..Scenario::default()
    };
    let w = generate_ssvep_channel(&sc, &table).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp_signal(dir.path(), "tone.txt", &w);
    let v = stdout_json(&neurohome(&["spectrum", &path, "--freqs", "6,8.2"]));
    let bands = v["bands"].as_array().unwrap();
    assert_eq!(bands.len(), 2);
    assert!(bands[0]["total"].as_f64().unwrap() > bands[1]["total"].as_f64().unwrap());
    assert!(bands[0]["fundamental_power"].as_f64().unwrap() > 0.0);
}

#[test]
fn locate_with_and_without_readings() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let v = stdout_json(&neurohome(&["locate", empty.to_str().unwrap()]));
    assert!(v["room_id"].is_null());
    assert_eq!(v["readings_considered"].as_u64(), Some(0));

    let lines = dir.path().join("readings.txt");
    fs::write(
        &lines,
        "RSSI b1 room_a -45.5 1000\nRSSI b2 room_b -60 1000\nJUNK skipped line\n",
    )
    .unwrap();
    let v = stdout_json(&neurohome(&["locate", lines.to_str().unwrap()]));
    assert_eq!(v["room_id"].as_str(), Some("room_a"));
    assert_eq!(v["winning_rssi_dbm"].as_f64(), Some(-45.5));
    assert_eq!(v["readings_considered"].as_u64(), Some(2));
}

#[test]
fn locate_rejects_malformed_rssi_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "RSSI b1 room_a notanumber 0\n").unwrap();
    let out = neurohome(&["locate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_honors_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("session.conf");
    fs::write(
        &cfg,
        "trials = 2\nseed = 11\nuser_room = room_b\nbeacon b_a room_a 6.0\nbeacon b_b room_b 2.0\n",
    )
    .unwrap();
    let out = neurohome(&["simulate", "--config", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["config"]["trials"].as_u64(), Some(2));
    assert_eq!(v["config"]["user_room"].as_str(), Some("room_b"));
    assert_eq!(v["trials"].as_array().unwrap().len(), 2);
    assert_eq!(
        v["trials"][0]["toggled_device"].as_str(),
        Some("lamp_b"),
        "selection should land in the user's room"
    );
}

#[test]
fn usage_errors_exit_one_data_errors_exit_two() {
    assert_eq!(neurohome(&["bogus"]).status.code(), Some(1));
    assert_eq!(neurohome(&["simulate", "--trials", "abc"]).status.code(), Some(1));
    assert_eq!(neurohome(&["detect", "/no/such/file"]).status.code(), Some(2));
    let bad_cfg = neurohome(&["simulate", "--config", "/no/such/config"]);
    assert_eq!(bad_cfg.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_cfg.stderr).contains("/no/such/config"));
    assert_eq!(neurohome(&["--help"]).status.code(), Some(0));
    assert_eq!(neurohome(&["--version"]).status.code(), Some(0));
}
