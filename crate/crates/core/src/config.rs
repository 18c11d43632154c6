//! Session configuration: defaults matching the two-room lamp/fan setup,
//! and a line-oriented text format (`key = value` scalars plus repeated
//! stanza lines for classes, rooms, beacons, and scripts).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::synth::BeaconGeometry;

/// One stimulus class as configured: id, frequency, device label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassConfig {
    pub class_id: u16,
    pub frequency_hz: f64,
    pub label: String,
}

/// One scripted gaze interval; `class_id = None` is looking away.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GazeConfig {
    pub start_s: f64,
    pub end_s: f64,
    pub class_id: Option<u16>,
}

/// A beacon's room and distance from the user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeaconConfig {
    pub beacon_id: String,
    pub room_id: String,
    pub distance_m: f64,
}

impl From<&BeaconConfig> for BeaconGeometry {
    fn from(b: &BeaconConfig) -> Self {
        BeaconGeometry {
            beacon_id: b.beacon_id.clone(),
            room_id: b.room_id.clone(),
            distance_m: b.distance_m,
        }
    }
}

/// Everything one `simulate` run needs; also echoed verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionConfig {
    pub sample_rate: u32,
    pub duration_s: f64,
    /// Decision cadence of the sliding detector.
    pub stride_s: f64,
    pub trials: usize,
    pub seed: u64,
    pub ssvep_amplitude: f64,
    pub noise_rms: f64,
    pub harmonic_ratio: f64,
    pub sensitivity_c: f64,
    pub sensitivity_c_prime: f64,
    pub rssi_noise_db: f64,
    pub beacon_interval_ms: u64,
    pub staleness_ms: u64,
    pub classes: Vec<ClassConfig>,
    pub rooms: Vec<String>,
    pub beacons: Vec<BeaconConfig>,
    pub user_room: String,
    pub gaze: Vec<GazeConfig>,
    /// Blink script relative to the feedback instant: (offset_s, width_ms).
    pub blink_offsets: Vec<(f64, f64)>,
    /// Explicit device ids overriding the generated `<label>_<room>` names.
    pub device_ids: Vec<(String, u16, String)>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            sample_rate: 512,
            duration_s: 9.0,
            stride_s: 0.5,
            trials: 500,
            seed: 42,
            ssvep_amplitude: 1.0,
            noise_rms: 0.5,
            harmonic_ratio: 0.5,
            sensitivity_c: 2.0,
            sensitivity_c_prime: 5.0,
            rssi_noise_db: 2.0,
            beacon_interval_ms: 500,
            staleness_ms: 2000,
            classes: vec![
                ClassConfig {
                    class_id: 1,
                    frequency_hz: 6.0,
                    label: "lamp".into(),
                },
                ClassConfig {
                    class_id: 2,
                    frequency_hz: 8.2,
                    label: "fan".into(),
                },
            ],
            rooms: vec!["room_a".into(), "room_b".into()],
            beacons: vec![
                BeaconConfig {
                    beacon_id: "b_a".into(),
                    room_id: "room_a".into(),
                    distance_m: 2.0,
                },
                BeaconConfig {
                    beacon_id: "b_b".into(),
                    room_id: "room_b".into(),
                    distance_m: 6.0,
                },
            ],
            user_room: "room_a".into(),
            gaze: vec![GazeConfig {
                start_s: 2.0,
                end_s: 9.0,
                class_id: Some(1),
            }],
            blink_offsets: vec![(0.5, 250.0), (1.3, 250.0), (2.1, 250.0)],
            device_ids: Vec::new(),
        }
    }
}

impl SessionConfig {
    /// Parses the text format on top of the defaults. The first stanza line
    /// of a list kind replaces that default list; `gaze none` and
    /// `blink_offset none` clear a list outright.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SessionConfig::default();
        let mut seen: std::collections::BTreeSet<&'static str> = Default::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fail = |message: String| Error::Config {
                line: idx + 1,
                message,
            };
            if let Some((key, value)) = line.split_once('=') {
                let (key, value) = (key.trim(), value.trim());
                parse_scalar(&mut cfg, key, value).map_err(&fail)?;
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let clear = |list_seen: &mut std::collections::BTreeSet<&'static str>,
                         kind: &'static str|
             -> bool { list_seen.insert(kind) };
            match fields[0] {
                "class" => {
                    if clear(&mut seen, "class") {
                        cfg.classes.clear();
                    }
                    if fields.len() != 4 {
                        return Err(fail("class takes: <id> <frequency_hz> <label>".into()));
                    }
                    cfg.classes.push(ClassConfig {
                        class_id: parse_field(fields[1]).map_err(&fail)?,
                        frequency_hz: parse_field(fields[2]).map_err(&fail)?,
                        label: fields[3].to_string(),
                    });
                }
                "room" => {
                    if clear(&mut seen, "room") {
                        cfg.rooms.clear();
                    }
                    if fields.len() != 2 {
                        return Err(fail("room takes: <room_id>".into()));
                    }
                    cfg.rooms.push(fields[1].to_string());
                }
                "beacon" => {
                    if clear(&mut seen, "beacon") {
                        cfg.beacons.clear();
                    }
                    if fields.len() != 4 {
                        return Err(fail("beacon takes: <id> <room_id> <distance_m>".into()));
                    }
                    cfg.beacons.push(BeaconConfig {
                        beacon_id: fields[1].to_string(),
                        room_id: fields[2].to_string(),
                        distance_m: parse_field(fields[3]).map_err(&fail)?,
                    });
                }
                "gaze" => {
                    if clear(&mut seen, "gaze") {
                        cfg.gaze.clear();
                    }
                    if fields.len() == 2 && fields[1] == "none" {
                        continue;
                    }
                    if fields.len() != 4 {
                        return Err(fail("gaze takes: <start_s> <end_s> <class_id|none>".into()));
                    }
                    let class_id = if fields[3] == "none" {
                        None
                    } else {
                        Some(parse_field(fields[3]).map_err(&fail)?)
                    };
                    cfg.gaze.push(GazeConfig {
                        start_s: parse_field(fields[1]).map_err(&fail)?,
                        end_s: parse_field(fields[2]).map_err(&fail)?,
                        class_id,
                    });
                }
                "blink_offset" => {
                    if clear(&mut seen, "blink_offset") {
                        cfg.blink_offsets.clear();
                    }
                    if fields.len() == 2 && fields[1] == "none" {
                        continue;
                    }
                    if fields.len() != 3 {
                        return Err(fail("blink_offset takes: <offset_s> <width_ms>".into()));
                    }
                    cfg.blink_offsets.push((
                        parse_field(fields[1]).map_err(&fail)?,
                        parse_field(fields[2]).map_err(&fail)?,
                    ));
                }
                "device" => {
                    if fields.len() != 4 {
                        return Err(fail("device takes: <room_id> <class_id> <device_id>".into()));
                    }
                    cfg.device_ids.push((
                        fields[1].to_string(),
                        parse_field(fields[2]).map_err(&fail)?,
                        fields[3].to_string(),
                    ));
                }
                other => {
                    return Err(fail(format!("unknown stanza {other:?}")));
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse {s:?}"))
}

fn parse_scalar(cfg: &mut SessionConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "fs" => cfg.sample_rate = parse_field(value)?,
        "duration_s" => cfg.duration_s = parse_field(value)?,
        "stride_s" => cfg.stride_s = parse_field(value)?,
        "trials" => cfg.trials = parse_field(value)?,
        "seed" => cfg.seed = parse_field(value)?,
        "ssvep_amplitude" => cfg.ssvep_amplitude = parse_field(value)?,
        "noise_rms" => cfg.noise_rms = parse_field(value)?,
        "harmonic_ratio" => cfg.harmonic_ratio = parse_field(value)?,
        "c" => cfg.sensitivity_c = parse_field(value)?,
        "c_prime" => cfg.sensitivity_c_prime = parse_field(value)?,
        "rssi_noise_db" => cfg.rssi_noise_db = parse_field(value)?,
        "beacon_interval_ms" => cfg.beacon_interval_ms = parse_field(value)?,
        "staleness_ms" => cfg.staleness_ms = parse_field(value)?,
        "user_room" => cfg.user_room = value.to_string(),
        other => return Err(format!("unknown key {other:?}")),
    }
    Ok(())
}
