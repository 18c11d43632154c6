//! Room-level localization from beacon RSSI reports.
//!
//! Beacons relay readings as one-line text records; the occupied room is the
//! room of the strongest sufficiently fresh reading. A log-distance path
//! loss model stands in for real radios in simulation.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::controller::HomeModel;
use crate::error::{Error, Result};
use crate::ssvep::ClassId;

/// Plausible RSSI range accepted from the wire, dBm.
pub const RSSI_MIN_DBM: f64 = -120.0;
pub const RSSI_MAX_DBM: f64 = 0.0;
/// Readings older than this no longer witness the user's position.
pub const DEFAULT_STALENESS_MS: u64 = 2000;

/// One beacon report.
#[derive(Debug, Clone, PartialEq)]
pub struct BeaconReading {
    pub beacon_id: String,
    pub room_id: String,
    pub rssi_dbm: f64,
    pub timestamp_ms: u64,
}

/// Result of one resolution pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomFix {
    /// `None` iff no fresh readings were available.
    pub room_id: Option<String>,
    /// RSSI of the winning reading; meaningless when `room_id` is `None`.
    pub winning_rssi: f64,
    /// Fresh readings that entered the resolution.
    pub readings_considered: usize,
    pub resolved_at_ms: u64,
}

fn token_ok(tok: &str) -> bool {
    !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Parses one wire line: `RSSI <beacon_id> <room_id> <rssi_dbm> <timestamp_ms>`.
pub fn parse_reading(line: &str) -> Result<BeaconReading> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let err = |offset: usize, message: &str| Error::Parse {
        offset,
        message: message.into(),
    };
    let mut fields = Vec::with_capacity(5);
    let mut pos = 0;
    for tok in line.split(' ') {
        fields.push((pos, tok));
        pos += tok.len() + 1;
    }
    if fields.len() != 5 {
        return Err(err(0, &format!("expected 5 fields, got {}", fields.len())));
    }
    if fields[0].1 != "RSSI" {
        return Err(err(0, &format!("unknown record type {:?}", fields[0].1)));
    }
    let (beacon_off, beacon_id) = fields[1];
    if !token_ok(beacon_id) {
        return Err(err(beacon_off, &format!("bad beacon id {beacon_id:?}")));
    }
    let (room_off, room_id) = fields[2];
    if !token_ok(room_id) {
        return Err(err(room_off, &format!("bad room id {room_id:?}")));
    }
    let (rssi_off, rssi_tok) = fields[3];
    let rssi_dbm: f64 = rssi_tok
        .parse()
        .map_err(|_| err(rssi_off, &format!("bad RSSI value {rssi_tok:?}")))?;
    if !rssi_dbm.is_finite() {
        return Err(err(rssi_off, "RSSI must be finite"));
    }
    if !(RSSI_MIN_DBM..=RSSI_MAX_DBM).contains(&rssi_dbm) {
        return Err(Error::RssiOutOfRange { rssi_dbm });
    }
    let (ts_off, ts_tok) = fields[4];
    let timestamp_ms: u64 = ts_tok
        .parse()
        .map_err(|_| err(ts_off, &format!("bad timestamp {ts_tok:?}")))?;
    Ok(BeaconReading {
        beacon_id: beacon_id.to_string(),
        room_id: room_id.to_string(),
        rssi_dbm,
        timestamp_ms,
    })
}

/// Formats a reading as one wire line (no terminator).
pub fn format_reading(r: &BeaconReading) -> String {
    format!(
        "RSSI {} {} {} {}",
        r.beacon_id, r.room_id, r.rssi_dbm, r.timestamp_ms
    )
}

/// Parses a stream of lines; lines whose first token is unknown are skipped
/// with a warning, malformed `RSSI` lines are errors.
pub fn parse_stream(text: &str) -> Result<Vec<BeaconReading>> {
    let mut readings = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let first = line.split(' ').next().unwrap_or("");
        if first != "RSSI" {
            log::warn!("skipping unknown record type {first:?}");
            continue;
        }
        readings.push(parse_reading(line)?);
    }
    Ok(readings)
}

/// Picks the room of the strongest fresh reading.
///
/// Only each beacon's most recent fresh reading competes. Ties on RSSI go to
/// the lexicographically smallest beacon id; ties inside one beacon resolve
/// by (timestamp, rssi, room) so the result is independent of input order.
pub fn resolve(readings: &[BeaconReading], now_ms: u64, staleness_ms: u64) -> RoomFix {
    let fresh: Vec<&BeaconReading> = readings
        .iter()
        .filter(|r| now_ms.saturating_sub(r.timestamp_ms) <= staleness_ms)
        .collect();
    let mut latest: std::collections::BTreeMap<&str, &BeaconReading> = Default::default();
    for r in &fresh {
        latest
            .entry(r.beacon_id.as_str())
            .and_modify(|cur| {
                let newer = (r.timestamp_ms, r.rssi_dbm, &r.room_id)
                    > (cur.timestamp_ms, cur.rssi_dbm, &cur.room_id);
                if newer {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    let winner = latest.values().copied().reduce(|best, r| {
        if r.rssi_dbm > best.rssi_dbm
            || (r.rssi_dbm == best.rssi_dbm && r.beacon_id < best.beacon_id)
        {
            r
        } else {
            best
        }
    });
    match winner {
        Some(w) => RoomFix {
            room_id: Some(w.room_id.clone()),
            winning_rssi: w.rssi_dbm,
            readings_considered: fresh.len(),
            resolved_at_ms: now_ms,
        },
        None => RoomFix {
            room_id: None,
            winning_rssi: f64::NEG_INFINITY,
            readings_considered: 0,
            resolved_at_ms: now_ms,
        },
    }
}

/// The unique device at (room, class); the registry owns the n-rooms by
/// m-classes bijection.
pub fn device_for<'a>(
    room_id: &str,
    class_id: ClassId,
    registry: &'a HomeModel,
) -> Result<&'a str> {
    registry.device_for(room_id, class_id).map(|d| d.device_id())
}

/// Log-distance path loss: `rssi = p0 - 10 * exponent * log10(d)` plus
/// Gaussian shadowing noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    /// Received power at 1 m, dBm.
    pub p0_dbm: f64,
    /// Path loss exponent (2.0 free space, ~2.5-4 indoors).
    pub exponent: f64,
    /// Shadowing standard deviation, dB.
    pub noise_sigma_db: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            p0_dbm: -40.0,
            exponent: 2.5,
            noise_sigma_db: 2.0,
        }
    }
}

impl PathLossModel {
    pub fn noiseless() -> Self {
        Self {
            noise_sigma_db: 0.0,
            ..Self::default()
        }
    }

    /// Deterministic part of the model.
    pub fn mean_rssi(&self, distance_m: f64) -> Result<f64> {
        if distance_m <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "distance must be positive, got {distance_m} m"
            )));
        }
        Ok(self.p0_dbm - 10.0 * self.exponent * distance_m.log10())
    }
}

/// Draws one RSSI sample at the given distance; deterministic for a given
/// (model, rng state).
pub fn simulate_rssi<R: Rng>(
    distance_m: f64,
    model: &PathLossModel,
    rng: &mut R,
) -> Result<f64> {
    let mean = model.mean_rssi(distance_m)?;
    if model.noise_sigma_db == 0.0 {
        return Ok(mean);
    }
    let normal = Normal::new(0.0, model.noise_sigma_db)
        .map_err(|e| Error::InvalidInput(format!("bad noise sigma: {e}")))?;
    Ok(mean + normal.sample(rng))
}
