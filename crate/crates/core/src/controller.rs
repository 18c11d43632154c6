//! The home-automation state machine: idle scanning, selection feedback
//! with flicker pause, the confirmation window, and device toggling.
//!
//! A device toggles only through select-then-confirm: a selection with a
//! room fix opens a confirmation window and pauses the selected LED
//! cluster's flicker; a three-blink confirmation inside the window toggles
//! the device, anything else reverts to idle untouched.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::localization::RoomFix;
use crate::ssvep::{ClassId, SsvepDecision, StimulusTable, SCORE_WINDOW_S};

/// One controllable device class (lamp, fan, ...) with its stimulus frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassInfo {
    pub class_id: ClassId,
    pub frequency_hz: f64,
    pub label: String,
}

/// A device and its power state.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceState {
    device_id: String,
    powered: bool,
}

impl DeviceState {
    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn powered(&self) -> bool {
        self.powered
    }
}

/// Flicker state of the LED cluster driving one (room, class) stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct LedCluster {
    pub frequency_hz: f64,
    pub flickering: bool,
}

/// Rooms x classes registry: one device and one LED cluster per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HomeModel {
    rooms: Vec<String>,
    classes: Vec<ClassInfo>,
    devices: BTreeMap<(String, u16), DeviceState>,
    leds: BTreeMap<(String, u16), LedCluster>,
}

impl HomeModel {
    /// Builds the registry with generated device ids: `<label>_<room>` where
    /// the room keeps only its `room_` suffix if it has one (`room_a` ->
    /// `lamp_a`).
    pub fn new(rooms: &[String], table: &StimulusTable, labels: &[String]) -> Result<Self> {
        if rooms.is_empty() {
            return Err(Error::InvalidInput("home model needs at least one room".into()));
        }
        if labels.len() != table.len() {
            return Err(Error::InvalidInput(format!(
                "{} class labels for {} stimulus entries",
                labels.len(),
                table.len()
            )));
        }
        let classes: Vec<ClassInfo> = table
            .entries()
            .iter()
            .zip(labels)
            .map(|(e, label)| ClassInfo {
                class_id: e.class_id,
                frequency_hz: e.frequency_hz,
                label: label.clone(),
            })
            .collect();
        let mut devices = BTreeMap::new();
        let mut leds = BTreeMap::new();
        for room in rooms {
            let suffix = room.strip_prefix("room_").unwrap_or(room);
            for class in &classes {
                let key = (room.clone(), class.class_id.0);
                devices.insert(
                    key.clone(),
                    DeviceState {
                        device_id: format!("{}_{}", class.label, suffix),
                        powered: false,
                    },
                );
                leds.insert(
                    key,
                    LedCluster {
                        frequency_hz: class.frequency_hz,
                        flickering: true,
                    },
                );
            }
        }
        Ok(Self {
            rooms: rooms.to_vec(),
            classes,
            devices,
            leds,
        })
    }

    /// Overrides one generated device id.
    pub fn set_device_id(&mut self, room_id: &str, class_id: ClassId, device_id: &str) -> Result<()> {
        let d = self
            .devices
            .get_mut(&(room_id.to_string(), class_id.0))
            .ok_or_else(|| Error::UnknownDevice {
                room_id: room_id.into(),
                class_id: class_id.0,
            })?;
        d.device_id = device_id.to_string();
        Ok(())
    }

    pub fn rooms(&self) -> &[String] {
        &self.rooms
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    /// Total addressable devices: rooms x classes.
    pub fn device_count(&self) -> usize {
        self.devices.len()
    }

    pub fn device_for(&self, room_id: &str, class_id: ClassId) -> Result<&DeviceState> {
        self.devices
            .get(&(room_id.to_string(), class_id.0))
            .ok_or_else(|| Error::UnknownDevice {
                room_id: room_id.into(),
                class_id: class_id.0,
            })
    }

    pub fn led_for(&self, room_id: &str, class_id: ClassId) -> Result<&LedCluster> {
        self.leds
            .get(&(room_id.to_string(), class_id.0))
            .ok_or_else(|| Error::UnknownDevice {
                room_id: room_id.into(),
                class_id: class_id.0,
            })
    }

    pub fn devices(&self) -> impl Iterator<Item = (&(String, u16), &DeviceState)> {
        self.devices.iter()
    }

    fn toggle(&mut self, room_id: &str, class_id: ClassId) -> Result<(String, bool)> {
        let d = self
            .devices
            .get_mut(&(room_id.to_string(), class_id.0))
            .ok_or_else(|| Error::UnknownDevice {
                room_id: room_id.into(),
                class_id: class_id.0,
            })?;
        d.powered = !d.powered;
        Ok((d.device_id.clone(), d.powered))
    }

    fn set_flicker(&mut self, room_id: &str, class_id: ClassId, on: bool) {
        if let Some(led) = self.leds.get_mut(&(room_id.to_string(), class_id.0)) {
            led.flickering = on;
        }
    }

    /// Checks the registry invariants: exactly one device and one LED per
    /// (room, class), LED frequency equal to the class frequency.
    pub fn validate(&self) -> Result<()> {
        for room in &self.rooms {
            for class in &self.classes {
                let key = (room.clone(), class.class_id.0);
                let led = self.leds.get(&key).ok_or_else(|| Error::UnknownDevice {
                    room_id: room.clone(),
                    class_id: class.class_id.0,
                })?;
                self.devices.get(&key).ok_or_else(|| Error::UnknownDevice {
                    room_id: room.clone(),
                    class_id: class.class_id.0,
                })?;
                if led.frequency_hz != class.frequency_hz {
                    return Err(Error::InvalidInput(format!(
                        "LED at ({room}, {}) flickers at {} Hz, class is {} Hz",
                        class.class_id, led.frequency_hz, class.frequency_hz
                    )));
                }
            }
        }
        let expected = self.rooms.len() * self.classes.len();
        if self.devices.len() != expected || self.leds.len() != expected {
            return Err(Error::InvalidInput("registry is not rooms x classes".into()));
        }
        Ok(())
    }
}

/// Controller phase.
#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    Idle,
    AwaitConfirm {
        class_id: ClassId,
        room_id: String,
        feedback_time_s: f64,
    },
    Toggling,
}

/// One event-log record; serialized as a single `key=value` line with `-`
/// for absent fields.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub time_s: f64,
    pub kind: &'static str,
    pub room: Option<String>,
    pub class: Option<ClassId>,
    pub device: Option<String>,
    pub detail: String,
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "time_s={:.3} kind={} room={} class={} device={} detail={}",
            self.time_s,
            self.kind,
            self.room.as_deref().unwrap_or("-"),
            self.class.map_or_else(|| "-".into(), |c| c.to_string()),
            self.device.as_deref().unwrap_or("-"),
            if self.detail.is_empty() { "-" } else { &self.detail },
        )
    }
}

/// The single-owner state machine; all events arrive through `on_ssvep`,
/// `on_blinks`, and `tick`.
#[derive(Debug, Clone)]
pub struct Controller {
    model: HomeModel,
    phase: Phase,
    confirm_window_s: f64,
    log: Vec<LogRecord>,
    last_toggle: Option<(String, f64)>,
}

impl Controller {
    pub fn new(model: HomeModel, confirm_window_s: f64) -> Self {
        Self {
            model,
            phase: Phase::Idle,
            confirm_window_s,
            log: Vec::new(),
            last_toggle: None,
        }
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn model(&self) -> &HomeModel {
        &self.model
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    /// Device id and time of the most recent toggle, if any.
    pub fn last_toggle(&self) -> Option<&(String, f64)> {
        self.last_toggle.as_ref()
    }

    pub fn write_log<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for rec in &self.log {
            writeln!(w, "{rec}")?;
        }
        Ok(())
    }

    fn push(&mut self, rec: LogRecord) {
        self.log.push(rec);
    }

    /// Feeds one selection decision and the room fix sampled with it.
    ///
    /// In `Idle`, a selection with a fix opens the confirmation window and
    /// pauses the selected cluster's flicker; a selection without a fix is
    /// logged and dropped. Outside `Idle` decisions are ignored.
    pub fn on_ssvep(&mut self, decision: &SsvepDecision, fix: &RoomFix) {
        let now = decision.window_start + SCORE_WINDOW_S;
        self.tick(now); // a stale confirmation window never outlives an event
        if self.phase != Phase::Idle {
            if decision.selected.is_some() {
                self.push(LogRecord {
                    time_s: now,
                    kind: "ignored_selection",
                    room: None,
                    class: decision.selected,
                    device: None,
                    detail: "selection while awaiting confirmation".into(),
                });
            }
            return;
        }
        let Some(class_id) = decision.selected else {
            return;
        };
        let Some(room_id) = fix.room_id.clone() else {
            log::warn!("selection of class {class_id} dropped: no room fix");
            self.push(LogRecord {
                time_s: now,
                kind: "no_fix",
                room: None,
                class: Some(class_id),
                device: None,
                detail: "selection without a room fix".into(),
            });
            return;
        };
        if self.model.device_for(&room_id, class_id).is_err() {
            self.push(LogRecord {
                time_s: now,
                kind: "unknown_target",
                room: Some(room_id),
                class: Some(class_id),
                device: None,
                detail: "fix names a room outside the registry".into(),
            });
            return;
        }
        self.model.set_flicker(&room_id, class_id, false);
        self.push(LogRecord {
            time_s: now,
            kind: "select",
            room: Some(room_id.clone()),
            class: Some(class_id),
            device: None,
            detail: format!("tau={:.3}", decision.threshold_tau),
        });
        self.phase = Phase::AwaitConfirm {
            class_id,
            room_id,
            feedback_time_s: now,
        };
    }

    /// Feeds the confirmation verdict at `now_s`.
    ///
    /// Confirmed inside the window toggles the device; past the window the
    /// selection aborts untouched. Unconfirmed inside the window leaves the
    /// controller waiting.
    pub fn on_blinks(&mut self, confirmed: bool, now_s: f64) {
        let Phase::AwaitConfirm {
            class_id,
            room_id,
            feedback_time_s,
        } = self.phase.clone()
        else {
            self.push(LogRecord {
                time_s: now_s,
                kind: "stray_blinks",
                room: None,
                class: None,
                device: None,
                detail: "blink verdict while idle".into(),
            });
            return;
        };
        if now_s > feedback_time_s + self.confirm_window_s {
            self.abort(now_s, "window expired before confirmation");
            return;
        }
        if !confirmed {
            return;
        }
        self.phase = Phase::Toggling;
        let (device_id, powered) = self
            .model
            .toggle(&room_id, class_id)
            .expect("device exists; checked at selection");
        self.model.set_flicker(&room_id, class_id, true);
        self.push(LogRecord {
            time_s: now_s,
            kind: "toggle",
            room: Some(room_id),
            class: Some(class_id),
            device: Some(device_id.clone()),
            detail: if powered { "on".into() } else { "off".into() },
        });
        self.last_toggle = Some((device_id, now_s));
        self.phase = Phase::Idle;
    }

    /// Enforces the confirmation timeout; idempotent when nothing expired.
    pub fn tick(&mut self, now_s: f64) {
        if let Phase::AwaitConfirm {
            feedback_time_s, ..
        } = self.phase
        {
            if now_s > feedback_time_s + self.confirm_window_s {
                self.abort(now_s, "confirmation window timed out");
            }
        }
    }

    fn abort(&mut self, now_s: f64, detail: &str) {
        if let Phase::AwaitConfirm {
            class_id, room_id, ..
        } = self.phase.clone()
        {
            self.model.set_flicker(&room_id, class_id, true);
            self.push(LogRecord {
                time_s: now_s,
                kind: "abort",
                room: Some(room_id),
                class: Some(class_id),
                device: None,
                detail: detail.into(),
            });
            self.phase = Phase::Idle;
        }
    }
}
