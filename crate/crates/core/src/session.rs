//! End-to-end trial runner and session metrics.
//!
//! A trial generates the scripted channels, slides the selector over the
//! evoked-response channel, resolves the room at each decision instant,
//! and drives the controller through selection, confirmation, and toggle.
//! Scanning stops once too little of the scenario remains to fit a
//! confirmation window.

use serde::Serialize;

use crate::blink::{confirm, detect_blinks, BlinkConfig};
use crate::config::SessionConfig;
use crate::controller::{Controller, HomeModel, Phase};
use crate::error::{Error, Result};
use crate::localization::{parse_stream, resolve, PathLossModel};
use crate::ssvep::{decide, ClassId, StimulusTable, SCORE_WINDOW_S, THRESHOLD_WINDOW_S};
use crate::synth::{
    generate_beacon_stream, generate_blink_channel, generate_ssvep_channel, BlinkPulse,
    GazeInterval, Scenario,
};

/// What one trial did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub intended_class: Option<u16>,
    pub intended_room: String,
    pub selected_class: Option<u16>,
    pub confirmed: bool,
    pub toggled_device: Option<String>,
    /// Stimulus gaze onset to device toggle, present only for toggled trials.
    pub response_time_s: Option<f64>,
}

/// Session-level aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionMetrics {
    pub ssvep_accuracy_pct: f64,
    pub blink_accuracy_pct: f64,
    pub mean_response_time_s: Option<f64>,
    pub transfer_rate_cmd_per_min: Option<f64>,
}

/// The full `simulate` output: config echo, aggregates, per-trial outcomes.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: SessionConfig,
    pub metrics: SessionMetrics,
    pub trials: Vec<TrialOutcome>,
}

impl Report {
    /// Deterministic pretty-printed JSON, newline-terminated.
    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Validated, ready-to-run pieces of a session.
pub struct Session {
    cfg: SessionConfig,
    table: StimulusTable,
    blink_cfg: BlinkConfig,
    home: HomeModel,
    path_loss: PathLossModel,
}

impl Session {
    pub fn new(cfg: SessionConfig) -> Result<Self> {
        let entries: Vec<(u16, f64)> = cfg
            .classes
            .iter()
            .map(|c| (c.class_id, c.frequency_hz))
            .collect();
        let table = StimulusTable::with_sensitivity(&entries, cfg.sensitivity_c)?;
        let labels: Vec<String> = cfg.classes.iter().map(|c| c.label.clone()).collect();
        let mut home = HomeModel::new(&cfg.rooms, &table, &labels)?;
        for (room, class, id) in &cfg.device_ids {
            home.set_device_id(room, ClassId(*class), id)?;
        }
        home.validate()?;
        let blink_cfg = BlinkConfig {
            sensitivity_c_prime: cfg.sensitivity_c_prime,
            ..BlinkConfig::default()
        };
        blink_cfg.validate()?;
        if cfg.stride_s <= 0.0 {
            return Err(Error::InvalidInput("stride must be positive".into()));
        }
        if cfg.duration_s < THRESHOLD_WINDOW_S + blink_cfg.confirm_window_s {
            return Err(Error::InvalidInput(format!(
                "duration {} s cannot fit a {} s detection ramp plus a {} s confirmation window",
                cfg.duration_s, THRESHOLD_WINDOW_S, blink_cfg.confirm_window_s
            )));
        }
        let path_loss = PathLossModel {
            noise_sigma_db: cfg.rssi_noise_db,
            ..PathLossModel::default()
        };
        Ok(Self {
            cfg,
            table,
            blink_cfg,
            home,
            path_loss,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn table(&self) -> &StimulusTable {
        &self.table
    }

    pub fn blink_config(&self) -> &BlinkConfig {
        &self.blink_cfg
    }

    fn scenario(&self, trial_index: usize) -> Scenario {
        Scenario {
            duration_s: self.cfg.duration_s,
            sample_rate: self.cfg.sample_rate,
            gaze_script: self
                .cfg
                .gaze
                .iter()
                .map(|g| GazeInterval {
                    start_s: g.start_s,
                    end_s: g.end_s,
                    class_id: g.class_id.map(ClassId),
                })
                .collect(),
            blink_script: Vec::new(),
            ssvep_amplitude: self.cfg.ssvep_amplitude,
            harmonic_ratio: self.cfg.harmonic_ratio,
            noise_rms: self.cfg.noise_rms,
            rng_seed: self.cfg.seed.wrapping_add(trial_index as u64),
            user_room: self.cfg.user_room.clone(),
            beacons: self.cfg.beacons.iter().map(Into::into).collect(),
        }
    }

    /// Runs one trial; `trial_index` only offsets the scenario seed.
    pub fn run_trial(&self, trial_index: usize) -> Result<TrialOutcome> {
        let scenario = self.scenario(trial_index);
        let ssvep_channel = generate_ssvep_channel(&scenario, &self.table)?;
        let lines = generate_beacon_stream(&scenario, self.cfg.beacon_interval_ms, &self.path_loss)?;
        let readings = parse_stream(&lines.join("\n"))?;
        let mut controller = Controller::new(self.home.clone(), self.blink_cfg.confirm_window_s);

        let intended = scenario
            .gaze_script
            .iter()
            .find(|g| g.class_id.is_some())
            .map(|g| (g.class_id.unwrap(), g.start_s));

        let mut first_selection: Option<ClassId> = None;
        let mut feedback: Option<(ClassId, f64)> = None;
        let mut t = THRESHOLD_WINDOW_S;
        let scan_end = self.cfg.duration_s - self.blink_cfg.confirm_window_s;
        while t <= scan_end + 1e-9 {
            let w2 = ssvep_channel.slice_seconds(t - SCORE_WINDOW_S, t)?;
            let w4 = ssvep_channel.slice_seconds(t - THRESHOLD_WINDOW_S, t)?;
            let decision = decide(&w2, &w4, &self.table)?;
            if first_selection.is_none() {
                first_selection = decision.selected;
            }
            let fix = resolve(&readings, (t * 1000.0).round() as u64, self.cfg.staleness_ms);
            controller.on_ssvep(&decision, &fix);
            if let Phase::AwaitConfirm {
                class_id,
                feedback_time_s,
                ..
            } = controller.phase()
            {
                feedback = Some((*class_id, *feedback_time_s));
                break;
            }
            t += self.cfg.stride_s;
        }

        let mut confirmed = false;
        let mut toggled_device = None;
        let mut response_time_s = None;
        if let Some((_, feedback_s)) = feedback {
            let blink_scenario = Scenario {
                blink_script: self
                    .cfg
                    .blink_offsets
                    .iter()
                    .map(|&(offset_s, width_ms)| BlinkPulse {
                        onset_s: feedback_s + offset_s,
                        width_ms,
                    })
                    .collect(),
                ..scenario.clone()
            };
            let blink_channel = generate_blink_channel(&blink_scenario)?;
            let window_end = feedback_s + self.blink_cfg.confirm_window_s;
            let detect_window =
                blink_channel.slice_seconds((feedback_s - 2.0).max(0.0), window_end)?;
            let events = detect_blinks(&detect_window, &self.blink_cfg)?;
            confirmed = confirm(&events, feedback_s, &self.blink_cfg);
            if confirmed {
                let deciding_event = events
                    .iter()
                    .filter(|e| e.onset_s >= feedback_s && e.onset_s <= window_end)
                    .nth(self.blink_cfg.confirm_count - 1)
                    .expect("confirm() counted enough events");
                let toggle_time = deciding_event.onset_s + deciding_event.width_ms / 1000.0;
                controller.on_blinks(true, toggle_time);
                toggled_device = controller.last_toggle().map(|(d, _)| d.clone());
                if let Some((_, gaze_onset)) = intended {
                    response_time_s = Some(toggle_time - gaze_onset);
                }
            } else {
                controller.tick(window_end + 1e-3);
            }
        }

        let outcome = TrialOutcome {
            intended_class: intended.map(|(c, _)| c.0),
            intended_room: self.cfg.user_room.clone(),
            selected_class: first_selection.map(|c| c.0),
            confirmed,
            toggled_device,
            response_time_s,
        };
        debug_assert_eq!(
            outcome.toggled_device.is_some(),
            outcome.confirmed && outcome.selected_class.is_some(),
            "toggle outside the select-confirm pattern"
        );
        Ok(outcome)
    }

    /// Runs all configured trials and aggregates.
    pub fn run(&self) -> Result<Report> {
        let trials: Vec<TrialOutcome> = (0..self.cfg.trials)
            .map(|i| self.run_trial(i))
            .collect::<Result<_>>()?;
        let metrics = aggregate(&trials)?;
        Ok(Report {
            config: self.cfg.clone(),
            metrics,
            trials,
        })
    }
}

/// Folds outcomes into session metrics.
///
/// Accuracy denominators: selection accuracy over trials with a scripted
/// stimulus, confirmation accuracy over trials that reached a selection.
/// Empty denominators report 100 (no opportunity to be wrong). The transfer
/// rate is `60 / mean_response_time` by construction.
pub fn aggregate(outcomes: &[TrialOutcome]) -> Result<SessionMetrics> {
    if outcomes.is_empty() {
        return Err(Error::InvalidInput("no outcomes to aggregate".into()));
    }
    let opportunities = outcomes.iter().filter(|o| o.intended_class.is_some());
    let (mut n_opp, mut n_correct) = (0usize, 0usize);
    for o in opportunities {
        n_opp += 1;
        if o.selected_class == o.intended_class {
            n_correct += 1;
        }
    }
    let (mut n_attempts, mut n_confirmed) = (0usize, 0usize);
    for o in outcomes {
        if o.selected_class.is_some() {
            n_attempts += 1;
            if o.confirmed {
                n_confirmed += 1;
            }
        }
    }
    let response_times: Vec<f64> = outcomes.iter().filter_map(|o| o.response_time_s).collect();
    let mean_response_time_s = if response_times.is_empty() {
        None
    } else {
        Some(response_times.iter().sum::<f64>() / response_times.len() as f64)
    };
    let pct = |num: usize, den: usize| {
        if den == 0 {
            100.0
        } else {
            100.0 * num as f64 / den as f64
        }
    };
    Ok(SessionMetrics {
        ssvep_accuracy_pct: pct(n_correct, n_opp),
        blink_accuracy_pct: pct(n_confirmed, n_attempts),
        mean_response_time_s,
        transfer_rate_cmd_per_min: mean_response_time_s.map(|m| 60.0 / m),
    })
}
