//! Synthetic EEG and scenario generation: scripted SSVEP responses with
//! harmonics, raised-cosine blink pulses, Gaussian background noise, and
//! periodic beacon traffic. Everything is a pure function of
//! (scenario, seed), the ground truth for end-to-end tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::localization::{format_reading, simulate_rssi, BeaconReading, PathLossModel};
use crate::signal::SignalWindow;
use crate::ssvep::{ClassId, StimulusTable};

/// Blink pulse peak amplitude relative to the background noise RMS.
pub const BLINK_AMPLITUDE_OVER_NOISE: f64 = 50.0;

// rng stream ids, one per independent generator output
const STREAM_SSVEP_NOISE: u64 = 0;
const STREAM_SSVEP_PHASES: u64 = 1;
const STREAM_BLINK_NOISE: u64 = 2;
const STREAM_BEACONS: u64 = 3;

/// One gaze span; `class_id = None` models looking away.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeInterval {
    pub start_s: f64,
    pub end_s: f64,
    pub class_id: Option<ClassId>,
}

/// One scripted blink. `width_ms` is the pulse's full width at half maximum;
/// the raised cosine occupies twice that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlinkPulse {
    pub onset_s: f64,
    pub width_ms: f64,
}

impl BlinkPulse {
    pub fn support_s(&self) -> f64 {
        2.0 * self.width_ms / 1000.0
    }
}

/// A beacon position relative to the user, reduced to a distance.
#[derive(Debug, Clone, PartialEq)]
pub struct BeaconGeometry {
    pub beacon_id: String,
    pub room_id: String,
    pub distance_m: f64,
}

/// Everything a trial needs to be generated deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub duration_s: f64,
    pub sample_rate: u32,
    pub gaze_script: Vec<GazeInterval>,
    pub blink_script: Vec<BlinkPulse>,
    pub ssvep_amplitude: f64,
    /// Second-harmonic amplitude as a fraction of the fundamental, in [0, 2].
    pub harmonic_ratio: f64,
    pub noise_rms: f64,
    pub rng_seed: u64,
    pub user_room: String,
    pub beacons: Vec<BeaconGeometry>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            duration_s: 9.0,
            sample_rate: 512,
            gaze_script: Vec::new(),
            blink_script: Vec::new(),
            ssvep_amplitude: 1.0,
            harmonic_ratio: 0.5,
            noise_rms: 0.5,
            rng_seed: 0,
            user_room: "room_a".into(),
            beacons: vec![
                BeaconGeometry {
                    beacon_id: "b_a".into(),
                    room_id: "room_a".into(),
                    distance_m: 2.0,
                },
                BeaconGeometry {
                    beacon_id: "b_b".into(),
                    room_id: "room_b".into(),
                    distance_m: 6.0,
                },
            ],
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if self.sample_rate == 0 || self.duration_s <= 0.0 {
            return fail("scenario needs a positive sample rate and duration".into());
        }
        if self.noise_rms < 0.0 || self.ssvep_amplitude < 0.0 {
            return fail("amplitudes must be non-negative".into());
        }
        if !(0.0..=2.0).contains(&self.harmonic_ratio) {
            return fail(format!(
                "harmonic ratio {} outside [0, 2]",
                self.harmonic_ratio
            ));
        }
        let mut gaze = self.gaze_script.clone();
        gaze.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        for pair in gaze.windows(2) {
            if pair[1].start_s < pair[0].end_s {
                return fail("gaze intervals overlap".into());
            }
        }
        for g in &gaze {
            if g.start_s < 0.0 || g.end_s > self.duration_s || g.start_s >= g.end_s {
                return fail(format!(
                    "gaze interval [{}, {}] outside [0, {}]",
                    g.start_s, g.end_s, self.duration_s
                ));
            }
        }
        for b in &self.blink_script {
            if b.width_ms <= 0.0 || b.onset_s < 0.0 || b.onset_s + b.support_s() > self.duration_s
            {
                return fail(format!(
                    "blink at {} s ({} ms) does not fit the scenario",
                    b.onset_s, b.width_ms
                ));
            }
        }
        for bc in &self.beacons {
            if bc.distance_m <= 0.0 {
                return fail(format!("beacon {} at non-positive distance", bc.beacon_id));
            }
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(stream);
        rng
    }

    fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate as f64).round() as usize
    }
}

fn noise_samples(n: usize, rms: f64, mut rng: ChaCha8Rng) -> Vec<f64> {
    if rms == 0.0 {
        return vec![0.0; n];
    }
    let normal = Normal::new(0.0, rms).expect("finite rms");
    (0..n).map(|_| normal.sample(&mut rng)).collect()
}

/// The evoked-response channel: per gaze interval, a fundamental at the
/// class frequency plus a second harmonic scaled by `harmonic_ratio`, with
/// independent phases per interval, over Gaussian background noise.
pub fn generate_ssvep_channel(sc: &Scenario, table: &StimulusTable) -> Result<SignalWindow> {
    sc.validate()?;
    let n = sc.sample_count();
    let fs = sc.sample_rate as f64;
    let mut samples = noise_samples(n, sc.noise_rms, sc.rng(STREAM_SSVEP_NOISE));
    let mut phase_rng = sc.rng(STREAM_SSVEP_PHASES);
    for g in &sc.gaze_script {
        let Some(class_id) = g.class_id else {
            continue;
        };
        let f = table.frequency_of(class_id).ok_or_else(|| {
            Error::InvalidInput(format!("gaze interval names unknown class {class_id}"))
        })?;
        let phi1: f64 = phase_rng.random_range(0.0..std::f64::consts::TAU);
        let phi2: f64 = phase_rng.random_range(0.0..std::f64::consts::TAU);
        let i0 = (g.start_s * fs).round() as usize;
        let i1 = ((g.end_s * fs).round() as usize).min(n);
        for (i, v) in samples.iter_mut().enumerate().take(i1).skip(i0) {
            let t = i as f64 / fs;
            *v += sc.ssvep_amplitude * (std::f64::consts::TAU * f * t + phi1).sin();
            *v += sc.harmonic_ratio
                * sc.ssvep_amplitude
                * (std::f64::consts::TAU * 2.0 * f * t + phi2).sin();
        }
    }
    SignalWindow::new(samples, sc.sample_rate, "O2")
}

/// The frontal blink channel: one raised-cosine pulse per scripted blink at
/// a fixed 50x-noise amplitude (1.0 when noise-free), over background noise.
pub fn generate_blink_channel(sc: &Scenario) -> Result<SignalWindow> {
    sc.validate()?;
    let mut sorted = sc.blink_script.clone();
    sorted.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s));
    for pair in sorted.windows(2) {
        if pair[1].onset_s < pair[0].onset_s + pair[0].support_s() {
            return Err(Error::InvalidInput(format!(
                "blink pulses at {} s and {} s overlap",
                pair[0].onset_s, pair[1].onset_s
            )));
        }
    }
    let n = sc.sample_count();
    let fs = sc.sample_rate as f64;
    let amp = if sc.noise_rms > 0.0 {
        BLINK_AMPLITUDE_OVER_NOISE * sc.noise_rms
    } else {
        1.0
    };
    let mut samples = noise_samples(n, sc.noise_rms, sc.rng(STREAM_BLINK_NOISE));
    for b in &sorted {
        let support = b.support_s();
        let i0 = (b.onset_s * fs).ceil() as usize;
        let i1 = (((b.onset_s + support) * fs).floor() as usize).min(n - 1);
        for (i, v) in samples.iter_mut().enumerate().take(i1 + 1).skip(i0) {
            let t = i as f64 / fs - b.onset_s;
            *v += amp * 0.5 * (1.0 - (std::f64::consts::TAU * t / support).cos());
        }
    }
    SignalWindow::new(samples, sc.sample_rate, "Fp2")
}

/// Periodic beacon reports: every `interval_ms`, one line per beacon with
/// the path-loss model sampled at the scripted distance.
pub fn generate_beacon_stream(
    sc: &Scenario,
    interval_ms: u64,
    model: &PathLossModel,
) -> Result<Vec<String>> {
    sc.validate()?;
    if interval_ms == 0 {
        return Err(Error::InvalidInput("beacon interval must be positive".into()));
    }
    let mut rng = sc.rng(STREAM_BEACONS);
    let duration_ms = (sc.duration_s * 1000.0).round() as u64;
    let mut lines = Vec::new();
    let mut t_ms = 0;
    while t_ms < duration_ms {
        for bc in &sc.beacons {
            let rssi_dbm = simulate_rssi(bc.distance_m, model, &mut rng)?;
            lines.push(format_reading(&BeaconReading {
                beacon_id: bc.beacon_id.clone(),
                room_id: bc.room_id.clone(),
                rssi_dbm,
                timestamp_ms: t_ms,
            }));
        }
        t_ms += interval_ms;
    }
    Ok(lines)
}
