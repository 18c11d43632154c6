//! Voluntary eye-blink detection on the frontal channel and the
//! three-blink confirmation rule.
//!
//! The adaptive threshold `sigma = c' * mean(|S_j|)` is computed from the
//! 1-10 Hz bandpassed window; deliberate blinks are then the threshold
//! runs wider than 200 ms. Runs are extracted from the raw channel: the
//! bandpass's 1 Hz corner smears a 150-250 ms deflection into a much longer
//! biphasic complex, so the raw waveform is the one whose width still
//! discriminates a deliberate blink from a brief spike.

use crate::error::Result;
use crate::filter::{apply_filter, design_bandpass};
use crate::peaks::{extract_peaks, merge_peaks};
use crate::signal::SignalWindow;

/// Blink channel bandpass corners and order.
pub const BLINK_FILTER_ORDER: usize = 4;
pub const BLINK_BAND_LOW_HZ: f64 = 1.0;
pub const BLINK_BAND_HIGH_HZ: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BlinkConfig {
    /// Threshold sensitivity `c'`.
    pub sensitivity_c_prime: f64,
    /// Minimum event width; deliberate blinks must exceed this, strictly.
    pub min_width_ms: f64,
    /// Blinks required inside the confirmation window.
    pub confirm_count: usize,
    /// Confirmation window length after the feedback instant.
    pub confirm_window_s: f64,
    /// Below-threshold gap under which two runs count as one blink.
    pub min_gap_ms: f64,
}

impl Default for BlinkConfig {
    fn default() -> Self {
        Self {
            sensitivity_c_prime: 5.0,
            min_width_ms: 200.0,
            confirm_count: 3,
            confirm_window_s: 4.0,
            min_gap_ms: 100.0,
        }
    }
}

impl BlinkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sensitivity_c_prime <= 0.0
            || self.min_width_ms <= 0.0
            || self.confirm_window_s <= 0.0
            || self.min_gap_ms <= 0.0
            || self.confirm_count == 0
        {
            return Err(crate::error::Error::InvalidInput(
                "blink config fields must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One detected blink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlinkEvent {
    /// Absolute onset in seconds (session time).
    pub onset_s: f64,
    pub width_ms: f64,
    pub apex_value: f64,
}

/// `sigma = c' * mean(|S_j|)` over the window, `w` being the bandpassed
/// blink channel. Rectified amplitudes: the raw mean of a 1-10 Hz signal is
/// zero by construction and would yield a useless threshold.
pub fn blink_threshold(w: &SignalWindow, cfg: &BlinkConfig) -> f64 {
    let mean_abs = w.samples().iter().map(|v| v.abs()).sum::<f64>() / w.len() as f64;
    cfg.sensitivity_c_prime * mean_abs
}

/// Runs the blink pipeline on one raw window: bandpass for the threshold
/// statistic, threshold runs on the raw channel, gap merging, width rule.
pub fn detect_blinks(raw: &SignalWindow, cfg: &BlinkConfig) -> Result<Vec<BlinkEvent>> {
    cfg.validate()?;
    let spec = design_bandpass(
        BLINK_FILTER_ORDER,
        BLINK_BAND_LOW_HZ,
        BLINK_BAND_HIGH_HZ,
        raw.sample_rate() as f64,
    )?;
    let filtered = apply_filter(&spec, raw)?;
    let sigma = blink_threshold(&filtered, cfg);
    let peaks = extract_peaks(raw, sigma);
    let merged = merge_peaks(peaks, raw.sample_rate(), cfg.min_gap_ms);
    let fs = raw.sample_rate() as f64;
    Ok(merged
        .into_iter()
        .filter(|p| p.width_ms > cfg.min_width_ms)
        .map(|p| BlinkEvent {
            onset_s: raw.start_time() + p.start_index as f64 / fs,
            width_ms: p.width_ms,
            apex_value: p.apex_value,
        })
        .collect())
}

/// True iff at least `confirm_count` events start inside
/// `[window_start_s, window_start_s + confirm_window_s]`, both ends inclusive.
pub fn confirm(events: &[BlinkEvent], window_start_s: f64, cfg: &BlinkConfig) -> bool {
    events
        .iter()
        .filter(|e| {
            e.onset_s >= window_start_s && e.onset_s <= window_start_s + cfg.confirm_window_s
        })
        .count()
        >= cfg.confirm_count
}
