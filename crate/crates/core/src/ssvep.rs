//! Stimulus-frequency selection: per-class band power scores with second
//! harmonics, the adaptive threshold, and the argmax selection rule.
//!
//! A class scores `A_k = P[f_k +/- 0.05 Hz] + P[2 f_k +/- 0.05 Hz]` where the
//! spectrum comes from the autocorrelated window. The threshold compares the
//! trailing 2 s scores against `c` times the mean class score over the last
//! 4 s, so a selection fires on stimulus onset and is rejected once the
//! response saturates both windows or when no class stands out.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::SignalWindow;
use crate::spectrum::{autocorrelate, band_power, power_spectrum};

/// Usable stimulus band, inclusive.
pub const FREQ_MIN_HZ: f64 = 6.0;
pub const FREQ_MAX_HZ: f64 = 24.0;
/// Minimum inter-stimulus spacing.
pub const MIN_SPACING_HZ: f64 = 0.2;
/// Half-width of the band summed around each target and harmonic.
pub const BAND_HALF_WIDTH_HZ: f64 = 0.05;
/// Score window length (seconds).
pub const SCORE_WINDOW_S: f64 = 2.0;
/// Threshold window length (seconds).
pub const THRESHOLD_WINDOW_S: f64 = 4.0;

/// Identifier of one stimulus class (one device class).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ClassId(pub u16);

impl std::fmt::Display for ClassId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StimulusEntry {
    pub class_id: ClassId,
    pub frequency_hz: f64,
}

/// The target frequency set, one entry per controllable device class.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusTable {
    entries: Vec<StimulusEntry>,
    sensitivity_c: f64,
}

impl StimulusTable {
    /// Validates and builds a table with the default sensitivity `c = 2`.
    ///
    /// Frequencies must lie in `[6, 24]` Hz with pairwise spacing of at
    /// least 0.2 Hz; class ids must be unique and contiguous from 1.
    pub fn new(entries: &[(u16, f64)]) -> Result<Self> {
        Self::with_sensitivity(entries, 2.0)
    }

    pub fn with_sensitivity(entries: &[(u16, f64)], sensitivity_c: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("stimulus table has no entries".into()));
        }
        if sensitivity_c <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "sensitivity c must be positive, got {sensitivity_c}"
            )));
        }
        for &(id, f) in entries {
            if !(FREQ_MIN_HZ..=FREQ_MAX_HZ).contains(&f) {
                return Err(Error::FrequencyOutOfRange {
                    class_id: id,
                    frequency_hz: f,
                });
            }
        }
        for (i, &(id_a, f_a)) in entries.iter().enumerate() {
            for &(id_b, f_b) in &entries[i + 1..] {
                if (f_a - f_b).abs() < MIN_SPACING_HZ {
                    return Err(Error::FrequencySpacing {
                        first_id: id_a,
                        first_hz: f_a,
                        second_id: id_b,
                        second_hz: f_b,
                        gap_hz: (f_a - f_b).abs(),
                    });
                }
            }
        }
        let mut ids: Vec<u16> = entries.iter().map(|e| e.0).collect();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(i, &id)| id != i as u16 + 1) {
            return Err(Error::InvalidInput(format!(
                "class ids must be unique and contiguous from 1, got {ids:?}"
            )));
        }
        Ok(Self {
            entries: entries
                .iter()
                .map(|&(id, f)| StimulusEntry {
                    class_id: ClassId(id),
                    frequency_hz: f,
                })
                .collect(),
            sensitivity_c,
        })
    }

    pub fn entries(&self) -> &[StimulusEntry] {
        &self.entries
    }

    pub fn sensitivity_c(&self) -> f64 {
        self.sensitivity_c
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn frequency_of(&self, class_id: ClassId) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.class_id == class_id)
            .map(|e| e.frequency_hz)
    }
}

/// One decision over a score window.
#[derive(Debug, Clone, PartialEq)]
pub struct SsvepDecision {
    pub scores: Vec<(ClassId, f64)>,
    pub threshold_tau: f64,
    pub selected: Option<ClassId>,
    pub window_start: f64,
}

/// Smallest power-of-two FFT length that both covers the window and keeps
/// the bin width at or below 0.05 Hz, so each scored band spans several bins.
pub fn fft_length_for(sample_rate: u32, window_len: usize) -> usize {
    let mut n = window_len.next_power_of_two();
    while sample_rate as f64 / n as f64 > BAND_HALF_WIDTH_HZ {
        n *= 2;
    }
    n
}

/// Per-class scores `A_k` over the window (fundamental plus second
/// harmonic band power of the autocorrelated spectrum).
pub fn score(w: &SignalWindow, table: &StimulusTable) -> Result<Vec<(ClassId, f64)>> {
    if w.duration() < SCORE_WINDOW_S - 1e-9 {
        return Err(Error::InvalidInput(format!(
            "score window must cover at least {SCORE_WINDOW_S} s, got {} s",
            w.duration()
        )));
    }
    let spectrum = power_spectrum(&autocorrelate(w), fft_length_for(w.sample_rate(), w.len()))?;
    table
        .entries
        .iter()
        .map(|e| {
            let fundamental = band_power(&spectrum, e.frequency_hz, BAND_HALF_WIDTH_HZ)?;
            let harmonic = band_power(&spectrum, 2.0 * e.frequency_hz, BAND_HALF_WIDTH_HZ)?;
            Ok((e.class_id, fundamental + harmonic))
        })
        .collect()
}

/// The threshold arithmetic: `tau = c * mean(A_k)`.
pub fn tau_from_scores(scores: &[(ClassId, f64)], c: f64) -> f64 {
    let sum: f64 = scores.iter().map(|(_, a)| a).sum();
    c * sum / scores.len() as f64
}

/// Adaptive threshold over the trailing 4 s of `w4`.
///
/// The 4 s sample is scored as two consecutive 2 s sub-windows whose
/// per-class scores are averaged; this de-localizes the estimate without
/// letting a stimulus that saturates only the most recent half dominate it.
pub fn threshold(w4: &SignalWindow, table: &StimulusTable) -> Result<f64> {
    if w4.duration() < THRESHOLD_WINDOW_S - 1e-9 {
        return Err(Error::InvalidInput(format!(
            "threshold window must cover at least {THRESHOLD_WINDOW_S} s, got {} s",
            w4.duration()
        )));
    }
    let end = w4.start_time() + w4.duration();
    let older = w4.slice_seconds(end - 4.0, end - 2.0)?;
    let recent = w4.slice_seconds(end - 2.0, end)?;
    let a_old = score(&older, table)?;
    let a_new = score(&recent, table)?;
    let averaged: Vec<(ClassId, f64)> = a_old
        .iter()
        .zip(&a_new)
        .map(|(&(id, old), &(_, new))| (id, (old + new) / 2.0))
        .collect();
    Ok(tau_from_scores(&averaged, table.sensitivity_c))
}

/// Argmax selection: strictly above `tau`, ties to the lowest class id.
pub fn select_from_scores(scores: &[(ClassId, f64)], tau: f64) -> Option<ClassId> {
    let mut best: Option<(ClassId, f64)> = None;
    for &(id, a) in scores {
        let better = match best {
            None => true,
            Some((bid, ba)) => a > ba || (a == ba && id < bid),
        };
        if better {
            best = Some((id, a));
        }
    }
    best.and_then(|(id, a)| (a > tau).then_some(id))
}

/// Full decision: scores from the trailing 2 s window `w2`, threshold from
/// the 4 s window `w4` that ends at the same instant.
pub fn decide(
    w2: &SignalWindow,
    w4: &SignalWindow,
    table: &StimulusTable,
) -> Result<SsvepDecision> {
    let scores = score(w2, table)?;
    let threshold_tau = threshold(w4, table)?;
    let selected = select_from_scores(&scores, threshold_tau);
    Ok(SsvepDecision {
        scores,
        threshold_tau,
        selected,
        window_start: w2.start_time(),
    })
}
