//! Threshold crossing runs: one peak per maximal contiguous run of samples
//! strictly above a threshold.

use crate::signal::SignalWindow;

/// A contiguous above-threshold run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub start_index: usize,
    pub end_index: usize,
    pub width_ms: f64,
    pub apex_value: f64,
}

impl Peak {
    fn from_run(samples: &[f64], start: usize, end: usize, fs: u32) -> Peak {
        let apex = samples[start..=end]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        Peak {
            start_index: start,
            end_index: end,
            width_ms: (end - start + 1) as f64 / fs as f64 * 1000.0,
            apex_value: apex,
        }
    }
}

/// Returns peaks in time order. A NaN threshold matches nothing.
pub fn extract_peaks(w: &SignalWindow, threshold: f64) -> Vec<Peak> {
    let samples = w.samples();
    let mut peaks = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, &v) in samples.iter().enumerate() {
        match (v > threshold, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                peaks.push(Peak::from_run(samples, s, i - 1, w.sample_rate()));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        peaks.push(Peak::from_run(samples, s, samples.len() - 1, w.sample_rate()));
    }
    peaks
}

/// Merges adjacent peaks whose below-threshold gap is shorter than
/// `min_gap_ms`; the merged peak spans both runs and keeps the larger apex.
pub fn merge_peaks(peaks: Vec<Peak>, sample_rate: u32, min_gap_ms: f64) -> Vec<Peak> {
    let fs = sample_rate as f64;
    let mut merged: Vec<Peak> = Vec::with_capacity(peaks.len());
    for p in peaks {
        if let Some(last) = merged.last_mut() {
            let gap_ms = (p.start_index - last.end_index - 1) as f64 / fs * 1000.0;
            if gap_ms < min_gap_ms {
                last.end_index = p.end_index;
                last.width_ms = (last.end_index - last.start_index + 1) as f64 / fs * 1000.0;
                last.apex_value = last.apex_value.max(p.apex_value);
                continue;
            }
        }
        merged.push(p);
    }
    merged
}
