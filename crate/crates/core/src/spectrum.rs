//! Spectral estimation: autocorrelation, zero-padded FFT magnitudes, and
//! band power sums.
//!
//! The detector pipeline reduces noise by autocorrelating the raw window
//! before the transform; the biased estimator keeps the sequence
//! non-negative definite so the resulting spectrum is well behaved.

use crate::error::{Error, Result};
use crate::signal::SignalWindow;

/// Frequency-domain magnitudes of one transform.
///
/// Bin `i` corresponds to frequency `i * bin_width`; the full two-sided
/// spectrum is kept, so bins above `len/2` mirror the positive frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    bin_width: f64,
    magnitudes: Vec<f64>,
    source_length: usize,
}

impl PowerSpectrum {
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    /// Highest representable frequency, `bin_width * len / 2`.
    pub fn nyquist(&self) -> f64 {
        self.bin_width * (self.magnitudes.len() / 2) as f64
    }

    /// Index of the largest magnitude among the non-negative-frequency bins.
    pub fn dominant_bin(&self) -> usize {
        let half = self.magnitudes.len() / 2;
        let mut best = 0;
        for i in 1..=half {
            if self.magnitudes[i] > self.magnitudes[best] {
                best = i;
            }
        }
        best
    }
}

/// One-sided biased autocorrelation: `r[l] = (1/L) * sum_t x[t] * x[t+l]`
/// for `l = 0..L-1`. Same sample rate, channel tagged `+acf`.
pub fn autocorrelate(w: &SignalWindow) -> SignalWindow {
    let x = w.samples();
    let n = x.len();
    let mut r = vec![0.0; n];
    for lag in 0..n {
        let mut acc = 0.0;
        for t in 0..n - lag {
            acc += x[t] * x[t + lag];
        }
        r[lag] = acc / n as f64;
    }
    w.map_samples(r, "+acf")
}

/// Zero-pads the window to `fft_length` and returns per-bin magnitudes.
///
/// `fft_length` must be a power of two no smaller than the window.
pub fn power_spectrum(w: &SignalWindow, fft_length: usize) -> Result<PowerSpectrum> {
    if !fft_length.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "fft_length {fft_length} is not a power of two"
        )));
    }
    if fft_length < w.len() {
        return Err(Error::InvalidInput(format!(
            "fft_length {fft_length} shorter than window ({} samples)",
            w.len()
        )));
    }
    let mut re = vec![0.0; fft_length];
    let mut im = vec![0.0; fft_length];
    re[..w.len()].copy_from_slice(w.samples());
    fft_in_place(&mut re, &mut im);
    let magnitudes = re
        .iter()
        .zip(&im)
        .map(|(a, b)| a.hypot(*b))
        .collect();
    Ok(PowerSpectrum {
        bin_width: w.sample_rate() as f64 / fft_length as f64,
        magnitudes,
        source_length: w.len(),
    })
}

/// Sum of magnitudes over all bins whose frequency lies in
/// `[center - half_width, center + half_width]`, both endpoints inclusive.
pub fn band_power(p: &PowerSpectrum, center_hz: f64, half_width_hz: f64) -> Result<f64> {
    if center_hz + half_width_hz >= p.nyquist() {
        return Err(Error::InvalidInput(format!(
            "band {center_hz} +/- {half_width_hz} Hz reaches past Nyquist ({} Hz)",
            p.nyquist()
        )));
    }
    let lo = center_hz - half_width_hz;
    let hi = center_hz + half_width_hz;
    // Candidate bin range, then the exact inclusive predicate per bin so the
    // endpoint rule is decided by the actual bin frequency.
    let first = (lo / p.bin_width).floor().max(0.0) as usize;
    let last = (hi / p.bin_width).ceil() as usize;
    let mut sum = 0.0;
    for i in first..=last.min(p.magnitudes.len() - 1) {
        let f = i as f64 * p.bin_width;
        if f >= lo && f <= hi {
            sum += p.magnitudes[i];
        }
    }
    Ok(sum)
}

// Iterative radix-2 Cooley-Tukey, decimation in time. Split re/im arrays,
// table-driven twiddles; lengths are powers of two by construction.
fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    debug_assert!(n.is_power_of_two());
    if n < 2 {
        return;
    }
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 0..n - 1 {
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
        let mut mask = n >> 1;
        while j & mask != 0 {
            j &= !mask;
            mask >>= 1;
        }
        j |= mask;
    }
    // twiddle table for the full length
    let half = n / 2;
    let mut tw_re = vec![0.0; half];
    let mut tw_im = vec![0.0; half];
    for (k, (tr, ti)) in tw_re.iter_mut().zip(tw_im.iter_mut()).enumerate() {
        let angle = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
        *tr = angle.cos();
        *ti = angle.sin();
    }
    let mut size = 2;
    while size <= n {
        let half_size = size / 2;
        let step = n / size;
        let mut start = 0;
        while start < n {
            for k in 0..half_size {
                let (wr, wi) = (tw_re[k * step], tw_im[k * step]);
                let (i0, i1) = (start + k, start + k + half_size);
                let tr = wr * re[i1] - wi * im[i1];
                let ti = wr * im[i1] + wi * re[i1];
                re[i1] = re[i0] - tr;
                im[i1] = im[i0] - ti;
                re[i0] += tr;
                im[i0] += ti;
            }
            start += size;
        }
        size <<= 1;
    }
}
