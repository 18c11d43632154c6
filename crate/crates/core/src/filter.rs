//! Butterworth bandpass design (bilinear transform, prewarped corners) and
//! causal recursive filtering.
//!
//! Filters are realized as cascaded biquad sections rather than one expanded
//! direct form; at a 1 Hz corner on a 512 Hz rate the expanded denominator
//! has clustered roots near z = 1 and loses the stability margin to
//! round-off.

use crate::error::{Error, Result};
use crate::signal::SignalWindow;

/// One second-order section, denominator normalized to `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    /// Feedforward coefficients `b0, b1, b2`.
    pub b: [f64; 3],
    /// Feedback coefficients `a1, a2`.
    pub a: [f64; 2],
}

impl Biquad {
    fn response_at(&self, omega: f64) -> (f64, f64) {
        // |num| and |den| at z = e^{j omega}
        let (c1, s1) = (omega.cos(), -omega.sin());
        let (c2, s2) = ((2.0 * omega).cos(), -(2.0 * omega).sin());
        let num_re = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let num_im = self.b[1] * s1 + self.b[2] * s2;
        let den_re = 1.0 + self.a[0] * c1 + self.a[1] * c2;
        let den_im = self.a[0] * s1 + self.a[1] * s2;
        (num_re.hypot(num_im), den_re.hypot(den_im))
    }

    fn is_stable(&self) -> bool {
        // both roots of z^2 + a1 z + a2 strictly inside the unit circle
        self.a[1].abs() < 1.0 && self.a[0].abs() < 1.0 + self.a[1]
    }
}

/// A realizable recursive bandpass filter: design parameters plus the
/// biquad cascade that implements it.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    order: usize,
    low_cut: f64,
    high_cut: f64,
    sample_rate: f64,
    sections: Vec<Biquad>,
}

impl FilterSpec {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn low_cut(&self) -> f64 {
        self.low_cut
    }

    pub fn high_cut(&self) -> f64 {
        self.high_cut
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Magnitude response at `freq_hz`, evaluated on the unit circle.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        let omega = 2.0 * std::f64::consts::PI * freq_hz / self.sample_rate;
        self.sections
            .iter()
            .map(|s| {
                let (num, den) = s.response_at(omega);
                num / den
            })
            .product()
    }

    /// Magnitude response in dB relative to unity gain.
    pub fn gain_db_at(&self, freq_hz: f64) -> f64 {
        20.0 * self.magnitude_at(freq_hz).log10()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }
}

/// Designs a Butterworth bandpass of the given transfer-function order.
///
/// `order` counts the poles of the realized filter (a 4th-order bandpass has
/// four poles, from a 2nd-order lowpass prototype) and must be even. Corner
/// frequencies are prewarped so the digital response is -3 dB at exactly
/// `low` and `high`.
pub fn design_bandpass(order: usize, low: f64, high: f64, fs: f64) -> Result<FilterSpec> {
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "bandpass order must be a positive even integer, got {order}"
        )));
    }
    if !(low > 0.0 && low < high && high < fs / 2.0) {
        return Err(Error::InvalidInput(format!(
            "corner frequencies must satisfy 0 < {low} < {high} < {}",
            fs / 2.0
        )));
    }
    let proto_order = order / 2;
    let k = 2.0 * fs; // bilinear constant
    let wl = k * (std::f64::consts::PI * low / fs).tan();
    let wh = k * (std::f64::consts::PI * high / fs).tan();
    let w0_sq = wl * wh;
    let bw = wh - wl;

    // Analog prototype poles on the unit circle, left half-plane. Each
    // prototype pole maps to two bandpass poles via
    // s^2 - p*bw*s + w0^2 = 0; only the upper-half (or real) prototype poles
    // are expanded, conjugates come from pairing.
    let mut analog: Vec<(f64, f64)> = Vec::with_capacity(order);
    for i in 0..proto_order {
        let theta = std::f64::consts::PI * (2.0 * i as f64 + proto_order as f64 + 1.0)
            / (2.0 * proto_order as f64);
        let (p_re, p_im) = (theta.cos(), theta.sin());
        if p_im < -1e-12 {
            continue; // conjugate of an already-expanded pole
        }
        let (tb_re, tb_im) = (p_re * bw, p_im * bw);
        // disc = sqrt((p*bw)^2 - 4*w0^2)
        let d_re = tb_re * tb_re - tb_im * tb_im - 4.0 * w0_sq;
        let d_im = 2.0 * tb_re * tb_im;
        let (sq_re, sq_im) = complex_sqrt(d_re, d_im);
        let roots = [
            ((tb_re + sq_re) / 2.0, (tb_im + sq_im) / 2.0),
            ((tb_re - sq_re) / 2.0, (tb_im - sq_im) / 2.0),
        ];
        if p_im > 1e-12 {
            analog.extend_from_slice(&roots);
        } else {
            // real prototype pole: the two roots are already conjugates
            analog.push(roots[0]);
        }
    }

    // Bilinear transform z = (k + s) / (k - s); each entry stands for a
    // conjugate pole pair, one biquad per entry with zeros at z = 1, -1.
    let omega_center = 2.0 * (w0_sq.sqrt() / k).atan();
    let mut sections = Vec::with_capacity(analog.len());
    for (s_re, s_im) in analog {
        // z = (k + s) / (k - s)
        let den_sq = (k - s_re) * (k - s_re) + s_im * s_im;
        let z_re = (k * k - s_re * s_re - s_im * s_im) / den_sq;
        let z_im = 2.0 * k * s_im / den_sq;
        let mut section = Biquad {
            b: [1.0, 0.0, -1.0],
            a: [-2.0 * z_re, z_re * z_re + z_im * z_im],
        };
        let (num, den) = section.response_at(omega_center);
        let gain = den / num; // unity gain at the center frequency
        section.b = [gain, 0.0, -gain];
        sections.push(section);
    }

    let spec = FilterSpec {
        order,
        low_cut: low,
        high_cut: high,
        sample_rate: fs,
        sections,
    };
    debug_assert!(spec.is_stable());
    Ok(spec)
}

/// Causal single-pass filtering with zero initial state; output length
/// equals input length. Direct form II transposed per section.
pub fn apply_filter(spec: &FilterSpec, w: &SignalWindow) -> Result<SignalWindow> {
    if spec.sample_rate != w.sample_rate() as f64 {
        return Err(Error::SampleRateMismatch {
            expected: spec.sample_rate as u32,
            actual: w.sample_rate(),
        });
    }
    let mut out = w.samples().to_vec();
    for s in &spec.sections {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in out.iter_mut() {
            let x = *v;
            let y = s.b[0] * x + z1;
            z1 = s.b[1] * x - s.a[0] * y + z2;
            z2 = s.b[2] * x - s.a[1] * y;
            *v = y;
        }
    }
    Ok(w.map_samples(out, ""))
}

fn complex_sqrt(re: f64, im: f64) -> (f64, f64) {
    let mag = re.hypot(im);
    let sq_re = ((mag + re) / 2.0).sqrt();
    let sq_im = ((mag - re) / 2.0).sqrt() * im.signum();
    (sq_re, sq_im)
}
