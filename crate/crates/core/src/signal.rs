//! Fixed-rate sampled signal segments and the plain-text signal file format.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A contiguous run of equally spaced samples from one channel.
///
/// Windows are immutable after construction; every processing stage returns
/// a fresh window. `start_time` is seconds since session start and rides
/// along through slicing so detector outputs carry absolute timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalWindow {
    samples: Vec<f64>,
    sample_rate: u32,
    channel: String,
    start_time: f64,
}

impl SignalWindow {
    pub fn new(samples: Vec<f64>, sample_rate: u32, channel: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("signal window has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
            channel: channel.into(),
            start_time: 0.0,
        })
    }

    pub fn with_start_time(mut self, start_time: f64) -> Self {
        self.start_time = start_time;
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    /// Window length in seconds; exact, there are no partial samples.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Extracts `[from_s, to_s)` in absolute session time as a new window.
    pub fn slice_seconds(&self, from_s: f64, to_s: f64) -> Result<SignalWindow> {
        let fs = self.sample_rate as f64;
        let i0 = ((from_s - self.start_time) * fs).round() as i64;
        let i1 = ((to_s - self.start_time) * fs).round() as i64;
        if i0 < 0 || i1 > self.samples.len() as i64 || i0 >= i1 {
            return Err(Error::InvalidInput(format!(
                "slice [{from_s}, {to_s}) s outside window [{}, {}) s",
                self.start_time,
                self.start_time + self.duration()
            )));
        }
        Ok(SignalWindow {
            samples: self.samples[i0 as usize..i1 as usize].to_vec(),
            sample_rate: self.sample_rate,
            channel: self.channel.clone(),
            start_time: self.start_time + i0 as f64 / fs,
        })
    }

    /// Rebuilds the window with new samples, keeping rate/channel/start.
    pub(crate) fn map_samples(&self, samples: Vec<f64>, channel_suffix: &str) -> SignalWindow {
        SignalWindow {
            samples,
            sample_rate: self.sample_rate,
            channel: format!("{}{}", self.channel, channel_suffix),
            start_time: self.start_time,
        }
    }
}

/// Reads the signal file format: `# fs=<integer> channel=<label>` followed by
/// one decimal amplitude per line.
pub fn read_signal<R: BufRead>(reader: R) -> Result<SignalWindow> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::SignalFormat {
            line: 1,
            message: "empty file".into(),
        })?
        .map_err(Error::Io)?;
    let (fs, channel) = parse_header(&header)?;
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.map_err(Error::Io)?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: f64 = trimmed.parse().map_err(|_| Error::SignalFormat {
            line: idx + 2,
            message: format!("not a decimal amplitude: {trimmed:?}"),
        })?;
        samples.push(value);
    }
    if samples.is_empty() {
        return Err(Error::SignalFormat {
            line: 2,
            message: "no samples".into(),
        });
    }
    SignalWindow::new(samples, fs, channel)
}

fn parse_header(header: &str) -> Result<(u32, String)> {
    let bad = |message: String| Error::SignalFormat { line: 1, message };
    let rest = header
        .strip_prefix("# fs=")
        .ok_or_else(|| bad(format!("header must start with '# fs=': {header:?}")))?;
    let (fs_str, channel_part) = rest
        .split_once(' ')
        .ok_or_else(|| bad("header missing channel field".into()))?;
    let fs: u32 = fs_str
        .parse()
        .map_err(|_| bad(format!("fs is not an integer: {fs_str:?}")))?;
    if fs == 0 {
        return Err(bad("fs must be positive".into()));
    }
    let channel = channel_part
        .strip_prefix("channel=")
        .ok_or_else(|| bad("header missing 'channel=' field".into()))?;
    Ok((fs, channel.to_string()))
}

/// Writes a window in the signal file format. Amplitudes use the shortest
/// decimal form that round-trips through `f64` parsing.
pub fn write_signal<W: Write>(window: &SignalWindow, mut writer: W) -> Result<()> {
    writeln!(
        writer,
        "# fs={} channel={}",
        window.sample_rate(),
        window.channel()
    )?;
    for sample in window.samples() {
        writeln!(writer, "{sample}")?;
    }
    Ok(())
}
