//! `neurohome` — run seeded BCI home-automation sessions and inspect
//! signals: SSVEP decisions, blink events, band powers, room fixes.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/file error.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use neurohome_core::blink::{detect_blinks, BlinkConfig};
use neurohome_core::config::SessionConfig;
use neurohome_core::localization::{parse_stream, resolve, DEFAULT_STALENESS_MS};
use neurohome_core::session::Session;
use neurohome_core::signal::read_signal;
use neurohome_core::spectrum::{autocorrelate, band_power, power_spectrum};
use neurohome_core::ssvep::{self, StimulusTable, BAND_HALF_WIDTH_HZ};
use neurohome_core::SignalWindow;

#[derive(Parser)]
#[command(name = "neurohome", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and write a JSON metrics report.
    Simulate(SimulateArgs),
    /// Run one SSVEP decision over the trailing windows of a signal file.
    Detect(DetectArgs),
    /// Run blink detection over a signal file.
    Blinks(BlinksArgs),
    /// Emit per-class band powers of a signal file.
    Spectrum(SpectrumArgs),
    /// Resolve the occupied room from a file of beacon protocol lines.
    Locate(LocateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Session config file; defaults to the built-in two-room setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the configured base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Signal file (needs at least 4 s of samples).
    file: PathBuf,
    /// Stimulus frequencies as a comma-separated list, classes 1..n.
    #[arg(long, default_value = "6,8.2")]
    freqs: String,
    /// Threshold sensitivity.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
}

#[derive(Args)]
struct BlinksArgs {
    /// Blink-channel signal file.
    file: PathBuf,
    /// Threshold sensitivity.
    #[arg(long, default_value_t = 5.0)]
    c_prime: f64,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Signal file (needs at least 2 s of samples).
    file: PathBuf,
    /// Band centers as a comma-separated list.
    #[arg(long, default_value = "6,8.2")]
    freqs: String,
}

#[derive(Args)]
struct LocateArgs {
    /// File of `RSSI ...` protocol lines.
    file: PathBuf,
    /// Readings older than this many milliseconds are ignored.
    #[arg(long, default_value_t = DEFAULT_STALENESS_MS)]
    staleness_ms: u64,
    /// Resolution instant; defaults to the newest timestamp in the file.
    #[arg(long)]
    now_ms: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Detect(args) => detect(args),
        Command::Blinks(args) => blinks(args),
        Command::Spectrum(args) => spectrum(args),
        Command::Locate(args) => locate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            let mut f =
                File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            f.write_all(text.as_bytes())
                .map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_signal(path: &Path) -> Result<SignalWindow, String> {
    let file = File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    read_signal(BufReader::new(file)).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_freqs(list: &str) -> Result<Vec<(u16, f64)>, String> {
    list.split(',')
        .enumerate()
        .map(|(i, tok)| {
            tok.trim()
                .parse::<f64>()
                .map(|f| (i as u16 + 1, f))
                .map_err(|_| format!("bad frequency {tok:?} in --freqs"))
        })
        .collect()
}

fn simulate(args: SimulateArgs) -> Result<(), String> {
    let mut cfg = match &args.config {
        Some(path) => {
            SessionConfig::load(path).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => SessionConfig::default(),
    };
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let session = Session::new(cfg).map_err(|e| e.to_string())?;
    let report = session.run().map_err(|e| e.to_string())?;
    emit(args.out.as_deref(), &report.render())
}

#[derive(Serialize)]
struct DetectOutput {
    channel: String,
    window_start_s: f64,
    scores: Vec<ScoreOutput>,
    threshold_tau: f64,
    selected_class: Option<u16>,
    selected_frequency_hz: Option<f64>,
}

#[derive(Serialize)]
struct ScoreOutput {
    class_id: u16,
    frequency_hz: f64,
    score: f64,
}

fn detect(args: DetectArgs) -> Result<(), String> {
    let table = StimulusTable::with_sensitivity(&parse_freqs(&args.freqs)?, args.c)
        .map_err(|e| e.to_string())?;
    let w = load_signal(&args.file)?;
    let end = w.start_time() + w.duration();
    let w4 = w
        .slice_seconds(end - ssvep::THRESHOLD_WINDOW_S, end)
        .map_err(|_| format!("{}: need at least 4 s of signal", args.file.display()))?;
    let w2 = w
        .slice_seconds(end - ssvep::SCORE_WINDOW_S, end)
        .expect("2 s slice inside a 4 s window");
    let decision = ssvep::decide(&w2, &w4, &table).map_err(|e| e.to_string())?;
    let output = DetectOutput {
        channel: w.channel().to_string(),
        window_start_s: decision.window_start,
        scores: decision
            .scores
            .iter()
            .map(|&(id, score)| ScoreOutput {
                class_id: id.0,
                frequency_hz: table.frequency_of(id).unwrap(),
                score,
            })
            .collect(),
        threshold_tau: decision.threshold_tau,
        selected_class: decision.selected.map(|c| c.0),
        selected_frequency_hz: decision.selected.and_then(|c| table.frequency_of(c)),
    };
    emit(None, &render_json(&output))
}

#[derive(Serialize)]
struct BlinksOutput {
    channel: String,
    sigma_events: usize,
    events: Vec<BlinkEventOutput>,
}

#[derive(Serialize)]
struct BlinkEventOutput {
    onset_s: f64,
    width_ms: f64,
    apex_value: f64,
}

fn blinks(args: BlinksArgs) -> Result<(), String> {
    let cfg = BlinkConfig {
        sensitivity_c_prime: args.c_prime,
        ..BlinkConfig::default()
    };
    let w = load_signal(&args.file)?;
    let events = detect_blinks(&w, &cfg).map_err(|e| e.to_string())?;
    let output = BlinksOutput {
        channel: w.channel().to_string(),
        sigma_events: events.len(),
        events: events
            .iter()
            .map(|e| BlinkEventOutput {
                onset_s: e.onset_s,
                width_ms: e.width_ms,
                apex_value: e.apex_value,
            })
            .collect(),
    };
    emit(None, &render_json(&output))
}

#[derive(Serialize)]
struct SpectrumOutput {
    channel: String,
    bin_width_hz: f64,
    bands: Vec<BandOutput>,
}

#[derive(Serialize)]
struct BandOutput {
    frequency_hz: f64,
    fundamental_power: f64,
    harmonic_power: f64,
    total: f64,
}

fn spectrum(args: SpectrumArgs) -> Result<(), String> {
    let freqs = parse_freqs(&args.freqs)?;
    let w = load_signal(&args.file)?;
    let fft_len = ssvep::fft_length_for(w.sample_rate(), w.len());
    let p = power_spectrum(&autocorrelate(&w), fft_len).map_err(|e| e.to_string())?;
    let mut bands = Vec::new();
    for (_, f) in freqs {
        let fundamental =
            band_power(&p, f, BAND_HALF_WIDTH_HZ).map_err(|e| e.to_string())?;
        let harmonic =
            band_power(&p, 2.0 * f, BAND_HALF_WIDTH_HZ).map_err(|e| e.to_string())?;
        bands.push(BandOutput {
            frequency_hz: f,
            fundamental_power: fundamental,
            harmonic_power: harmonic,
            total: fundamental + harmonic,
        });
    }
    let output = SpectrumOutput {
        channel: w.channel().to_string(),
        bin_width_hz: p.bin_width(),
        bands,
    };
    emit(None, &render_json(&output))
}

#[derive(Serialize)]
struct LocateOutput {
    room_id: Option<String>,
    winning_rssi_dbm: Option<f64>,
    readings_considered: usize,
    resolved_at_ms: u64,
}

fn locate(args: LocateArgs) -> Result<(), String> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| format!("cannot open {}: {e}", args.file.display()))?;
    let readings = parse_stream(&text).map_err(|e| format!("{}: {e}", args.file.display()))?;
    let now_ms = args
        .now_ms
        .or_else(|| readings.iter().map(|r| r.timestamp_ms).max())
        .unwrap_or(0);
    let fix = resolve(&readings, now_ms, args.staleness_ms);
    let output = LocateOutput {
        winning_rssi_dbm: fix.room_id.is_some().then_some(fix.winning_rssi),
        room_id: fix.room_id,
        readings_considered: fix.readings_considered,
        resolved_at_ms: fix.resolved_at_ms,
    };
    emit(None, &render_json(&output))
}

fn render_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}
