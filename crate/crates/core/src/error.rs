use thiserror::Error;

/// Errors produced by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("class {class_id}: frequency {frequency_hz} Hz outside the usable 6-24 Hz stimulus range")]
    FrequencyOutOfRange { class_id: u16, frequency_hz: f64 },

    #[error("classes {first_id} ({first_hz} Hz) and {second_id} ({second_hz} Hz) are {gap_hz} Hz apart; minimum spacing is 0.2 Hz")]
    FrequencySpacing {
        first_id: u16,
        first_hz: f64,
        second_id: u16,
        second_hz: f64,
        gap_hz: f64,
    },

    #[error("sample rate mismatch: filter designed for {expected} Hz, window sampled at {actual} Hz")]
    SampleRateMismatch { expected: u32, actual: u32 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("RSSI {rssi_dbm} dBm outside the plausible [-120, 0] range")]
    RssiOutOfRange { rssi_dbm: f64 },

    #[error("no device registered for room {room_id:?} class {class_id}")]
    UnknownDevice { room_id: String, class_id: u16 },

    #[error("signal file, line {line}: {message}")]
    SignalFormat { line: usize, message: String },

    #[error("config, line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
