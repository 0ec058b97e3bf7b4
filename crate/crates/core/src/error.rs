use thiserror::Error;

/// Errors raised anywhere in the identification pipeline.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// failing routine ran with.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value object failed its invariants.
    #[error("invalid value: {0}")]
    Validation(String),

    /// A filter, pulse or simulation configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// Caller broke an interface contract (mismatched grids, frequencies, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("frequency selection failed: {0}")]
    Selection(String),

    #[error("{freq_hz} Hz outside spectrum range [{min_hz}, {max_hz}] Hz")]
    Range { freq_hz: f64, min_hz: f64, max_hz: f64 },

    /// Measurement carries no usable information at this frequency.
    #[error("degenerate input at {freq_hz} Hz: {message}")]
    DegenerateInput { freq_hz: f64, message: String },

    /// An identified parameter came out non-positive, usually because the
    /// probe frequencies violate the asymptotic assumptions.
    #[error("non-physical {parameter} = {value:e} (from {freq_hz} Hz measurement)")]
    NonPhysical {
        parameter: &'static str,
        value: f64,
        freq_hz: f64,
    },

    #[error("insufficient data: need {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("signal amplitude {amplitude:e} below noise floor")]
    LowSignal { amplitude: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
