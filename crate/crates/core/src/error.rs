use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error("no super-resolved feature: snr {snr} does not exceed ln 2")]
    NoFeature { snr: f64 },

    /// The phase slope vanishes, so the sensitivity is unbounded.
    #[error("sensitivity diverges at phi = {phi}")]
    Divergent { phi: f64 },

    #[error("carrier {carrier_hz} Hz is off the DFT grid of a {window_s} s window")]
    OffGrid { carrier_hz: f64, window_s: f64 },

    #[error("series length {got} does not match the acquisition ({expected} samples)")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fit failure: {reason} (residual {residual:e})")]
    FitFailure { reason: String, residual: f64 },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
