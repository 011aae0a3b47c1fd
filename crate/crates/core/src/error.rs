use thiserror::Error;

use crate::state::ModeLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state is not normalized: sum of |amplitude|^2 = {norm_sq} (tolerance {tolerance:e})")]
    NotNormalized { norm_sq: f64, tolerance: f64 },

    #[error("non-finite amplitude on basis label {0}")]
    NonFinite(String),

    #[error("basis error: {0}")]
    Basis(String),

    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    #[error("mode {0} is not present in the state basis")]
    UnknownMode(ModeLabel),

    #[error("parameter {name} = {value} is outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("operation requires a two-photon (signal x idler) state")]
    NotTwoPhoton,

    #[error("operation requires a one-photon state")]
    NotOnePhoton,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "idler marginal depends on epsilon at phi = {phi}: P(i) = {p_a} vs {p_b}; \
         sampling Bob before Alice's choice would be biased"
    )]
    SignalingDetected { phi: f64, p_a: f64, p_b: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("network description: {0}")]
    Network(String),
}
