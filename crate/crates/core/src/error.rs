use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Point outside the evaluation guard radius or not finite.
    #[error("point {z} is outside the admissible disc (|z| = {modulus})")]
    Domain { z: Complex64, modulus: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid spectral measure: {0}")]
    Measure(String),

    #[error("driving term left the Carathéodory class at z = {z}, t = {t}: Re p = {re}")]
    NotPositive { z: Complex64, t: f64, re: f64 },

    #[error("samples are not strictly monotone in modulus at index {index}")]
    NonMonotone { index: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("integration failed for seed at angle {angle}: {reason}")]
    Integration { angle: f64, reason: String },

    #[error("composition mismatch: max deviation {deviation:e} exceeds {tolerance:e}")]
    CompositionMismatch { deviation: f64, tolerance: f64 },

    #[error("coupled evolution halted at step {step}: {reason}")]
    Halted { step: usize, reason: String },
}
