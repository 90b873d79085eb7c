use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid window [{x_min}, {x_max}]: {reason}")]
    InvalidWindow { x_min: f64, x_max: f64, reason: String },

    #[error("decay margin {margin:.3} is below the required {required}")]
    InsufficientMargin { margin: f64, required: f64 },

    #[error("tolerance {0:e} outside the admissible range [1e-14, 1e-6]")]
    ToleranceOutOfRange(f64),

    #[error("position {x} outside [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("Riccati variable left the admissible band at x = {x} (r = {r}); check the potential bounds")]
    RiccatiBlowUp { x: f64, r: f64 },

    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
