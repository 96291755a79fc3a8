use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid S_z value {0} (expected -1, 0 or +1)")]
    InvalidSz(i32),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("operator maps state {state:#08b} outside the supplied basis")]
    BasisNotClosed { state: u8 },

    #[error("Zeeman term requires the full 15-state basis")]
    NotFullBasis,

    #[error("matrix is not block diagonal in S_z (off-block residual {residual:e})")]
    NotBlockDiagonal { residual: f64 },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NonHermitian { residual: f64 },

    #[error("double-occupancy block is singular")]
    SingularBlock,

    #[error("state norm drifted by {drift:e} at step {step}")]
    NormDrift { step: usize, drift: f64 },

    #[error("invalid noise band: {0}")]
    InvalidBand(String),

    #[error("empty search window ({lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    /// Numerical failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NormDrift { .. } | Error::Calibration(_) | Error::SingularBlock
        )
    }
}
