use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} must be at least 1")]
    ZeroSize { what: &'static str },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("variance must be positive and finite, got {0}")]
    InvalidVariance(f64),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("angle {name} = {value} is outside [0, 2pi]")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("transmittance T[{index}] = {re}+{im}i violates {rule}")]
    InvalidTransmittance {
        index: usize,
        re: f64,
        im: f64,
        rule: &'static str,
    },

    #[error("path gain must be non-negative and finite, got {0}")]
    NegativeGain(f64),
}

pub(crate) fn ensure_nonzero(value: usize, what: &'static str) -> Result<()> {
    if value == 0 {
        Err(Error::ZeroSize { what })
    } else {
        Ok(())
    }
}

pub(crate) fn ensure_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    } else {
        Ok(())
    }
}
