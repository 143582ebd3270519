use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),

    #[error("negative weight at ({0}, {1})")]
    NegativeWeight(usize, usize),

    #[error("ground-truth slot {0} has zero norm")]
    ZeroTruthSlot(usize),

    #[error("at least {needed} time slots required, got {got}")]
    TooFewSlots { needed: usize, got: usize },

    #[error("solver diverged at iteration {iteration}: non-finite iterate")]
    Diverged { iteration: usize },

    #[error("precision matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be nonnegative and finite, got {value}"),
        })
    }
}
