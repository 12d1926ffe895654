use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: expected {expected}, found {found}")]
    InvalidDimension { expected: usize, found: usize },

    #[error("singular matrix: diagonal entry {index} is zero")]
    SingularMatrix { index: usize },

    #[error("degenerate spectrum: diagonal entries {first} and {second} coincide")]
    DegenerateSpectrum { first: usize, second: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("no stationary distribution: diagonal entry {index} is {value}, must be negative")]
    NonStationary { index: usize, value: f64 },

    #[error("unsupported diffusion exponent gamma = {0}")]
    UnsupportedGamma(f64),

    #[error("insufficient jump moments: need order {needed}, have {available}")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for the failures raised by the linear algebra itself rather than
    /// by malformed parameters.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::Overflow(_)
                | Error::NonStationary { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
