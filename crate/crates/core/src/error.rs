use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("separation {d} outside the available range 1..={max}")]
    OutOfRange { d: usize, max: usize },

    #[error(
        "quadrature for G_{x} did not converge: error estimate {estimate:e} exceeds {tolerance:e}"
    )]
    QuadratureDivergence { x: i64, estimate: f64, tolerance: f64 },

    #[error("non-physical two-site state at d = {d}: {reason}")]
    NonPhysicalState { d: usize, reason: String },

    #[error("block correlation eigenvalue {nu} exceeds 1 (bad correlator table)")]
    CorrelationSpectrum { nu: f64 },

    #[error("gapless configuration: {0}")]
    Gapless(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("outside the asymptotic regime: {0}")]
    OutsideRegime(String),

    #[error("correlator cache: {0}")]
    Cache(String),
}

impl Error {
    /// True for errors caused by the inputs rather than by a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::OutOfRange { .. }
                | Error::InsufficientData(_)
                | Error::OutsideRegime(_)
        )
    }
}
