use thiserror::Error;

/// Errors raised by the pricing library.
///
/// Variants split into two families: input/model problems (`Domain`,
/// `InvalidModel`, `Unsupported`, `MomentInfinite`, `Pole`) and numerical
/// failures (`Numerical`, `Divergent`). The CLI maps them to different exit
/// codes via [`Error::is_numerical`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("moment is infinite: {0}")]
    MomentInfinite(String),
    #[error("evaluation at a pole: {0}")]
    Pole(String),
    #[error("divergent integrand: {0}")]
    Divergent(String),
    #[error("numerical error: {msg} (residual {residual:e})")]
    Numerical { msg: String, residual: f64 },
}

impl Error {
    pub fn numerical(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            msg: msg.into(),
            residual,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::Divergent(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
