use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    Hermiticity(f64),

    #[error("invalid state: {0}")]
    State(String),

    #[error("invalid observable: {0}")]
    Observable(String),

    #[error("invalid POVM: {0}")]
    Povm(String),

    #[error("invalid group: {0}")]
    Group(String),

    #[error("invalid representation: {0}")]
    Representation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("resource state is not perfectly asymmetric (worst Gram overlap {overlap:.6e}, free orbit: {free_orbit})")]
    NotPerfectlyAsymmetric { overlap: f64, free_orbit: bool },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable name of the error class, used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "DimensionError",
            Error::Hermiticity(_) => "HermiticityError",
            Error::State(_) => "StateError",
            Error::Observable(_) => "ObservableError",
            Error::Povm(_) => "PovmError",
            Error::Group(_) => "GroupError",
            Error::Representation(_) => "RepresentationError",
            Error::Argument(_) => "ArgumentError",
            Error::NotPerfectlyAsymmetric { .. } => "NotPerfectlyAsymmetricError",
            Error::Numerical(_) => "NumericalError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
