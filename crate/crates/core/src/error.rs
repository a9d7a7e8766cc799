//! Error type shared by every layer of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate mode label {0} in basis")]
    DuplicateLabel(String),

    #[error("mode label {0} is not in the basis")]
    UnknownLabel(String),

    #[error("path {0:?} is not declared in the basis")]
    UnknownPath(String),

    #[error("invalid mode label {0:?}: expected \"<path>.H\" or \"<path>.V\"")]
    InvalidLabel(String),

    #[error("basis mismatch: [{left}] vs [{right}]")]
    BasisMismatch { left: String, right: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not unitary: max |U^dagger U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("relabel is not a bijection: {0}")]
    NotBijective(String),

    #[error("half-wave plate angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("beam splitter needs two distinct paths, got {0:?} twice")]
    IdenticalPaths(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unknown detector {0:?}")]
    UnknownDetector(String),

    #[error("observable not supported on logical modes: detector {detector:?} leaks {leakage:e} into ancilla modes")]
    Leakage { detector: String, leakage: f64 },

    #[error("{network} network: {source}")]
    InNetwork {
        network: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid projector: {0}")]
    InvalidProjector(String),

    #[error("state is not normalized: norm^2 = {0}")]
    Unnormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid ray set: {0}")]
    InvalidRays(String),

    #[error("invalid inequality: {0}")]
    InvalidInequality(String),

    #[error("edge ({0}, {1}) joins non-commuting observables (|[A,B]| = {2:e}); expression is ill-defined")]
    NonCommutingEdge(usize, usize, f64),

    #[error("refusing to enumerate 2^{0} assignments (limit is n <= {max})", max = crate::contextuality_oracle::MAX_ENUMERATION_VERTICES)]
    TooManyVertices(usize),

    #[error("arithmetic overflow while scaling coefficients to integers")]
    CoefficientOverflow,

    #[error("{0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable tag used in structured CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DuplicateLabel(_)
            | Error::UnknownLabel(_)
            | Error::UnknownPath(_)
            | Error::InvalidLabel(_)
            | Error::BasisMismatch { .. }
            | Error::DimensionMismatch { .. } => "basis",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotBijective(_) => "not_bijective",
            Error::NonFiniteAngle(_) | Error::IdenticalPaths(_) | Error::InvalidNetwork(_) => {
                "network"
            }
            Error::UnknownDetector(_) => "unknown_detector",
            Error::Leakage { .. } => "leakage",
            Error::InNetwork { source, .. } => source.kind(),
            Error::InvalidProjector(_) => "projector",
            Error::Unnormalized(_) | Error::InvalidDensityMatrix(_) => "state",
            Error::InvalidRays(_) | Error::InvalidInequality(_) | Error::NonCommutingEdge(..) => {
                "inequality"
            }
            Error::TooManyVertices(_) | Error::CoefficientOverflow => "enumeration",
            Error::Schema(_) => "schema",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn in_network(self, network: impl Into<String>) -> Self {
        Error::InNetwork {
            network: network.into(),
            source: Box::new(self),
        }
    }
}
