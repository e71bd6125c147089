use thiserror::Error;

/// Errors produced by the solver and its I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("crack position x_c = {x_c} m lies outside the open interval (0, {length})")]
    CrackOutOfRange { x_c: f64, length: f64 },

    #[error("crack depth a = {a} m must satisfy 0 <= a < h = {h} m (depth ratio mu < 1)")]
    CrackTooDeep { a: f64, h: f64 },

    #[error("depth ratio {mu} is outside the validity window [0, 0.6] of the shape factor")]
    ShapeFactorDomain { mu: f64 },

    #[error("mesh with {n_elements} elements cannot isolate the crack: {reason}")]
    MeshTooCoarse { n_elements: usize, reason: String },

    #[error("inconsistent mesh: {0}")]
    InconsistentMesh(String),

    #[error("conversion system is singular ({0})")]
    SingularConversion(String),

    #[error("{0} matrix is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("no positive buckling factor: the reference prestress does not destabilize the shell")]
    NoPositiveEigenvalue,

    #[error("eigen residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("quadrature did not reach relative tolerance {0:.1e}")]
    QuadratureFailed(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty result table: nothing to write")]
    EmptyTable,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than by a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput { .. }
                | Error::CrackOutOfRange { .. }
                | Error::CrackTooDeep { .. }
                | Error::ShapeFactorDomain { .. }
                | Error::MeshTooCoarse { .. }
                | Error::InconsistentMesh(_)
                | Error::Config(_)
                | Error::EmptyTable
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
