use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants map onto the CLI exit-code contract through [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve or BVP refinement failed.
    #[error("solver error: {message} (achieved residual {residual:e})")]
    Solver { message: String, residual: f64 },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature error: {message} (estimated error {estimate:e})")]
    Quadrature { message: String, estimate: f64 },

    /// The optimizer did not converge; the best iterate is reported.
    #[error("optimizer did not converge: {message} (best objective {best_objective:e})")]
    Optim {
        message: String,
        best_parameters: Vec<f64>,
        best_objective: f64,
    },

    /// A target lies outside the forward range of the searched family.
    #[error("target {target} outside attainable range [{lo}, {hi}]")]
    Range { target: f64, lo: f64, hi: f64 },

    /// Evaluation too close to an excluded singular point.
    #[error("singularity: {0}")]
    Singularity(String),

    /// A closed-form solution degenerates (vanishing denominator).
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// Numerical differentiation or extrapolation failed.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Laplace inversion failed its normalization check.
    #[error("inversion error: {0}")]
    Inversion(String),

    /// Invalid simulation or scenario configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or schema-violating input document.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Solver { .. } => "solver",
            Error::Quadrature { .. } => "quadrature",
            Error::Optim { .. } => "optim",
            Error::Range { .. } => "range",
            Error::Singularity(_) => "singularity",
            Error::Degenerate(_) => "degenerate",
            Error::Numerical(_) => "numerical",
            Error::Inversion(_) => "inversion",
            Error::Config(_) => "config",
            Error::Schema(_) => "schema",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code: 2 for input/domain problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Range { .. }
            | Error::Singularity(_)
            | Error::Degenerate(_)
            | Error::Config(_)
            | Error::Schema(_)
            | Error::Io(_) => 2,
            Error::Solver { .. }
            | Error::Quadrature { .. }
            | Error::Optim { .. }
            | Error::Numerical(_)
            | Error::Inversion(_) => 3,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
