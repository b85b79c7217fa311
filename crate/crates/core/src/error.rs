use std::path::PathBuf;

/// Errors raised by mesh construction, discretisation and solution.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("singular matrix: no usable pivot at elimination step {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("solver accuracy: relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    SolverAccuracy { residual: f64, tolerance: f64 },

    #[error("linear algebra backend failure: {0}")]
    Backend(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input or problem setup.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::Configuration(_) | Error::Unsupported(_)
        )
    }

    /// True for failures inside the linear solver.
    pub fn is_solver(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. } | Error::SolverAccuracy { .. } | Error::Backend(_)
        )
    }
}
