use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation only supports some bending-profile kinds.
    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),

    /// Invalid construction parameters or numerical settings.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "lattice truncation: edge power {edge_power:.3e} exceeds {limit:.1e} with half-width \
         {half_width}; use a half-width of at least {required}"
    )]
    LatticeTruncation {
        edge_power: f64,
        limit: f64,
        half_width: usize,
        required: usize,
    },

    /// Quadrature, root finding or iteration failed to converge.
    #[error("numeric error: {message} (achieved tolerance {achieved:.3e})")]
    Numeric { message: String, achieved: f64 },

    #[error("design infeasible: {message}; scanned {scanned:?}")]
    DesignInfeasible {
        message: String,
        scanned: Vec<(f64, f64)>,
    },

    /// The physical model cannot represent the request (e.g. no bound mode).
    #[error("model error: {0}")]
    Model(String),

    #[error("undefined observable: {0}")]
    UndefinedObservable(String),

    #[error("no calibration available: {0}; run `dynloc calibrate` first")]
    MissingCalibration(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this failure: 2 for environment/I/O problems,
    /// 1 for physics or validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
