//! Error type shared by the solver and harness layers.

use std::fmt;
use std::io;
use std::path::PathBuf;

/// Everything that can go wrong below the CLI layer.
#[derive(Debug)]
pub enum Error {
    /// A parameter violates an admissibility constraint. The message names
    /// the constraint, e.g. `alpha outside (-4, 2): got 3`.
    InvalidParameter(String),
    /// `t_final` is not an integer multiple of the time step.
    TimeMisaligned { t_final: f64, dt: f64 },
    /// Two fields that must share a grid have different lengths.
    LengthMismatch { expected: usize, got: usize },
    /// Eigenvalue refinement could not push the residual below tolerance.
    EigenvalueResidual {
        xi: f64,
        residual: f64,
        tolerance: f64,
    },
    /// File I/O failed; the path is kept so the CLI can report it.
    Io { path: PathBuf, source: io::Error },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "{msg}"),
            Error::TimeMisaligned { t_final, dt } => write!(
                f,
                "t_final = {t_final} is not an integer multiple of dt = {dt} \
                 (relative tolerance 1e-9)"
            ),
            Error::LengthMismatch { expected, got } => {
                write!(
                    f,
                    "field length {got} does not match expected length {expected}"
                )
            }
            Error::EigenvalueResidual {
                xi,
                residual,
                tolerance,
            } => write!(
                f,
                "eigenvalue residual {residual:.3e} at xi = {xi} exceeds tolerance {tolerance:.1e}"
            ),
            Error::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
