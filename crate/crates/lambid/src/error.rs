use std::path::{Path, PathBuf};

use lambid_core::{AnalysisError, MaterialError, SamplerError, SignalError, SolverError};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// Short stable name printed as `error[<category>]`.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Material(_) => "material",
            Error::Solver(_) => "solver",
            Error::Signal(_) => "signal",
            Error::Sampler(_) => "sampler",
            Error::Analysis(_) => "analysis",
        }
    }

    /// Process exit code; 2 is left to argument errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 3,
            Error::Io { .. } => 4,
            Error::Parse { .. } => 5,
            Error::Material(_) => 6,
            Error::Solver(_) => 7,
            Error::Signal(_) => 8,
            Error::Sampler(_) => 9,
            Error::Analysis(_) => 10,
        }
    }
}
