use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WkError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unstable pair (g, n) = ({g}, {n}): need 2g - 2 + n > 0")]
    Unstable { g: u32, n: usize },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("fit integrity error for mu = {mu}: extra point k = {k} gives {got}, family predicts {expected}")]
    FitIntegrity {
        mu: String,
        k: u32,
        got: String,
        expected: String,
    },
    #[error("series window error: {0}")]
    Window(String),
    #[error("cache file {path}, line {line}: {msg}")]
    CacheFormat { path: String, line: usize, msg: String },
    #[error("cache file {path} has version {found}; this build reads version {expected}. Delete the file or re-run with a fresh --cache path to rebuild it")]
    CacheVersion {
        path: String,
        found: String,
        expected: u32,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl WkError {
    /// Short machine-readable tag used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            WkError::Domain(_) => "domain",
            WkError::Unstable { .. } => "unstable",
            WkError::Integrity(_) => "integrity",
            WkError::Coverage(_) => "coverage",
            WkError::FitIntegrity { .. } => "fit_integrity",
            WkError::Window(_) => "window",
            WkError::CacheFormat { .. } => "cache_format",
            WkError::CacheVersion { .. } => "cache_version",
            WkError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for WkError {
    fn from(e: std::io::Error) -> Self {
        WkError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, WkError>;
