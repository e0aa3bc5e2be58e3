use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] arl::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{0}")]
    Aggregate(String),

    #[error("manifest check failed: {0}")]
    Manifest(String),

    #[error("run {run_id}: {source}")]
    Run {
        run_id: String,
        #[source]
        source: Box<HarnessError>,
    },
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        HarnessError::Json {
            context: context.into(),
            source,
        }
    }

    /// Attaches the id of the run the error came from.
    pub fn in_run(self, run_id: &str) -> Self {
        HarnessError::Run {
            run_id: run_id.to_string(),
            source: Box::new(self),
        }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Core(e) => e.kind(),
            HarnessError::Config(_) => "config",
            HarnessError::Io { .. } => "io",
            HarnessError::Json { .. } => "json",
            HarnessError::Csv { .. } => "csv",
            HarnessError::Aggregate(_) => "aggregate",
            HarnessError::Manifest(_) => "manifest",
            HarnessError::Run { source, .. } => source.kind(),
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
