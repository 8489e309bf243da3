use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] mauplink::Error),
    #[error("gradient check failed: worst relative error {worst:.3e} (limit {limit:.0e})")]
    GradCheck { worst: f64, limit: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for bad configuration, 3 for infeasible
    /// geometry, 4 for a failed gradient check and 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Json { .. } => 2,
            Self::Core(mauplink::Error::InvalidConfig(_)) => 2,
            Self::Core(mauplink::Error::InfeasibleGeometry { .. }) => 3,
            Self::GradCheck { .. } => 4,
            Self::Core(_) | Self::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}
