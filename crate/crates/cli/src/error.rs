use std::path::PathBuf;

/// Exit status for bad configuration or input data.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a numerical failure or a failed check.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status for anything else (i/o, unreadable artifacts).
pub const EXIT_OTHER: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("ConfigParseError: {0}")]
    Config(String),
    #[error("{stage} failed with {}: {source}", source.kind())]
    Stage { stage: &'static str, source: gch_core::Error },
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad artifact {}: {msg}", path.display())]
    Artifact { path: PathBuf, msg: String },
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn stage(stage: &'static str, source: gch_core::Error) -> Self {
        CliError::Stage { stage, source }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn artifact(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        CliError::Artifact { path: path.into(), msg: msg.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Stage { source, .. } if source.is_input_error() => EXIT_CONFIG,
            CliError::Stage { .. } | CliError::Check(_) => EXIT_NUMERICAL,
            CliError::Io { .. } | CliError::Artifact { .. } => EXIT_OTHER,
        }
    }
}
