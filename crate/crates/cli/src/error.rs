use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ptsol::Error),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    /// 2 for configurations that cannot describe a solution, 3 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) if e.is_infeasible() => 2,
            CliError::Model(_) => 3,
            CliError::Io { .. } | CliError::Output { .. } => 1,
        }
    }
}
