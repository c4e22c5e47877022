use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] molwg::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn is_config(&self) -> bool {
        match self {
            CliError::Config(_) => true,
            CliError::Core(e) => e.is_config_error(),
            CliError::Io { .. } => false,
        }
    }

    /// 2 for bad input, 3 for numerical failure, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            e if e.is_config() => 2,
            _ => 3,
        }
    }
}
