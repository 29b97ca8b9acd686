use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    /// The scenario parsed but the physics module rejected it.
    #[error("scenario rejected: {0}")]
    Physics(#[from] qlaw_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("tolerance failure: {0}")]
    Tolerance(String),
}

impl CliError {
    pub fn missing(key: &str) -> Self {
        Self::Config(format!("missing required key `{key}`"))
    }

    /// 0 pass, 1 tolerance failure, 2 usage/config error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Tolerance(_) => 1,
            Self::Config(_) | Self::Physics(_) | Self::Io(_) => 2,
        }
    }
}
