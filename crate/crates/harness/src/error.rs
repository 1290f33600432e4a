use graphon_core::GraphonError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] GraphonError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// A check ran to completion and found a violation.
    #[error("{0}")]
    Finding(String),
}

impl HarnessError {
    /// 1 for configuration and usage problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) if e.is_numeric() => 2,
            HarnessError::Finding(_) => 2,
            _ => 1,
        }
    }
}
