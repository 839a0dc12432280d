use thiserror::Error;

/// Errors surfaced by the engine.
///
/// `Input` covers malformed presentations and CLI arguments (exit code 2);
/// everything else is a mathematical failure discovered while computing or
/// verifying (exit code 1).
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("input error: {0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("degenerate pairing: {0}")]
    DegeneratePairing(String),
    #[error("Dynkin quiver rejected: {0}")]
    Dynkin(String),
    #[error("weight truncation exceeded: {0}")]
    Truncation(String),
    #[error("rank stability violated: {0}")]
    Stability(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;

impl EngineError {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::Input(_) => 2,
            _ => 1,
        }
    }
}
