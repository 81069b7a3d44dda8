use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("modal expansion did not converge: tail ratio {tail_ratio:e} at truncation {order}")]
    Convergence { tail_ratio: f64, order: usize },

    #[error("singular boundary system at harmonic n = {harmonic}")]
    Singular { harmonic: i32 },

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that originate in the numerics rather than in the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::Singular { .. } | Error::Infeasible(_)
        )
    }
}
