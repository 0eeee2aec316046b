use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("insufficient domain: requested {requested} bound states, found {found}")]
    InsufficientDomain { requested: usize, found: usize },

    #[error("spectral structure violated: {0}")]
    SpectralStructure(String),

    #[error("profile is identically zero")]
    UndefinedProfile,

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian: {0}")]
    SingularJacobian(String),

    #[error("branch integrity: {0}")]
    BranchIntegrity(String),

    #[error("continuation failed at gamma = {gamma}: {source}")]
    Continuation {
        gamma: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("far-field matching failed: {0}")]
    Matching(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("blow-up detected at t = {time}")]
    BlowUp { time: f64 },

    #[error("classification error: {0}")]
    Classification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
