use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unknown builtin problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The linear system behind an ODE field or Jacobian is numerically singular.
    #[error("singular solve (condition estimate {condition:.3e})")]
    SingularSolve { condition: f64 },

    #[error("Newton iteration failed: {0}")]
    Newton(String),

    #[error("Jacobian H is singular (reciprocal condition {rcond:.3e})")]
    SingularHessian { rcond: f64 },

    #[error("eigencurve classification failed: {0}")]
    Classification(String),

    #[error("eigenvalue solver did not converge")]
    EigenSolver,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point is not stationary: |F(z)| = {residual:.3e} > {tol:.3e}")]
    NonStationary { residual: f64, tol: f64 },

    /// The Jacobian-side and region-side stability criteria disagree decisively.
    #[error("stability criteria disagree: {0}")]
    CriteriaMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
