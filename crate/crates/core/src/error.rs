use thiserror::Error;

pub type Result<T> = std::result::Result<T, ShellError>;

#[derive(Debug, Error)]
pub enum ShellError {
    /// The chart Jacobian lost rank: the area element fell below tolerance.
    #[error("degenerate chart at y = ({y1:.6}, {y2:.6}): sqrt(a) = {sqrt_a:.3e}")]
    DegenerateChart { y1: f64, y2: f64, sqrt_a: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration rejected:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("flexural space is trivial: {0}")]
    TrivialFlexuralSpace(String),

    #[error("singular system ({context}); estimated condition number {condition:.3e}")]
    SingularSystem { context: String, condition: f64 },

    #[error("stiffness matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("quadrature mismatch: {0}")]
    QuadratureMismatch(String),

    #[error("output unavailable: {0}")]
    UnavailableOutput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
