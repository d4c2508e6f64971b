use thiserror::Error;

/// Errors raised by the matrix, section and groupoid operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("connection form evaluated at its pole zeta = 0")]
    PoleEvaluation,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("root-set search failed for n = {n}: {reason}")]
    SearchFailure { n: usize, reason: String },
    #[error("invalid sector index: {0}")]
    InvalidSector(String),
    #[error("points are not composable: {0}")]
    NotComposable(String),
    #[error("matrix is not regular")]
    NotRegular,
    #[error("degenerate sample after {0} attempts")]
    DegenerateSample(usize),
    #[error("tangent space has complex dimension {found}, expected {expected}")]
    DegenerateTangent { expected: usize, found: usize },
    #[error("local chart is degenerate: {0}")]
    DegenerateChart(String),
    #[error("2-form is degenerate at the point")]
    DegenerateForm,
    #[error("invalid tangent kind: {0}")]
    InvalidTangentKind(String),
    #[error("curve left the numerical tube around Z (distance {0:e})")]
    ProjectionFailure(f64),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
