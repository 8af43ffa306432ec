use alloc::string::String;
use alloc::vec::Vec;

/// Everything that can go wrong inside the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no consistent global orientation exists")]
    NonOrientable,
    #[error("simplex {0:?} has zero affine volume")]
    DegenerateSimplex(Vec<usize>),
    #[error("codimension-one simplex {face:?} has {cofaces} cofaces instead of 2")]
    BoundaryDetected { face: Vec<usize>, cofaces: usize },
    #[error("more than two top simplices meet at {0:?}")]
    NonManifold(Vec<usize>),
    #[error("degree {degree} outside 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("perturbed point left simplex {index} of dimension {dim}")]
    PerturbationEscapedSimplex { dim: usize, index: usize },
    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("complex does not descend from the required base")]
    NoParentLink,
    #[error("Gram matrix in degree {degree} is not positive definite")]
    SingularGram { degree: usize },
    #[error("chain is not a cycle (boundary norm {residual})")]
    NotACycle { residual: i64 },
    #[error("spark equation violated (residual {residual:e})")]
    NotASpark { residual: f64 },
    #[error("exactness violated at {node}")]
    ExactnessViolation { node: String },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("{what} did not converge (last change {change:e})")]
    NonConvergent { what: String, change: f64 },
    #[error("action has no closed form and no numeric fallback")]
    UnsupportedAction,
    #[error("class-sum tail {tail:e} still above tolerance at radius {radius}")]
    TruncationInsufficient { radius: usize, tail: f64 },
    #[error("problem too large for the oracle: {what}")]
    TooLarge { what: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;
