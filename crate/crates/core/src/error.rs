use thiserror::Error;

/// Errors raised by the frame library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("invalid algebra descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("algebra descriptor mismatch: {left:?} vs {right:?}")]
    DescriptorMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("entry ({row}, {col}) is nonzero outside the diagonal blocks")]
    BlockPatternViolation { row: usize, col: usize },
    #[error("element is singular: smallest singular value {smallest:e} <= cutoff {cutoff:e}")]
    SingularElement { smallest: f64, cutoff: f64 },
    #[error("matrix is not Hermitian: skew part norm {skew:e}")]
    NotHermitian { skew: f64 },
    #[error("invalid measure space: {0}")]
    InvalidMeasure(String),
    #[error("weight is negative ({value:e}) at quadrature node {node}")]
    NegativeWeight { node: f64, value: f64 },
    #[error("values do not match the quadrature rule: {0}")]
    RuleMismatch(String),
    #[error("tabulated map evaluated off its nodes at {0}")]
    OffNodeEvaluation(f64),
    #[error("map is not a frame: lower bound {lower:e} <= tolerance {tol:e}")]
    NotAFrame { lower: f64, tol: f64 },
    #[error("map is not a dual: residual {residual:e} > tolerance {tol:e}")]
    NotADual { residual: f64, tol: f64 },
    #[error("nullity condition violated: residual {residual:e} > tolerance {tol:e}")]
    NullityViolated { residual: f64, tol: f64 },
    #[error("operator hypothesis violated: {what} residual {residual:e} > tolerance {tol:e}")]
    HypothesisViolated {
        what: &'static str,
        residual: f64,
        tol: f64,
    },
    #[error("element is not central")]
    NotCentral,
    #[error("coefficients do not sum to the identity: residual {residual:e}")]
    AffinityViolated { residual: f64 },
    #[error("left-sided operator application needs rank 1, got rank {0}")]
    ConventionUnsupported(usize),
}

pub type Result<T> = std::result::Result<T, FrameError>;
