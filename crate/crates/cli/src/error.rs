use cframe::FrameError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("block pattern violation at {field}: {source}")]
    BlockPattern {
        field: String,
        #[source]
        source: FrameError,
    },
    #[error("no {kind} named '{name}' in the problem file")]
    NamedObjectMissing { kind: &'static str, name: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

impl CliError {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Library errors that certify a mathematical failure (exit 1) rather
    /// than malformed input (exit 2).
    pub fn is_certified_failure(&self) -> bool {
        matches!(
            self,
            Self::Frame(
                FrameError::NotAFrame { .. }
                    | FrameError::NotADual { .. }
                    | FrameError::NullityViolated { .. }
                    | FrameError::HypothesisViolated { .. }
                    | FrameError::NotCentral
                    | FrameError::AffinityViolated { .. }
                    | FrameError::SingularElement { .. }
                    | FrameError::NotHermitian { .. }
            )
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse { .. } => "parse_error",
            Self::Schema { .. } => "schema_error",
            Self::BlockPattern { .. } => "block_pattern_violation",
            Self::NamedObjectMissing { .. } => "named_object_missing",
            Self::Io { .. } => "io_error",
            Self::Usage(_) => "usage_error",
            Self::Frame(e) => match e {
                FrameError::NotAFrame { .. } => "not_a_frame",
                FrameError::NotADual { .. } => "not_a_dual",
                FrameError::NullityViolated { .. } => "nullity_violated",
                FrameError::HypothesisViolated { .. } => "hypothesis_violated",
                FrameError::NotCentral => "not_central",
                FrameError::AffinityViolated { .. } => "affinity_violated",
                FrameError::SingularElement { .. } => "singular_element",
                FrameError::NotHermitian { .. } => "not_hermitian",
                FrameError::BlockPatternViolation { .. } => "block_pattern_violation",
                FrameError::ConventionUnsupported(_) => "convention_unsupported",
                _ => "input_error",
            },
        }
    }

    /// Residual carried by a certified failure, if any.
    pub fn residual(&self) -> Option<f64> {
        match self {
            Self::Frame(
                FrameError::NotADual { residual, .. }
                | FrameError::NullityViolated { residual, .. }
                | FrameError::HypothesisViolated { residual, .. }
                | FrameError::AffinityViolated { residual },
            ) => Some(*residual),
            Self::Frame(FrameError::NotAFrame { lower, .. }) => Some(*lower),
            _ => None,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
