use thiserror::Error;

/// Errors produced by the flow engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("element code {code} out of range for group of order {order}")]
    InvalidElement { code: u32, order: u32 },

    #[error("not a flow: values sum to {sum} instead of 0")]
    NotAFlow { sum: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("capacity exceeded: {what} needs {required} entries, cap is {cap}")]
    Capacity { what: String, required: u128, cap: u128 },

    #[error("invalid exchange: partial sums differ ({left} vs {right})")]
    InvalidExchange { left: u32, right: u32 },

    #[error("removed multiset is not contained in the target multiset")]
    Containment,

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant failure: {0}")]
    InternalInvariant(String),

    #[error("invalid transformation: {0}")]
    InvalidTransformation(String),

    #[error("invalid fiber: {0}")]
    InvalidFiber(String),

    #[error("multisets are not compatible")]
    Incompatible,

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("row {row}: {source}")]
    Row { row: usize, source: Box<FlowError> },
}

impl FlowError {
    /// Stable machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            FlowError::InvalidGroup(_) => "invalid-group",
            FlowError::InvalidElement { .. } => "invalid-element",
            FlowError::NotAFlow { .. } => "not-a-flow",
            FlowError::Shape(_) => "shape",
            FlowError::InvalidPermutation(_) => "invalid-permutation",
            FlowError::Capacity { .. } => "capacity",
            FlowError::InvalidExchange { .. } => "invalid-exchange",
            FlowError::Containment => "containment",
            FlowError::InvalidMove(_) => "invalid-move",
            FlowError::Precondition(_) => "precondition",
            FlowError::InternalInvariant(_) => "internal-invariant",
            FlowError::InvalidTransformation(_) => "invalid-transformation",
            FlowError::InvalidFiber(_) => "invalid-fiber",
            FlowError::Incompatible => "incompatible",
            FlowError::NotImplemented(_) => "not-implemented",
            FlowError::Parse(_) => "parse",
            FlowError::Row { source, .. } => source.kind(),
        }
    }

    pub(crate) fn capacity(what: impl Into<String>, required: u128, cap: u128) -> Self {
        FlowError::Capacity {
            what: what.into(),
            required,
            cap,
        }
    }
}

pub type Result<T> = std::result::Result<T, FlowError>;
