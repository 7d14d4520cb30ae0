use thiserror::Error;

/// Errors produced by incidence, tensor, co-occurrence, PMI, and embedding
/// operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a precondition (empty edge list, bad order, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Operand shapes are inconsistent.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Mode index is out of range for the tensor order.
    #[error("mode {mode} out of range for order-{order} tensor")]
    Mode { mode: usize, order: usize },

    /// Index arithmetic overflowed or a work estimate exceeded its budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A node, edge, or tensor index is out of range.
    #[error("index out of range: {0}")]
    Index(String),

    /// An embedding order outside the supported range was requested.
    #[error("unsupported order: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;
