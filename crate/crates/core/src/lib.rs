//! Higher-order co-occurrence analytics for hypergraphs.
//!
//! The crate builds incidence structures from corpora, basket files, or
//! explicit edge sets, computes order-k co-occurrence tensors through two
//! independent paths (a face-splitting-product pipeline and direct sparse
//! enumeration), derives multivariate pointwise mutual information (specific
//! correlation), and factorizes the order-3 tensor's node slices into
//! fiber-space embeddings.

pub mod cooc;
pub mod embed;
pub mod error;
pub mod incidence;
pub mod pmi;
pub mod tensor;

pub use error::{Error, Result};
pub use incidence::{ContextMap, EdgeId, IncidenceMatrix, NodeId};
