//! Pointwise mutual information and its multivariate generalization.
//!
//! For a co-occurrence count `c_x` of a node multiset `x` and per-node
//! marginal counts `c_{x_i}` (the degrees), the specific correlation is
//! `ln(c_x * N / prod_i c_{x_i})`. The normalizer `N` defaults to the node
//! count and can be switched to the edge count. Entries exist only where the
//! underlying count is positive; zero-count cells are undefined rather than
//! stored as negative infinity.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cooc::CoocTensor;
use crate::error::{Error, Result};

/// Which structure size scales the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalizer {
    /// Number of nodes (the default).
    Nodes,
    /// Number of edges, the classical document/window normalizer.
    Edges,
}

/// Evaluation policy: normalizer choice and optional clamp of negative
/// values to zero (positive PMI).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmiOptions {
    pub normalizer: Normalizer,
    pub positive_only: bool,
}

impl Default for PmiOptions {
    fn default() -> Self {
        Self {
            normalizer: Normalizer::Nodes,
            positive_only: false,
        }
    }
}

/// Symmetric tensor of PMI values over canonical (sorted) multiset indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PmiTensor {
    order: usize,
    num_nodes: usize,
    options: PmiOptions,
    entries: BTreeMap<Vec<usize>, f64>,
}

impl PmiTensor {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn options(&self) -> PmiOptions {
        self.options
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value at any index permutation; `None` where the count was zero.
    /// Panics on an index of the wrong length or out of range.
    pub fn get(&self, idx: &[usize]) -> Option<f64> {
        assert_eq!(idx.len(), self.order, "index length must equal order");
        assert!(
            idx.iter().all(|&i| i < self.num_nodes),
            "node index out of range"
        );
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.entries.get(&key).copied()
    }

    /// Canonical entries in lexicographic index order.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.entries.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// COO TSV mirroring the count format, values at 17 significant digits.
    pub fn to_tsv_string(&self) -> String {
        let mut out = String::new();
        let dims: Vec<String> = (0..self.order).map(|_| self.num_nodes.to_string()).collect();
        writeln!(out, "#dims {}", dims.join(" ")).unwrap();
        writeln!(out, "#symmetric {}", self.order).unwrap();
        for (idx, v) in self.entries() {
            for i in idx {
                write!(out, "{i}\t").unwrap();
            }
            writeln!(out, "{v:.16e}").unwrap();
        }
        out
    }
}

/// Pairwise PMI of an order-2 co-occurrence tensor:
/// `ln(c_ij * N / (c_ii * c_jj))` wherever `c_ij > 0`.
pub fn pairwise_pmi(c: &CoocTensor) -> Result<PmiTensor> {
    pairwise_pmi_with(c, PmiOptions::default())
}

pub fn pairwise_pmi_with(c: &CoocTensor, options: PmiOptions) -> Result<PmiTensor> {
    if c.order() != 2 {
        return Err(Error::InvalidInput(format!(
            "pairwise PMI requires an order-2 tensor, got order {}",
            c.order()
        )));
    }
    let marginals: Vec<i64> = (0..c.num_nodes()).map(|x| c.degree(x)).collect();
    specific_correlation_with(c, &marginals, options)
}

/// Multivariate PMI (specific correlation) of an order-k tensor:
/// `ln(c_x * N / prod_i marginals[x_i])` for every canonical index with
/// `c_x > 0`. The marginals must equal the tensor's diagonal degrees.
pub fn specific_correlation(c: &CoocTensor, marginals: &[i64]) -> Result<PmiTensor> {
    specific_correlation_with(c, marginals, PmiOptions::default())
}

pub fn specific_correlation_with(
    c: &CoocTensor,
    marginals: &[i64],
    options: PmiOptions,
) -> Result<PmiTensor> {
    if marginals.len() != c.num_nodes() {
        return Err(Error::InvalidInput(format!(
            "{} marginals for {} nodes",
            marginals.len(),
            c.num_nodes()
        )));
    }
    for (x, &marginal) in marginals.iter().enumerate() {
        if marginal != c.degree(x) {
            return Err(Error::InvalidInput(format!(
                "marginal {marginal} for node {x} does not match diagonal degree {}",
                c.degree(x)
            )));
        }
    }
    let scale = match options.normalizer {
        Normalizer::Nodes => c.num_nodes() as f64,
        Normalizer::Edges => c.num_edges() as f64,
    };
    let mut entries = BTreeMap::new();
    for (idx, count) in c.canonical_entries() {
        debug_assert!(count > 0);
        let mut denom = 1.0;
        for &x in idx {
            denom *= marginals[x] as f64;
        }
        let mut value = (count as f64 * scale / denom).ln();
        if options.positive_only && value < 0.0 {
            value = 0.0;
        }
        entries.insert(idx.to_vec(), value);
    }
    Ok(PmiTensor {
        order: c.order(),
        num_nodes: c.num_nodes(),
        options,
        entries,
    })
}
