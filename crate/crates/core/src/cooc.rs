//! Order-k co-occurrence tensors of an incidence structure.
//!
//! The co-occurrence count of a node multiset is the number of edges that
//! contain all of its distinct nodes, so the value at any index depends only
//! on the distinct-node set: permutations and repeats collapse
//! (`c_aab == c_abb == c_ab`). Tensors are computed along two independent
//! paths that are cross-checked in tests:
//!
//! * the face-splitting pipeline: fold the (k-1)-fold face-splitting power of
//!   the incidence matrix along mode 0 and take the 0-mode product with the
//!   transposed incidence matrix, walked sparsely edge by edge;
//! * direct enumeration of sorted k-multisets over each edge's nodes.
//!
//! [`multiset_count`] is the definitional per-index oracle both paths must
//! agree with.

use std::collections::BTreeMap;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::incidence::{ContextMap, IncidenceMatrix};
use crate::tensor::SparseTensor;

/// Default cap on `sum_edges |s|^k` tuple visits for the face-splitting path.
pub const DEFAULT_TUPLE_BUDGET: u64 = 100_000_000;

/// Symmetric order-k co-occurrence tensor with canonical (sorted) multiset
/// indexing.
///
/// Only the sorted representative of each index orbit is stored; [`get`]
/// accepts any permutation and looks up its sorted form. Values are edge
/// counts: nonnegative, at most `num_edges`, with the fully-repeated diagonal
/// equal to the node degree.
///
/// [`get`]: CoocTensor::get
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoocTensor {
    order: usize,
    num_nodes: usize,
    num_edges: usize,
    tensor: SparseTensor,
}

impl CoocTensor {
    fn from_canonical(
        num_nodes: usize,
        order: usize,
        num_edges: usize,
        entries: BTreeMap<Vec<usize>, i64>,
    ) -> Result<Self> {
        debug_assert!(entries.keys().all(|idx| idx.windows(2).all(|w| w[0] <= w[1])));
        let tensor = SparseTensor::from_entries(vec![num_nodes; order], entries)?;
        Ok(Self {
            order,
            num_nodes,
            num_edges,
            tensor,
        })
    }

    /// Validates a full symmetric tensor and collapses it to canonical form.
    ///
    /// Every stored index must agree with its sorted representative, and each
    /// representative's full permutation orbit must be present.
    pub fn from_full_symmetric(full: &SparseTensor, num_edges: usize) -> Result<Self> {
        let dims = full.dims();
        let num_nodes = dims[0];
        if dims.iter().any(|&d| d != num_nodes) {
            return Err(Error::Shape(format!(
                "co-occurrence tensor must be cubical, got {dims:?}"
            )));
        }
        let order = full.order();
        let mut canonical: BTreeMap<Vec<usize>, (i64, u64)> = BTreeMap::new();
        for (idx, v) in full.iter() {
            if v < 0 || v > num_edges as i64 {
                return Err(Error::InvalidInput(format!(
                    "count {v} at {idx:?} outside [0, {num_edges}]"
                )));
            }
            let mut key = idx.to_vec();
            key.sort_unstable();
            let slot = canonical.entry(key).or_insert((v, 0));
            if slot.0 != v {
                return Err(Error::InvalidInput(format!(
                    "tensor is not symmetric at {idx:?}"
                )));
            }
            slot.1 += 1;
        }
        for (key, (_, seen)) in &canonical {
            if *seen != orbit_size(key) {
                return Err(Error::InvalidInput(format!(
                    "incomplete permutation orbit for {key:?}"
                )));
            }
        }
        let entries = canonical.into_iter().map(|(k, (v, _))| (k, v)).collect();
        Self::from_canonical(num_nodes, order, num_edges, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Count at any index permutation; zero if the multiset never co-occurs.
    /// Panics on an index of the wrong length or out of range.
    pub fn get(&self, idx: &[usize]) -> i64 {
        assert_eq!(idx.len(), self.order, "index length must equal order");
        assert!(
            idx.iter().all(|&i| i < self.num_nodes),
            "node index out of range"
        );
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.tensor.get(&key)
    }

    /// Node degree: the fully-repeated diagonal entry.
    pub fn degree(&self, node: usize) -> i64 {
        self.get(&vec![node; self.order])
    }

    /// Canonical (sorted-index) entries in lexicographic order.
    pub fn canonical_entries(&self) -> impl Iterator<Item = (&[usize], i64)> {
        self.tensor.iter()
    }

    /// The canonical-entry tensor backing this view.
    pub fn as_sparse(&self) -> &SparseTensor {
        &self.tensor
    }

    /// COO TSV of the canonical entries with a `#symmetric k` header flag.
    pub fn to_tsv_string(&self) -> String {
        let body = self.tensor.to_tsv_string();
        let mut lines = body.splitn(2, '\n');
        let header = lines.next().unwrap_or_default();
        let rest = lines.next().unwrap_or_default();
        format!("{header}\n#symmetric {}\n{rest}", self.order)
    }
}

/// Number of distinct permutations of a sorted multiset index: the product
/// of binomials over its runs of equal values.
fn orbit_size(sorted: &[usize]) -> u64 {
    let mut total: u128 = 1;
    let mut remaining = sorted.len() as u128;
    let mut i = 0;
    while i < sorted.len() {
        let mut run = 1u128;
        while i + 1 < sorted.len() && sorted[i] == sorted[i + 1] {
            run += 1;
            i += 1;
        }
        total = total.saturating_mul(binomial(remaining, run));
        remaining -= run;
        i += 1;
    }
    u64::try_from(total).unwrap_or(u64::MAX)
}

/// Exact multiplicative binomial; each partial product is itself a binomial.
fn binomial(n: u128, k: u128) -> u128 {
    (1..=k).fold(1u128, |acc, i| acc.saturating_mul(n - k + i) / i)
}

/// Exact number of edges containing the distinct-node set of `idx`.
///
/// This is the definitional count both tensor paths must reproduce; it scans
/// the edge rows with a two-pointer subset test.
pub fn multiset_count(inc: &IncidenceMatrix, idx: &[usize]) -> Result<i64> {
    if idx.is_empty() {
        return Err(Error::InvalidInput("multiset index must be nonempty".into()));
    }
    let n = inc.num_nodes();
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(Error::Index(format!("node {bad} >= num_nodes {n}")));
    }
    let mut set = idx.to_vec();
    set.sort_unstable();
    set.dedup();
    let count = inc
        .edges()
        .filter(|row| is_sorted_subset(&set, row))
        .count();
    Ok(count as i64)
}

/// Two-pointer subset test over two strictly ascending slices.
fn is_sorted_subset(needle: &[usize], haystack: &[usize]) -> bool {
    let mut h = 0;
    'outer: for &x in needle {
        while h < haystack.len() {
            match haystack[h].cmp(&x) {
                std::cmp::Ordering::Less => h += 1,
                std::cmp::Ordering::Equal => {
                    h += 1;
                    continue 'outer;
                }
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Pairwise co-occurrence matrix: the transposed incidence matrix times the
/// incidence matrix, accumulated sparsely edge by edge.
pub fn cooc_matrix(inc: &IncidenceMatrix) -> CoocTensor {
    let mut entries: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for row in inc.edges() {
        for (i, &a) in row.iter().enumerate() {
            for &b in &row[i..] {
                *entries.entry(vec![a, b]).or_insert(0) += 1;
            }
        }
    }
    CoocTensor::from_canonical(inc.num_nodes(), 2, inc.num_edges(), entries)
        .expect("edge-local entries are valid")
}

/// `sum_edges |s|^k`, the tuple-visit cost of the face-splitting pipeline.
/// Saturates at `u128::MAX` when an individual power overflows.
pub fn tuple_visit_estimate(inc: &IncidenceMatrix, k: usize) -> u128 {
    let k32 = u32::try_from(k).unwrap_or(u32::MAX);
    inc.edges()
        .map(|row| (row.len() as u128).checked_pow(k32).unwrap_or(u128::MAX))
        .fold(0u128, u128::saturating_add)
}

/// Order-k co-occurrence tensor by the face-splitting pipeline, with the
/// default tuple budget.
pub fn cooc_tensor_fsp(inc: &IncidenceMatrix, k: usize) -> Result<CoocTensor> {
    cooc_tensor_fsp_with_budget(inc, k, DEFAULT_TUPLE_BUDGET)
}

/// Face-splitting pipeline: for each edge, every ordered (k-1)-tuple over its
/// nodes is one unit column of the face-splitting power; folding along mode 0
/// reverses the tuple into the trailing index positions, and the 0-mode
/// product with the transposed incidence matrix prepends each incident node.
/// The dense `m x n^(k-1)` matrix is never materialized.
pub fn cooc_tensor_fsp_with_budget(
    inc: &IncidenceMatrix,
    k: usize,
    budget: u64,
) -> Result<CoocTensor> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("tensor order {k} must be >= 2")));
    }
    let estimate = tuple_visit_estimate(inc, k);
    if estimate > budget as u128 {
        return Err(Error::Capacity(format!(
            "tuple-visit estimate {estimate} exceeds budget {budget}"
        )));
    }
    let mut full: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for row in inc.edges() {
        let tuples = (0..k - 1)
            .map(|_| row.iter().copied())
            .multi_cartesian_product();
        for tuple in tuples {
            let mut suffix = tuple;
            suffix.reverse();
            for &x in row {
                let mut idx = Vec::with_capacity(k);
                idx.push(x);
                idx.extend_from_slice(&suffix);
                *full.entry(idx).or_insert(0) += 1;
            }
        }
    }
    let tensor = SparseTensor::from_entries(vec![inc.num_nodes(); k], full)?;
    CoocTensor::from_full_symmetric(&tensor, inc.num_edges())
}

/// Order-k co-occurrence tensor by direct sparse enumeration: each edge
/// increments every sorted k-multiset drawn from its nodes, so an index
/// counts the edges containing its distinct-node set. Edges accumulate in
/// parallel; the commutative integer merge makes the result independent of
/// scheduling.
pub fn cooc_tensor_direct(inc: &IncidenceMatrix, k: usize) -> Result<CoocTensor> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("tensor order {k} must be >= 2")));
    }
    let rows: Vec<&[usize]> = inc.edges().collect();
    let entries = rows
        .par_iter()
        .fold(BTreeMap::<Vec<usize>, i64>::new, |mut acc, row| {
            for multiset in row.iter().copied().combinations_with_replacement(k) {
                *acc.entry(multiset).or_insert(0) += 1;
            }
            acc
        })
        .reduce(BTreeMap::new, |mut left, right| {
            for (idx, v) in right {
                *left.entry(idx).or_insert(0) += v;
            }
            left
        });
    CoocTensor::from_canonical(inc.num_nodes(), k, inc.num_edges(), entries)
}

/// Context-mapped co-occurrence tensor with the default tuple budget.
pub fn context_cooc_tensor(
    inc: &IncidenceMatrix,
    contexts: &ContextMap,
    k: usize,
) -> Result<SparseTensor> {
    context_cooc_tensor_with_budget(inc, contexts, k, DEFAULT_TUPLE_BUDGET)
}

/// The face-splitting pipeline with the transposed context map in place of
/// the transposed incidence matrix: entry `(y, x_2, ..., x_k)` counts the
/// edges incident on context `y` that contain all of `x_2, ..., x_k`. The
/// first mode is indexed by contexts, so the result is not symmetric and is
/// returned as a plain sparse tensor.
pub fn context_cooc_tensor_with_budget(
    inc: &IncidenceMatrix,
    contexts: &ContextMap,
    k: usize,
    budget: u64,
) -> Result<SparseTensor> {
    if contexts.num_edges() != inc.num_edges() {
        return Err(Error::Shape(format!(
            "context map covers {} edges but incidence has {}",
            contexts.num_edges(),
            inc.num_edges()
        )));
    }
    if k < 2 {
        return Err(Error::InvalidInput(format!("tensor order {k} must be >= 2")));
    }
    if contexts.num_contexts() == 0 {
        return Err(Error::InvalidInput(
            "context map has no contexts; tensor dimensions must be positive".into(),
        ));
    }
    let estimate = tuple_visit_estimate(inc, k);
    if estimate > budget as u128 {
        return Err(Error::Capacity(format!(
            "tuple-visit estimate {estimate} exceeds budget {budget}"
        )));
    }
    let mut dims = vec![inc.num_nodes(); k];
    dims[0] = contexts.num_contexts();
    let mut out = SparseTensor::new(dims)?;
    for (e, row) in inc.edges().enumerate() {
        let tuples = (0..k - 1)
            .map(|_| row.iter().copied())
            .multi_cartesian_product();
        for tuple in tuples {
            let mut suffix = tuple;
            suffix.reverse();
            for &y in contexts.contexts_of(e) {
                let mut idx = Vec::with_capacity(k);
                idx.push(y);
                idx.extend_from_slice(&suffix);
                out.add(idx, 1)?;
            }
        }
    }
    Ok(out)
}

/// All sorted length-k index tuples over `n` nodes with at most `q` distinct
/// values: the cells of an order-k tensor that carry order-q information.
pub fn lower_order_cells(k: usize, n: usize, q: usize) -> Result<Vec<Vec<usize>>> {
    if q == 0 || q >= k {
        return Err(Error::InvalidInput(format!(
            "lower order {q} must satisfy 1 <= q < k = {k}"
        )));
    }
    Ok((0..n)
        .combinations_with_replacement(k)
        .filter(|idx| {
            let mut distinct = idx.clone();
            distinct.dedup();
            distinct.len() <= q
        })
        .collect())
}
