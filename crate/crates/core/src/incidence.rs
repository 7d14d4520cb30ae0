//! Incidence structures (hypergraphs) and edge-to-context mappings.
//!
//! An incidence structure is a collection of edges, each a set of nodes. It is
//! stored as a sparse binary edge×node matrix: one strictly ascending node-id
//! list per edge. Node ids are dense in `[0, num_nodes)` and an optional label
//! table maps them back to display strings.

use std::collections::HashMap;
use std::fmt::Write as _;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Dense node identifier in `[0, num_nodes)`.
pub type NodeId = usize;

/// Dense edge identifier in `[0, num_edges)`.
pub type EdgeId = usize;

/// Sparse binary edge×node matrix representing a hypergraph.
///
/// The implied dense entry at `(edge, node)` is 1 iff `node` appears in the
/// edge's row list. Rows are strictly ascending, so membership is binary even
/// when an input edge mentions a node more than once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    num_nodes: usize,
    rows: Vec<Vec<NodeId>>,
    node_labels: Option<Vec<String>>,
}

impl IncidenceMatrix {
    /// Builds an incidence matrix from explicit node-id rows.
    ///
    /// Zero edges and empty rows are accepted here; the label-based builders
    /// below enforce the stricter non-empty preconditions.
    pub fn new(num_nodes: usize, rows: Vec<Vec<NodeId>>) -> Result<Self> {
        for (e, row) in rows.iter().enumerate() {
            for pair in row.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(Error::InvalidInput(format!(
                        "edge {e}: row must be strictly ascending"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last >= num_nodes {
                    return Err(Error::Index(format!(
                        "edge {e}: node {last} >= num_nodes {num_nodes}"
                    )));
                }
            }
        }
        Ok(Self {
            num_nodes,
            rows,
            node_labels: None,
        })
    }

    /// Attaches a node-label table; one label per node id.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(Error::Shape(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.num_nodes
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    /// Builds an incidence matrix from labelled edge sets.
    ///
    /// Node ids are assigned by first appearance of each distinct label.
    /// Duplicate labels within an edge collapse to a single incidence.
    pub fn from_edge_sets<S: AsRef<str>>(edges: &[Vec<S>]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidInput("empty edge list".into()));
        }
        let mut ids: HashMap<String, NodeId> = HashMap::new();
        let mut labels: Vec<String> = Vec::new();
        let mut rows = Vec::with_capacity(edges.len());
        for (e, edge) in edges.iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::InvalidInput(format!("edge {e} is empty")));
            }
            let mut row: Vec<NodeId> = edge
                .iter()
                .map(|label| {
                    let label = label.as_ref();
                    *ids.entry(label.to_owned()).or_insert_with(|| {
                        labels.push(label.to_owned());
                        labels.len() - 1
                    })
                })
                .collect();
            row.sort_unstable();
            row.dedup();
            rows.push(row);
        }
        let n = labels.len();
        Self::new(n, rows)?.with_labels(labels)
    }

    /// Builds the sliding-window hypergraph of a token sequence.
    ///
    /// Edge `t` holds the distinct tokens at positions `t-radius ..= t+radius`,
    /// clipped to the sequence boundaries, so there is exactly one edge per
    /// token position.
    pub fn corpus_windows<S: AsRef<str>>(tokens: &[S], radius: usize) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidInput("empty token sequence".into()));
        }
        if radius == 0 {
            return Err(Error::InvalidInput("window radius must be >= 1".into()));
        }
        let mut ids: HashMap<&str, NodeId> = HashMap::new();
        let mut labels: Vec<String> = Vec::new();
        let token_ids: Vec<NodeId> = tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                *ids.entry(t).or_insert_with(|| {
                    labels.push(t.to_owned());
                    labels.len() - 1
                })
            })
            .collect();
        let last = token_ids.len() - 1;
        let rows = (0..token_ids.len())
            .map(|t| {
                let lo = t.saturating_sub(radius);
                let hi = (t + radius).min(last);
                let mut row = token_ids[lo..=hi].to_vec();
                row.sort_unstable();
                row.dedup();
                row
            })
            .collect();
        let n = labels.len();
        Self::new(n, rows)?.with_labels(labels)
    }

    /// Parses basket text: one edge per line, whitespace-separated labels.
    /// Lines starting with `#` and blank lines are skipped.
    pub fn from_basket_str(text: &str) -> Result<Self> {
        let mut edges: Vec<Vec<&str>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let labels: Vec<&str> = line.split_whitespace().collect();
            if labels.is_empty() {
                return Err(Error::InvalidInput(format!("line {}: empty edge", lineno + 1)));
            }
            edges.push(labels);
        }
        Self::from_edge_sets(&edges)
    }

    pub fn num_edges(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Ascending node ids of one edge.
    pub fn edge(&self, e: EdgeId) -> &[NodeId] {
        &self.rows[e]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[NodeId]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    /// The implied dense entry: true iff `node` belongs to edge `e`.
    pub fn contains(&self, e: EdgeId, node: NodeId) -> bool {
        self.rows[e].binary_search(&node).is_ok()
    }

    /// Number of edges containing `node`.
    pub fn degree(&self, node: NodeId) -> usize {
        self.rows.iter().filter(|r| r.binary_search(&node).is_ok()).count()
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    /// Display label for a node: the stored label, or `x<id>` if unlabelled.
    pub fn label(&self, node: NodeId) -> String {
        match &self.node_labels {
            Some(labels) => labels[node].clone(),
            None => format!("x{node}"),
        }
    }

    /// Recovers the labelled edge sets (synthesized `x<id>` labels if none).
    pub fn to_edge_sets(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&x| self.label(x)).collect())
            .collect()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.num_edges(), self.num_nodes));
        for (e, row) in self.rows.iter().enumerate() {
            for &x in row {
                m[(e, x)] = 1.0;
            }
        }
        m
    }

    pub fn to_dense_i64(&self) -> Array2<i64> {
        let mut m = Array2::zeros((self.num_edges(), self.num_nodes));
        for (e, row) in self.rows.iter().enumerate() {
            for &x in row {
                m[(e, x)] = 1;
            }
        }
        m
    }

    /// Dense transpose (node×edge), the `U` of the 1-mode product in the
    /// co-occurrence pipeline.
    pub fn transpose_dense_i64(&self) -> Array2<i64> {
        let mut m = Array2::zeros((self.num_nodes, self.num_edges()));
        for (e, row) in self.rows.iter().enumerate() {
            for &x in row {
                m[(x, e)] = 1;
            }
        }
        m
    }

    /// Serializes to the incidence TSV format:
    /// `#incidence m n`, one `#node id label` line per node, then one
    /// tab-separated ascending id row per edge.
    pub fn to_tsv_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#incidence {} {}", self.num_edges(), self.num_nodes).unwrap();
        for x in 0..self.num_nodes {
            writeln!(out, "#node {} {}", x, self.label(x)).unwrap();
        }
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", line.join("\t")).unwrap();
        }
        out
    }

    /// Parses the incidence TSV format produced by [`to_tsv_string`].
    ///
    /// [`to_tsv_string`]: IncidenceMatrix::to_tsv_string
    pub fn from_tsv_str(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut labels: Vec<String> = Vec::new();
        let mut rows: Vec<Vec<NodeId>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#incidence ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(Error::InvalidInput(format!(
                        "line {lineno}: malformed #incidence header"
                    )));
                }
                let m = parse_usize(parts[0], lineno)?;
                let n = parse_usize(parts[1], lineno)?;
                header = Some((m, n));
            } else if let Some(rest) = line.strip_prefix("#node ") {
                let (id_part, label) = rest.split_once(char::is_whitespace).ok_or_else(|| {
                    Error::InvalidInput(format!("line {lineno}: malformed #node line"))
                })?;
                let id = parse_usize(id_part, lineno)?;
                if id != labels.len() {
                    return Err(Error::InvalidInput(format!(
                        "line {lineno}: #node ids must be contiguous from 0"
                    )));
                }
                labels.push(label.to_owned());
            } else if line.starts_with('#') {
                continue;
            } else {
                let row = line
                    .split('\t')
                    .map(|f| parse_usize(f, lineno))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
        let (m, n) = header
            .ok_or_else(|| Error::InvalidInput("missing #incidence header".into()))?;
        if rows.len() != m {
            return Err(Error::InvalidInput(format!(
                "expected {m} edge rows, found {}",
                rows.len()
            )));
        }
        let inc = Self::new(n, rows)?;
        if labels.is_empty() {
            Ok(inc)
        } else {
            inc.with_labels(labels)
        }
    }
}

fn parse_usize(field: &str, lineno: usize) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|e| Error::InvalidInput(format!("line {lineno}: {e}")))
}

/// Sparse binary edge×context matrix mapping hyperedges to contexts.
///
/// Replaces the transposed incidence matrix in the context variant of the
/// co-occurrence pipeline. Row count must match the companion incidence
/// matrix; rows may be empty (an edge with no context).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextMap {
    num_edges: usize,
    num_contexts: usize,
    rows: Vec<Vec<usize>>,
    context_labels: Option<Vec<String>>,
}

impl ContextMap {
    pub fn new(num_contexts: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for (e, row) in rows.iter().enumerate() {
            for pair in row.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(Error::InvalidInput(format!(
                        "edge {e}: context row must be strictly ascending"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last >= num_contexts {
                    return Err(Error::Index(format!(
                        "edge {e}: context {last} >= num_contexts {num_contexts}"
                    )));
                }
            }
        }
        Ok(Self {
            num_edges: rows.len(),
            num_contexts,
            rows,
            context_labels: None,
        })
    }

    /// Builds a context map from per-edge context-label sets. Context ids are
    /// assigned by first appearance; empty label sets are allowed.
    pub fn from_labels<S: AsRef<str>>(edge_labels: &[Vec<S>]) -> Self {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut labels: Vec<String> = Vec::new();
        let rows = edge_labels
            .iter()
            .map(|edge| {
                let mut row: Vec<usize> = edge
                    .iter()
                    .map(|label| {
                        let label = label.as_ref();
                        *ids.entry(label.to_owned()).or_insert_with(|| {
                            labels.push(label.to_owned());
                            labels.len() - 1
                        })
                    })
                    .collect();
                row.sort_unstable();
                row.dedup();
                row
            })
            .collect();
        Self {
            num_edges: edge_labels.len(),
            num_contexts: labels.len(),
            rows,
            context_labels: Some(labels),
        }
    }

    /// Each edge mapped to its own context; recovers the incidence matrix
    /// itself under the order-2 context pipeline.
    pub fn identity(num_edges: usize) -> Self {
        Self {
            num_edges,
            num_contexts: num_edges,
            rows: (0..num_edges).map(|e| vec![e]).collect(),
            context_labels: None,
        }
    }

    /// Nodes as contexts: reuses the incidence rows as the context rows.
    pub fn from_incidence(inc: &IncidenceMatrix) -> Self {
        Self {
            num_edges: inc.num_edges(),
            num_contexts: inc.num_nodes(),
            rows: inc.edges().map(|r| r.to_vec()).collect(),
            context_labels: inc.node_labels().map(|l| l.to_vec()),
        }
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn contexts_of(&self, e: EdgeId) -> &[usize] {
        &self.rows[e]
    }

    pub fn context_labels(&self) -> Option<&[String]> {
        self.context_labels.as_deref()
    }
}
