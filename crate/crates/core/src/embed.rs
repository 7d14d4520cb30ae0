//! Fiber-space embeddings: low-rank factorization of each node-indexed slice
//! of the order-3 co-occurrence tensor, plus fixed-dimension lookup maps
//! summed across tensor orders.
//!
//! Each slice `C3(i, :, :)` is factorized as `Y_i . Z_i` by alternating least
//! squares with a small ridge term; the loss is the Frobenius norm of the
//! residual. Slices factorize independently (and in parallel) with seeds
//! derived from the global seed and the slice index, so results are
//! bit-identical across runs and thread counts.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cooc::CoocTensor;
use crate::error::{Error, Result};

/// Alternating-least-squares settings.
#[derive(Debug, Clone, Copy)]
pub struct FactorConfig {
    pub max_iters: usize,
    /// Stop when the relative loss improvement of a sweep falls below this.
    pub tol: f64,
    pub seed: u64,
    /// Ridge term keeping each half-step well-posed.
    pub ridge: f64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-10,
            seed: 42,
            ridge: 1e-9,
        }
    }
}

/// One factor pair `Y (rows x d)`, `Z (d x cols)` with its final residual.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub y: Array2<f64>,
    pub z: Array2<f64>,
    /// Frobenius norm of `M - Y.Z` at termination.
    pub loss: f64,
    /// Number of full ALS sweeps performed.
    pub iterations: usize,
    /// Loss after initialization and after each sweep; non-increasing.
    pub loss_history: Vec<f64>,
}

/// One factor pair per node slice of an order-3 tensor, sharing dimension d.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberEmbedding {
    dim: usize,
    factors: Vec<FactorPair>,
}

impl FiberEmbedding {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, node: usize) -> &FactorPair {
        &self.factors[node]
    }

    pub fn factors(&self) -> &[FactorPair] {
        &self.factors
    }

    /// TSV export: per-node `#fiber node=<label> d=<d> loss=<value>` header,
    /// then the rows of `Y_i` and of `Z_i`.
    pub fn to_tsv_string(&self, labels: Option<&[String]>) -> Result<String> {
        if let Some(labels) = labels {
            if labels.len() != self.factors.len() {
                return Err(Error::Shape(format!(
                    "{} labels for {} nodes",
                    labels.len(),
                    self.factors.len()
                )));
            }
        }
        let mut out = String::new();
        for (i, pair) in self.factors.iter().enumerate() {
            let label = match labels {
                Some(l) => l[i].clone(),
                None => format!("x{i}"),
            };
            writeln!(
                out,
                "#fiber node={} d={} loss={:.16e}",
                label, self.dim, pair.loss
            )
            .unwrap();
            writeln!(out, "#y {} {}", pair.y.nrows(), pair.y.ncols()).unwrap();
            write_rows(&mut out, &pair.y);
            writeln!(out, "#z {} {}", pair.z.nrows(), pair.z.ncols()).unwrap();
            write_rows(&mut out, &pair.z);
        }
        Ok(out)
    }
}

fn write_rows(out: &mut String, m: &Array2<f64>) {
    for row in m.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", fields.join("\t")).unwrap();
    }
}

/// The node-indexed slice `C3(i, :, :)`: an n x n symmetric matrix equal to
/// the pairwise co-occurrence matrix of the edges containing node `i`.
pub fn slice(c3: &CoocTensor, node: usize) -> Result<Array2<f64>> {
    if c3.order() != 3 {
        return Err(Error::InvalidInput(format!(
            "slice requires an order-3 tensor, got order {}",
            c3.order()
        )));
    }
    let n = c3.num_nodes();
    if node >= n {
        return Err(Error::Index(format!("node {node} >= num_nodes {n}")));
    }
    let mut m = Array2::zeros((n, n));
    for a in 0..n {
        for b in a..n {
            let v = c3.get(&[node, a, b]) as f64;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Ok(m)
}

/// The node-indexed slice of an order-3 PMI tensor, with undefined
/// (zero-count) cells filled with 0.0 so the matrix can be factorized.
pub fn pmi_slice(p: &crate::pmi::PmiTensor, node: usize) -> Result<Array2<f64>> {
    if p.order() != 3 {
        return Err(Error::InvalidInput(format!(
            "slice requires an order-3 tensor, got order {}",
            p.order()
        )));
    }
    let n = p.num_nodes();
    if node >= n {
        return Err(Error::Index(format!("node {node} >= num_nodes {n}")));
    }
    let mut m = Array2::zeros((n, n));
    for a in 0..n {
        for b in a..n {
            let v = p.get(&[node, a, b]).unwrap_or(0.0);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Ok(m)
}

/// Rank-d factorization `M ~ Y.Z` by seeded alternating least squares.
///
/// Each sweep solves the two ridge-regularized least-squares half-steps in
/// closed form, so the recorded loss never increases; the iteration stops at
/// `max_iters`, or when the relative improvement drops below `tol` (a sweep
/// that fails to improve is rolled back).
pub fn fiber_factorize(m: &Array2<f64>, d: usize, cfg: &FactorConfig) -> Result<FactorPair> {
    if d == 0 {
        return Err(Error::InvalidInput("embedding dimension must be >= 1".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix entries must be finite".into()));
    }
    if cfg.ridge <= 0.0 || !cfg.ridge.is_finite() {
        return Err(Error::InvalidInput("ridge must be positive".into()));
    }
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("matrix must be nonempty".into()));
    }
    if d > rows.min(cols) {
        log::warn!("embedding dimension {d} exceeds matrix rank bound {}", rows.min(cols));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 0.5 / (d as f64).sqrt();
    let mut draw = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.random_range(-bound..bound)).collect()
    };
    let mut y = Array2::from_shape_vec((rows, d), draw(rows * d)).unwrap();
    let mut z = Array2::from_shape_vec((d, cols), draw(d * cols)).unwrap();

    let mut loss = frobenius_residual(m, &y, &z);
    let mut history = vec![loss];
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        let y_next = solve_left(m, &z, cfg.ridge)?;
        let z_next = solve_right(m, &y_next, cfg.ridge)?;
        let loss_next = frobenius_residual(m, &y_next, &z_next);
        if loss_next > loss {
            // numerical plateau: keep the better factors
            break;
        }
        y = y_next;
        z = z_next;
        let improvement = loss - loss_next;
        loss = loss_next;
        history.push(loss);
        iterations += 1;
        if improvement < cfg.tol * loss.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(FactorPair {
        y,
        z,
        loss,
        iterations,
        loss_history: history,
    })
}

/// argmin_Y of the ridge objective given Z: solve (Z Z^T + ridge I) Y^T = Z M^T.
fn solve_left(m: &Array2<f64>, z: &Array2<f64>, ridge: f64) -> Result<Array2<f64>> {
    let d = z.nrows();
    let mut gram = z.dot(&z.t());
    for i in 0..d {
        gram[(i, i)] += ridge;
    }
    let rhs = z.dot(&m.t());
    let solution = cholesky_solve(&gram, &rhs)?;
    Ok(solution.t().to_owned())
}

/// argmin_Z of the ridge objective given Y: solve (Y^T Y + ridge I) Z = Y^T M.
fn solve_right(m: &Array2<f64>, y: &Array2<f64>, ridge: f64) -> Result<Array2<f64>> {
    let d = y.ncols();
    let mut gram = y.t().dot(y);
    for i in 0..d {
        gram[(i, i)] += ridge;
    }
    let rhs = y.t().dot(m);
    cholesky_solve(&gram, &rhs)
}

fn cholesky_solve(gram: &Array2<f64>, rhs: &Array2<f64>) -> Result<Array2<f64>> {
    let d = gram.nrows();
    let g = DMatrix::from_row_iterator(d, d, gram.iter().copied());
    let b = DMatrix::from_row_iterator(rhs.nrows(), rhs.ncols(), rhs.iter().copied());
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("normal equations not positive definite".into()))?;
    let x = chol.solve(&b);
    Ok(Array2::from_shape_fn((rhs.nrows(), rhs.ncols()), |(i, j)| {
        x[(i, j)]
    }))
}

fn frobenius_residual(m: &Array2<f64>, y: &Array2<f64>, z: &Array2<f64>) -> f64 {
    let approx = y.dot(z);
    m.iter()
        .zip(approx.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn slice_seed(seed: u64, node: usize) -> u64 {
    // splitmix64 of the combined seed keeps per-slice streams independent
    let mut x = seed ^ (node as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Factorizes every node slice of an order-3 co-occurrence tensor.
pub fn fiber_space(c3: &CoocTensor, d: usize, cfg: &FactorConfig) -> Result<FiberEmbedding> {
    let slices = (0..c3.num_nodes())
        .map(|i| slice(c3, i))
        .collect::<Result<Vec<_>>>()?;
    fiber_space_matrices(&slices, d, cfg)
}

/// Factorizes an explicit list of slice matrices (counts or PMI values).
pub fn fiber_space_matrices(
    slices: &[Array2<f64>],
    d: usize,
    cfg: &FactorConfig,
) -> Result<FiberEmbedding> {
    let factors = slices
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let local = FactorConfig {
                seed: slice_seed(cfg.seed, i),
                ..*cfg
            };
            fiber_factorize(m, d, &local)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FiberEmbedding { dim: d, factors })
}

/// A family of embeddings with a shared dimension, one per tensor order.
///
/// Order 2 holds a single factor pair for the pairwise matrix; order 3 holds
/// the per-node fiber space. A length-(r-1) tuple indexes the fibers of the
/// order-r tensor.
#[derive(Debug, Clone)]
pub struct EmbeddingSequence {
    dim: usize,
    pairwise: Option<FactorPair>,
    fiber3: Option<FiberEmbedding>,
}

impl EmbeddingSequence {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            pairwise: None,
            fiber3: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_pairwise(mut self, pair: FactorPair) -> Result<Self> {
        if pair.y.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "pairwise factor dimension {} != sequence dimension {}",
                pair.y.ncols(),
                self.dim
            )));
        }
        self.pairwise = Some(pair);
        Ok(self)
    }

    pub fn with_fiber3(mut self, fiber: FiberEmbedding) -> Result<Self> {
        if fiber.dim() != self.dim {
            return Err(Error::Shape(format!(
                "fiber dimension {} != sequence dimension {}",
                fiber.dim(),
                self.dim
            )));
        }
        self.fiber3 = Some(fiber);
        Ok(self)
    }

    pub fn orders(&self) -> Vec<usize> {
        let mut orders = Vec::new();
        if self.pairwise.is_some() {
            orders.push(2);
        }
        if self.fiber3.is_some() {
            orders.push(3);
        }
        orders
    }
}

/// The vector value of a fiber index at one order.
///
/// Order 2 with tuple `(i,)` returns row `i` of the pairwise `Y`; order 3
/// with tuple `(i, j)` returns row `j` of `Y_i`.
pub fn embed_lookup(seq: &EmbeddingSequence, order: usize, idx: &[usize]) -> Result<Array1<f64>> {
    if idx.len() + 1 != order {
        return Err(Error::InvalidInput(format!(
            "order-{order} lookup takes a length-{} tuple, got {}",
            order.saturating_sub(1),
            idx.len()
        )));
    }
    match order {
        2 => {
            let pair = seq
                .pairwise
                .as_ref()
                .ok_or_else(|| Error::Range("order 2 not present in sequence".into()))?;
            let i = idx[0];
            if i >= pair.y.nrows() {
                return Err(Error::Index(format!("row {i} >= {}", pair.y.nrows())));
            }
            Ok(pair.y.row(i).to_owned())
        }
        3 => {
            let fiber = seq
                .fiber3
                .as_ref()
                .ok_or_else(|| Error::Range("order 3 not present in sequence".into()))?;
            let (i, j) = (idx[0], idx[1]);
            if i >= fiber.num_nodes() {
                return Err(Error::Index(format!("node {i} >= {}", fiber.num_nodes())));
            }
            let y = &fiber.factor(i).y;
            if j >= y.nrows() {
                return Err(Error::Index(format!("row {j} >= {}", y.nrows())));
            }
            Ok(y.row(j).to_owned())
        }
        other => Err(Error::Range(format!("order {other} not supported"))),
    }
}

/// Componentwise sum of one lookup per order, in ascending order of `r`.
/// Orders must be distinct and present in the sequence.
pub fn sum_embeddings(
    seq: &EmbeddingSequence,
    assignments: &[(usize, Vec<usize>)],
) -> Result<Array1<f64>> {
    if assignments.is_empty() {
        return Err(Error::InvalidInput("no assignments given".into()));
    }
    let mut sorted: Vec<&(usize, Vec<usize>)> = assignments.iter().collect();
    sorted.sort_by_key(|(order, _)| *order);
    for pair in sorted.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::InvalidInput(format!(
                "duplicate order {} in assignments",
                pair[0].0
            )));
        }
    }
    let mut total = Array1::zeros(seq.dim());
    for (order, idx) in sorted {
        total += &embed_lookup(seq, *order, idx)?;
    }
    Ok(total)
}
