//! Sparse and small-dense tensor algebra.
//!
//! Kronecker, Khatri-Rao (columnwise Kronecker), and face-splitting (rowwise
//! Kronecker) products; mode-p unfolding and folding; p-mode products; and an
//! implicit representation of iterated face-splitting powers of an incidence
//! matrix.
//!
//! All mode indices in this module are 0-based. The unfolding maps tensor
//! element `(i_0, ..., i_{N-1})` to matrix element `(i_p, j)` with
//! `j = sum_{k != p} i_k * J_k` and `J_k = prod_{m < k, m != p} dims[m]`,
//! so earlier non-p modes vary fastest along the columns.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use itertools::Itertools;
use ndarray::{Array2, ArrayD, Dimension};

use crate::error::{Error, Result};
use crate::incidence::IncidenceMatrix;

/// Order-k integer tensor in coordinate (COO) form.
///
/// Zero values are implicit: the entry map never stores a zero. All stored
/// index tuples are componentwise within `dims`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseTensor {
    dims: Vec<usize>,
    entries: BTreeMap<Vec<usize>, i64>,
}

impl SparseTensor {
    /// An all-zero tensor of the given shape. Every dimension must be >= 1.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidInput("tensor order must be >= 1".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidInput("tensor dimensions must be positive".into()));
        }
        Ok(Self {
            dims,
            entries: BTreeMap::new(),
        })
    }

    /// Builds a tensor by summing `(index, value)` pairs; zeros are dropped.
    pub fn from_entries<I>(dims: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, i64)>,
    {
        let mut t = Self::new(dims)?;
        for (idx, v) in entries {
            t.check_index(&idx)?;
            t.add_unchecked(idx, v);
        }
        Ok(t)
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.order() {
            return Err(Error::Index(format!(
                "index length {} != order {}",
                idx.len(),
                self.order()
            )));
        }
        for (k, (&i, &d)) in idx.iter().zip(&self.dims).enumerate() {
            if i >= d {
                return Err(Error::Index(format!("index {i} >= dim {d} in mode {k}")));
            }
        }
        Ok(())
    }

    fn add_unchecked(&mut self, idx: Vec<usize>, v: i64) {
        if v == 0 {
            return;
        }
        let entry = self.entries.entry(idx);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let next = *e.get() + v;
                if next == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = next;
                }
            }
        }
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Value at an index; zero if absent. Panics on a malformed index.
    pub fn get(&self, idx: &[usize]) -> i64 {
        self.check_index(idx).expect("valid tensor index");
        self.entries.get(idx).copied().unwrap_or(0)
    }

    /// Sets a value, removing the entry when it is zero.
    pub fn set(&mut self, idx: Vec<usize>, v: i64) -> Result<()> {
        self.check_index(&idx)?;
        if v == 0 {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, v);
        }
        Ok(())
    }

    /// Adds to a value, dropping the entry if it cancels to zero.
    pub fn add(&mut self, idx: Vec<usize>, v: i64) -> Result<()> {
        self.check_index(&idx)?;
        self.add_unchecked(idx, v);
        Ok(())
    }

    /// Entries in lexicographic index order.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], i64)> {
        self.entries.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn to_dense(&self) -> Result<ArrayD<i64>> {
        self.dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Capacity("dense size overflows usize".into()))?;
        let mut a = ArrayD::zeros(self.dims.clone());
        for (idx, v) in self.iter() {
            a[idx] = v;
        }
        Ok(a)
    }

    /// Dense matrix view of an order-2 tensor.
    pub fn to_dense2_i64(&self) -> Result<Array2<i64>> {
        if self.order() != 2 {
            return Err(Error::Shape(format!(
                "order-{} tensor is not a matrix",
                self.order()
            )));
        }
        let mut a = Array2::zeros((self.dims[0], self.dims[1]));
        for (idx, v) in self.iter() {
            a[(idx[0], idx[1])] = v;
        }
        Ok(a)
    }

    pub fn from_dense(a: &ArrayD<i64>) -> Result<Self> {
        let dims = a.shape().to_vec();
        let mut t = Self::new(dims)?;
        for (idx, &v) in a.indexed_iter() {
            if v != 0 {
                t.entries.insert(idx.slice().to_vec(), v);
            }
        }
        Ok(t)
    }

    /// COO TSV: a `#dims d_1 ... d_k` header, then one
    /// `i_1 <TAB> ... <TAB> i_k <TAB> value` line per entry, 0-based indices
    /// in lexicographic order.
    pub fn to_tsv_string(&self) -> String {
        let mut out = String::new();
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        writeln!(out, "#dims {}", dims.join(" ")).unwrap();
        for (idx, v) in self.iter() {
            for i in idx {
                write!(out, "{i}\t").unwrap();
            }
            writeln!(out, "{v}").unwrap();
        }
        out
    }

    /// Parses the COO TSV format; unrecognized `#` comment lines are skipped.
    pub fn from_tsv_str(text: &str) -> Result<Self> {
        let mut dims: Option<Vec<usize>> = None;
        let mut entries: Vec<(Vec<usize>, i64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#dims ") {
                let parsed = rest
                    .split_whitespace()
                    .map(|f| {
                        f.parse::<usize>()
                            .map_err(|e| Error::InvalidInput(format!("line {lineno}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                dims = Some(parsed);
            } else if line.starts_with('#') {
                continue;
            } else {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() < 2 {
                    return Err(Error::InvalidInput(format!(
                        "line {lineno}: expected indices and a value"
                    )));
                }
                let idx = fields[..fields.len() - 1]
                    .iter()
                    .map(|f| {
                        f.parse::<usize>()
                            .map_err(|e| Error::InvalidInput(format!("line {lineno}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let v = fields[fields.len() - 1]
                    .parse::<i64>()
                    .map_err(|e| Error::InvalidInput(format!("line {lineno}: {e}")))?;
                entries.push((idx, v));
            }
        }
        let dims = dims.ok_or_else(|| Error::InvalidInput("missing #dims header".into()))?;
        Self::from_entries(dims, entries)
    }
}

/// Kronecker product of two vectors: `out[i*|v| + j] = u[i] * v[j]`.
pub fn kronecker(u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for &a in u {
        for &b in v {
            out.push(a * b);
        }
    }
    out
}

/// Khatri-Rao product: the matching-columnwise Kronecker product.
/// Column `j` of the result is `kronecker(c_j, d_j)`.
pub fn khatri_rao(c: &Array2<f64>, d: &Array2<f64>) -> Result<Array2<f64>> {
    if c.ncols() != d.ncols() {
        return Err(Error::Shape(format!(
            "column counts differ: {} vs {}",
            c.ncols(),
            d.ncols()
        )));
    }
    let mut out = Array2::zeros((c.nrows() * d.nrows(), c.ncols()));
    for j in 0..c.ncols() {
        for a in 0..c.nrows() {
            for b in 0..d.nrows() {
                out[(a * d.nrows() + b, j)] = c[(a, j)] * d[(b, j)];
            }
        }
    }
    Ok(out)
}

/// Face-splitting product: the matching-rowwise (transposed Khatri-Rao)
/// Kronecker product. Row `i` of the result is `kronecker(c_i, d_i)`.
pub fn face_split(c: &Array2<f64>, d: &Array2<f64>) -> Result<Array2<f64>> {
    if c.nrows() != d.nrows() {
        return Err(Error::Shape(format!(
            "row counts differ: {} vs {}",
            c.nrows(),
            d.nrows()
        )));
    }
    let mut out = Array2::zeros((c.nrows(), c.ncols() * d.ncols()));
    for i in 0..c.nrows() {
        for a in 0..c.ncols() {
            for b in 0..d.ncols() {
                out[(i, a * d.ncols() + b)] = c[(i, a)] * d[(i, b)];
            }
        }
    }
    Ok(out)
}

/// Implicit p-fold face-splitting power of a binary incidence matrix.
///
/// Logically an `m x n^p` matrix whose row `i` is the p-fold Kronecker power
/// of incidence row `i`; physically each row is just the set of ordered
/// p-tuples over the edge's nodes, so the astronomically wide dense form is
/// never materialized. `power == 1` is the incidence matrix itself.
#[derive(Debug, Clone, Copy)]
pub struct FaceSplitPower<'a> {
    incidence: &'a IncidenceMatrix,
    power: usize,
}

/// Builds the implicit face-splitting power `I • I • ... • I` (p factors).
pub fn face_split_power(incidence: &IncidenceMatrix, power: usize) -> Result<FaceSplitPower<'_>> {
    if power == 0 {
        return Err(Error::InvalidInput("face-splitting power must be >= 1".into()));
    }
    Ok(FaceSplitPower { incidence, power })
}

impl<'a> FaceSplitPower<'a> {
    pub fn num_rows(&self) -> usize {
        self.incidence.num_edges()
    }

    pub fn power(&self) -> usize {
        self.power
    }

    /// The dense column count `n^p`, if it fits in a `usize`.
    pub fn logical_num_cols(&self) -> Result<usize> {
        checked_pow(self.incidence.num_nodes(), self.power)
    }

    /// Number of nonzeros in row `edge`: `|s|^p`.
    pub fn row_nnz(&self, edge: usize) -> Result<usize> {
        checked_pow(self.incidence.edge(edge).len(), self.power)
    }

    /// Ordered p-tuples over the nodes of one edge, last position varying
    /// fastest. Each tuple names one nonzero (unit) column of the row.
    pub fn row_tuples(&self, edge: usize) -> impl Iterator<Item = Vec<usize>> + 'a {
        let nodes = self.incidence.edge(edge);
        (0..self.power)
            .map(|_| nodes.iter().copied())
            .multi_cartesian_product()
    }

    /// Dense column index of a tuple: big-endian base-n digits.
    pub fn column_index(&self, tuple: &[usize]) -> Result<usize> {
        let n = self.incidence.num_nodes();
        if tuple.len() != self.power {
            return Err(Error::Index(format!(
                "tuple length {} != power {}",
                tuple.len(),
                self.power
            )));
        }
        let mut col: usize = 0;
        for &t in tuple {
            if t >= n {
                return Err(Error::Index(format!("node {t} >= num_nodes {n}")));
            }
            col = col
                .checked_mul(n)
                .and_then(|c| c.checked_add(t))
                .ok_or_else(|| Error::Capacity("column index overflows usize".into()))?;
        }
        Ok(col)
    }

    /// Materializes the dense `m x n^p` matrix. Intended for small inputs.
    pub fn to_dense(&self) -> Result<Array2<f64>> {
        let cols = self.logical_num_cols()?;
        let mut out = Array2::zeros((self.num_rows(), cols));
        for e in 0..self.num_rows() {
            for tuple in self.row_tuples(e) {
                out[(e, self.column_index(&tuple)?)] = 1.0;
            }
        }
        Ok(out)
    }

    /// The same matrix as an order-2 sparse tensor of dims `[m, n^p]`.
    pub fn to_sparse_matrix(&self) -> Result<SparseTensor> {
        let cols = self.logical_num_cols()?;
        let mut t = SparseTensor::new(vec![self.num_rows(), cols])?;
        for e in 0..self.num_rows() {
            for tuple in self.row_tuples(e) {
                let col = self.column_index(&tuple)?;
                t.set(vec![e, col], 1)?;
            }
        }
        Ok(t)
    }
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    let exp32 = u32::try_from(exp)
        .map_err(|_| Error::Capacity(format!("exponent {exp} too large")))?;
    base.checked_pow(exp32)
        .ok_or_else(|| Error::Capacity(format!("{base}^{exp} overflows usize")))
}

/// Column strides `J_k` of the mode-p unfolding, and the total column count.
fn unfold_strides(dims: &[usize], mode: usize) -> Result<(Vec<usize>, usize)> {
    let mut strides = vec![0usize; dims.len()];
    let mut acc: usize = 1;
    for (k, &d) in dims.iter().enumerate() {
        if k == mode {
            continue;
        }
        strides[k] = acc;
        acc = acc
            .checked_mul(d)
            .ok_or_else(|| Error::Capacity("unfolding width overflows usize".into()))?;
    }
    Ok((strides, acc))
}

/// Mode-p unfolding: aligns the mode-p fibers into an `I_p x prod(rest)`
/// matrix, returned as an order-2 sparse tensor.
pub fn unfold(x: &SparseTensor, mode: usize) -> Result<SparseTensor> {
    if mode >= x.order() {
        return Err(Error::Mode {
            mode,
            order: x.order(),
        });
    }
    let (strides, cols) = unfold_strides(x.dims(), mode)?;
    let mut out = SparseTensor::new(vec![x.dims()[mode], cols])?;
    for (idx, v) in x.iter() {
        let mut col = 0usize;
        for (k, &i) in idx.iter().enumerate() {
            if k != mode {
                col += i * strides[k];
            }
        }
        out.set(vec![idx[mode], col], v)?;
    }
    Ok(out)
}

/// Mode-p folding: inverse of [`unfold`] for explicitly given target
/// dimensions.
pub fn fold(m: &SparseTensor, mode: usize, dims: &[usize]) -> Result<SparseTensor> {
    if m.order() != 2 {
        return Err(Error::Shape(format!(
            "fold input must be a matrix, got order {}",
            m.order()
        )));
    }
    if mode >= dims.len() {
        return Err(Error::Mode {
            mode,
            order: dims.len(),
        });
    }
    let (_, cols) = unfold_strides(dims, mode)?;
    if m.dims()[0] != dims[mode] || m.dims()[1] != cols {
        return Err(Error::Shape(format!(
            "matrix {}x{} does not fold to {:?} along mode {mode}",
            m.dims()[0],
            m.dims()[1],
            dims
        )));
    }
    let mut out = SparseTensor::new(dims.to_vec())?;
    for (idx, v) in m.iter() {
        let (row, mut col) = (idx[0], idx[1]);
        let mut full = vec![0usize; dims.len()];
        full[mode] = row;
        for (k, &d) in dims.iter().enumerate() {
            if k == mode {
                continue;
            }
            full[k] = col % d;
            col /= d;
        }
        out.set(full, v)?;
    }
    Ok(out)
}

/// p-mode product `X x_p U`: replaces mode `p` of `X` by the rows of `U`,
/// satisfying `unfold(result, p) == U . unfold(X, p)` exactly.
pub fn mode_product(x: &SparseTensor, mode: usize, u: &Array2<i64>) -> Result<SparseTensor> {
    if mode >= x.order() {
        return Err(Error::Mode {
            mode,
            order: x.order(),
        });
    }
    if u.ncols() != x.dims()[mode] {
        return Err(Error::Shape(format!(
            "matrix has {} columns but mode {mode} has size {}",
            u.ncols(),
            x.dims()[mode]
        )));
    }
    if u.nrows() == 0 {
        return Err(Error::Shape("matrix must have at least one row".into()));
    }
    let mut dims = x.dims().to_vec();
    dims[mode] = u.nrows();
    let mut out = SparseTensor::new(dims)?;
    for (idx, v) in x.iter() {
        let i = idx[mode];
        for r in 0..u.nrows() {
            let w = u[(r, i)];
            if w != 0 {
                let mut target = idx.to_vec();
                target[mode] = r;
                out.add(target, w * v)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_sentence_incidence() -> IncidenceMatrix {
        IncidenceMatrix::new(4, vec![vec![0, 1, 2], vec![1, 2, 3], vec![0, 1, 3]]).unwrap()
    }

    #[test]
    fn kronecker_binary() {
        assert_eq!(kronecker(&[1.0, 0.0], &[1.0, 1.0]), vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn kronecker_scalar_identity() {
        for x in [0.0, -2.5, 7.0] {
            assert_eq!(kronecker(&[1.0], &[x]), vec![x]);
        }
    }

    #[test]
    fn kronecker_hand_multiplied() {
        assert_eq!(
            kronecker(&[2.0, 3.0], &[5.0, 7.0]),
            vec![10.0, 14.0, 15.0, 21.0]
        );
    }

    #[test]
    fn khatri_rao_row_vectors() {
        let c = Array2::from_shape_vec((1, 3), vec![1.0, 2.0, 3.0]).unwrap();
        let d = Array2::from_shape_vec((1, 3), vec![4.0, 5.0, 6.0]).unwrap();
        let kr = khatri_rao(&c, &d).unwrap();
        assert_eq!(kr, Array2::from_shape_vec((1, 3), vec![4.0, 10.0, 18.0]).unwrap());
    }

    #[test]
    fn khatri_rao_identity_columns() {
        let id: Array2<f64> = Array2::eye(2);
        let kr = khatri_rao(&id, &id).unwrap();
        let expected = Array2::from_shape_vec(
            (4, 2),
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        assert_eq!(kr, expected);
    }

    #[test]
    fn khatri_rao_rejects_mismatch() {
        let c = Array2::<f64>::zeros((2, 3));
        let d = Array2::<f64>::zeros((2, 4));
        assert!(matches!(khatri_rao(&c, &d), Err(Error::Shape(_))));
    }

    #[test]
    fn face_split_fixture_rows() {
        let inc = three_sentence_incidence().to_dense();
        let fs = face_split(&inc, &inc).unwrap();
        assert_eq!(fs.nrows(), 3);
        assert_eq!(fs.ncols(), 16);
        // s1 row begins 1,1,1,0,1,...
        let s1: Vec<f64> = fs.row(0).iter().copied().collect();
        assert_eq!(&s1[..5], &[1.0, 1.0, 1.0, 0.0, 1.0]);
        // s2 row begins with five zeros and ends at 1 (x4 x x4)
        let s2: Vec<f64> = fs.row(1).iter().copied().collect();
        assert_eq!(&s2[..5], &[0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(s2[15], 1.0);
    }

    #[test]
    fn face_split_single_row_is_kronecker() {
        let c = Array2::from_shape_vec((1, 2), vec![2.0, 3.0]).unwrap();
        let d = Array2::from_shape_vec((1, 2), vec![5.0, 7.0]).unwrap();
        let fs = face_split(&c, &d).unwrap();
        let row: Vec<f64> = fs.row(0).iter().copied().collect();
        assert_eq!(row, kronecker(&[2.0, 3.0], &[5.0, 7.0]));
    }

    #[test]
    fn face_split_ones_absorb() {
        let ones = Array2::from_elem((2, 2), 1.0);
        let fs = face_split(&ones, &ones).unwrap();
        assert_eq!(fs, Array2::from_elem((2, 4), 1.0));
    }

    #[test]
    fn face_split_rejects_mismatch() {
        let c = Array2::<f64>::zeros((2, 3));
        let d = Array2::<f64>::zeros((3, 3));
        assert!(matches!(face_split(&c, &d), Err(Error::Shape(_))));
    }

    #[test]
    fn face_split_power_one_is_incidence() {
        let inc = three_sentence_incidence();
        let p1 = face_split_power(&inc, 1).unwrap();
        assert_eq!(p1.to_dense().unwrap(), inc.to_dense());
    }

    #[test]
    fn face_split_power_two_matches_dense_product() {
        let inc = three_sentence_incidence();
        let p2 = face_split_power(&inc, 2).unwrap();
        let dense = inc.to_dense();
        assert_eq!(p2.to_dense().unwrap(), face_split(&dense, &dense).unwrap());
    }

    #[test]
    fn face_split_power_row_nnz() {
        let inc = IncidenceMatrix::new(7, vec![vec![0, 2, 4, 6], vec![1], vec![3, 5]]).unwrap();
        for p in 1..4 {
            let fsp = face_split_power(&inc, p).unwrap();
            for e in 0..inc.num_edges() {
                let count = fsp.row_tuples(e).count();
                assert_eq!(count, inc.edge(e).len().pow(p as u32));
                assert_eq!(count, fsp.row_nnz(e).unwrap());
            }
        }
    }

    #[test]
    fn face_split_power_overflow_is_capacity_error() {
        let inc = IncidenceMatrix::new(1000, vec![vec![0, 1, 2]]).unwrap();
        let fsp = face_split_power(&inc, 40).unwrap();
        assert!(matches!(fsp.logical_num_cols(), Err(Error::Capacity(_))));
    }

    #[test]
    fn face_split_power_rejects_zero() {
        let inc = three_sentence_incidence();
        assert!(matches!(
            face_split_power(&inc, 0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn unfold_matrix_mode_zero_is_identity() {
        let t = SparseTensor::from_entries(
            vec![2, 3],
            vec![(vec![0, 2], 5), (vec![1, 0], -1)],
        )
        .unwrap();
        let u = unfold(&t, 0).unwrap();
        assert_eq!(u, t);
    }

    #[test]
    fn unfold_single_entry_hand_computed() {
        // 2x2x2 tensor, single entry at (0,1,1); mode 0 column = 1*1 + 1*2 = 3
        let t = SparseTensor::from_entries(vec![2, 2, 2], vec![(vec![0, 1, 1], 1)]).unwrap();
        let u = unfold(&t, 0).unwrap();
        assert_eq!(u.dims(), &[2, 4]);
        assert_eq!(u.get(&[0, 3]), 1);
        assert_eq!(u.nnz(), 1);

        // brute-force enumeration of the index formula over all positions
        for (idx, v) in t.iter() {
            let strides = [0usize, 1, 2]; // J_k for dims [2,2,2], mode 0
            let col = idx[1] * strides[1] + idx[2] * strides[2];
            assert_eq!(u.get(&[idx[0], col]), v);
        }
    }

    #[test]
    fn unfold_rejects_bad_mode() {
        let t = SparseTensor::new(vec![2, 2]).unwrap();
        assert!(matches!(unfold(&t, 2), Err(Error::Mode { .. })));
    }

    #[test]
    fn fold_zero_matrix_is_empty() {
        let m = SparseTensor::new(vec![2, 6]).unwrap();
        let t = fold(&m, 0, &[2, 3, 2]).unwrap();
        assert_eq!(t.nnz(), 0);
        assert_eq!(t.dims(), &[2, 3, 2]);
    }

    #[test]
    fn fold_rejects_inconsistent_shape() {
        let m = SparseTensor::new(vec![2, 5]).unwrap();
        assert!(matches!(fold(&m, 0, &[2, 3, 2]), Err(Error::Shape(_))));
        let t = SparseTensor::new(vec![2, 2, 2]).unwrap();
        assert!(matches!(fold(&t, 0, &[2, 2, 2]), Err(Error::Shape(_))));
    }

    #[test]
    fn mode_product_identity() {
        let t = SparseTensor::from_entries(
            vec![3, 2, 2],
            vec![(vec![0, 1, 1], 4), (vec![2, 0, 1], -3)],
        )
        .unwrap();
        let id = Array2::from_diag_elem(3, 1i64);
        assert_eq!(mode_product(&t, 0, &id).unwrap(), t);
    }

    #[test]
    fn mode_product_matrix_case_is_matmul() {
        let t = SparseTensor::from_entries(
            vec![2, 3],
            vec![(vec![0, 0], 1), (vec![0, 2], 2), (vec![1, 1], 3)],
        )
        .unwrap();
        let u = Array2::from_shape_vec((2, 2), vec![1i64, 2, 0, -1]).unwrap();
        let prod = mode_product(&t, 0, &u).unwrap();
        let expected = u.dot(&t.to_dense2_i64().unwrap());
        assert_eq!(prod.to_dense2_i64().unwrap(), expected);
    }

    #[test]
    fn mode_product_triple_loop_oracle() {
        let t = SparseTensor::from_entries(
            vec![3, 3, 3],
            vec![
                (vec![0, 0, 0], 2),
                (vec![1, 2, 0], 5),
                (vec![2, 2, 2], -1),
                (vec![0, 1, 2], 3),
            ],
        )
        .unwrap();
        let u = Array2::from_shape_vec((2, 3), vec![1i64, -2, 0, 3, 1, 4]).unwrap();
        let got = mode_product(&t, 1, &u).unwrap();
        for j in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    let mut expect = 0i64;
                    for i in 0..3 {
                        expect += u[(j, i)] * t.get(&[a, i, b]);
                    }
                    assert_eq!(got.get(&[a, j, b]), expect);
                }
            }
        }
    }

    #[test]
    fn mode_product_rejects_mismatch() {
        let t = SparseTensor::new(vec![2, 2]).unwrap();
        let u = Array2::<i64>::zeros((2, 3));
        assert!(matches!(mode_product(&t, 0, &u), Err(Error::Shape(_))));
    }

    #[test]
    fn tsv_round_trip() {
        let t = SparseTensor::from_entries(
            vec![2, 3, 2],
            vec![(vec![0, 2, 1], 7), (vec![1, 0, 0], -2)],
        )
        .unwrap();
        let text = t.to_tsv_string();
        assert!(text.starts_with("#dims 2 3 2\n"));
        assert_eq!(SparseTensor::from_tsv_str(&text).unwrap(), t);
    }

    #[test]
    fn sparse_tensor_drops_zeros() {
        let mut t = SparseTensor::new(vec![2, 2]).unwrap();
        t.add(vec![0, 1], 5).unwrap();
        t.add(vec![0, 1], -5).unwrap();
        assert_eq!(t.nnz(), 0);
        t.set(vec![1, 1], 0).unwrap();
        assert_eq!(t.nnz(), 0);
    }

    prop_compose! {
        fn arb_dims()(order in 2usize..4)
            (dims in proptest::collection::vec(1usize..5, order..=order)) -> Vec<usize> {
            dims
        }
    }

    prop_compose! {
        fn arb_tensor()(dims in arb_dims())
            (entries in proptest::collection::vec(
                (proptest::collection::vec(0usize..5, dims.len()..=dims.len()), -9i64..10),
                0..12,
            ), dims in Just(dims)) -> SparseTensor {
            let clipped: Vec<(Vec<usize>, i64)> = entries.into_iter().map(|(idx, v)| {
                let idx: Vec<usize> = idx.iter().zip(&dims).map(|(&i, &d)| i % d).collect();
                (idx, v)
            }).collect();
            SparseTensor::from_entries(dims, clipped).unwrap()
        }
    }

    proptest! {
        #[test]
        fn kronecker_is_bilinear(
            u in proptest::collection::vec(-5i64..6, 1..5),
            v in proptest::collection::vec(-5i64..6, 1..5),
            alpha in -4i64..5,
        ) {
            let uf: Vec<f64> = u.iter().map(|&x| x as f64).collect();
            let vf: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let scaled: Vec<f64> = uf.iter().map(|x| x * alpha as f64).collect();
            let lhs = kronecker(&scaled, &vf);
            let rhs: Vec<f64> = kronecker(&uf, &vf).iter().map(|x| x * alpha as f64).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn khatri_rao_face_split_duality(
            c_vals in proptest::collection::vec(-4i64..5, 12),
            d_vals in proptest::collection::vec(-4i64..5, 12),
        ) {
            let c = Array2::from_shape_vec((3, 4), c_vals.iter().map(|&x| x as f64).collect()).unwrap();
            let d = Array2::from_shape_vec((3, 4), d_vals.iter().map(|&x| x as f64).collect()).unwrap();
            let kr = khatri_rao(&c, &d).unwrap();
            let fs = face_split(&c.t().to_owned(), &d.t().to_owned()).unwrap();
            prop_assert_eq!(kr, fs.t().to_owned());
        }

        #[test]
        fn fold_unfold_round_trip(t in arb_tensor(), mode_seed in 0usize..8) {
            let mode = mode_seed % t.order();
            let m = unfold(&t, mode).unwrap();
            let back = fold(&m, mode, t.dims()).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn mode_product_unfolding_relation(
            t in arb_tensor(),
            mode_seed in 0usize..8,
            u_vals in proptest::collection::vec(-3i64..4, 1..13),
        ) {
            let mode = mode_seed % t.order();
            let mode_dim = t.dims()[mode];
            let rows = (u_vals.len() / mode_dim).max(1);
            let mut vals = u_vals;
            vals.resize(rows * mode_dim, 1);
            let u = Array2::from_shape_vec((rows, mode_dim), vals).unwrap();
            let prod = mode_product(&t, mode, &u).unwrap();
            let lhs = unfold(&prod, mode).unwrap().to_dense2_i64().unwrap();
            let rhs = u.dot(&unfold(&t, mode).unwrap().to_dense2_i64().unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
