//! Compressed sparse-column storage and the kernels the solver needs:
//! matrix-vector products, transposed products, symmetric products from a
//! stored lower triangle, and symmetric permutation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Coordinate-format assembly buffer. Indices are 0-based.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Triplets {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Triplets {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }
}

/// Compressed sparse-column matrix.
///
/// Row indices are strictly increasing within each column and no `(row, col)`
/// pair is stored twice. Explicit zeros are allowed and kept.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    colptr: Vec<usize>,
    rowind: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Builds a matrix from raw arrays, checking every storage invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        colptr: Vec<usize>,
        rowind: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if colptr.len() != ncols + 1 || colptr[0] != 0 {
            return Err(Error::Structure(
                "colptr must have length ncols + 1 and start at 0",
            ));
        }
        if colptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Structure("colptr must be non-decreasing"));
        }
        let nnz = colptr[ncols];
        if rowind.len() != nnz || values.len() != nnz {
            return Err(Error::Structure(
                "rowind/values length must equal colptr[ncols]",
            ));
        }
        for j in 0..ncols {
            let rows = &rowind[colptr[j]..colptr[j + 1]];
            if rows.iter().any(|&r| r >= nrows) {
                return Err(Error::Structure("row index out of range"));
            }
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Structure("row indices must be strictly increasing"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value"));
        }
        Ok(CscMatrix {
            nrows,
            ncols,
            colptr,
            rowind,
            values,
        })
    }

    /// All-zero matrix with no stored entries.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CscMatrix {
            nrows,
            ncols,
            colptr: vec![0; ncols + 1],
            rowind: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CscMatrix {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowind: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Assembles from coordinates; duplicate entries are summed.
    ///
    /// The result does not depend on the order of `t.entries`: duplicates are
    /// summed in a canonical order.
    pub fn from_triplets(t: &Triplets) -> Result<Self> {
        for &(r, c, v) in &t.entries {
            if r >= t.nrows || c >= t.ncols {
                return Err(Error::Structure("triplet index out of range"));
            }
            if !v.is_finite() {
                return Err(Error::Data("non-finite triplet value"));
            }
        }
        let mut sorted = t.entries.clone();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)).then(a.2.total_cmp(&b.2)));

        let mut colptr = vec![0usize; t.ncols + 1];
        let mut rowind = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                rowind.push(r);
                values.push(v);
                colptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for j in 0..t.ncols {
            colptr[j + 1] += colptr[j];
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("duplicate summation overflowed"));
        }
        Ok(CscMatrix {
            nrows: t.nrows,
            ncols: t.ncols,
            colptr,
            rowind,
            values,
        })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }

    pub fn rowind(&self) -> &[usize] {
        &self.rowind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.colptr[j]..self.colptr[j + 1];
        (&self.rowind[range.clone()], &self.values[range])
    }

    /// Iterates `(row, col, value)` in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    /// Stored value at `(i, j)`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn to_triplets(&self) -> Triplets {
        Triplets {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self.iter().collect(),
        }
    }

    /// `A x`, accumulated column by column.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::Structure("spmv: length(x) != ncols"));
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_acc(x, &mut y);
        Ok(y)
    }

    /// `y += A x` without dimension checks.
    pub(crate) fn spmv_acc(&self, x: &[f64], y: &mut [f64]) {
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                y[i] += v * xj;
            }
        }
    }

    /// `A^T y`.
    pub fn spmv_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.nrows {
            return Err(Error::Structure("spmv_transpose: length(y) != nrows"));
        }
        Ok((0..self.ncols)
            .map(|j| {
                let (rows, vals) = self.col(j);
                rows.iter().zip(vals).map(|(&i, &v)| v * y[i]).sum()
            })
            .collect())
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut count = vec![0usize; self.nrows + 1];
        for &i in &self.rowind {
            count[i + 1] += 1;
        }
        for i in 0..self.nrows {
            count[i + 1] += count[i];
        }
        let colptr = count.clone();
        let mut next = count;
        let mut rowind = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                let dst = next[i];
                rowind[dst] = j;
                values[dst] = v;
                next[i] += 1;
            }
        }
        CscMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            colptr,
            rowind,
            values,
        }
    }
}

/// A bijection on `0..n`, stored as `new_of_old[old] = new`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    new_of_old: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            new_of_old: (0..n).collect(),
        }
    }

    /// From `new_of_old[old] = new`; fails unless this is a bijection.
    pub fn from_new_of_old(new_of_old: Vec<usize>) -> Result<Self> {
        let n = new_of_old.len();
        let mut seen = vec![false; n];
        for &p in &new_of_old {
            if p >= n || seen[p] {
                return Err(Error::Structure("not a permutation"));
            }
            seen[p] = true;
        }
        Ok(Permutation { new_of_old })
    }

    /// From an elimination order `order[new] = old`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut new_of_old = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            if old >= n || new_of_old[old] != usize::MAX {
                return Err(Error::Structure("not a permutation"));
            }
            new_of_old[old] = new;
        }
        Ok(Permutation { new_of_old })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.new_of_old.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.new_of_old.is_empty()
    }

    #[inline]
    pub fn new_of(&self, old: usize) -> usize {
        self.new_of_old[old]
    }

    pub fn new_of_old(&self) -> &[usize] {
        &self.new_of_old
    }

    /// `order[new] = old`.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.len()];
        for (old, &new) in self.new_of_old.iter().enumerate() {
            order[new] = old;
        }
        order
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            new_of_old: self.order(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.new_of_old.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `out[new_of(i)] = v[i]`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (i, &x) in v.iter().enumerate() {
            out[self.new_of_old[i]] = x;
        }
        out
    }

    /// `out[i] = v[new_of(i)]`.
    pub fn apply_inverse(&self, v: &[f64]) -> Vec<f64> {
        self.new_of_old.iter().map(|&p| v[p]).collect()
    }
}

/// Symmetric matrix represented by its lower triangle, diagonal included.
#[derive(Clone, Debug, PartialEq)]
pub struct SymLowerMatrix {
    storage: CscMatrix,
}

impl SymLowerMatrix {
    pub fn new(storage: CscMatrix) -> Result<Self> {
        if storage.nrows != storage.ncols {
            return Err(Error::Structure("symmetric storage must be square"));
        }
        if storage.iter().any(|(i, j, _)| i < j) {
            return Err(Error::Structure(
                "entry above the diagonal in lower storage",
            ));
        }
        Ok(SymLowerMatrix { storage })
    }

    /// Assembles from coordinates. Each entry is placed at `(max, min)` of its
    /// indices, so callers may pass either triangle; duplicates are summed.
    pub fn from_triplets(t: &Triplets) -> Result<Self> {
        if t.nrows != t.ncols {
            return Err(Error::Structure("symmetric matrix must be square"));
        }
        let lower = Triplets {
            nrows: t.nrows,
            ncols: t.ncols,
            entries: t
                .entries
                .iter()
                .map(|&(i, j, v)| (i.max(j), i.min(j), v))
                .collect(),
        };
        Ok(SymLowerMatrix {
            storage: CscMatrix::from_triplets(&lower)?,
        })
    }

    pub fn identity(n: usize) -> Self {
        SymLowerMatrix {
            storage: CscMatrix::identity(n),
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.storage.ncols
    }

    pub fn storage(&self) -> &CscMatrix {
        &self.storage
    }

    /// Number of stored lower-triangle entries.
    pub fn nnz(&self) -> usize {
        self.storage.nnz()
    }

    /// Value at `(i, j)` of the symmetric expansion.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.storage.get(i.max(j), i.min(j))
    }

    /// Largest stored magnitude.
    pub fn max_abs(&self) -> f64 {
        self.storage.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `K v` for the symmetric expansion of the lower triangle.
    pub fn sym_spmv(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.order() {
            return Err(Error::Structure("sym_spmv: length(v) != order"));
        }
        let mut out = vec![0.0; v.len()];
        self.sym_spmv_into(v, &mut out);
        Ok(out)
    }

    /// `out = K v` without dimension checks.
    pub(crate) fn sym_spmv_into(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for j in 0..self.order() {
            let (rows, vals) = self.storage.col(j);
            let vj = v[j];
            let mut acc = 0.0;
            for (&i, &a) in rows.iter().zip(vals) {
                out[i] += a * vj;
                if i != j {
                    acc += a * v[i];
                }
            }
            out[j] += acc;
        }
    }

    /// `P K P^T`, where entry `(i, j)` moves to `(p(i), p(j))`.
    pub fn sym_permute(&self, p: &Permutation) -> Result<SymLowerMatrix> {
        if p.len() != self.order() {
            return Err(Error::Structure("permutation length != order"));
        }
        let n = self.order();
        let mut count = vec![0usize; n + 1];
        for (i, j, _) in self.storage.iter() {
            let (pi, pj) = (p.new_of(i), p.new_of(j));
            count[pi.min(pj) + 1] += 1;
        }
        for k in 0..n {
            count[k + 1] += count[k];
        }
        let colptr = count.clone();
        let mut next = count;
        let nnz = self.nnz();
        let mut entries: Vec<(usize, f64)> = vec![(0, 0.0); nnz];
        for (i, j, v) in self.storage.iter() {
            let (pi, pj) = (p.new_of(i), p.new_of(j));
            let c = pi.min(pj);
            entries[next[c]] = (pi.max(pj), v);
            next[c] += 1;
        }
        for c in 0..n {
            entries[colptr[c]..colptr[c + 1]].sort_unstable_by_key(|e| e.0);
        }
        let (rowind, values) = entries.into_iter().unzip();
        Ok(SymLowerMatrix {
            storage: CscMatrix {
                nrows: n,
                ncols: n,
                colptr,
                rowind,
                values,
            },
        })
    }

    /// Symmetric adjacency (both triangles, diagonal excluded) as row lists.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.order()];
        for (i, j, _) in self.storage.iter() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn diag(d: &[f64]) -> CscMatrix {
        let mut t = Triplets::new(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            t.push(i, i, v);
        }
        CscMatrix::from_triplets(&t).unwrap()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = Triplets::new(1, 1);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.0);
        let a = CscMatrix::from_triplets(&t).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.values(), &[3.0]);
    }

    #[test]
    fn empty_matrix_has_zero_colptr() {
        let a = CscMatrix::from_triplets(&Triplets::new(2, 3)).unwrap();
        assert_eq!(a.colptr(), &[0, 0, 0, 0]);
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn direct_placement() {
        let mut t = Triplets::new(2, 2);
        t.push(1, 0, 5.0);
        t.push(0, 1, 7.0);
        let a = CscMatrix::from_triplets(&t).unwrap();
        assert_eq!(a.col(0), (&[1usize][..], &[5.0][..]));
        assert_eq!(a.col(1), (&[0usize][..], &[7.0][..]));
    }

    #[test]
    fn explicit_zeros_are_kept() {
        let mut t = Triplets::new(2, 2);
        t.push(1, 1, 0.0);
        assert_eq!(CscMatrix::from_triplets(&t).unwrap().nnz(), 1);
    }

    #[test]
    fn triplet_errors() {
        let mut t = Triplets::new(2, 2);
        t.push(2, 0, 1.0);
        assert!(matches!(
            CscMatrix::from_triplets(&t),
            Err(Error::Structure(_))
        ));
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, f64::NAN);
        assert!(matches!(CscMatrix::from_triplets(&t), Err(Error::Data(_))));
    }

    #[test]
    fn raw_constructor_validates() {
        assert!(CscMatrix::new(2, 1, vec![0, 2], vec![1, 0], vec![1.0, 2.0]).is_err());
        assert!(CscMatrix::new(2, 1, vec![0, 2], vec![0, 0], vec![1.0, 2.0]).is_err());
        assert!(CscMatrix::new(2, 1, vec![0, 1], vec![0], vec![1.0]).is_ok());
    }

    #[test]
    fn spmv_small_cases() {
        assert_eq!(diag(&[1.0, 2.0]).spmv(&[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
        assert_eq!(
            CscMatrix::zeros(2, 3).spmv(&[1.0, 2.0, 3.0]).unwrap(),
            vec![0.0, 0.0]
        );
        assert!(diag(&[1.0]).spmv(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn spmv_transpose_small_cases() {
        assert_eq!(
            diag(&[1.0, 2.0]).spmv_transpose(&[3.0, 4.0]).unwrap(),
            vec![3.0, 8.0]
        );
        let mut t = Triplets::new(2, 2);
        t.push(0, 1, 1.0);
        let a = CscMatrix::from_triplets(&t).unwrap();
        assert_eq!(a.spmv_transpose(&[5.0, 0.0]).unwrap(), vec![0.0, 5.0]);
        assert!(a.spmv_transpose(&[1.0]).is_err());
    }

    #[test]
    fn sym_spmv_small_cases() {
        let mut t = Triplets::new(1, 1);
        t.push(0, 0, 2.0);
        let k = SymLowerMatrix::from_triplets(&t).unwrap();
        assert_eq!(k.sym_spmv(&[3.0]).unwrap(), vec![6.0]);

        let mut t = Triplets::new(2, 2);
        t.push(1, 0, 1.0);
        let k = SymLowerMatrix::from_triplets(&t).unwrap();
        assert_eq!(k.sym_spmv(&[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        assert!(k.sym_spmv(&[1.0]).is_err());
    }

    #[test]
    fn sym_lower_rejects_upper_entries() {
        let a = CscMatrix::new(2, 2, vec![0, 0, 1], vec![0], vec![1.0]).unwrap();
        assert!(SymLowerMatrix::new(a).is_err());
    }

    #[test]
    fn permute_identity_and_swap() {
        let k = SymLowerMatrix::new(diag(&[1.0, 2.0])).unwrap();
        assert_eq!(k.sym_permute(&Permutation::identity(2)).unwrap(), k);
        let swap = Permutation::from_new_of_old(vec![1, 0]).unwrap();
        let s = k.sym_permute(&swap).unwrap();
        assert_eq!(s.storage().values(), &[2.0, 1.0]);
        assert!(k.sym_permute(&Permutation::identity(3)).is_err());
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::from_new_of_old(vec![0, 0]).is_err());
        assert!(Permutation::from_new_of_old(vec![0, 2]).is_err());
        assert!(Permutation::from_order(&[1, 1]).is_err());
        let p = Permutation::from_order(&[2, 0, 1]).unwrap();
        assert_eq!(p.new_of_old(), &[1, 2, 0]);
        assert_eq!(p.inverse().inverse(), p);
        let v = [10.0, 20.0, 30.0];
        assert_eq!(p.apply_inverse(&p.apply(&v)), v.to_vec());
    }

    #[test]
    fn transpose_matches_get() {
        let mut t = Triplets::new(2, 3);
        t.push(0, 2, 1.5);
        t.push(1, 0, -2.0);
        t.push(1, 2, 4.0);
        let a = CscMatrix::from_triplets(&t).unwrap();
        let at = a.transpose();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), at.get(j, i));
            }
        }
    }
}
