//! Compressed sparse row storage, triplet assembly and a sparse LDLᵀ factorization.

mod ldl;

use std::io::Write;

use rayon::prelude::*;

use crate::scalar::Real;

pub use ldl::SparseLdl;

/// Unordered `(row, col, value)` triplets; duplicates are summed on conversion.
#[derive(Debug, Clone)]
pub struct TripletMatrix<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> TripletMatrix<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletMatrix {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletMatrix {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.nrows && j < self.ncols, "({i},{j}) out of bounds");
        self.entries.push((i, j, v));
    }

    /// Appends every entry of `m` shifted by `(row_off, col_off)`, scaled by `s`.
    pub fn push_block(&mut self, m: &CsrMatrix<T>, row_off: usize, col_off: usize, s: T) {
        for (i, j, v) in m.iter() {
            self.push(i + row_off, j + col_off, v * s);
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn to_csr(&self) -> CsrMatrix<T> {
        let mut counts = vec![0usize; self.nrows + 1];
        for &(i, _, _) in &self.entries {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; self.entries.len()];
        let mut vals = vec![T::zero(); self.entries.len()];
        let mut next = counts.clone();
        for &(i, j, v) in &self.entries {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }
        // sort each row and merge duplicates; summation order follows insertion order
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut out_cols = Vec::with_capacity(cols.len());
        let mut out_vals = Vec::with_capacity(cols.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, usize)> = Vec::new();
        for i in 0..self.nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], p)));
            scratch.sort_unstable();
            let mut k = 0;
            while k < scratch.len() {
                let c = scratch[k].0;
                let mut acc = T::zero();
                while k < scratch.len() && scratch[k].0 == c {
                    acc += vals[scratch[k].1];
                    k += 1;
                }
                out_cols.push(c);
                out_vals.push(acc);
            }
            row_ptr.push(out_cols.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx: out_cols,
            values: out_vals,
        }
    }
}

/// Sparse matrix in compressed sparse row format with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::identity(d.len());
        m.values.copy_from_slice(d);
        m
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut t = TripletMatrix::new(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != T::zero() {
                    t.push(i, j, v);
                }
            }
        }
        t.to_csr()
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
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(p) => v[p],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// `y = A x`, rows in parallel.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols, "matvec: x length");
        assert_eq!(y.len(), self.nrows, "matvec: y length");
        let rp = &self.row_ptr;
        let ci = &self.col_idx;
        let va = &self.values;
        y.par_iter_mut()
            .with_min_len(4096)
            .enumerate()
            .for_each(|(i, yi)| {
                let mut acc = T::zero();
                for p in rp[i]..rp[i + 1] {
                    acc += va[p] * x[ci[p]];
                }
                *yi = acc;
            });
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = Aᵀ x`.
    pub fn mul_transpose_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![T::zero(); self.ncols];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                y[j] += a * x[i];
            }
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix<T> {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = a;
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    pub fn scaled(&self, s: T) -> CsrMatrix<T> {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// Entrywise `self + s * other` (same shape).
    pub fn add_scaled(&self, other: &CsrMatrix<T>, s: T) -> CsrMatrix<T> {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = TripletMatrix::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        t.push_block(self, 0, 0, T::one());
        t.push_block(other, 0, 0, s);
        t.to_csr()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |A - Aᵀ|` over all entries; `None` when not square.
    pub fn asymmetry(&self) -> Option<T> {
        if self.nrows != self.ncols {
            return None;
        }
        let t = self.transpose();
        let mut worst = T::zero();
        for i in 0..self.nrows {
            let (c1, v1) = self.row(i);
            let (c2, v2) = t.row(i);
            let (mut a, mut b) = (0, 0);
            while a < c1.len() || b < c2.len() {
                let d = if b >= c2.len() || (a < c1.len() && c1[a] < c2[b]) {
                    a += 1;
                    v1[a - 1]
                } else if a >= c1.len() || c2[b] < c1[a] {
                    b += 1;
                    -v2[b - 1]
                } else {
                    a += 1;
                    b += 1;
                    v1[a - 1] - v2[b - 1]
                };
                worst = worst.max(d.abs());
            }
        }
        Some(worst)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            d[i][j] = v;
        }
        d
    }

    /// Symmetric permutation `P A Pᵀ` where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> CsrMatrix<T> {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut t = TripletMatrix::with_capacity(n, n, self.nnz());
        for (i, j, v) in self.iter() {
            t.push(inv[i], inv[j], v);
        }
        t.to_csr()
    }

    /// Writes the matrix in Matrix Market coordinate format.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Euclidean inner product, accumulated sequentially for reproducibility.
#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

#[inline]
pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix<f64> {
        CsrMatrix::from_dense(&[
            vec![1.0, -1.0, 0.0, -3.0, 0.0],
            vec![-2.0, 5.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 4.0, 6.0, 4.0],
            vec![-4.0, 0.0, 2.0, 7.0, 0.0],
            vec![0.0, 8.0, 0.0, 0.0, -5.0],
        ])
    }

    #[test]
    fn triplets_merge_duplicates() {
        let mut t = TripletMatrix::new(2, 2);
        t.push(1, 0, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 0, 3.0);
        let m = t.to_csr();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn matvec_and_transpose() {
        let a = sample();
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(a.mul_vec(&x), vec![-13.0, 8.0, 56.0, 30.0, -9.0]);
        let at = a.transpose();
        assert_eq!(at.mul_vec(&x), a.mul_transpose_vec(&x));
        assert_eq!(at.transpose(), a);
        assert_eq!(a.asymmetry(), Some(8.0));
    }

    #[test]
    fn permutation_roundtrip() {
        let a = sample();
        let perm = [3, 0, 4, 1, 2];
        let p = a.permute_symmetric(&perm);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(p.get(i, j), a.get(perm[i], perm[j]));
            }
        }
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        CsrMatrix::<f64>::identity(2)
            .write_matrix_market(&mut buf)
            .unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 "));
    }
}
