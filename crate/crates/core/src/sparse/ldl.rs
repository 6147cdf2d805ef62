use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::CsrMatrix;

/// Sparse `LDLᵀ` factorization of a symmetric matrix with an AMD fill-reducing ordering.
///
/// No pivoting is performed, so the matrix must be (quasi-)definite; a zero
/// pivot is reported as [`Error::ZeroPivot`] with the permuted column index.
#[derive(Debug, Clone)]
pub struct SparseLdl<T> {
    n: usize,
    // perm[new] = old
    perm: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<T>,
    d: Vec<T>,
}

const NONE: usize = usize::MAX;

impl<T: Real> SparseLdl<T> {
    /// Factorizes `a` (only the pattern of `a + aᵀ` and its lower triangle are read).
    pub fn factorize(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Dimension(format!(
                "LDL needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        let perm = amd_order(a)?;
        Self::factorize_with_ordering(a, perm)
    }

    /// Factorizes `a` using the given ordering (`perm[new] = old`).
    pub fn factorize_with_ordering(a: &CsrMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        let c = a.permute_symmetric(&perm);

        // symbolic: elimination tree and column counts from the strictly lower rows
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let (cols, _) = c.row(k);
            for &j in cols {
                let mut i = j;
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut l_ptr = vec![0usize; n + 1];
        for k in 0..n {
            l_ptr[k + 1] = l_ptr[k] + lnz[k];
        }
        let total = l_ptr[n];
        let mut l_idx = vec![0usize; total];
        let mut l_val = vec![T::zero(); total];
        let mut d = vec![T::zero(); n];

        // numeric, up-looking
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        flag.iter_mut().for_each(|f| *f = NONE);
        lnz.iter_mut().for_each(|l| *l = 0);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let (cols, vals) = c.row(k);
            for (&j, &v) in cols.iter().zip(vals) {
                if j > k {
                    continue;
                }
                y[j] += v;
                let mut len = 0;
                let mut i = j;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = T::zero();
            while top < n {
                let i = pattern[top];
                let yi = y[i];
                y[i] = T::zero();
                let p2 = l_ptr[i] + lnz[i];
                for p in l_ptr[i]..p2 {
                    y[l_idx[p]] -= l_val[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                l_idx[p2] = k;
                l_val[p2] = l_ki;
                lnz[i] += 1;
                top += 1;
            }
            if d[k] == T::zero() || !d[k].is_finite() {
                return Err(Error::ZeroPivot(k));
            }
        }
        Ok(SparseLdl {
            n,
            perm,
            l_ptr,
            l_idx,
            l_val,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries of `L`.
    pub fn factor_nnz(&self) -> usize {
        self.l_idx.len()
    }

    /// Pivots of `D` in the permuted ordering.
    pub fn pivots(&self) -> &[T] {
        &self.d
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n, "LDL solve: rhs length");
        let mut x: Vec<T> = self.perm.iter().map(|&o| b[o]).collect();
        for j in 0..self.n {
            let xj = x[j];
            for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                x[self.l_idx[p]] -= self.l_val[p] * xj;
            }
        }
        for (xj, dj) in x.iter_mut().zip(&self.d) {
            *xj /= *dj;
        }
        for j in (0..self.n).rev() {
            let mut acc = x[j];
            for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                acc -= self.l_val[p] * x[self.l_idx[p]];
            }
            x[j] = acc;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = x[new];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

fn amd_order<T: Real>(a: &CsrMatrix<T>) -> Result<Vec<usize>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // AMD reads a column-compressed pattern; the symmetric pattern is its own transpose.
    let ap: Vec<i64> = a.row_ptr().iter().map(|&p| p as i64).collect();
    let ai: Vec<i64> = a.col_idx().iter().map(|&j| j as i64).collect();
    let control = amd::Control::default();
    let (p, _, _) = amd::order::<i64>(n as i64, &ap, &ai, &control)
        .map_err(|s| Error::InvalidParameter(format!("AMD ordering failed: {s:?}")))?;
    Ok(p.into_iter().map(|v| v as usize).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletMatrix;

    fn laplacian_2d(k: usize) -> CsrMatrix<f64> {
        let n = k * k;
        let mut t = TripletMatrix::new(n, n);
        for i in 0..k {
            for j in 0..k {
                let r = i * k + j;
                t.push(r, r, 4.0);
                if i > 0 {
                    t.push(r, r - k, -1.0);
                }
                if i + 1 < k {
                    t.push(r, r + k, -1.0);
                }
                if j > 0 {
                    t.push(r, r - 1, -1.0);
                }
                if j + 1 < k {
                    t.push(r, r + 1, -1.0);
                }
            }
        }
        t.to_csr()
    }

    #[test]
    fn solves_spd_system() {
        let a = laplacian_2d(12);
        let xs: Vec<f64> = (0..a.nrows()).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&xs);
        let f = SparseLdl::factorize(&a).unwrap();
        let x = f.solve(&b);
        let err = x
            .iter()
            .zip(&xs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "err {err}");
    }

    #[test]
    fn solves_quasidefinite_system() {
        // [-A  B; Bᵀ  C] with A, C SPD has an LDLᵀ for any symmetric ordering
        let a = CsrMatrix::from_dense(&[
            vec![-4.0, 1.0, 1.0, 0.0],
            vec![1.0, -3.0, 0.0, 1.0],
            vec![1.0, 0.0, 2.0, 0.5],
            vec![0.0, 1.0, 0.5, 3.0],
        ]);
        let b: Vec<f64> = vec![1.0, -2.0, 0.5, 4.0];
        let f = SparseLdl::factorize(&a).unwrap();
        let x = f.solve(&b);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let err = SparseLdl::factorize_with_ordering(&a, vec![0, 1]).unwrap_err();
        assert!(matches!(err, Error::ZeroPivot(0)));
    }

    #[test]
    fn empty_matrix() {
        let a = CsrMatrix::<f64>::zeros(0, 0);
        let f = SparseLdl::factorize(&a).unwrap();
        assert_eq!(f.solve(&[]), Vec::<f64>::new());
    }
}
