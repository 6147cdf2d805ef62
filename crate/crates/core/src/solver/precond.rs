//! Nested Schur-complement block-diagonal preconditioner.
//!
//! With `A_s` replaced by `D = diag(A_s)`, the Schur complement of the flux block in
//! the `(Φ_s, Φ_Λ, λ_N)` unknowns is `Σ`; the preconditioner applies
//! `diag(A_s⁻¹, −Σ⁻¹, −(E Σ⁻¹ Eᵀ)⁻¹)` with `E = [0 L_D 0]`. The factorized matrix is
//! `S = −Σ`, which is symmetric positive definite when the problem is well posed.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::{axpy, dot, CsrMatrix, SparseLdl, TripletMatrix};

use super::BlockSystem;

/// Action of an approximate inverse.
pub trait Preconditioner<T>: Sync {
    fn apply(&self, r: &[T], z: &mut [T]);

    /// Whether repeated applications may differ from a fixed linear map (inner iterations).
    fn is_variable(&self) -> bool {
        false
    }

    fn setup_time_s(&self) -> f64 {
        0.0
    }
}

/// No preconditioning.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl<T: Real> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    None,
    Block,
}

/// Realization of `A_s⁻¹` in the first block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsInverse {
    /// `diag(A_s)⁻¹`.
    Lumped,
    /// Jacobi-preconditioned conjugate gradients on `A_s`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreconditionerOptions {
    pub kind: PrecondKind,
    pub a_s_inverse: AsInverse,
    /// Diagonal shift added to `S` before factorization.
    pub shift: f64,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl Default for PreconditionerOptions {
    fn default() -> Self {
        PreconditionerOptions {
            kind: PrecondKind::Block,
            a_s_inverse: AsInverse::Lumped,
            shift: 0.0,
            inner_tol: 1e-12,
            inner_max_iter: 2000,
        }
    }
}

/// Builds the requested preconditioner for `sys`.
pub fn build_preconditioner<T: Real>(
    sys: &BlockSystem<T>,
    opts: &PreconditionerOptions,
) -> Result<Box<dyn Preconditioner<T>>> {
    Ok(match opts.kind {
        PrecondKind::None => Box::new(Identity),
        PrecondKind::Block => Box::new(BlockPreconditioner::new(sys, opts)?),
    })
}

pub struct BlockPreconditioner<T> {
    n_f: usize,
    n_mid: usize,
    n_d: usize,
    a_s: CsrMatrix<T>,
    a_diag: Vec<T>,
    a_s_inverse: AsInverse,
    inner_tol: T,
    inner_max_iter: usize,
    sigma: Option<SparseLdl<T>>,
    /// Cholesky factor (row-major lower triangle) of `E S⁻¹ Eᵀ`.
    dirichlet_chol: Vec<Vec<T>>,
    setup_time_s: f64,
}

impl<T: Real> BlockPreconditioner<T> {
    pub fn new(sys: &BlockSystem<T>, opts: &PreconditionerOptions) -> Result<Self> {
        let start = Instant::now();
        let d = sys.dims;
        let bl = &sys.blocks;
        let a_diag = bl.a_s.diagonal();
        if let Some(f) = a_diag.iter().position(|&v| !(v > T::zero())) {
            return Err(Error::Preconditioner(format!(
                "flux mass diagonal entry {f} is not positive"
            )));
        }
        let n_mid = d.n_t + d.n_l + d.n_g;
        let sigma_mat = schur_matrix(sys, &a_diag, T::lit(opts.shift));
        let sigma = if n_mid > 0 {
            Some(SparseLdl::factorize(&sigma_mat).map_err(|e| {
                Error::Preconditioner(format!(
                    "Schur complement factorization failed ({e}); \
                     a positive shift may regularize it"
                ))
            })?)
        } else {
            None
        };
        let mut dirichlet_chol = Vec::new();
        if d.n_d > 0 {
            let sigma = sigma.as_ref().expect("graph unknowns present");
            // columns of E S⁻¹ Eᵀ from one solve per Dirichlet node
            let rows: Vec<Vec<(usize, T)>> = (0..d.n_d)
                .map(|i| {
                    let (c, v) = bl.l_d.row(i);
                    c.iter().zip(v).map(|(&j, &x)| (d.n_t + j, x)).collect()
                })
                .collect();
            let mut w = vec![vec![T::zero(); d.n_d]; d.n_d];
            for (k, rk) in rows.iter().enumerate() {
                let mut e = vec![T::zero(); n_mid];
                for &(j, x) in rk {
                    e[j] += x;
                }
                let s = sigma.solve(&e);
                for (i, ri) in rows.iter().enumerate() {
                    w[i][k] = ri.iter().map(|&(j, x)| x * s[j]).sum();
                }
            }
            dirichlet_chol = dense_cholesky(&w).ok_or_else(|| {
                Error::Preconditioner(
                    "graph Dirichlet Schur complement is not positive definite".into(),
                )
            })?;
        }
        Ok(BlockPreconditioner {
            n_f: d.n_f,
            n_mid,
            n_d: d.n_d,
            a_s: bl.a_s.clone(),
            a_diag,
            a_s_inverse: opts.a_s_inverse,
            inner_tol: T::lit(opts.inner_tol),
            inner_max_iter: opts.inner_max_iter,
            sigma,
            dirichlet_chol,
            setup_time_s: start.elapsed().as_secs_f64(),
        })
    }

    /// Nonzeros in the factor of `S`.
    pub fn factor_nnz(&self) -> usize {
        self.sigma.as_ref().map_or(0, |s| s.factor_nnz())
    }

    fn apply_flux(&self, r: &[T], z: &mut [T]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.a_diag) {
            *zi = *ri / *di;
        }
        if self.a_s_inverse == AsInverse::Exact {
            jacobi_cg(
                &self.a_s,
                &self.a_diag,
                r,
                z,
                self.inner_tol,
                self.inner_max_iter,
            );
        }
    }
}

impl<T: Real> Preconditioner<T> for BlockPreconditioner<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let (rf, rest) = r.split_at(self.n_f);
        let (rm, rd) = rest.split_at(self.n_mid);
        let (zf, rest) = z.split_at_mut(self.n_f);
        let (zm, zd) = rest.split_at_mut(self.n_mid);
        self.apply_flux(rf, zf);
        if let Some(s) = &self.sigma {
            zm.copy_from_slice(rm);
            s.solve_in_place(zm);
        }
        if self.n_d > 0 {
            zd.copy_from_slice(rd);
            cholesky_solve(&self.dirichlet_chol, zd);
        }
    }

    fn is_variable(&self) -> bool {
        self.a_s_inverse == AsInverse::Exact
    }

    fn setup_time_s(&self) -> f64 {
        self.setup_time_s
    }
}

/// `S = −Σ + shift·I` over `(Φ_s, Φ_Λ, λ_N)` with `A_s⁻¹ ≈ diag(A_s)⁻¹`.
pub(crate) fn schur_matrix<T: Real>(sys: &BlockSystem<T>, a_diag: &[T], shift: T) -> CsrMatrix<T> {
    let d = sys.dims;
    let bl = &sys.blocks;
    let n = d.n_t + d.n_l + d.n_g;
    let (o_l, o_g) = (d.n_t, d.n_t + d.n_l);
    let mut t = TripletMatrix::new(n, n);
    let m1 = -T::one();
    t.push_block(&bl.c_ss, 0, 0, m1);
    t.push_block(&bl.c_ls, o_l, 0, m1);
    t.push_block(&bl.c_ls.transpose(), 0, o_l, m1);
    t.push_block(&bl.a_lambda, o_l, o_l, m1);
    // [B; L] D⁻¹ [B; L]ᵀ, face by face
    let mut per_face: Vec<Vec<(usize, T)>> = vec![Vec::new(); d.n_f];
    for (i, f, v) in bl.b.iter() {
        per_face[f].push((i, v));
    }
    for (j, f, v) in bl.l.iter() {
        per_face[f].push((o_g + j, v));
    }
    for (f, entries) in per_face.iter().enumerate() {
        for &(a, va) in entries {
            for &(b, vb) in entries {
                t.push(a, b, va * vb / a_diag[f]);
            }
        }
    }
    if shift != T::zero() {
        for i in 0..n {
            t.push(i, i, shift);
        }
    }
    t.to_csr()
}

/// Solves `A z = r` by Jacobi-preconditioned conjugate gradients starting from `z`.
fn jacobi_cg<T: Real>(a: &CsrMatrix<T>, diag: &[T], r: &[T], z: &mut [T], tol: T, max_iter: usize) {
    let n = r.len();
    let nb = dot(r, r).sqrt();
    if nb == T::zero() {
        z.iter_mut().for_each(|v| *v = T::zero());
        return;
    }
    let az = a.mul_vec(z);
    let mut res: Vec<T> = r.iter().zip(&az).map(|(b, m)| *b - *m).collect();
    let mut y: Vec<T> = res.iter().zip(diag).map(|(x, d)| *x / *d).collect();
    let mut p = y.clone();
    let mut ry = dot(&res, &y);
    let mut ap = vec![T::zero(); n];
    for _ in 0..max_iter {
        if dot(&res, &res).sqrt() <= tol * nb {
            break;
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = ry / pap;
        axpy(alpha, &p, z);
        axpy(-alpha, &ap, &mut res);
        for ((yi, ri), di) in y.iter_mut().zip(&res).zip(diag) {
            *yi = *ri / *di;
        }
        let ry_new = dot(&res, &y);
        let beta = ry_new / ry;
        ry = ry_new;
        for (pi, yi) in p.iter_mut().zip(&y) {
            *pi = *yi + beta * *pi;
        }
    }
}

fn dense_cholesky<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve<T: Real>(l: &[Vec<T>], x: &mut [T]) {
    let n = x.len();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i][k] * x[k];
        }
        x[i] = s / l[i][i];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_roundtrip() {
        let a = vec![vec![4.0f64, 1.0], vec![1.0, 3.0]];
        let l = dense_cholesky(&a).unwrap();
        let mut x = vec![1.0f64, 2.0];
        cholesky_solve(&l, &mut x);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-15);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-15);
        assert!(dense_cholesky(&[vec![-1.0]]).is_none());
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = CsrMatrix::from_dense(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ]);
        let r = vec![1.0f64, 2.0, 3.0];
        let mut z = vec![0.0; 3];
        jacobi_cg(&a, &a.diagonal(), &r, &mut z, 1e-14, 50);
        let az = a.mul_vec(&z);
        for i in 0..3 {
            assert!((az[i] - r[i]).abs() < 1e-12);
        }
    }
}
