//! Restarted, right-preconditioned GMRES with modified Gram–Schmidt and Givens rotations.
//!
//! When the preconditioner is variable (inner iterations) the preconditioned basis is
//! stored as well, which turns the method into flexible GMRES.

use std::time::Instant;

use crate::scalar::Real;
use crate::sparse::{axpy, dot, norm2, CsrMatrix};

use super::{Preconditioner, SolverReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Relative residual target `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    /// Krylov dimension per cycle.
    pub restart: usize,
    /// Total iteration cap over all cycles.
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 1e-10,
            restart: 200,
            max_iter: 5000,
        }
    }
}

fn residual<T: Real>(a: &CsrMatrix<T>, b: &[T], x: &[T], r: &mut [T]) {
    a.mul_vec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
}

/// Solves `A x = b` starting from `x0` (zero when `None`).
///
/// Returns the best iterate found together with a report; `report.converged` tells
/// whether the tolerance was met on the true residual.
pub fn gmres<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    precond: &dyn Preconditioner<T>,
    opts: &GmresOptions,
) -> (Vec<T>, SolverReport) {
    let start = Instant::now();
    let n = b.len();
    assert_eq!(a.nrows(), n, "gmres: matrix and rhs sizes differ");
    let m = opts.restart.max(1);
    let tol = T::lit(opts.tol);
    let mut x = x0.map_or_else(|| vec![T::zero(); n], |v| v.to_vec());
    let mut report = SolverReport {
        iterations: 0,
        restarts: 0,
        relative_residual: 0.0,
        converged: false,
        stagnated: false,
        wall_time_s: 0.0,
        setup_time_s: precond.setup_time_s(),
        history: Vec::new(),
    };
    let nb = norm2(b);
    if nb == T::zero() || n == 0 {
        x.iter_mut().for_each(|v| *v = T::zero());
        report.converged = true;
        report.wall_time_s = start.elapsed().as_secs_f64();
        return (x, report);
    }
    let flexible = precond.is_variable();
    let mut r = vec![T::zero(); n];
    residual(a, b, &x, &mut r);
    let mut rel = norm2(&r) / nb;
    let mut best = (rel, x.clone());
    let mut w = vec![T::zero(); n];
    let mut zbuf = vec![T::zero(); n];

    while rel > tol && report.iterations < opts.max_iter {
        let beta = rel * nb;
        let mut v: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        let mut z: Vec<Vec<T>> = Vec::new();
        v.push(r.iter().map(|ri| *ri / beta).collect());
        // Hessenberg columns, already rotated
        let mut h: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut cs: Vec<(T, T)> = Vec::with_capacity(m);
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && report.iterations < opts.max_iter {
            precond.apply(&v[k], &mut zbuf);
            a.mul_vec_into(&zbuf, &mut w);
            if flexible {
                z.push(zbuf.clone());
            }
            let mut col = vec![T::zero(); k + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                col[i] = hij;
                axpy(-hij, vi, &mut w);
            }
            let hn = norm2(&w);
            col[k + 1] = hn;
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (p, q) = (col[i], col[i + 1]);
                col[i] = c * p + s * q;
                col[i + 1] = -s * p + c * q;
            }
            let (p, q) = (col[k], col[k + 1]);
            let d = p.hypot(q);
            let (c, s) = if d == T::zero() {
                (T::one(), T::zero())
            } else {
                (p / d, q / d)
            };
            col[k] = d;
            col[k + 1] = T::zero();
            g[k + 1] = -s * g[k];
            g[k] = c * g[k];
            cs.push((c, s));
            h.push(col);
            report.iterations += 1;
            k += 1;
            let est = g[k].abs() / nb;
            report.history.push(est.to_f64_lossy());
            if est <= tol || hn == T::zero() {
                break;
            }
            v.push(w.iter().map(|wi| *wi / hn).collect());
        }
        // back substitution for the k coefficients
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] == T::zero() {
                T::zero()
            } else {
                s / h[i][i]
            };
        }
        if flexible {
            for (j, yj) in y.iter().enumerate() {
                axpy(*yj, &z[j], &mut x);
            }
        } else {
            let mut u = vec![T::zero(); n];
            for (j, yj) in y.iter().enumerate() {
                axpy(*yj, &v[j], &mut u);
            }
            precond.apply(&u, &mut zbuf);
            axpy(T::one(), &zbuf, &mut x);
        }
        residual(a, b, &x, &mut r);
        let new_rel = norm2(&r) / nb;
        if new_rel < best.0 {
            best = (new_rel, x.clone());
        }
        if !(new_rel < rel) {
            // a full cycle without progress
            report.stagnated = true;
            break;
        }
        rel = new_rel;
        if rel > tol && report.iterations < opts.max_iter {
            report.restarts += 1;
        }
    }
    let (best_rel, best_x) = best;
    report.relative_residual = best_rel.to_f64_lossy();
    report.converged = best_rel <= tol;
    report.wall_time_s = start.elapsed().as_secs_f64();
    log::info!(
        "gmres: {} iterations, {} restarts, relative residual {:.3e}{}",
        report.iterations,
        report.restarts,
        report.relative_residual,
        if report.converged {
            ""
        } else {
            " (not converged)"
        }
    );
    (best_x, report)
}
