//! Global block system, block preconditioner and restarted GMRES.
//!
//! Unknowns are ordered `(D_s, Φ_s, Φ_Λ, λ_N, λ_D)`:
//!
//! ```text
//! | A_s  Bᵀ    0      Lᵀ  0    |
//! | B    C_ss  C_Λsᵀ  0   0    |
//! | 0    C_Λs  A_Λ    0   L_Dᵀ |
//! | L    0     0      0   0    |
//! | 0    0     L_D    0   0    |
//! ```

mod gmres;
mod precond;

pub use gmres::{gmres, GmresOptions};
pub use precond::{
    build_preconditioner, AsInverse, BlockPreconditioner, Identity, PrecondKind, Preconditioner,
    PreconditionerOptions,
};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, TripletMatrix};

/// Sizes of the five unknown blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockDims {
    pub n_f: usize,
    pub n_t: usize,
    pub n_l: usize,
    pub n_g: usize,
    pub n_d: usize,
}

impl BlockDims {
    pub fn total(&self) -> usize {
        self.n_f + self.n_t + self.n_l + self.n_g + self.n_d
    }

    /// Start offsets of the five blocks.
    pub fn offsets(&self) -> [usize; 5] {
        let a = self.n_f;
        let b = a + self.n_t;
        let c = b + self.n_l;
        let d = c + self.n_g;
        [0, a, b, c, d]
    }
}

/// The seven nonzero blocks as stored (signs included).
#[derive(Debug, Clone)]
pub struct Blocks<T> {
    pub a_s: CsrMatrix<T>,
    pub b: CsrMatrix<T>,
    pub c_ss: CsrMatrix<T>,
    pub c_ls: CsrMatrix<T>,
    /// `−stiffness − reaction`.
    pub a_lambda: CsrMatrix<T>,
    pub l: CsrMatrix<T>,
    pub l_d: CsrMatrix<T>,
}

/// Right-hand side blocks.
#[derive(Debug, Clone)]
pub struct BlockRhs<T> {
    pub f_d: Vec<T>,
    pub g: Vec<T>,
    /// Graph row right-hand side, as it enters the (negated) graph equation.
    pub f: Vec<T>,
    pub f_n: Vec<T>,
    pub f_dl: Vec<T>,
}

/// Assembled saddle-point system.
#[derive(Debug, Clone)]
pub struct BlockSystem<T> {
    pub blocks: Blocks<T>,
    pub rhs: BlockRhs<T>,
    pub dims: BlockDims,
    pub matrix: CsrMatrix<T>,
    pub rhs_vec: Vec<T>,
}

fn check(name: &str, m: &CsrMatrix<impl Real>, rows: usize, cols: usize) -> Result<()> {
    if (m.nrows(), m.ncols()) != (rows, cols) {
        return Err(Error::Assembly(format!(
            "block {name} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_vec<T>(name: &str, v: &[T], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Assembly(format!(
            "right-hand side {name} has length {}, expected {n}",
            v.len()
        )));
    }
    Ok(())
}

/// Places the blocks into one sparse matrix and verifies its symmetry.
pub fn assemble_global<T: Real>(blocks: Blocks<T>, rhs: BlockRhs<T>) -> Result<BlockSystem<T>> {
    let dims = BlockDims {
        n_f: blocks.a_s.nrows(),
        n_t: blocks.b.nrows(),
        n_l: blocks.a_lambda.nrows(),
        n_g: blocks.l.nrows(),
        n_d: blocks.l_d.nrows(),
    };
    let BlockDims {
        n_f,
        n_t,
        n_l,
        n_g,
        n_d,
    } = dims;
    check("A_s", &blocks.a_s, n_f, n_f)?;
    check("B", &blocks.b, n_t, n_f)?;
    check("C_ss", &blocks.c_ss, n_t, n_t)?;
    check("C_Ls", &blocks.c_ls, n_l, n_t)?;
    check("A_Lambda", &blocks.a_lambda, n_l, n_l)?;
    check("L", &blocks.l, n_g, n_f)?;
    check("L_D", &blocks.l_d, n_d, n_l)?;
    check_vec("F_D", &rhs.f_d, n_f)?;
    check_vec("G", &rhs.g, n_t)?;
    check_vec("F", &rhs.f, n_l)?;
    check_vec("F_N", &rhs.f_n, n_g)?;
    check_vec("F_D,Lambda", &rhs.f_dl, n_d)?;

    let [o_f, o_t, o_l, o_g, o_d] = dims.offsets();
    let n = dims.total();
    let nnz = blocks.a_s.nnz()
        + 2 * blocks.b.nnz()
        + blocks.c_ss.nnz()
        + 2 * blocks.c_ls.nnz()
        + blocks.a_lambda.nnz()
        + 2 * blocks.l.nnz()
        + 2 * blocks.l_d.nnz();
    let mut t = TripletMatrix::with_capacity(n, n, nnz);
    let one = T::one();
    t.push_block(&blocks.a_s, o_f, o_f, one);
    t.push_block(&blocks.b, o_t, o_f, one);
    t.push_block(&blocks.b.transpose(), o_f, o_t, one);
    t.push_block(&blocks.c_ss, o_t, o_t, one);
    t.push_block(&blocks.c_ls, o_l, o_t, one);
    t.push_block(&blocks.c_ls.transpose(), o_t, o_l, one);
    t.push_block(&blocks.a_lambda, o_l, o_l, one);
    t.push_block(&blocks.l, o_g, o_f, one);
    t.push_block(&blocks.l.transpose(), o_f, o_g, one);
    t.push_block(&blocks.l_d, o_d, o_l, one);
    t.push_block(&blocks.l_d.transpose(), o_l, o_d, one);
    let matrix = t.to_csr();

    let asym = matrix.asymmetry().unwrap_or(T::zero());
    let scale = matrix.max_abs();
    if asym > T::lit(1e-12) * scale {
        return Err(Error::Assembly(format!(
            "global matrix is not symmetric: max |M - Mt| = {asym:e}, max |M| = {scale:e}"
        )));
    }

    let mut rhs_vec = Vec::with_capacity(n);
    rhs_vec.extend_from_slice(&rhs.f_d);
    rhs_vec.extend_from_slice(&rhs.g);
    rhs_vec.extend_from_slice(&rhs.f);
    rhs_vec.extend_from_slice(&rhs.f_n);
    rhs_vec.extend_from_slice(&rhs.f_dl);
    Ok(BlockSystem {
        blocks,
        rhs,
        dims,
        matrix,
        rhs_vec,
    })
}

impl<T: Real> BlockSystem<T> {
    /// Relative asymmetry `max|M − Mᵀ| / max|M|`.
    pub fn relative_asymmetry(&self) -> T {
        let s = self.matrix.max_abs();
        if s == T::zero() {
            return T::zero();
        }
        self.matrix.asymmetry().unwrap_or(T::zero()) / s
    }

    /// `‖b − M x‖ / ‖b‖` (or `‖M x‖` when `b = 0`).
    pub fn relative_residual(&self, x: &[T]) -> T {
        let mx = self.matrix.mul_vec(x);
        let r: Vec<T> = self.rhs_vec.iter().zip(&mx).map(|(b, m)| *b - *m).collect();
        let nb = crate::sparse::norm2(&self.rhs_vec);
        let nr = crate::sparse::norm2(&r);
        if nb > T::zero() {
            nr / nb
        } else {
            nr
        }
    }
}

/// Solution blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub d: Vec<T>,
    pub phi_s: Vec<T>,
    pub phi_lambda: Vec<T>,
    pub lambda_n: Vec<T>,
    pub lambda_d: Vec<T>,
}

/// Splits a global vector into its blocks.
pub fn extract_solution<T: Real>(sys: &BlockSystem<T>, x: &[T]) -> Result<Solution<T>> {
    if x.len() != sys.dims.total() {
        return Err(Error::Dimension(format!(
            "solution vector has length {}, system has {} unknowns",
            x.len(),
            sys.dims.total()
        )));
    }
    let [o_f, o_t, o_l, o_g, o_d] = sys.dims.offsets();
    Ok(Solution {
        d: x[o_f..o_t].to_vec(),
        phi_s: x[o_t..o_l].to_vec(),
        phi_lambda: x[o_l..o_g].to_vec(),
        lambda_n: x[o_g..o_d].to_vec(),
        lambda_d: x[o_d..].to_vec(),
    })
}

impl<T: Real> Solution<T> {
    /// `max_j |(L D)_j − F_N,j|`: how well the Neumann flux condition holds.
    pub fn neumann_residual(&self, sys: &BlockSystem<T>) -> T {
        sys.blocks
            .l
            .mul_vec(&self.d)
            .iter()
            .zip(&sys.rhs.f_n)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub restarts: usize,
    /// True relative residual `‖b − M x‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
    pub stagnated: bool,
    pub wall_time_s: f64,
    pub setup_time_s: f64,
    /// Estimated relative residual after every iteration.
    pub history: Vec<f64>,
}
