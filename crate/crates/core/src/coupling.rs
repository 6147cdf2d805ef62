//! 3D–1D exchange through averages over circles around the graph.
//!
//! Every 1D quadrature point carries a stencil: the cell weights of the average of a
//! P0 field over the circle of radius R normal to the graph. The same stencils feed
//! `C_Λs`, `C_ss` and `G`, which keeps the block system symmetric.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{gauss_legendre_unit, Vec3};
use crate::graph1d::GraphMesh;
use crate::mesh3d::TetMesh;
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, TripletMatrix};

/// Sampling parameters of the circle average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingOptions {
    /// Samples per circle.
    pub n_circle: usize,
    /// Gauss points per graph interval.
    pub n_quad: usize,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        CouplingOptions {
            n_circle: 8,
            n_quad: 2,
        }
    }
}

/// Circle average at one 1D quadrature point.
#[derive(Debug, Clone)]
pub struct AverageStencil<T> {
    pub edge: usize,
    /// Quadrature point on the graph axis.
    pub point: Vec3<T>,
    /// 1D quadrature weight (includes the interval length).
    pub weight: T,
    /// Graph dofs of the interval with their hat-function values at `point`.
    pub psi: [(usize, T); 2],
    pub radius: T,
    /// Circle samples that landed inside the mesh.
    pub kept: usize,
    /// Cell weights, summing to one, sorted by tet index.
    pub cells: Vec<(usize, T)>,
}

impl<T: Real> AverageStencil<T> {
    /// Average of the cellwise field `phi` over the circle.
    pub fn apply(&self, phi: &[T]) -> T {
        self.cells.iter().map(|&(t, w)| w * phi[t]).sum()
    }
}

/// Builds one stencil per graph quadrature point.
pub fn build_average_stencils<T: Real>(
    mesh: &TetMesh<T>,
    gm: &GraphMesh<T>,
    opts: &CouplingOptions,
) -> Result<Vec<AverageStencil<T>>> {
    if opts.n_circle < 4 {
        return Err(Error::InvalidParameter(format!(
            "circle sample count {} is below 4",
            opts.n_circle
        )));
    }
    if opts.n_quad == 0 {
        return Err(Error::InvalidParameter(
            "at least one quadrature point per interval is required".into(),
        ));
    }
    let rule = gauss_legendre_unit::<T>(opts.n_quad);
    let segments: Vec<_> = gm.segments().collect();
    let net = gm.network();
    let nc = opts.n_circle;
    let angles: Vec<(T, T)> = (0..nc)
        .map(|m| {
            let a = T::lit(2.0) * T::PI() * (T::from_count(m) + T::lit(0.5)) / T::from_count(nc);
            (a.cos(), a.sin())
        })
        .collect();
    let per_segment: Vec<Result<Vec<AverageStencil<T>>>> = segments
        .par_iter()
        .map(|seg| {
            let (e1, e2) = net.tangent(seg.edge).orthonormal_frame();
            rule.iter()
                .map(|&(t, w)| {
                    let x = seg.start.lerp(&seg.end, t);
                    let axis = mesh
                        .locate_point(&x)
                        .ok_or_else(|| Error::CouplingGeometry {
                            edge: seg.edge,
                            msg: format!("graph point {:?} lies outside the mesh", x.to_f64()),
                        })?;
                    let mut hits: Vec<usize> = angles
                        .iter()
                        .filter_map(|&(c, s)| {
                            mesh.locate_point(&(x + (e1.scale(c) + e2.scale(s)).scale(seg.radius)))
                        })
                        .collect();
                    let kept = hits.len();
                    if hits.is_empty() {
                        hits.push(axis);
                    }
                    hits.sort_unstable();
                    let share = T::one() / T::from_count(hits.len());
                    let mut cells: Vec<(usize, T)> = Vec::new();
                    for h in hits {
                        match cells.last_mut() {
                            Some((c, v)) if *c == h => *v += share,
                            _ => cells.push((h, share)),
                        }
                    }
                    Ok(AverageStencil {
                        edge: seg.edge,
                        point: x,
                        weight: w * seg.length,
                        psi: [(seg.dofs[0], T::one() - t), (seg.dofs[1], t)],
                        radius: seg.radius,
                        kept,
                        cells,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(segments.len() * opts.n_quad);
    for s in per_segment {
        out.extend(s?);
    }
    let partial = out.iter().filter(|s| s.kept < nc).count();
    if partial > 0 {
        log::warn!(
            "{partial} of {} circle averages lost samples outside the mesh",
            out.len()
        );
    }
    Ok(out)
}

/// Cross coupling `C_Λs[i, j] = 4π Σ_q W_q ε_g(x_q) ψ_i(x_q) w_qj` (n_Λ × n_T).
pub fn assemble_coupling_cross<T, F>(
    mesh: &TetMesh<T>,
    gm: &GraphMesh<T>,
    stencils: &[AverageStencil<T>],
    eps_g: &F,
) -> CsrMatrix<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let four_pi = T::lit(4.0) * T::PI();
    let nnz: usize = stencils.iter().map(|s| 2 * s.cells.len()).sum();
    let mut trip = TripletMatrix::with_capacity(gm.n_dofs(), mesh.n_tets(), nnz);
    for s in stencils {
        let c = four_pi * s.weight * eps_g(&s.point);
        for &(dof, psi) in &s.psi {
            for &(t, w) in &s.cells {
                trip.push(dof, t, c * psi * w);
            }
        }
    }
    trip.to_csr()
}

/// Self coupling, stored with its sign: `C_ss[j, k] = −4π Σ_q W_q ε_g(x_q) w_qj w_qk`.
pub fn assemble_coupling_self<T, F>(
    mesh: &TetMesh<T>,
    stencils: &[AverageStencil<T>],
    eps_g: &F,
) -> CsrMatrix<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let four_pi = T::lit(4.0) * T::PI();
    let nnz: usize = stencils.iter().map(|s| s.cells.len() * s.cells.len()).sum();
    let n = mesh.n_tets();
    let mut trip = TripletMatrix::with_capacity(n, n, nnz);
    for s in stencils {
        let c = -four_pi * s.weight * eps_g(&s.point);
        for &(a, wa) in &s.cells {
            for &(b, wb) in &s.cells {
                trip.push(a, b, c * wa * wb);
            }
        }
    }
    trip.to_csr()
}

/// Line source `G_j = 2π Σ_q W_q R g(x_q) w_qj` (length n_T).
pub fn assemble_line_rhs<T, F>(mesh: &TetMesh<T>, stencils: &[AverageStencil<T>], g: &F) -> Vec<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let two_pi = T::lit(2.0) * T::PI();
    let mut out = vec![T::zero(); mesh.n_tets()];
    for s in stencils {
        let c = two_pi * s.radius * s.weight * g(&s.point);
        for &(t, w) in &s.cells {
            out[t] += c * w;
        }
    }
    out
}

/// Circle averages `Φ̂_s` of a cellwise field at every stencil.
pub fn circle_averages<T: Real>(stencils: &[AverageStencil<T>], phi: &[T]) -> Vec<T> {
    stencils.iter().map(|s| s.apply(phi)).collect()
}
