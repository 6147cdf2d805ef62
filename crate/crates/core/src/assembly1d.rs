//! P1 operators on the extended graph.

use crate::geometry::{gauss_legendre_unit, Vec3};
use crate::graph1d::{GraphMesh, GraphSegment};
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, TripletMatrix};

fn cross_section<T: Real>(r: T) -> T {
    T::PI() * r * r
}

fn gauss_points<T: Real>(seg: &GraphSegment<T>) -> impl Iterator<Item = (T, Vec3<T>, T)> + '_ {
    // (local coordinate in [0,1], position, weight including the segment length)
    gauss_legendre_unit::<T>(2)
        .into_iter()
        .map(move |(t, w)| (t, seg.start.lerp(&seg.end, t), w * seg.length))
}

/// Stiffness `πR² ∫ ε_g ψ_i' ψ_j'` (n_Λ × n_Λ), symmetric positive semi-definite.
pub fn assemble_graph_stiffness<T, F>(gm: &GraphMesh<T>, eps_g: &F) -> CsrMatrix<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let n = gm.n_dofs();
    let mut trip = TripletMatrix::with_capacity(n, n, 4 * gm.n_segments());
    for seg in gm.segments() {
        let eps_int: T = gauss_points(&seg).map(|(_, x, w)| w * eps_g(&x)).sum();
        let k = cross_section(seg.radius) * eps_int / (seg.length * seg.length);
        let [a, b] = seg.dofs;
        trip.push(a, a, k);
        trip.push(a, b, -k);
        trip.push(b, a, -k);
        trip.push(b, b, k);
    }
    trip.to_csr()
}

/// Reaction mass `4π ∫ ε_g ψ_i ψ_j` (consistent, or row-lumped when `lumped`).
pub fn assemble_graph_reaction<T, F>(gm: &GraphMesh<T>, eps_g: &F, lumped: bool) -> CsrMatrix<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let n = gm.n_dofs();
    let four_pi = T::lit(4.0) * T::PI();
    let mut trip = TripletMatrix::with_capacity(n, n, 4 * gm.n_segments());
    for seg in gm.segments() {
        let mut m = [[T::zero(); 2]; 2];
        for (t, x, w) in gauss_points(&seg) {
            let psi = [T::one() - t, t];
            let c = four_pi * w * eps_g(&x);
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += c * psi[i] * psi[j];
                }
            }
        }
        if lumped {
            for i in 0..2 {
                trip.push(seg.dofs[i], seg.dofs[i], m[i][0] + m[i][1]);
            }
        } else {
            for i in 0..2 {
                for j in 0..2 {
                    trip.push(seg.dofs[i], seg.dofs[j], m[i][j]);
                }
            }
        }
    }
    trip.to_csr()
}

/// Line source `F_i = ∫ πR² (q/ε₀) ψ_i` (2-point Gauss per interval).
pub fn assemble_graph_source<T, F>(gm: &GraphMesh<T>, q_over_eps0: &F) -> Vec<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let mut out = vec![T::zero(); gm.n_dofs()];
    for seg in gm.segments() {
        let a = cross_section(seg.radius);
        for (t, x, w) in gauss_points(&seg) {
            let q = q_over_eps0(&x);
            out[seg.dofs[0]] += a * w * q * (T::one() - t);
            out[seg.dofs[1]] += a * w * q * t;
        }
    }
    out
}

/// Tip contributions `−factor · πR² g(S)` at every Neumann tip, where the prescribed
/// outward slope is `−factor · g / ε_g`.
pub fn assemble_tip_neumann<T, F>(gm: &GraphMesh<T>, g: &F, factor: T) -> Vec<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let mut out = vec![T::zero(); gm.n_dofs()];
    let net = gm.network();
    for (v, dof, e, _) in gm.tips() {
        let r = net.edges()[e].radius;
        out[dof] -= factor * cross_section(r) * g(&net.nodes()[v]);
    }
    out
}

/// Dirichlet multiplier `L_D` (n_D × n_Λ) with one unit entry per Dirichlet node,
/// and the prescribed values.
pub fn assemble_dirichlet_multiplier<T: Real>(gm: &GraphMesh<T>) -> (CsrMatrix<T>, Vec<T>) {
    let dd = gm.dirichlet_dofs();
    let mut trip = TripletMatrix::with_capacity(dd.len(), gm.n_dofs(), dd.len());
    for (i, &(dof, _)) in dd.iter().enumerate() {
        trip.push(i, dof, T::one());
    }
    (trip.to_csr(), dd.into_iter().map(|(_, v)| v).collect())
}

/// Split representation of the gas potential `Φ_g(s, r) = Φ_Λ(s) + Φ_r(s) r²`,
/// with `Φ_r = −(q/ε₀) / (4 ε_g)` computed from the data.
#[derive(Clone)]
pub struct GasSplitting<T: Real> {
    pub gmesh: GraphMesh<T>,
    pub phi_lambda: Vec<T>,
    q_over_eps0: crate::field::Field<T>,
    eps_g: crate::field::Field<T>,
}

impl<T: Real> GasSplitting<T> {
    pub fn new(
        gmesh: GraphMesh<T>,
        phi_lambda: Vec<T>,
        q_over_eps0: crate::field::Field<T>,
        eps_g: crate::field::Field<T>,
    ) -> Self {
        GasSplitting {
            gmesh,
            phi_lambda,
            q_over_eps0,
            eps_g,
        }
    }

    /// `Φ_r` at a point of the graph.
    pub fn phi_r(&self, x: &Vec3<T>) -> T {
        -(self.q_over_eps0)(x) / (T::lit(4.0) * (self.eps_g)(x))
    }

    /// Radial profile `φ(r) = r²`.
    pub fn profile(r: T) -> T {
        r * r
    }
}

impl<T: Real> std::fmt::Debug for GasSplitting<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GasSplitting")
            .field("n_dofs", &self.phi_lambda.len())
            .finish()
    }
}
