//! Lowest-order Raviart–Thomas / P0 operators on a tetrahedral mesh.
//!
//! Flux unknowns are total fluxes through faces in their global orientation, so the
//! basis function of face `f` restricted to a tet `T` is `σ (x − x_i) / (3|T|)`, where
//! `x_i` is the vertex opposite `f` and `σ = ±1` the orientation of `f` relative to `T`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{tet_quadrature_deg2, triangle_midpoint_rule, Vec3};
use crate::mesh3d::{BoundaryKind, TetMesh};
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, TripletMatrix};

/// Degree-of-freedom layout of the 3D unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofLayout3D {
    pub n_faces: usize,
    pub n_tets: usize,
    /// Neumann faces in multiplier order (increasing face index).
    pub neumann_faces: Vec<usize>,
}

impl DofLayout3D {
    pub fn new<T: Real>(mesh: &TetMesh<T>) -> Self {
        DofLayout3D {
            n_faces: mesh.n_faces(),
            n_tets: mesh.n_tets(),
            neumann_faces: mesh.neumann_faces(),
        }
    }

    pub fn n_gamma(&self) -> usize {
        self.neumann_faces.len()
    }
}

/// Orientation sign of each local face of tet `t`.
fn local_signs<T: Real>(mesh: &TetMesh<T>, t: usize) -> [T; 4] {
    mesh.tet_faces(t).map(|f| {
        if mesh.face_sign(f, t) > 0 {
            T::one()
        } else {
            -T::one()
        }
    })
}

/// Value of the local basis function of local face `i` (unit outward flux) at `x`.
fn local_basis<T: Real>(p: &[Vec3<T>; 4], vol: T, i: usize, x: &Vec3<T>) -> Vec3<T> {
    (*x - p[i]).scale(T::one() / (T::lit(3.0) * vol))
}

/// Element flux mass matrix `∫_T ε⁻¹ φ_i·φ_j` for outward-normalized local basis functions.
pub fn local_flux_mass<T: Real, F>(p: &[Vec3<T>; 4], eps: &F) -> Result<[[T; 4]; 4]>
where
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let vol = crate::geometry::signed_volume(&p[0], &p[1], &p[2], &p[3]);
    let mut m = [[T::zero(); 4]; 4];
    for (lam, w) in tet_quadrature_deg2::<T>() {
        let x = p[0].scale(lam[0]) + p[1].scale(lam[1]) + p[2].scale(lam[2]) + p[3].scale(lam[3]);
        let e = eps(&x);
        if !(e > T::zero()) || !e.is_finite() {
            return Err(Error::Coefficient(format!(
                "permittivity {e} at {:?} is not positive",
                x.to_f64()
            )));
        }
        let phi: [Vec3<T>; 4] = std::array::from_fn(|i| local_basis(p, vol, i, &x));
        let s = w * vol / e;
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += s * phi[i].dot(&phi[j]);
            }
        }
    }
    Ok(m)
}

/// Flux mass matrix `A_s` (n_F × n_F), symmetric positive definite.
pub fn assemble_flux_mass<T, F>(mesh: &TetMesh<T>, eps_s: &F) -> Result<CsrMatrix<T>>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + Sync + ?Sized,
{
    let locals: Vec<Result<[[T; 4]; 4]>> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| local_flux_mass(&mesh.tet_points(t), eps_s))
        .collect();
    let nf = mesh.n_faces();
    let mut trip = TripletMatrix::with_capacity(nf, nf, 16 * mesh.n_tets());
    for (t, m) in locals.into_iter().enumerate() {
        let m = m?;
        let faces = mesh.tet_faces(t);
        let s = local_signs(mesh, t);
        for i in 0..4 {
            for j in 0..4 {
                trip.push(faces[i], faces[j], s[i] * s[j] * m[i][j]);
            }
        }
    }
    Ok(trip.to_csr())
}

/// Diagonal of `A_s`, computed face by face without forming the matrix.
pub fn flux_mass_diagonal<T, F>(mesh: &TetMesh<T>, eps_s: &F) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + Sync + ?Sized,
{
    let mut d = vec![T::zero(); mesh.n_faces()];
    for t in 0..mesh.n_tets() {
        let m = local_flux_mass(&mesh.tet_points(t), eps_s)?;
        for (i, f) in mesh.tet_faces(t).into_iter().enumerate() {
            d[f] += m[i][i];
        }
    }
    Ok(d)
}

/// Divergence matrix `B` (n_T × n_F): `B[T, f] = −σ_{f,T}`.
pub fn assemble_divergence<T: Real>(mesh: &TetMesh<T>) -> CsrMatrix<T> {
    let mut trip = TripletMatrix::with_capacity(mesh.n_tets(), mesh.n_faces(), 4 * mesh.n_tets());
    for t in 0..mesh.n_tets() {
        let s = local_signs(mesh, t);
        for (i, f) in mesh.tet_faces(t).into_iter().enumerate() {
            trip.push(t, f, -s[i]);
        }
    }
    trip.to_csr()
}

/// Neumann multiplier matrix `L` (n_Γ × n_F): a single +1 per row at its face.
pub fn assemble_neumann_multiplier<T: Real>(
    mesh: &TetMesh<T>,
    layout: &DofLayout3D,
) -> CsrMatrix<T> {
    let mut trip = TripletMatrix::with_capacity(layout.n_gamma(), mesh.n_faces(), layout.n_gamma());
    for (j, &f) in layout.neumann_faces.iter().enumerate() {
        trip.push(j, f, T::one());
    }
    trip.to_csr()
}

/// Mean of `g` over face `f` with the edge-midpoint rule.
pub fn face_mean<T, F>(mesh: &TetMesh<T>, f: usize, g: &F) -> T
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let p = mesh.face_points(f);
    triangle_midpoint_rule::<T>()
        .iter()
        .map(|&(l, w)| w * g(&(p[0].scale(l[0]) + p[1].scale(l[1]) + p[2].scale(l[2]))))
        .sum()
}

/// Dirichlet load `F_D` (length n_F): `−mean_F(Φ̄)` on Dirichlet faces, zero elsewhere.
pub fn assemble_rhs_dirichlet<T, F>(mesh: &TetMesh<T>, phi_bar: &F) -> Vec<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    let mut out = vec![T::zero(); mesh.n_faces()];
    for f in mesh.boundary_faces() {
        if mesh.boundary_kind(f) == Some(BoundaryKind::Dirichlet) {
            out[f] = -face_mean(mesh, f, phi_bar);
        }
    }
    out
}

/// Neumann data `F_N` (length n_Γ): `∫_F ν` for each Neumann face.
pub fn assemble_rhs_neumann<T, F>(mesh: &TetMesh<T>, layout: &DofLayout3D, nu: &F) -> Vec<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    layout
        .neumann_faces
        .iter()
        .map(|&f| face_mean(mesh, f, nu) * mesh.face_area(f))
        .collect()
}

/// Evaluates the RT0 field with face fluxes `d` inside tet `t` at `x`.
pub fn rt0_value<T: Real>(mesh: &TetMesh<T>, d: &[T], t: usize, x: &Vec3<T>) -> Vec3<T> {
    let p = mesh.tet_points(t);
    let vol = mesh.tet_volume(t);
    let s = local_signs(mesh, t);
    let mut v = Vec3::zero();
    for (i, f) in mesh.tet_faces(t).into_iter().enumerate() {
        v += local_basis(&p, vol, i, x).scale(s[i] * d[f]);
    }
    v
}

/// Face fluxes `∫_F v·n_F` of a vector field (edge-midpoint rule), i.e. its RT0 interpolant.
pub fn rt0_interpolate<T, F>(mesh: &TetMesh<T>, v: &F) -> Vec<T>
where
    T: Real,
    F: Fn(&Vec3<T>) -> Vec3<T> + ?Sized,
{
    (0..mesh.n_faces())
        .map(|f| {
            let n = mesh.face_area_normal(f);
            face_mean(mesh, f, &|x: &Vec3<T>| v(x).dot(&n))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_has_unit_flux() {
        let p = [
            Vec3::new(0.1, 0.0, 0.0),
            Vec3::new(1.0, 0.2, 0.0),
            Vec3::new(0.0, 1.0, 0.3),
            Vec3::new(0.2, 0.1, 1.0),
        ];
        let mesh = TetMesh::new(p.to_vec(), vec![[0, 1, 2, 3]]).unwrap();
        for f in 0..4 {
            let mut d = vec![0.0; 4];
            d[f] = 1.0;
            let flux: Vec<f64> =
                rt0_interpolate(&mesh, &|x: &Vec3<f64>| rt0_value(&mesh, &d, 0, x));
            for (g, fl) in flux.iter().enumerate() {
                let expect = if g == f { 1.0 } else { 0.0 };
                assert!((fl - expect).abs() < 1e-13, "face {f} -> {g}: {fl}");
            }
        }
    }
}
