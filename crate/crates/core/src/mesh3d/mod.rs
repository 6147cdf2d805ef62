//! Tetrahedral meshes of the 3D domain: connectivity, oriented faces, boundary
//! tags and point location.

mod dump;
mod generate;
mod gmsh;
mod locate;

pub use dump::{read_mesh_dump, write_mesh_dump};
pub use generate::{generate_box_mesh, BoxMeshSpec};
pub use gmsh::{load_gmsh, read_gmsh, write_gmsh, GmshOptions};
pub use locate::{locate_brute_force, PointLocator};

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{signed_volume, triangle_area_normal, Vec3};
use crate::scalar::Real;

/// Boundary patch label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Local faces of a tet `(v0, v1, v2, v3)` with outward vertex order; face `i` is opposite vertex `i`.
pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

/// A conforming tetrahedral mesh.
///
/// Face `f` stores its vertices in an order whose right-hand normal points out of
/// the lower-indexed adjacent tet (outward on the boundary).
#[derive(Debug)]
pub struct TetMesh<T> {
    vertices: Vec<Vec3<T>>,
    tets: Vec<[usize; 4]>,
    faces: Vec<[usize; 3]>,
    face_tets: Vec<[(usize, i8); 2]>,
    face_ntets: Vec<u8>,
    tet_faces: Vec<[usize; 4]>,
    tags: Vec<Option<BoundaryKind>>,
    locator: OnceLock<PointLocator<T>>,
}

impl<T: Real> Clone for TetMesh<T> {
    fn clone(&self) -> Self {
        TetMesh {
            vertices: self.vertices.clone(),
            tets: self.tets.clone(),
            faces: self.faces.clone(),
            face_tets: self.face_tets.clone(),
            face_ntets: self.face_ntets.clone(),
            tet_faces: self.tet_faces.clone(),
            tags: self.tags.clone(),
            locator: OnceLock::new(),
        }
    }
}

impl<T: Real> TetMesh<T> {
    /// Builds a mesh from vertices and tets. Negatively oriented tets are flipped;
    /// degenerate tets and non-manifold faces are rejected. All boundary faces start
    /// tagged Dirichlet.
    pub fn new(vertices: Vec<Vec3<T>>, mut tets: Vec<[usize; 4]>) -> Result<Self> {
        let nv = vertices.len();
        for (t, tet) in tets.iter_mut().enumerate() {
            if tet.iter().any(|&v| v >= nv) {
                return Err(Error::Topology(format!(
                    "tet {t} references a missing vertex"
                )));
            }
            let vol = signed_volume(
                &vertices[tet[0]],
                &vertices[tet[1]],
                &vertices[tet[2]],
                &vertices[tet[3]],
            );
            if vol == T::zero() || !vol.is_finite() {
                return Err(Error::InvalidGeometry(format!("tet {t} has zero volume")));
            }
            if vol < T::zero() {
                tet.swap(2, 3);
            }
        }

        let mut lookup: HashMap<[usize; 3], usize> = HashMap::with_capacity(tets.len() * 2 + 4);
        let mut faces = Vec::with_capacity(tets.len() * 2 + 4);
        let mut face_tets = Vec::with_capacity(tets.len() * 2 + 4);
        let mut face_ntets: Vec<u8> = Vec::with_capacity(tets.len() * 2 + 4);
        let mut tet_faces = Vec::with_capacity(tets.len());
        for (t, tet) in tets.iter().enumerate() {
            let mut tf = [0usize; 4];
            for (i, lf) in LOCAL_FACES.iter().enumerate() {
                let oriented = [tet[lf[0]], tet[lf[1]], tet[lf[2]]];
                let mut key = oriented;
                key.sort_unstable();
                match lookup.get(&key) {
                    None => {
                        let f = faces.len();
                        lookup.insert(key, f);
                        faces.push(oriented);
                        face_tets.push([(t, 1i8), (usize::MAX, 0i8)]);
                        face_ntets.push(1);
                        tf[i] = f;
                    }
                    Some(&f) => {
                        if face_ntets[f] >= 2 {
                            return Err(Error::Topology(format!(
                                "face {:?} is shared by more than two tets",
                                key
                            )));
                        }
                        if same_orientation(&faces[f], &oriented) {
                            return Err(Error::Topology(format!(
                                "tets {} and {t} overlap across face {:?}",
                                face_tets[f][0].0, key
                            )));
                        }
                        face_tets[f][1] = (t, -1);
                        face_ntets[f] = 2;
                        tf[i] = f;
                    }
                }
            }
            tet_faces.push(tf);
        }
        let tags = face_ntets
            .iter()
            .map(|&n| {
                if n == 1 {
                    Some(BoundaryKind::Dirichlet)
                } else {
                    None
                }
            })
            .collect();
        Ok(TetMesh {
            vertices,
            tets,
            faces,
            face_tets,
            face_ntets,
            tet_faces,
            tags,
            locator: OnceLock::new(),
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn tet_points(&self, t: usize) -> [Vec3<T>; 4] {
        let tet = &self.tets[t];
        [
            self.vertices[tet[0]],
            self.vertices[tet[1]],
            self.vertices[tet[2]],
            self.vertices[tet[3]],
        ]
    }

    pub fn tet_volume(&self, t: usize) -> T {
        let p = self.tet_points(t);
        signed_volume(&p[0], &p[1], &p[2], &p[3])
    }

    pub fn tet_centroid(&self, t: usize) -> Vec3<T> {
        let p = self.tet_points(t);
        (p[0] + p[1] + p[2] + p[3]).scale(T::lit(0.25))
    }

    pub fn total_volume(&self) -> T {
        (0..self.n_tets()).map(|t| self.tet_volume(t)).sum()
    }

    /// Faces of tet `t`, local face `i` opposite local vertex `i`.
    pub fn tet_faces(&self, t: usize) -> [usize; 4] {
        self.tet_faces[t]
    }

    /// Orientation sign of face `f` relative to tet `t`: +1 if the face normal points out of `t`.
    pub fn face_sign(&self, f: usize, t: usize) -> i8 {
        self.adjacent_tets(f)
            .iter()
            .find(|(tt, _)| *tt == t)
            .map(|&(_, s)| s)
            .unwrap_or(0)
    }

    /// Adjacent tets of face `f` with their orientation signs (1 entry on the boundary, 2 inside).
    pub fn adjacent_tets(&self, f: usize) -> &[(usize, i8)] {
        &self.face_tets[f][..self.face_ntets[f] as usize]
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.face_ntets[f] == 1
    }

    pub fn face_points(&self, f: usize) -> [Vec3<T>; 3] {
        let fc = &self.faces[f];
        [
            self.vertices[fc[0]],
            self.vertices[fc[1]],
            self.vertices[fc[2]],
        ]
    }

    /// Area-weighted normal of face `f` in its stored orientation.
    pub fn face_area_normal(&self, f: usize) -> Vec3<T> {
        let p = self.face_points(f);
        triangle_area_normal(&p[0], &p[1], &p[2])
    }

    pub fn face_area(&self, f: usize) -> T {
        self.face_area_normal(f).norm()
    }

    pub fn face_unit_normal(&self, f: usize) -> Vec3<T> {
        self.face_area_normal(f).normalized()
    }

    pub fn face_centroid(&self, f: usize) -> Vec3<T> {
        let p = self.face_points(f);
        (p[0] + p[1] + p[2]).scale(T::one() / T::lit(3.0))
    }

    pub fn boundary_kind(&self, f: usize) -> Option<BoundaryKind> {
        self.tags[f]
    }

    /// Boundary faces in increasing index order.
    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_faces()).filter(|&f| self.is_boundary_face(f))
    }

    /// Boundary faces carrying `kind`, in increasing index order.
    pub fn faces_with_kind(&self, kind: BoundaryKind) -> Vec<usize> {
        (0..self.n_faces())
            .filter(|&f| self.tags[f] == Some(kind))
            .collect()
    }

    pub fn neumann_faces(&self) -> Vec<usize> {
        self.faces_with_kind(BoundaryKind::Neumann)
    }

    pub fn dirichlet_faces(&self) -> Vec<usize> {
        self.faces_with_kind(BoundaryKind::Dirichlet)
    }

    /// Number of (dirichlet, neumann) boundary faces.
    pub fn boundary_counts(&self) -> (usize, usize) {
        let mut d = 0;
        let mut n = 0;
        for t in self.tags.iter().flatten() {
            match t {
                BoundaryKind::Dirichlet => d += 1,
                BoundaryKind::Neumann => n += 1,
            }
        }
        (d, n)
    }

    /// Re-tags every boundary face with `rule(centroid, unit outward normal)`.
    ///
    /// A rule returning `None` for some face is a classification error naming that face.
    pub fn classify_boundary<F>(mut self, rule: F) -> Result<Self>
    where
        F: Fn(&Vec3<T>, &Vec3<T>) -> Option<BoundaryKind>,
    {
        for f in 0..self.n_faces() {
            if !self.is_boundary_face(f) {
                continue;
            }
            let c = self.face_centroid(f);
            let n = self.face_unit_normal(f);
            match rule(&c, &n) {
                Some(k) => self.tags[f] = Some(k),
                None => {
                    return Err(Error::Classification {
                        face: f,
                        msg: format!("rule gave no tag at centroid {:?}", c.to_f64()),
                    })
                }
            }
        }
        let (d, n) = self.boundary_counts();
        log::info!("boundary classified: {d} dirichlet faces, {n} neumann faces");
        Ok(self)
    }

    /// Sets the tag of boundary face `f` directly.
    pub fn set_boundary_kind(&mut self, f: usize, kind: BoundaryKind) -> Result<()> {
        if f >= self.n_faces() || !self.is_boundary_face(f) {
            return Err(Error::Topology(format!("face {f} is not a boundary face")));
        }
        self.tags[f] = Some(kind);
        Ok(())
    }

    /// Map from sorted vertex triple to face index.
    pub fn face_lookup(&self) -> HashMap<[usize; 3], usize> {
        self.faces
            .iter()
            .enumerate()
            .map(|(f, v)| {
                let mut k = *v;
                k.sort_unstable();
                (k, f)
            })
            .collect()
    }

    /// Point location with lowest-index tie breaking; `None` means outside.
    pub fn locate_point(&self, x: &Vec3<T>) -> Option<usize> {
        self.locator().locate(self, x)
    }

    pub fn locator(&self) -> &PointLocator<T> {
        self.locator.get_or_init(|| PointLocator::build(self))
    }

    /// Longest edge length of tet `t`.
    pub fn longest_edge(&self, t: usize) -> T {
        let p = self.tet_points(t);
        let mut m = T::zero();
        for i in 0..4 {
            for j in i + 1..4 {
                m = m.max(p[i].distance(&p[j]));
            }
        }
        m
    }

    /// Checks orientation and face-consistency invariants.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.n_tets() {
            if self.tet_volume(t) <= T::zero() {
                return Err(Error::InvalidGeometry(format!(
                    "tet {t} is not positively oriented"
                )));
            }
        }
        for f in 0..self.n_faces() {
            let adj = self.adjacent_tets(f);
            match adj.len() {
                1 => {
                    if adj[0].1 != 1 || self.tags[f].is_none() {
                        return Err(Error::Topology(format!(
                            "boundary face {f} is inconsistent"
                        )));
                    }
                }
                2 => {
                    if adj[0].1 + adj[1].1 != 0 || adj[0].0 >= adj[1].0 {
                        return Err(Error::Topology(format!(
                            "interior face {f} is inconsistent"
                        )));
                    }
                }
                _ => return Err(Error::Topology(format!("face {f} has no tet"))),
            }
            // stored normal points away from the first adjacent tet
            let t = adj[0].0;
            let n = self.face_area_normal(f);
            let out = self.face_centroid(f) - self.tet_centroid(t);
            if n.dot(&out) <= T::zero() {
                return Err(Error::Topology(format!(
                    "face {f} normal points into tet {t}"
                )));
            }
        }
        Ok(())
    }
}

fn same_orientation(a: &[usize; 3], b: &[usize; 3]) -> bool {
    let rot = |k: usize| [b[k % 3], b[(k + 1) % 3], b[(k + 2) % 3]];
    (0..3).any(|k| rot(k) == *a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_tets() -> TetMesh<f64> {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 1.0, 1.0),
        ];
        TetMesh::new(v, vec![[0, 1, 2, 3], [1, 2, 3, 4]]).unwrap()
    }

    #[test]
    fn faces_and_signs() {
        let m = two_tets();
        assert_eq!(m.n_faces(), 7);
        assert_eq!(m.boundary_faces().count(), 6);
        m.validate().unwrap();
        let shared = (0..7).find(|&f| !m.is_boundary_face(f)).unwrap();
        assert_eq!(m.adjacent_tets(shared), &[(0, 1), (1, -1)]);
        assert_eq!(m.face_sign(shared, 1), -1);
    }

    #[test]
    fn flips_negative_tets() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let m = TetMesh::new(v, vec![[0, 2, 1, 3]]).unwrap();
        assert!(m.tet_volume(0) > 0.0);
        m.validate().unwrap();
    }

    #[test]
    fn degenerate_tet_rejected() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        assert!(matches!(
            TetMesh::new(v, vec![[0, 1, 2, 3]]),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn classification_error_names_face() {
        let m = two_tets();
        let err = m
            .classify_boundary(|c, _| {
                if c.z() > 0.5 {
                    None
                } else {
                    Some(BoundaryKind::Neumann)
                }
            })
            .unwrap_err();
        assert!(matches!(err, Error::Classification { .. }));
    }
}
