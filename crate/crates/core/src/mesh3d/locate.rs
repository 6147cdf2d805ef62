use crate::geometry::{barycentric, Vec3};
use crate::scalar::Real;
use crate::spatial::bounding_box;

use super::TetMesh;

/// Uniform background grid of tet buckets.
#[derive(Debug, Clone)]
pub struct PointLocator<T> {
    lo: Vec3<T>,
    hi: Vec3<T>,
    inv_cell: [T; 3],
    dims: [usize; 3],
    ptr: Vec<usize>,
    items: Vec<u32>,
}

impl<T: Real> PointLocator<T> {
    pub fn build(mesh: &TetMesh<T>) -> Self {
        let (lo, hi) = bounding_box(mesh.vertices().iter().copied());
        let ext = hi - lo;
        let diag = ext.norm().max(T::lit(1e-300));
        let pad = diag * T::lit(1e-9);
        let lo = lo - Vec3::new(pad, pad, pad);
        let hi = hi + Vec3::new(pad, pad, pad);
        let ext = hi - lo;

        // about one bucket per tet, shaped like the bounding box
        let target = mesh.n_tets().clamp(1, 2_000_000) as f64;
        let e = ext.to_f64();
        let vol = (e[0] * e[1] * e[2]).max(1e-300);
        let cell = (vol / target).cbrt();
        let mut dims = [1usize; 3];
        let mut inv_cell = [T::zero(); 3];
        for k in 0..3 {
            dims[k] = ((e[k] / cell).ceil() as usize).clamp(1, 512);
            inv_cell[k] = T::from_count(dims[k]) / ext[k];
        }

        let mut loc = PointLocator {
            lo,
            hi,
            inv_cell,
            dims,
            ptr: Vec::new(),
            items: Vec::new(),
        };
        let nb = dims[0] * dims[1] * dims[2];
        let ranges: Vec<([usize; 3], [usize; 3])> = (0..mesh.n_tets())
            .map(|t| {
                let (a, b) = bounding_box(mesh.tet_points(t).into_iter());
                let a = a - Vec3::new(pad, pad, pad);
                let b = b + Vec3::new(pad, pad, pad);
                (loc.cell_of(&a), loc.cell_of(&b))
            })
            .collect();
        let mut count = vec![0usize; nb + 1];
        for (a, b) in &ranges {
            loc.for_range(a, b, |c| count[c + 1] += 1);
        }
        for i in 0..nb {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut items = vec![0u32; count[nb]];
        for (t, (a, b)) in ranges.iter().enumerate() {
            loc.for_range(a, b, |c| {
                items[next[c]] = t as u32;
                next[c] += 1;
            });
        }
        loc.ptr = count;
        loc.items = items;
        loc
    }

    fn cell_of(&self, p: &Vec3<T>) -> [usize; 3] {
        let mut c = [0usize; 3];
        for k in 0..3 {
            let f = ((p[k] - self.lo[k]) * self.inv_cell[k]).floor();
            let i = if f < T::zero() {
                0
            } else {
                f.to_usize().unwrap_or(usize::MAX)
            };
            c[k] = i.min(self.dims[k] - 1);
        }
        c
    }

    fn for_range(&self, a: &[usize; 3], b: &[usize; 3], mut f: impl FnMut(usize)) {
        for i in a[0]..=b[0] {
            for j in a[1]..=b[1] {
                for k in a[2]..=b[2] {
                    f((i * self.dims[1] + j) * self.dims[2] + k);
                }
            }
        }
    }

    /// Lowest-index tet whose barycentric coordinates at `x` are all ≥ −tol.
    pub fn locate(&self, mesh: &TetMesh<T>, x: &Vec3<T>) -> Option<usize> {
        for k in 0..3 {
            if !(x[k] >= self.lo[k] && x[k] <= self.hi[k]) {
                return None;
            }
        }
        let c = self.cell_of(x);
        let b = (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2];
        let tol = T::barycentric_tol();
        // bucket lists are sorted by tet index, so the first hit is the lowest
        self.items[self.ptr[b]..self.ptr[b + 1]]
            .iter()
            .map(|&t| t as usize)
            .find(|&t| {
                barycentric(&mesh.tet_points(t), x)
                    .iter()
                    .all(|&l| l >= -tol)
            })
    }
}

/// Exhaustive location over all tets; reference for tests.
pub fn locate_brute_force<T: Real>(mesh: &TetMesh<T>, x: &Vec3<T>) -> Option<usize> {
    let tol = T::barycentric_tol();
    (0..mesh.n_tets()).find(|&t| {
        barycentric(&mesh.tet_points(t), x)
            .iter()
            .all(|&l| l >= -tol)
    })
}
