use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{signed_volume, Vec3};
use crate::scalar::Real;
use crate::spatial::SegmentIndex;

use super::TetMesh;

/// Parameters for [`generate_box_mesh`].
#[derive(Debug, Clone)]
pub struct BoxMeshSpec<T> {
    pub lo: Vec3<T>,
    pub hi: Vec3<T>,
    pub h_far: T,
    /// Segments near which the mesh is refined down to `h_near`.
    pub refine_segments: Vec<(Vec3<T>, Vec3<T>)>,
    pub h_near: T,
    pub band: T,
    /// Refinement aborts with a generation error past this many tets.
    pub max_tets: usize,
}

impl<T: Real> BoxMeshSpec<T> {
    pub fn new(lo: Vec3<T>, hi: Vec3<T>, h_far: T) -> Self {
        BoxMeshSpec {
            lo,
            hi,
            h_far,
            refine_segments: Vec::new(),
            h_near: h_far,
            band: h_far,
            max_tets: 5_000_000,
        }
    }

    /// Refine along the polyline through `points`.
    pub fn refine_polyline(mut self, points: &[Vec3<T>], h_near: T, band: T) -> Self {
        self.refine_segments = points.windows(2).map(|w| (w[0], w[1])).collect();
        self.h_near = h_near;
        self.band = band;
        self
    }

    pub fn refine_segments(mut self, segs: Vec<(Vec3<T>, Vec3<T>)>, h_near: T, band: T) -> Self {
        self.refine_segments = segs;
        self.h_near = h_near;
        self.band = band;
        self
    }
}

/// Structured Kuhn subdivision of a box (6 tets per cell) followed by longest-edge
/// bisection near the refinement segments until every tet within `band` of them has
/// longest edge at most `2 h_near`. All boundary faces are tagged Dirichlet.
pub fn generate_box_mesh<T: Real>(spec: &BoxMeshSpec<T>) -> Result<TetMesh<T>> {
    let ext = spec.hi - spec.lo;
    for k in 0..3 {
        if !(ext[k] > T::zero()) || !ext[k].is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "box has non-positive extent {} along axis {k}",
                ext[k]
            )));
        }
    }
    if !(spec.h_far > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "h_far must be positive, got {}",
            spec.h_far
        )));
    }
    if !(spec.h_near > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "h_near must be positive, got {}",
            spec.h_near
        )));
    }
    if spec.h_near > spec.h_far {
        return Err(Error::InvalidParameter(format!(
            "h_near ({}) exceeds h_far ({})",
            spec.h_near, spec.h_far
        )));
    }
    if !spec.refine_segments.is_empty() && !(spec.band > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "band must be positive, got {}",
            spec.band
        )));
    }
    let slack = ext.norm() * T::lit(1e-12);
    for (a, b) in &spec.refine_segments {
        for p in [a, b] {
            for k in 0..3 {
                if p[k] < spec.lo[k] - slack || p[k] > spec.hi[k] + slack {
                    return Err(Error::InvalidGeometry(format!(
                        "refinement point {:?} lies outside the box",
                        p.to_f64()
                    )));
                }
            }
        }
    }

    let (verts, tets) = kuhn_grid(spec);
    let mut r = Refiner {
        verts,
        tets,
        midpoints: HashMap::new(),
        dirty: Vec::new(),
    };
    if !spec.refine_segments.is_empty() {
        r.refine_near(spec)?;
    }
    TetMesh::new(r.verts, r.tets)
}

fn kuhn_grid<T: Real>(spec: &BoxMeshSpec<T>) -> (Vec<Vec3<T>>, Vec<[usize; 4]>) {
    let ext = spec.hi - spec.lo;
    let mut n = [1usize; 3];
    for k in 0..3 {
        n[k] = (ext[k] / spec.h_far).ceil().to_usize().unwrap_or(1).max(1);
        // guard against ceil(1.0000000001)
        let below = n[k] - 1;
        if below >= 1 && ext[k] / T::from_count(below) <= spec.h_far * (T::one() + T::lit(1e-12)) {
            n[k] = below;
        }
    }
    let idx = |i: usize, j: usize, k: usize| (i * (n[1] + 1) + j) * (n[2] + 1) + k;
    let mut verts = Vec::with_capacity((n[0] + 1) * (n[1] + 1) * (n[2] + 1));
    for i in 0..=n[0] {
        for j in 0..=n[1] {
            for k in 0..=n[2] {
                let c = |a: usize, m: usize, ax: usize| {
                    spec.lo[ax] + ext[ax] * T::from_count(a) / T::from_count(m)
                };
                verts.push(Vec3::new(c(i, n[0], 0), c(j, n[1], 1), c(k, n[2], 2)));
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * n[0] * n[1] * n[2]);
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                for p in PERMS {
                    let mut off = [0usize; 3];
                    let mut tet = [idx(i, j, k); 4];
                    for (s, &ax) in p.iter().enumerate() {
                        off[ax] = 1;
                        tet[s + 1] = idx(i + off[0], j + off[1], k + off[2]);
                    }
                    if signed_volume(
                        &verts[tet[0]],
                        &verts[tet[1]],
                        &verts[tet[2]],
                        &verts[tet[3]],
                    ) < T::zero()
                    {
                        tet.swap(2, 3);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    (verts, tets)
}

const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

struct Refiner<T> {
    verts: Vec<Vec3<T>>,
    tets: Vec<[usize; 4]>,
    midpoints: HashMap<(usize, usize), usize>,
    dirty: Vec<bool>,
}

impl<T: Real> Refiner<T> {
    fn edge_len2(&self, a: usize, b: usize) -> T {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        (self.verts[a] - self.verts[b]).norm_squared()
    }

    /// Local indices of the longest edge under the global total order
    /// (length, then sorted vertex pair).
    fn longest_local_edge(&self, t: usize) -> (usize, usize) {
        let tet = self.tets[t];
        let key = |(i, j): (usize, usize)| {
            let (a, b) = (tet[i].min(tet[j]), tet[i].max(tet[j]));
            (self.edge_len2(a, b), a, b)
        };
        let mut best = EDGES[0];
        let mut bk = key(best);
        for &e in &EDGES[1..] {
            let k = key(e);
            if k.0 > bk.0 || (k.0 == bk.0 && (k.1, k.2) > (bk.1, bk.2)) {
                best = e;
                bk = k;
            }
        }
        best
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let p = (self.verts[key.0] + self.verts[key.1]).scale(T::lit(0.5));
        let m = self.verts.len();
        self.verts.push(p);
        self.midpoints.insert(key, m);
        m
    }

    fn mark_dirty(&mut self, t: usize) {
        if self.dirty.len() <= t {
            self.dirty.resize(t + 1, false);
        }
        self.dirty[t] = true;
    }

    /// Bisects tet `t` at its longest edge; the first child keeps index `t`,
    /// the second is appended and its index returned.
    fn bisect(&mut self, t: usize) -> usize {
        let (i, j) = self.longest_local_edge(t);
        let tet = self.tets[t];
        let m = self.midpoint(tet[i], tet[j]);
        let mut c1 = tet;
        c1[j] = m;
        let mut c2 = tet;
        c2[i] = m;
        self.tets[t] = c1;
        let n = self.tets.len();
        self.tets.push(c2);
        self.mark_dirty(t);
        self.mark_dirty(n);
        n
    }

    fn has_hanging_node(&self, t: usize) -> bool {
        let tet = &self.tets[t];
        EDGES.iter().any(|&(i, j)| {
            let key = (tet[i].min(tet[j]), tet[i].max(tet[j]));
            self.midpoints.contains_key(&key)
        })
    }

    fn close(&mut self, max_tets: usize) -> Result<()> {
        loop {
            let mut changed = false;
            let mut stack: Vec<usize> = (0..self.tets.len()).rev().collect();
            while let Some(t) = stack.pop() {
                if self.has_hanging_node(t) {
                    let c = self.bisect(t);
                    changed = true;
                    stack.push(c);
                    stack.push(t);
                    if self.tets.len() > max_tets {
                        return Err(too_many(max_tets));
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn refine_near(&mut self, spec: &BoxMeshSpec<T>) -> Result<()> {
        let index = SegmentIndex::from_segments(&spec.refine_segments);
        let limit2 = (T::lit(2.0) * spec.h_near).powi(2);
        self.dirty = vec![true; self.tets.len()];
        loop {
            let candidates: Vec<usize> = (0..self.tets.len()).filter(|&t| self.dirty[t]).collect();
            self.dirty.iter_mut().for_each(|d| *d = false);
            let marked: Vec<usize> = candidates
                .into_iter()
                .filter(|&t| {
                    let (i, j) = self.longest_local_edge(t);
                    let tet = self.tets[t];
                    if self.edge_len2(tet[i], tet[j]) <= limit2 {
                        return false;
                    }
                    let p = tet.map(|v| self.verts[v]);
                    let c = (p[0] + p[1] + p[2] + p[3]).scale(T::lit(0.25));
                    let reach = p
                        .iter()
                        .map(|v| v.distance(&c))
                        .fold(T::zero(), |a, b| a.max(b));
                    index.any_within(&c, spec.band + reach)
                })
                .collect();
            if marked.is_empty() {
                break;
            }
            for t in marked {
                self.bisect(t);
            }
            if self.tets.len() > spec.max_tets {
                return Err(too_many(spec.max_tets));
            }
            self.close(spec.max_tets)?;
        }
        log::debug!(
            "refinement produced {} tets and {} vertices",
            self.tets.len(),
            self.verts.len()
        );
        Ok(())
    }
}

fn too_many(max_tets: usize) -> Error {
    Error::Generation(format!(
        "refinement exceeded {max_tets} tets; increase h_near or reduce the band"
    ))
}
