//! Uniform-grid index over line segments for proximity queries.

use crate::geometry::{point_segment_distance, segment_segment_distance, Vec3};
use crate::scalar::Real;

/// Bucket grid over segment bounding boxes. Segments may be added incrementally.
#[derive(Debug, Clone)]
pub struct SegmentIndex<T> {
    lo: Vec3<T>,
    cell: T,
    dims: [usize; 3],
    buckets: Vec<Vec<u32>>,
    segments: Vec<(Vec3<T>, Vec3<T>)>,
}

impl<T: Real> SegmentIndex<T> {
    /// Creates an empty index covering the box `[lo, hi]` with cubic cells of size `cell`.
    ///
    /// Segments reaching outside the box are clamped into the boundary cells.
    pub fn new(lo: Vec3<T>, hi: Vec3<T>, cell: T) -> Self {
        let mut dims = [1usize; 3];
        for (k, d) in dims.iter_mut().enumerate() {
            let ext = (hi[k] - lo[k]).max(T::zero());
            *d = ((ext / cell).ceil().to_usize().unwrap_or(1)).clamp(1, 256);
        }
        SegmentIndex {
            lo,
            cell,
            dims,
            buckets: vec![Vec::new(); dims[0] * dims[1] * dims[2]],
            segments: Vec::new(),
        }
    }

    /// Builds an index sized to the given segments.
    pub fn from_segments(segs: &[(Vec3<T>, Vec3<T>)]) -> Self {
        let (lo, hi) = bounding_box(segs.iter().flat_map(|(a, b)| [*a, *b]));
        let ext = (hi - lo).0.iter().fold(T::zero(), |m, v| m.max(*v));
        let n = T::from_count(segs.len().max(1)).cbrt();
        let cell = (ext / n.max(T::one())).max(T::lit(1e-12));
        let mut idx = Self::new(lo, hi, cell);
        for s in segs {
            idx.insert(s.0, s.1);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segment(&self, i: usize) -> (Vec3<T>, Vec3<T>) {
        self.segments[i]
    }

    fn cell_of(&self, p: &Vec3<T>) -> [usize; 3] {
        let mut c = [0usize; 3];
        for k in 0..3 {
            let f = ((p[k] - self.lo[k]) / self.cell).floor();
            let i = if f < T::zero() {
                0
            } else {
                f.to_usize().unwrap_or(usize::MAX)
            };
            c[k] = i.min(self.dims[k] - 1);
        }
        c
    }

    fn for_cells_in_box(&self, lo: &Vec3<T>, hi: &Vec3<T>, mut f: impl FnMut(usize)) {
        let a = self.cell_of(lo);
        let b = self.cell_of(hi);
        for i in a[0]..=b[0] {
            for j in a[1]..=b[1] {
                for k in a[2]..=b[2] {
                    f((i * self.dims[1] + j) * self.dims[2] + k);
                }
            }
        }
    }

    /// Adds a segment and returns its id.
    pub fn insert(&mut self, a: Vec3<T>, b: Vec3<T>) -> usize {
        let id = self.segments.len();
        self.segments.push((a, b));
        let (lo, hi) = bounding_box([a, b].into_iter());
        let mut cells = Vec::new();
        self.for_cells_in_box(&lo, &hi, |c| cells.push(c));
        for c in cells {
            self.buckets[c].push(id as u32);
        }
        id
    }

    /// Ids of segments whose bounding box overlaps the box `[lo, hi]` (sorted, unique).
    fn candidates(&self, lo: &Vec3<T>, hi: &Vec3<T>) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_cells_in_box(lo, hi, |c| {
            out.extend(self.buckets[c].iter().map(|&i| i as usize))
        });
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Distance from `p` to the nearest segment, if any lies within `radius`.
    pub fn nearest_within(&self, p: &Vec3<T>, radius: T) -> Option<T> {
        let r = Vec3::new(radius, radius, radius);
        let mut best: Option<T> = None;
        for i in self.candidates(&(*p - r), &(*p + r)) {
            let (a, b) = self.segments[i];
            let d = point_segment_distance(p, &a, &b);
            if d <= radius && best.is_none_or(|x| d < x) {
                best = Some(d);
            }
        }
        best
    }

    /// Whether any segment lies within `radius` of `p`.
    pub fn any_within(&self, p: &Vec3<T>, radius: T) -> bool {
        let r = Vec3::new(radius, radius, radius);
        let lo = *p - r;
        let hi = *p + r;
        let a = self.cell_of(&lo);
        let b = self.cell_of(&hi);
        for i in a[0]..=b[0] {
            for j in a[1]..=b[1] {
                for k in a[2]..=b[2] {
                    let c = (i * self.dims[1] + j) * self.dims[2] + k;
                    for &s in &self.buckets[c] {
                        let (sa, sb) = self.segments[s as usize];
                        if point_segment_distance(p, &sa, &sb) <= radius {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Ids of segments within `radius` of the segment `[a, b]`.
    pub fn segments_near_segment(&self, a: &Vec3<T>, b: &Vec3<T>, radius: T) -> Vec<usize> {
        let (lo, hi) = bounding_box([*a, *b].into_iter());
        let r = Vec3::new(radius, radius, radius);
        self.candidates(&(lo - r), &(hi + r))
            .into_iter()
            .filter(|&i| {
                let (c, d) = self.segments[i];
                segment_segment_distance(a, b, &c, &d) < radius
            })
            .collect()
    }
}

/// Axis-aligned bounding box of a point set; empty input yields a degenerate box at the origin.
pub fn bounding_box<T: Real>(pts: impl Iterator<Item = Vec3<T>>) -> (Vec3<T>, Vec3<T>) {
    let mut lo = Vec3::new(T::infinity(), T::infinity(), T::infinity());
    let mut hi = -lo;
    let mut any = false;
    for p in pts {
        any = true;
        for k in 0..3 {
            lo.0[k] = lo.0[k].min(p[k]);
            hi.0[k] = hi.0[k].max(p[k]);
        }
    }
    if !any {
        return (Vec3::zero(), Vec3::zero());
    }
    (lo, hi)
}
