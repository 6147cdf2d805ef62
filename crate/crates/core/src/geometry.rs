//! Small fixed-size vector algebra and quadrature rules.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use crate::scalar::Real;

/// Point or vector in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Vec3([T::lit(v[0]), T::lit(v[1]), T::lit(v[2])])
    }

    pub fn to_f64(self) -> [f64; 3] {
        [
            self.0[0].to_f64_lossy(),
            self.0[1].to_f64_lossy(),
            self.0[2].to_f64_lossy(),
        ]
    }

    #[inline]
    pub fn x(&self) -> T {
        self.0[0]
    }
    #[inline]
    pub fn y(&self) -> T {
        self.0[1]
    }
    #[inline]
    pub fn z(&self) -> T {
        self.0[2]
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        Vec3([
            self.0[1] * o.0[2] - self.0[2] * o.0[1],
            self.0[2] * o.0[0] - self.0[0] * o.0[2],
            self.0[0] * o.0[1] - self.0[1] * o.0[0],
        ])
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn normalized(&self) -> Self {
        *self * (T::one() / self.norm())
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        *self * s
    }

    pub fn distance(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    pub fn lerp(&self, o: &Self, t: T) -> Self {
        *self + (*o - *self) * t
    }

    /// Two unit vectors completing `self` (assumed unit) to a right-handed orthonormal frame.
    pub fn orthonormal_frame(&self) -> (Self, Self) {
        let a = self.0.map(|c| c.abs());
        // pick the coordinate axis least aligned with the tangent
        let helper = if a[0] <= a[1] && a[0] <= a[2] {
            Vec3::new(T::one(), T::zero(), T::zero())
        } else if a[1] <= a[2] {
            Vec3::new(T::zero(), T::one(), T::zero())
        } else {
            Vec3::new(T::zero(), T::zero(), T::one())
        };
        let e1 = self.cross(&helper).normalized();
        let e2 = self.cross(&e1);
        (e1, e2)
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// Signed volume of the tetrahedron `(a, b, c, d)`; positive for right-handed order.
#[inline]
pub fn signed_volume<T: Real>(a: &Vec3<T>, b: &Vec3<T>, c: &Vec3<T>, d: &Vec3<T>) -> T {
    (*b - *a).cross(&(*c - *a)).dot(&(*d - *a)) / T::lit(6.0)
}

/// Barycentric coordinates of `x` with respect to a tetrahedron.
///
/// Coordinate `i` belongs to vertex `i`; they sum to one. Degenerate
/// tetrahedra yield non-finite values.
pub fn barycentric<T: Real>(v: &[Vec3<T>; 4], x: &Vec3<T>) -> [T; 4] {
    let vol = signed_volume(&v[0], &v[1], &v[2], &v[3]);
    let l0 = signed_volume(x, &v[1], &v[2], &v[3]) / vol;
    let l1 = signed_volume(&v[0], x, &v[2], &v[3]) / vol;
    let l2 = signed_volume(&v[0], &v[1], x, &v[3]) / vol;
    let l3 = T::one() - l0 - l1 - l2;
    [l0, l1, l2, l3]
}

/// Area-weighted normal of triangle `(a, b, c)`: `(b - a) x (c - a) / 2`.
#[inline]
pub fn triangle_area_normal<T: Real>(a: &Vec3<T>, b: &Vec3<T>, c: &Vec3<T>) -> Vec3<T> {
    (*b - *a).cross(&(*c - *a)) * T::lit(0.5)
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance<T: Real>(p: &Vec3<T>, a: &Vec3<T>, b: &Vec3<T>) -> T {
    let ab = *b - *a;
    let len2 = ab.norm_squared();
    if len2 == T::zero() {
        return p.distance(a);
    }
    let t = ((*p - *a).dot(&ab) / len2).max(T::zero()).min(T::one());
    p.distance(&a.lerp(b, t))
}

/// Minimum distance between segments `[p0, p1]` and `[q0, q1]`.
pub fn segment_segment_distance<T: Real>(
    p0: &Vec3<T>,
    p1: &Vec3<T>,
    q0: &Vec3<T>,
    q1: &Vec3<T>,
) -> T {
    let d1 = *p1 - *p0;
    let d2 = *q1 - *q0;
    let r = *p0 - *q0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let zero = T::zero();
    let one = T::one();
    let eps = T::epsilon();
    let (s, t);
    if a <= eps && e <= eps {
        return p0.distance(q0);
    }
    if a <= eps {
        s = zero;
        t = (f / e).max(zero).min(one);
    } else {
        let c = d1.dot(&r);
        if e <= eps {
            t = zero;
            s = (-c / a).max(zero).min(one);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > eps * a * e {
                ((b * f - c * e) / denom).max(zero).min(one)
            } else {
                zero
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < zero {
                t0 = zero;
                s0 = (-c / a).max(zero).min(one);
            } else if t0 > one {
                t0 = one;
                s0 = ((b - c) / a).max(zero).min(one);
            }
            s = s0;
            t = t0;
        }
    }
    let cp = *p0 + d1 * s;
    let cq = *q0 + d2 * t;
    cp.distance(&cq)
}

/// Degree-2 rule on a tetrahedron: barycentric points and weights (weights sum to 1).
pub fn tet_quadrature_deg2<T: Real>() -> [([T; 4], T); 4] {
    let a = T::lit(0.585_410_196_624_968_5);
    let b = T::lit(0.138_196_601_125_010_5);
    let w = T::lit(0.25);
    [
        ([a, b, b, b], w),
        ([b, a, b, b], w),
        ([b, b, a, b], w),
        ([b, b, b, a], w),
    ]
}

/// Edge-midpoint rule on a triangle, exact for quadratics: barycentric points, weights sum to 1.
pub fn triangle_midpoint_rule<T: Real>() -> [([T; 3], T); 3] {
    let h = T::lit(0.5);
    let z = T::zero();
    let w = T::one() / T::lit(3.0);
    [([h, h, z], w), ([z, h, h], w), ([h, z, h], w)]
}

/// Gauss-Legendre points on `[0, 1]` with weights summing to 1.
pub fn gauss_legendre_unit<T: Real>(n: usize) -> Vec<(T, T)> {
    let table: &[(f64, f64)] = match n {
        1 => &[(0.0, 2.0)],
        2 => &[
            (-0.577_350_269_189_625_8, 1.0),
            (0.577_350_269_189_625_8, 1.0),
        ],
        3 => &[
            (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
            (0.0, 0.888_888_888_888_889),
            (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
        ],
        4 => &[
            (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
            (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        ],
        _ => return gauss_legendre_golub_welsch(n),
    };
    table
        .iter()
        .map(|&(x, w)| (T::lit(0.5 * (x + 1.0)), T::lit(0.5 * w)))
        .collect()
}

// Newton iteration on Legendre polynomials for orders beyond the table.
fn gauss_legendre_golub_welsch<T: Real>(n: usize) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((T::lit(0.5 * (1.0 - x)), T::lit(0.5 * w)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in 1..=8 {
            let rule = gauss_legendre_unit::<f64>(n);
            let wsum: f64 = rule.iter().map(|p| p.1).sum();
            assert!((wsum - 1.0).abs() < 1e-14);
            // exact up to degree 2n-1
            let deg = 2 * n - 1;
            let val: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
            assert!((val - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn barycentric_of_vertices() {
        let v: [Vec3<f64>; 4] = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        for (i, p) in v.iter().enumerate() {
            let b = barycentric(&v, p);
            for (j, bj) in b.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((bj - expected).abs() < 1e-15);
            }
        }
        assert!((signed_volume(&v[0], &v[1], &v[2], &v[3]) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn segment_distances() {
        let o: Vec3<f64> = Vec3::new(0.0, 0.0, 0.0);
        let z: Vec3<f64> = Vec3::new(0.0, 0.0, 1.0);
        let p = Vec3::new(1.0, 0.0, 0.5);
        assert!((point_segment_distance(&p, &o, &z) - 1.0).abs() < 1e-15);
        let q0 = Vec3::new(1.0, -1.0, 0.5);
        let q1 = Vec3::new(1.0, 1.0, 0.5);
        assert!((segment_segment_distance(&o, &z, &q0, &q1) - 1.0).abs() < 1e-15);
        // parallel segments
        let q0 = Vec3::new(2.0, 0.0, 0.0);
        let q1 = Vec3::new(2.0, 0.0, 1.0);
        assert!((segment_segment_distance(&o, &z, &q0, &q1) - 2.0).abs() < 1e-15);
        // disjoint along the axis
        let q0 = Vec3::new(0.0, 0.0, 3.0);
        let q1 = Vec3::new(0.0, 0.0, 4.0);
        assert!((segment_segment_distance(&o, &z, &q0, &q1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn frame_is_orthonormal() {
        let t: Vec3<f64> = Vec3::new(0.3, -0.2, 0.9).normalized();
        let (e1, e2) = t.orthonormal_frame();
        assert!(e1.dot(&t).abs() < 1e-15 && e2.dot(&t).abs() < 1e-15);
        assert!(e1.dot(&e2).abs() < 1e-15);
        assert!((e1.norm() - 1.0).abs() < 1e-15 && (e2.norm() - 1.0).abs() < 1e-15);
    }
}
