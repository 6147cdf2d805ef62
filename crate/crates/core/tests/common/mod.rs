//! Dense reference routines shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Numerical rank via Gaussian elimination with full pivoting.
pub fn rank(a: &[Vec<f64>], tol: f64) -> usize {
    let mut m = a.to_vec();
    let (nr, nc) = (m.len(), m.first().map_or(0, |r| r.len()));
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    let mut r = 0;
    for c in 0..nc {
        if r == nr {
            break;
        }
        let (piv, val) =
            (r..nr)
                .map(|i| (i, m[i][c].abs()))
                .fold((r, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if val <= tol * scale {
            continue;
        }
        m.swap(r, piv);
        for i in r + 1..nr {
            let f = m[i][c] / m[r][c];
            for k in c..nc {
                m[i][k] -= f * m[r][k];
            }
        }
        r += 1;
    }
    r
}

/// Dense solve by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())
            .unwrap();
        m.swap(c, piv);
        x.swap(c, piv);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for k in c..n {
                m[i][k] -= f * m[c][k];
            }
            x[i] -= f * x[c];
        }
    }
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| m[c][k] * x[k]).sum();
        x[c] = (x[c] - s) / m[c][c];
    }
    x
}

/// Four-point Gauss-Legendre rule on [0, 1].
pub fn gauss4() -> [(f64, f64); 4] {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30.0f64.sqrt()) / 36.0;
    let wb = (18.0 - 30.0f64.sqrt()) / 36.0;
    [
        ((1.0 - b) / 2.0, wb / 2.0),
        ((1.0 - a) / 2.0, wa / 2.0),
        ((1.0 + a) / 2.0, wa / 2.0),
        ((1.0 + b) / 2.0, wb / 2.0),
    ]
}

/// Integral over the tetrahedron `p` by the collapsed-cube (Duffy) product of
/// four-point Gauss rules; exact for polynomials of degree ≤ 4.
pub fn integrate_tet(p: &[[f64; 3]; 4], f: impl Fn([f64; 3]) -> f64) -> f64 {
    let e: [[f64; 3]; 3] = std::array::from_fn(|k| std::array::from_fn(|c| p[k + 1][c] - p[0][c]));
    let det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
    let mut sum = 0.0;
    for (u, wu) in gauss4() {
        for (v, wv) in gauss4() {
            for (w, ww) in gauss4() {
                let (a, b, c) = (u, (1.0 - u) * v, (1.0 - u) * (1.0 - v) * w);
                let x = std::array::from_fn(|k| p[0][k] + a * e[0][k] + b * e[1][k] + c * e[2][k]);
                sum += wu * wv * ww * (1.0 - u) * (1.0 - u) * (1.0 - v) * f(x);
            }
        }
    }
    sum * det.abs()
}
