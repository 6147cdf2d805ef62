mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use emdim::assembly1d::{
    assemble_dirichlet_multiplier, assemble_graph_reaction, assemble_graph_source,
    assemble_graph_stiffness, assemble_tip_neumann,
};
use emdim::graph1d::{build_graph_mesh, GraphEdge, GraphMesh, Network1D};
use emdim::Vec3;
use proptest::prelude::*;

fn unit_edge(n_e: usize, r: f64, dirichlet: &[(usize, f64)]) -> GraphMesh<f64> {
    let net = Network1D::single_edge(
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        r,
        n_e,
        dirichlet.iter().copied().collect(),
    )
    .unwrap();
    build_graph_mesh(&net).unwrap()
}

fn y_graph(n_e: usize, dirichlet: BTreeMap<usize, f64>) -> Network1D<f64> {
    let nodes = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(-0.5, 0.8, 0.1),
        Vec3::new(-0.4, -0.9, 0.0),
    ];
    let edges = (1..4)
        .map(|i| GraphEdge {
            a: i,
            b: 0,
            radius: 0.1 + 0.02 * i as f64,
            n_e,
        })
        .collect();
    Network1D::new(nodes, edges, dirichlet).unwrap()
}

fn one(_: &Vec3<f64>) -> f64 {
    1.0
}

/// Solves the decoupled graph problem `(K + M) u = F + tip` with Dirichlet rows
/// eliminated, using a dense direct solve.
fn solve_decoupled(
    gm: &GraphMesh<f64>,
    q: &dyn Fn(&Vec3<f64>) -> f64,
    g: &dyn Fn(&Vec3<f64>) -> f64,
) -> Vec<f64> {
    let k = assemble_graph_stiffness(gm, &one);
    let m = assemble_graph_reaction(gm, &one, false);
    let a = k.add_scaled(&m, 1.0).to_dense();
    let mut b = assemble_graph_source(gm, q);
    for (i, t) in assemble_tip_neumann(gm, g, 1.0).into_iter().enumerate() {
        b[i] += t;
    }
    let (ld, vals) = assemble_dirichlet_multiplier(gm);
    let n = gm.n_dofs();
    let nd = vals.len();
    let mut big = vec![vec![0.0; n + nd]; n + nd];
    for i in 0..n {
        big[i][..n].copy_from_slice(&a[i]);
    }
    for (r, c, v) in ld.iter() {
        big[n + r][c] = v;
        big[c][n + r] = v;
    }
    b.extend(vals);
    let x = common::dense_solve(&big, &b);
    x[..n].to_vec()
}

#[test]
fn stiffness_of_two_interval_edge() {
    let gm = unit_edge(2, 1.0, &[]);
    let k = assemble_graph_stiffness(&gm, &one).to_dense();
    let s = PI / 0.5;
    let expect = [[s, -s, 0.0], [-s, 2.0 * s, -s], [0.0, -s, s]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((k[i][j] - expect[i][j]).abs() < 1e-13);
        }
    }
    let k2 = assemble_graph_stiffness(&gm, &|_: &Vec3<f64>| 2.0);
    for (i, j, v) in k2.iter() {
        assert!((v - 2.0 * k[i][j]).abs() < 1e-13);
    }
}

#[test]
fn bifurcation_row_sums_edge_contributions() {
    let net = y_graph(3, BTreeMap::new());
    let gm = build_graph_mesh(&net).unwrap();
    let k = assemble_graph_stiffness(&gm, &one);
    let center = gm.node_dof(0);
    let mut diag = 0.0;
    for e in 0..3 {
        let ed = net.edges()[e];
        let single = Network1D::single_edge(
            net.nodes()[ed.a],
            net.nodes()[ed.b],
            ed.radius,
            ed.n_e,
            BTreeMap::new(),
        )
        .unwrap();
        let sg = build_graph_mesh(&single).unwrap();
        let sk = assemble_graph_stiffness(&sg, &one);
        let end = sg.node_dof(1);
        diag += sk.get(end, end);
        // neighbour of the end node on this edge
        let inner_single = sg.edge_dofs(0)[ed.n_e - 1];
        let inner = gm.edge_dofs(e)[ed.n_e - 1];
        assert!((k.get(center, inner) - sk.get(end, inner_single)).abs() < 1e-13);
    }
    assert!((k.get(center, center) - diag).abs() < 1e-12);
    assert_eq!(k.row(center).0.len(), 4);
}

#[test]
fn stiffness_null_space_is_constants() {
    let net = y_graph(5, BTreeMap::new());
    let gm = build_graph_mesh(&net).unwrap();
    let k = assemble_graph_stiffness(&gm, &|x: &Vec3<f64>| 1.0 + x.x().abs());
    let n = gm.n_dofs();
    assert_eq!(common::rank(&k.to_dense(), 1e-12), n - 1);
    let kc = k.mul_vec(&vec![1.0; n]);
    assert!(kc.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn reaction_of_two_interval_edge() {
    let gm = unit_edge(2, 1.0, &[]);
    let m = assemble_graph_reaction(&gm, &one, false).to_dense();
    let s = 4.0 * PI * 0.5 / 6.0;
    let expect = [[2.0 * s, s, 0.0], [s, 4.0 * s, s], [0.0, s, 2.0 * s]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((m[i][j] - expect[i][j]).abs() < 1e-13);
        }
    }
}

#[test]
fn reaction_total_mass_and_lumping() {
    let net = y_graph(4, BTreeMap::new());
    let gm = build_graph_mesh(&net).unwrap();
    let m = assemble_graph_reaction(&gm, &one, false);
    let ml = assemble_graph_reaction(&gm, &one, true);
    let total: f64 = m.mul_vec(&vec![1.0; gm.n_dofs()]).iter().sum();
    assert!((total - 4.0 * PI * net.total_length()).abs() < 1e-12);
    let d = ml.to_dense();
    for (i, row) in m.to_dense().iter().enumerate() {
        let lumped = d[i][i];
        assert!(lumped >= row[i] && lumped <= 2.0 * row[i]);
        assert!((lumped - row.iter().sum::<f64>()).abs() < 1e-13);
    }
    let ev = common::symmetric_eigenvalues(&m.to_dense());
    assert!(ev[0] > 0.0);
}

#[test]
fn source_vectors() {
    let gm = unit_edge(2, 1.0, &[]);
    let zero = assemble_graph_source(&gm, &|_: &Vec3<f64>| 0.0);
    assert!(zero.iter().all(|&v| v == 0.0));
    let c = 1.7;
    let f = assemble_graph_source(&gm, &|_: &Vec3<f64>| c);
    let expect = [PI * c / 4.0, PI * c / 2.0, PI * c / 4.0];
    for i in 0..3 {
        assert!((f[i] - expect[i]).abs() < 1e-14);
    }
    let r = 0.01;
    let gm = unit_edge(10, r, &[]);
    let f = assemble_graph_source(&gm, &|_: &Vec3<f64>| -2.0 / r);
    for (i, v) in f.iter().enumerate() {
        let hat = if i == 0 || i == 10 { 0.05 } else { 0.1 };
        assert!((v + 2.0 * PI * r * hat).abs() < 1e-14);
    }
}

#[test]
fn tip_contributions() {
    let gm = unit_edge(4, 0.01, &[(0, 1.0)]);
    let zero = assemble_tip_neumann(&gm, &|_: &Vec3<f64>| 0.0, 1.0);
    assert!(zero.iter().all(|&v| v == 0.0));
    let t = assemble_tip_neumann(&gm, &|_: &Vec3<f64>| -2.0, 1.0);
    let tip = gm.node_dof(1);
    assert!((t[tip] - 2.0 * PI * 1e-4).abs() < 1e-18);
    assert!(t.iter().enumerate().all(|(i, &v)| i == tip || v == 0.0));
    let both = unit_edge(4, 0.01, &[(0, 0.5), (1, 0.5)]);
    let t = assemble_tip_neumann(&both, &|_: &Vec3<f64>| -2.0, 1.0);
    assert!(t.iter().all(|&v| v == 0.0));
}

#[test]
fn dirichlet_multiplier_rows() {
    let r = 0.01;
    let gm = unit_edge(5, r, &[(0, r / 2.0), (1, r / 2.0)]);
    let (ld, vals) = assemble_dirichlet_multiplier(&gm);
    let n = gm.n_dofs();
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let mut elast = vec![0.0; n];
    elast[n - 1] = 1.0;
    assert_eq!(ld.to_dense(), vec![e0, elast]);
    assert_eq!(vals, vec![r / 2.0, r / 2.0]);
    let (ld, vals) = assemble_dirichlet_multiplier(&unit_edge(5, r, &[]));
    assert_eq!((ld.nrows(), vals.len()), (0, 0));
}

#[test]
fn decoupled_edge_converges_to_cosh_at_second_order() {
    let r = 0.5;
    let kappa = 2.0 / r;
    let exact = |s: f64| (kappa * (s - 0.5)).cosh() / (kappa / 2.0).cosh();
    let mut errors = Vec::new();
    for n_e in [8, 16, 32, 64] {
        let gm = unit_edge(n_e, r, &[(0, 1.0), (1, 1.0)]);
        let u = solve_decoupled(&gm, &|_| 0.0, &|_| 0.0);
        let h = 1.0 / n_e as f64;
        let mut e2 = 0.0;
        for j in 0..n_e {
            for (t, w) in common::gauss4() {
                let s = (j as f64 + t) * h;
                let d = gm.eval(&u, 0, s) - exact(s);
                e2 += w * h * d * d;
            }
        }
        errors.push(e2.sqrt());
    }
    for w in errors.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate > 1.9, "rates from {errors:?}");
    }
}

fn position_map(gm: &GraphMesh<f64>, u: &[f64]) -> Vec<([i64; 3], f64)> {
    let mut v: Vec<_> = gm
        .points()
        .iter()
        .zip(u)
        .map(|(p, &x)| (p.to_f64().map(|c| (c * 1e9).round() as i64), x))
        .collect();
    v.sort_by_key(|e| e.0);
    v
}

#[test]
fn reparametrization_leaves_solution_unchanged() {
    let mut dir = BTreeMap::new();
    dir.insert(1, 1.0);
    dir.insert(2, -0.5);
    let net = y_graph(4, dir);
    let q = |x: &Vec3<f64>| 3.0 * x.x() - x.y();
    let g = |x: &Vec3<f64>| 0.5 + x.y();
    let base = {
        let gm = build_graph_mesh(&net).unwrap();
        let u = solve_decoupled(&gm, &q, &g);
        position_map(&gm, &u)
    };
    for e in 0..3 {
        let rev = net.with_reversed_edge(e);
        let gm = build_graph_mesh(&rev).unwrap();
        let u = solve_decoupled(&gm, &q, &g);
        let other = position_map(&gm, &u);
        for (a, b) in base.iter().zip(&other) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-12, "edge {e}: {} vs {}", a.1, b.1);
        }
    }
}

#[test]
fn kirchhoff_balance_is_consistent() {
    let mut dir = BTreeMap::new();
    dir.insert(1, 1.0);
    dir.insert(2, 0.0);
    dir.insert(3, 2.0);
    let mut imbalance = Vec::new();
    for n_e in [4, 8, 16, 32] {
        let net = y_graph(n_e, dir.clone());
        let gm = build_graph_mesh(&net).unwrap();
        let u = solve_decoupled(&gm, &|x| 1.0 + x.x(), &|_| 0.0);
        let c = gm.node_dof(0);
        let mut sum = 0.0;
        for e in 0..3 {
            let ed = net.edges()[e];
            let k = gm.spacing(e);
            let inner = gm.edge_dofs(e)[n_e - 1];
            // outward slope from the bifurcation, weighted by the cross-section
            sum += PI * ed.radius * ed.radius * (u[inner] - u[c]) / k;
        }
        imbalance.push((sum.abs(), 1.0 / n_e as f64));
    }
    for (res, k) in &imbalance {
        assert!(*res <= 20.0 * k, "{imbalance:?}");
    }
    assert!(imbalance[3].0 < imbalance[0].0 / 4.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn operators_are_symmetric(n_e in 1usize..6, r in 0.01f64..0.2, c in 1.0f64..4.0) {
        let net = y_graph(n_e, BTreeMap::new()).with_radius(r).unwrap();
        let gm = build_graph_mesh(&net).unwrap();
        let eps = |x: &Vec3<f64>| c + x.y() * x.y();
        let k = assemble_graph_stiffness(&gm, &eps);
        let m = assemble_graph_reaction(&gm, &eps, false);
        prop_assert!(k.asymmetry().unwrap() <= 1e-15 * k.max_abs());
        prop_assert!(m.asymmetry().unwrap() <= 1e-15 * m.max_abs());
    }
}
