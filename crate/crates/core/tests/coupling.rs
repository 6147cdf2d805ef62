use std::collections::BTreeMap;
use std::f64::consts::PI;

use emdim::assembly1d::assemble_graph_reaction;
use emdim::coupling::{
    assemble_coupling_cross, assemble_coupling_self, assemble_line_rhs, build_average_stencils,
    circle_averages, CouplingOptions,
};
use emdim::graph1d::{build_graph_mesh, GraphEdge, GraphMesh, Network1D};
use emdim::mesh3d::{generate_box_mesh, BoxMeshSpec, TetMesh};
use emdim::{Error, Vec3};
use proptest::prelude::*;

fn box_mesh(lo: [f64; 3], hi: [f64; 3], h: f64) -> TetMesh<f64> {
    generate_box_mesh(&BoxMeshSpec::new(Vec3::from_f64(lo), Vec3::from_f64(hi), h)).unwrap()
}

fn bent_graph(r: f64, n_e: usize) -> GraphMesh<f64> {
    let nodes = vec![
        Vec3::new(0.2, 0.3, 0.1),
        Vec3::new(0.5, 0.5, 0.5),
        Vec3::new(0.8, 0.4, 0.9),
        Vec3::new(0.3, 0.8, 0.7),
    ];
    let edges = [(0, 1), (1, 2), (1, 3)]
        .iter()
        .map(|&(a, b)| GraphEdge {
            a,
            b,
            radius: r,
            n_e,
        })
        .collect();
    build_graph_mesh(&Network1D::new(nodes, edges, BTreeMap::new()).unwrap()).unwrap()
}

fn eps_g(x: &Vec3<f64>) -> f64 {
    1.0 + 0.5 * x.z()
}

#[test]
fn constant_field_is_reproduced() {
    let mesh = box_mesh([0.0; 3], [1.0; 3], 0.2);
    let gm = bent_graph(0.05, 4);
    let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
    assert_eq!(st.len(), 2 * gm.n_segments());
    let phi = vec![3.25; mesh.n_tets()];
    for v in circle_averages(&st, &phi) {
        assert!((v - 3.25).abs() < 1e-14);
    }
    for s in &st {
        let total: f64 = s.cells.iter().map(|c| c.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(s.cells.iter().all(|c| c.1 >= 0.0));
    }
}

#[test]
fn affine_field_mean_is_reproduced() {
    let r = 0.1;
    let mesh = box_mesh([0.2, 0.2, 0.0], [0.8, 0.8, 0.2], 0.02);
    let net = Network1D::single_edge(
        Vec3::new(0.5, 0.5, 0.0),
        Vec3::new(0.5, 0.5, 0.2),
        r,
        4,
        BTreeMap::new(),
    )
    .unwrap();
    let gm = build_graph_mesh(&net).unwrap();
    let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
    let f = |x: &Vec3<f64>| 1.0 + 2.0 * x.x() - x.y() + 0.5 * x.z();
    let phi: Vec<f64> = (0..mesh.n_tets())
        .map(|t| f(&mesh.tet_centroid(t)))
        .collect();
    for s in &st {
        // the circle mean of an affine function is its value on the axis
        let exact = f(&s.point);
        assert!((s.apply(&phi) - exact).abs() <= 0.02 * exact.abs());
    }
}

#[test]
fn log_profile_trace_within_two_percent() {
    let r = 0.1;
    let mesh = box_mesh([0.38, 0.38, 0.0], [0.62, 0.62, 0.02], 0.005);
    let net = Network1D::single_edge(
        Vec3::new(0.5, 0.5, 0.0),
        Vec3::new(0.5, 0.5, 0.02),
        r,
        4,
        BTreeMap::new(),
    )
    .unwrap();
    let gm = build_graph_mesh(&net).unwrap();
    let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
    let exact = |x: &Vec3<f64>| {
        let d = ((x.x() - 0.5).powi(2) + (x.y() - 0.5).powi(2)).sqrt();
        r * (1.0 - (d / r).ln())
    };
    let phi: Vec<f64> = (0..mesh.n_tets())
        .map(|t| exact(&mesh.tet_centroid(t)))
        .collect();
    for s in &st {
        let v = s.apply(&phi);
        assert!((v - r).abs() <= 0.02 * r, "{v} vs {r}");
    }
}

#[test]
fn cross_row_sums_match_reaction() {
    let mesh = box_mesh([0.0; 3], [1.0; 3], 0.25);
    let gm = bent_graph(0.03, 3);
    let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
    let c = assemble_coupling_cross(&mesh, &gm, &st, &eps_g);
    assert_eq!((c.nrows(), c.ncols()), (gm.n_dofs(), mesh.n_tets()));
    let m = assemble_graph_reaction(&gm, &eps_g, false);
    let a = c.mul_vec(&vec![1.0; mesh.n_tets()]);
    let b = m.mul_vec(&vec![1.0; gm.n_dofs()]);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn single_cell_mesh_gives_one_column() {
    let p = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(3.0, 0.0, 0.0),
        Vec3::new(0.0, 3.0, 0.0),
        Vec3::new(0.0, 0.0, 3.0),
    ];
    let mesh = TetMesh::new(p, vec![[0, 1, 2, 3]]).unwrap();
    let gm = bent_graph(0.01, 2);
    let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
    let c = assemble_coupling_cross(&mesh, &gm, &st, &eps_g);
    assert!(c.iter().all(|(_, j, _)| j == 0));
    assert!(c.nnz() > 0);
}

#[test]
fn self_coupling_total_and_support() {
    let mesh = box_mesh([0.0; 3], [1.0; 3], 0.25);
    let gm = bent_graph(0.03, 3);
    let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
    let css = assemble_coupling_self(&mesh, &st, &|_: &Vec3<f64>| 2.0);
    let ones = vec![1.0; mesh.n_tets()];
    let total: f64 = css.mul_vec(&ones).iter().sum();
    let length = gm.network().total_length();
    assert!((-total - 4.0 * PI * 2.0 * length).abs() < 1e-12);
    assert!(css.asymmetry().unwrap() <= 1e-14 * css.max_abs());
    let touched: std::collections::HashSet<usize> = st
        .iter()
        .flat_map(|s| s.cells.iter().map(|c| c.0))
        .collect();
    for t in 0..mesh.n_tets() {
        if !touched.contains(&t) {
            assert!(css.row(t).0.is_empty());
        }
    }
    assert!(touched.len() < mesh.n_tets());
    let diag = css.diagonal();
    assert!(diag.iter().all(|&d| d <= 0.0));
}

#[test]
fn line_rhs_totals() {
    let mesh = box_mesh([0.0; 3], [1.0; 3], 0.25);
    let r = 0.01;
    let gm = bent_graph(r, 3);
    let length = gm.network().total_length();
    let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
    let zero = assemble_line_rhs(&mesh, &st, &|_: &Vec3<f64>| 0.0);
    assert!(zero.iter().all(|&v| v == 0.0));
    let g1: f64 = assemble_line_rhs(&mesh, &st, &|_: &Vec3<f64>| 1.0)
        .iter()
        .sum();
    assert!((g1 - 2.0 * PI * r * length).abs() < 1e-14);
    let g2: f64 = assemble_line_rhs(&mesh, &st, &|_: &Vec3<f64>| -2.0)
        .iter()
        .sum();
    assert!((g2 + 4.0 * PI * r * length).abs() < 1e-14);
}

#[test]
fn graph_outside_mesh_is_reported() {
    let mesh = box_mesh([0.0; 3], [1.0; 3], 0.5);
    let net = Network1D::single_edge(
        Vec3::new(0.5, 0.5, 0.5),
        Vec3::new(0.5, 0.5, 1.5),
        0.01,
        4,
        BTreeMap::new(),
    )
    .unwrap();
    let gm = build_graph_mesh(&net).unwrap();
    let r = build_average_stencils(&mesh, &gm, &CouplingOptions::default());
    assert!(matches!(r, Err(Error::CouplingGeometry { edge: 0, .. })));
}

#[test]
fn samples_outside_are_dropped() {
    // an axis on the boundary face keeps only the inner half of the circle
    let mesh = box_mesh([0.0; 3], [1.0; 3], 0.25);
    let net = Network1D::single_edge(
        Vec3::new(0.0, 0.5, 0.2),
        Vec3::new(0.0, 0.5, 0.8),
        0.05,
        3,
        BTreeMap::new(),
    )
    .unwrap();
    let gm = build_graph_mesh(&net).unwrap();
    let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
    for s in &st {
        assert_eq!(s.kept, 4);
        let total: f64 = s.cells.iter().map(|c| c.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn cross_coupling_is_adjoint_to_averaging(seed in 0u64..1000) {
        let mesh = box_mesh([0.0; 3], [1.0; 3], 0.34);
        let gm = bent_graph(0.04, 2);
        let st = build_average_stencils(&mesh, &gm, &CouplingOptions::default()).unwrap();
        let c = assemble_coupling_cross(&mesh, &gm, &st, &eps_g);
        let v = |i: usize| (((i as u64 + 1) * (seed + 7) % 97) as f64) / 97.0 - 0.5;
        let a: Vec<f64> = (0..gm.n_dofs()).map(v).collect();
        let b: Vec<f64> = (0..mesh.n_tets()).map(|i| v(i + 1000)).collect();
        let lhs: f64 = a.iter().zip(c.mul_vec(&b)).map(|(x, y)| x * y).sum();
        // quadrature of 4π ε_g (Σ a_i ψ_i) b̂ along the graph
        let mut rhs = 0.0;
        for s in &st {
            let e = s.edge;
            let dofs = gm.edge_dofs(e);
            let start = gm.points()[dofs[0]];
            let arc = start.distance(&s.point);
            rhs += 4.0 * PI * s.weight * eps_g(&s.point) * gm.eval(&a, e, arc) * s.apply(&b);
        }
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}
