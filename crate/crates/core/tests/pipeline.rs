use std::collections::BTreeMap;
use std::sync::Arc;

use emdim::assembly3d::rt0_interpolate;
use emdim::cases::{tc1_case, tc2_case, CaseDefinition};
use emdim::field::constant;
use emdim::graph1d::{build_graph_mesh, Network1D};
use emdim::mesh3d::{generate_box_mesh, BoundaryKind, BoxMeshSpec, TetMesh};
use emdim::postproc::l2_error_cells;
use emdim::problem::{discretize, run, DiscretizationOptions, Problem, SolveOptions};
use emdim::solver::PrecondKind;
use emdim::{Error, Vec3};

fn coarse_tc1(r: f64, h_far: f64) -> CaseDefinition<f64> {
    tc1_case(r)
        .unwrap()
        .definition(h_far, h_far / 4.0, 0.1, 16)
        .unwrap()
}

fn unit_box(h: f64) -> TetMesh<f64> {
    generate_box_mesh(&BoxMeshSpec::new(Vec3::zero(), Vec3::new(1.0, 1.0, 1.0), h)).unwrap()
}

fn bulk_problem(mesh: TetMesh<f64>, eps: f64, phi: fn(&Vec3<f64>) -> f64) -> Problem<f64> {
    Problem {
        mesh,
        network: Network1D::empty(),
        eps_s: constant(eps),
        eps_g: constant(1.0),
        phi_bar: Arc::new(phi),
        nu: constant(0.0),
        q_over_eps0: constant(0.0),
        g: constant(0.0),
        g_tip: constant(0.0),
        tip_factor: 1.0,
    }
}

#[test]
fn linear_potential_is_reproduced_without_a_network() {
    // mixed elements recover cell means of a linear potential and its exact flux
    let eps = 2.5;
    let mesh = unit_box(0.25)
        .classify_boundary(|c, _| {
            Some(if c.z() > 1.0 - 1e-12 {
                BoundaryKind::Neumann
            } else {
                BoundaryKind::Dirichlet
            })
        })
        .unwrap();
    let phi = |x: &Vec3<f64>| 1.0 + x.x() - 2.0 * x.y() + 0.5 * x.z();
    let mut p = bulk_problem(mesh, eps, phi);
    // D = −ε∇Φ, outward normal +z on the Neumann face
    p.nu = constant(-eps * 0.5);
    let (disc, sol, rep) = run(
        &p,
        &DiscretizationOptions::default(),
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(rep.converged);
    for t in 0..p.mesh.n_tets() {
        let c = p.mesh.tet_centroid(t);
        assert!((sol.phi_s[t] - phi(&c)).abs() < 1e-8, "tet {t}");
    }
    let d_exact = rt0_interpolate(&p.mesh, &|_: &Vec3<f64>| {
        Vec3::new(-eps, 2.0 * eps, -0.5 * eps)
    });
    for (a, b) in sol.d.iter().zip(&d_exact) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!(sol.neumann_residual(&disc.system) < 1e-9);
    assert!(sol.phi_lambda.is_empty() && sol.lambda_d.is_empty());
}

#[test]
fn permittivity_scaling_scales_flux_only() {
    let r = 1e-2;
    let base = coarse_tc1(r, 0.5);
    let mesh = base.build_mesh().unwrap();
    let p1 = base.problem(mesh.clone());
    let c = 3.0;
    let mut p2 = base.problem(mesh);
    p2.eps_s = constant(c);
    p2.eps_g = constant(c);
    p2.q_over_eps0 = constant(-2.0 / r * c);
    p2.g = constant(-2.0 * c);
    let sopts = SolveOptions::default();
    let (_, s1, _) = run(&p1, &DiscretizationOptions::default(), &sopts).unwrap();
    let (_, s2, _) = run(&p2, &DiscretizationOptions::default(), &sopts).unwrap();
    for (a, b) in s1.phi_s.iter().zip(&s2.phi_s) {
        assert!((a - b).abs() < 1e-8 * r);
    }
    for (a, b) in s1.phi_lambda.iter().zip(&s2.phi_lambda) {
        assert!((a - b).abs() < 1e-8 * r);
    }
    for (a, b) in s1.d.iter().zip(&s2.d) {
        assert!((c * a - b).abs() < 1e-8 * (1.0 + b.abs()));
    }
}

#[test]
fn straight_line_solve_is_consistent() {
    let r = 1e-2;
    let def = coarse_tc1(r, 0.25);
    let p = def.problem(def.build_mesh().unwrap());
    let (disc, sol, rep) = run(
        &p,
        &DiscretizationOptions::default(),
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(rep.converged, "{rep:?}");
    assert!(disc.system.relative_asymmetry() <= 1e-12);
    assert!(
        disc.system.relative_residual(
            &[
                sol.d.clone(),
                sol.phi_s.clone(),
                sol.phi_lambda.clone(),
                sol.lambda_n.clone(),
                sol.lambda_d.clone()
            ]
            .concat()
        ) <= 1e-9
    );
    assert!(sol.neumann_residual(&disc.system) < 1e-9);
    // Dirichlet values are imposed exactly through the multiplier
    for (dof, v) in disc.gmesh.dirichlet_dofs() {
        assert!((sol.phi_lambda[dof] - v).abs() < 1e-10 * r);
    }
}

#[test]
fn refinement_reduces_the_error() {
    let r = 1e-2;
    let exact = tc1_case(r).unwrap().phi_s;
    let mut errors = Vec::new();
    for h in [0.5, 0.25] {
        let def = coarse_tc1(r, h);
        let p = def.problem(def.build_mesh().unwrap());
        let (_, sol, _) = run(
            &p,
            &DiscretizationOptions::default(),
            &SolveOptions::default(),
        )
        .unwrap();
        errors.push(l2_error_cells(&p.mesh, &sol.phi_s, &*exact));
    }
    assert!(errors[1] < 0.75 * errors[0], "{errors:?}");
}

#[test]
fn preconditioning_does_not_change_the_solution() {
    let def = coarse_tc1(1e-2, 0.5);
    let p = def.problem(def.build_mesh().unwrap());
    let dopts = DiscretizationOptions::default();
    let with = SolveOptions::default();
    let mut without = SolveOptions::default();
    without.precond.kind = PrecondKind::None;
    let (_, a, ra) = run(&p, &dopts, &with).unwrap();
    let (_, b, rb) = run(&p, &dopts, &without).unwrap();
    assert!(ra.converged && rb.converged);
    assert!(ra.iterations < rb.iterations);
    let scale = a.phi_s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (x, y) in a.phi_s.iter().zip(&b.phi_s) {
        assert!((x - y).abs() < 1e-7 * scale);
    }
}

#[test]
fn graph_alone_matches_cosh_profile() {
    let r = 0.5;
    let kappa = 2.0 / r;
    let exact = |s: f64| (kappa * (s - 0.5)).cosh() / (kappa / 2.0).cosh();
    let mut errs = Vec::new();
    for n_e in [10, 20] {
        let mut dir = BTreeMap::new();
        dir.insert(0, 1.0);
        dir.insert(1, 1.0);
        let net =
            Network1D::single_edge(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), r, n_e, dir).unwrap();
        let p = Problem {
            network: net,
            ..bulk_problem(TetMesh::new(Vec::new(), Vec::new()).unwrap(), 1.0, |_| 0.0)
        };
        let (disc, sol, rep) = run(
            &p,
            &DiscretizationOptions::default(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(rep.converged);
        assert_eq!(disc.system.dims.n_f, 0);
        let e = disc
            .gmesh
            .points()
            .iter()
            .zip(&sol.phi_lambda)
            .fold(0.0f64, |m, (x, v)| m.max((v - exact(x.z())).abs()));
        errs.push(e);
    }
    let rate = (errs[0] / errs[1]).log2();
    assert!(rate > 1.8, "{errs:?}");
}

#[test]
fn line_leaving_the_mesh_is_reported() {
    let mut dir = BTreeMap::new();
    dir.insert(0, 0.0);
    let net = Network1D::single_edge(
        Vec3::new(0.5, 0.5, 0.5),
        Vec3::new(0.5, 0.5, 1.5),
        1e-3,
        4,
        dir,
    )
    .unwrap();
    let p = Problem {
        network: net,
        ..bulk_problem(unit_box(0.5), 1.0, |_| 0.0)
    };
    match discretize(&p, &DiscretizationOptions::default()) {
        Err(Error::CouplingGeometry { edge, .. }) => assert_eq!(edge, 0),
        other => panic!("expected coupling geometry error, got {other:?}"),
    }
}

#[test]
fn partial_line_with_null_flux_tip() {
    let def = tc2_case(1e-2f64, 0.5, 0.125, 0.1, 20).unwrap();
    let p = def.problem(def.build_mesh().unwrap());
    let (disc, sol, rep) = run(
        &p,
        &DiscretizationOptions::default(),
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(rep.converged);
    let gm = build_graph_mesh(&def.network).unwrap();
    assert_eq!(disc.gmesh.n_dofs(), gm.n_dofs());
    assert!(sol.phi_lambda.iter().all(|v| v.is_finite()));
    assert!((sol.phi_lambda[gm.dirichlet_dofs()[0].0] - 5e-3).abs() < 1e-12);
}
