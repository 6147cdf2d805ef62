use std::f64::consts::PI;

use emdim::cases::{
    tc1_case, tc1_published, tc2_case, tc3_case, verify_manufactured, ManufacturedCase, Tc3Params,
};
use emdim::field::constant;
use emdim::graph1d::build_graph_mesh;
use emdim::mesh3d::BoundaryKind;
use emdim::{Error, Vec3};

const H: f64 = 1e-6;

#[test]
fn straight_line_data_satisfy_every_equation() {
    for r in [1e-2, 1e-4, 1e-6] {
        let rep = verify_manufactured(&tc1_case(r).unwrap(), 50, H);
        assert!(rep.max_residual <= 1e-8, "R = {r}: {rep:?}");
        for name in [
            "graph_equation",
            "line_source",
            "gas_equation",
            "interface_continuity",
            "interface_flux",
            "constitutive",
            "divergence",
            "dirichlet_boundary",
            "neumann_boundary",
            "graph_dirichlet",
        ] {
            assert!(rep.get(name).is_some(), "missing {name}");
        }
    }
}

#[test]
fn published_listing_fails_the_oracle() {
    let r = 1e-2;
    let rep = verify_manufactured(&tc1_published(r).unwrap(), 20, H);
    // ν = R against D·n = 0 on the caps
    assert!((rep.get("neumann_boundary").unwrap() - r).abs() < 1e-12);
    // g = 0 breaks the flux jump condition by 2
    assert!((rep.get("interface_flux").unwrap() - 2.0).abs() < 1e-6);
    // line balance and graph equation see the wrong g and source sign
    assert!(rep.get("line_source").unwrap() > 1e-3);
    assert!(rep.get("graph_equation").unwrap() > 1e-3);
    assert!(rep.max_residual > 1.0);
}

#[test]
fn perturbed_exchange_shows_up_in_line_balance() {
    let r = 1e-3;
    let mut case = tc1_case(r).unwrap();
    case.g = constant(-1.0);
    let rep = verify_manufactured(&case, 10, H);
    assert!((rep.get("line_source").unwrap() - 2.0 * PI * r).abs() < 1e-12);
    assert!((rep.get("interface_flux").unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn zero_case_has_zero_residuals() {
    let rep = verify_manufactured(&ManufacturedCase::<f64>::zero(1e-2), 10, H);
    assert_eq!(rep.max_residual, 0.0);
}

#[test]
fn interface_values_of_exact_fields() {
    let r: f64 = 1e-2;
    let c = tc1_case(r).unwrap();
    let x = Vec3::new(0.5 + r, 0.5, 0.3);
    assert!(((c.phi_s)(&x) - r).abs() < 1e-15);
    assert!(((c.phi_g)(r, 0.3) - r).abs() < 1e-15);
    assert_eq!(c.graph_dirichlet, (r / 2.0, r / 2.0));
    let d = (c.d_s)(&x);
    assert!((d.x() - 1.0).abs() < 1e-12 && d.y().abs() < 1e-15 && d.z() == 0.0);
}

#[test]
fn radius_must_fit_the_domain() {
    assert!(matches!(tc1_case(0.5f64), Err(Error::InvalidGeometry(_))));
    assert!(matches!(tc1_case(-1e-3f64), Err(Error::InvalidGeometry(_))));
}

#[test]
fn straight_line_boundary_tags() {
    let c = tc1_case(1e-2f64).unwrap();
    let def = c.definition(0.5, 0.25, 0.3, 4).unwrap();
    let mesh = def.build_mesh().unwrap();
    for f in mesh.boundary_faces() {
        let n = mesh.face_unit_normal(f);
        let kind = mesh.boundary_kind(f).unwrap();
        if n.z().abs() > 0.5 {
            assert_eq!(kind, BoundaryKind::Neumann);
        } else {
            assert_eq!(kind, BoundaryKind::Dirichlet);
        }
    }
    assert_eq!(def.network.edges().len(), 1);
    assert_eq!(def.network.edges()[0].n_e, 4);
}

#[test]
fn partial_line_has_one_tip() {
    let def = tc2_case(1e-2f64, 0.5, 0.25, 0.3, 10).unwrap();
    let gm = build_graph_mesh(&def.network).unwrap();
    let tips = gm.tips();
    assert_eq!(tips.len(), 1);
    assert!((gm.points()[tips[0].1].z() - 0.5).abs() < 1e-15);
    assert_eq!(gm.dirichlet_dofs().len(), 1);
}

#[test]
fn synthetic_tree_matches_target_scale() {
    let def = tc3_case(&Tc3Params::<f64>::new(7, 1.0)).unwrap();
    let gm = build_graph_mesh(&def.network).unwrap();
    assert!(
        (10_000..=14_000).contains(&gm.n_segments()),
        "{}",
        gm.n_segments()
    );
    let mesh = def.build_mesh().unwrap();
    assert_eq!(mesh.n_tets(), 48_000);
    let (n_dir, n_neu) = mesh.boundary_counts();
    assert_eq!(n_dir, 2 * 2 * 20 * 20);
    assert_eq!(n_neu, 4 * 2 * 20 * 20);
    // same seed, same tree
    let again = tc3_case(&Tc3Params::<f64>::new(7, 1.0)).unwrap();
    assert_eq!(again.network.nodes(), def.network.nodes());
}
