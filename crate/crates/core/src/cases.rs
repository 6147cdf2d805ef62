//! Test problems and the manufactured-solution consistency oracle.
//!
//! The straight-line case has the exact potentials
//! `Φ_s = R (1 − log(r/R))` outside the tube and `Φ_g = r²/(2R) + R/2` inside it.
//! All data are derived from these fields: `D_s = (R/r) r̂`, `q/ε₀ = −2/R`, `g = −2`,
//! `Φ_Λ = R/2`, `Φ_r = 1/(2R)` and `ν = 0` on the end caps.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{constant, Field, VectorField};
use crate::geometry::Vec3;
use crate::graph1d::{generate_random_tree, Network1D, TreeParams};
use crate::mesh3d::{generate_box_mesh, BoundaryKind, BoxMeshSpec, TetMesh};
use crate::problem::Problem;
use crate::scalar::Real;

/// Maps a boundary face (centroid, unit outward normal) to its condition.
pub type BoundaryRule<T> = Arc<dyn Fn(&Vec3<T>, &Vec3<T>) -> Option<BoundaryKind> + Send + Sync>;

/// Potential inside the tube as a function of `(r, s)`.
pub type GasField<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// A complete problem definition: mesh recipe, boundary rule, network and data.
#[derive(Clone)]
pub struct CaseDefinition<T: Real> {
    pub name: String,
    pub mesh_spec: BoxMeshSpec<T>,
    pub boundary: BoundaryRule<T>,
    pub network: Network1D<T>,
    pub eps_s: Field<T>,
    pub eps_g: Field<T>,
    pub phi_bar: Field<T>,
    pub nu: Field<T>,
    pub q_over_eps0: Field<T>,
    pub g: Field<T>,
    pub g_tip: Field<T>,
    pub tip_factor: T,
    /// Exact solution, when known.
    pub exact: Option<ManufacturedCase<T>>,
}

impl<T: Real> std::fmt::Debug for CaseDefinition<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaseDefinition")
            .field("name", &self.name)
            .field("mesh_spec", &self.mesh_spec)
            .field("n_edges", &self.network.edges().len())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl<T: Real> CaseDefinition<T> {
    /// Generates and classifies the mesh.
    pub fn build_mesh(&self) -> Result<TetMesh<T>> {
        let rule = self.boundary.clone();
        generate_box_mesh(&self.mesh_spec)?.classify_boundary(move |c, n| rule(c, n))
    }

    /// Problem on a given (classified) mesh.
    pub fn problem(&self, mesh: TetMesh<T>) -> Problem<T> {
        Problem {
            mesh,
            network: self.network.clone(),
            eps_s: self.eps_s.clone(),
            eps_g: self.eps_g.clone(),
            phi_bar: self.phi_bar.clone(),
            nu: self.nu.clone(),
            q_over_eps0: self.q_over_eps0.clone(),
            g: self.g.clone(),
            g_tip: self.g_tip.clone(),
            tip_factor: self.tip_factor,
        }
    }
}

/// Exact fields and derived data around a straight tube from `axis_a` to `axis_b`.
#[derive(Clone)]
pub struct ManufacturedCase<T: Real> {
    pub name: String,
    pub radius: T,
    pub eps_s: T,
    pub eps_g: T,
    pub box_lo: Vec3<T>,
    pub box_hi: Vec3<T>,
    pub axis_a: Vec3<T>,
    pub axis_b: Vec3<T>,
    pub phi_s: Field<T>,
    pub d_s: VectorField<T>,
    pub phi_g: GasField<T>,
    pub q_over_eps0: Field<T>,
    pub g: Field<T>,
    pub phi_bar: Field<T>,
    pub nu: Field<T>,
    /// Graph Dirichlet values at `axis_a` and `axis_b`.
    pub graph_dirichlet: (T, T),
}

impl<T: Real> std::fmt::Debug for ManufacturedCase<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("radius", &self.radius)
            .finish()
    }
}

fn tc1_box<T: Real>() -> (Vec3<T>, Vec3<T>, Vec3<T>, Vec3<T>) {
    (
        Vec3::new(T::lit(-0.5), T::lit(-0.5), T::zero()),
        Vec3::new(T::lit(1.5), T::lit(1.5), T::one()),
        Vec3::new(T::lit(0.5), T::lit(0.5), T::zero()),
        Vec3::new(T::lit(0.5), T::lit(0.5), T::one()),
    )
}

/// Distance of `x` to the z-parallel line through `(cx, cy)` and the radial unit vector.
fn radial<T: Real>(x: &Vec3<T>, cx: T, cy: T) -> (T, Vec3<T>) {
    let d = Vec3::new(x.x() - cx, x.y() - cy, T::zero());
    let r = d.norm();
    (r, d.scale(T::one() / r))
}

/// End caps (normals along z) are Neumann, the lateral faces Dirichlet.
fn caps_neumann<T: Real>() -> BoundaryRule<T> {
    Arc::new(|_: &Vec3<T>, n: &Vec3<T>| {
        Some(if n.z().abs() > T::lit(0.5) {
            BoundaryKind::Neumann
        } else {
            BoundaryKind::Dirichlet
        })
    })
}

/// Manufactured straight-line case with data derived from the exact potentials.
pub fn tc1_case<T: Real>(radius: T) -> Result<ManufacturedCase<T>> {
    let (box_lo, box_hi, axis_a, axis_b) = tc1_box::<T>();
    let half_width = T::one();
    if !(radius > T::zero()) || radius >= T::lit(0.1) * half_width {
        return Err(Error::InvalidGeometry(format!(
            "tube radius {radius} must lie in (0, {}) for this domain",
            T::lit(0.1) * half_width
        )));
    }
    let (cx, cy) = (axis_a.x(), axis_a.y());
    let r0 = radius;
    let phi_s: Field<T> = Arc::new(move |x: &Vec3<T>| {
        let (r, _) = radial(x, cx, cy);
        r0 * (T::one() - (r / r0).ln())
    });
    let d_s: VectorField<T> = Arc::new(move |x: &Vec3<T>| {
        let (r, u) = radial(x, cx, cy);
        u.scale(r0 / r)
    });
    let phi_g: GasField<T> =
        Arc::new(move |r: T, _s: T| r * r / (T::lit(2.0) * r0) + r0 / T::lit(2.0));
    let d_nu = d_s.clone();
    let nu: Field<T> = Arc::new(move |x: &Vec3<T>| {
        // outward normal of the end caps
        let n = if x.z() < T::lit(0.5) {
            -T::one()
        } else {
            T::one()
        };
        d_nu(x).z() * n
    });
    Ok(ManufacturedCase {
        name: "tc1".into(),
        radius,
        eps_s: T::one(),
        eps_g: T::one(),
        box_lo,
        box_hi,
        axis_a,
        axis_b,
        phi_bar: phi_s.clone(),
        phi_s,
        d_s,
        phi_g,
        q_over_eps0: constant(T::lit(-2.0) / radius),
        g: constant(T::lit(-2.0)),
        nu,
        graph_dirichlet: (radius / T::lit(2.0), radius / T::lit(2.0)),
    })
}

/// The straight-line case with the data as originally published (`ν = R`, `g = 0`,
/// graph right-hand side `2πR`). These data are inconsistent with the exact fields;
/// the oracle reports nonzero residuals for them.
pub fn tc1_published<T: Real>(radius: T) -> Result<ManufacturedCase<T>> {
    let mut c = tc1_case(radius)?;
    c.name = "tc1-published".into();
    c.nu = constant(radius);
    c.g = constant(T::zero());
    c.q_over_eps0 = constant(T::lit(2.0) / radius);
    Ok(c)
}

impl<T: Real> ManufacturedCase<T> {
    /// The trivial case: every field and datum vanishes.
    pub fn zero(radius: T) -> Self {
        let (box_lo, box_hi, axis_a, axis_b) = tc1_box::<T>();
        ManufacturedCase {
            name: "zero".into(),
            radius,
            eps_s: T::one(),
            eps_g: T::one(),
            box_lo,
            box_hi,
            axis_a,
            axis_b,
            phi_s: constant(T::zero()),
            d_s: Arc::new(|_: &Vec3<T>| Vec3::zero()),
            phi_g: Arc::new(|_: T, _: T| T::zero()),
            q_over_eps0: constant(T::zero()),
            g: constant(T::zero()),
            phi_bar: constant(T::zero()),
            nu: constant(T::zero()),
            graph_dirichlet: (T::zero(), T::zero()),
        }
    }

    /// Mesh recipe graded toward the axis.
    pub fn mesh_spec(&self, h_far: T, h_near: T, band: T) -> BoxMeshSpec<T> {
        BoxMeshSpec::new(self.box_lo, self.box_hi, h_far).refine_polyline(
            &[self.axis_a, self.axis_b],
            h_near,
            band,
        )
    }

    /// The graph: one edge along the axis with Dirichlet values at both ends.
    pub fn network(&self, n_e: usize) -> Result<Network1D<T>> {
        let mut dir = BTreeMap::new();
        dir.insert(0, self.graph_dirichlet.0);
        dir.insert(1, self.graph_dirichlet.1);
        Network1D::single_edge(self.axis_a, self.axis_b, self.radius, n_e, dir)
    }

    pub fn definition(
        &self,
        h_far: T,
        h_near: T,
        band: T,
        n_e: usize,
    ) -> Result<CaseDefinition<T>> {
        Ok(CaseDefinition {
            name: self.name.clone(),
            mesh_spec: self.mesh_spec(h_far, h_near, band),
            boundary: caps_neumann(),
            network: self.network(n_e)?,
            eps_s: constant(self.eps_s),
            eps_g: constant(self.eps_g),
            phi_bar: self.phi_bar.clone(),
            nu: self.nu.clone(),
            q_over_eps0: self.q_over_eps0.clone(),
            g: self.g.clone(),
            g_tip: constant(T::zero()),
            tip_factor: T::one(),
            exact: Some(self.clone()),
        })
    }

    fn frame(&self) -> (Vec3<T>, Vec3<T>, Vec3<T>, T) {
        let axis = self.axis_b - self.axis_a;
        let len = axis.norm();
        let t = axis.scale(T::one() / len);
        let (e1, e2) = t.orthonormal_frame();
        (t, e1, e2, len)
    }
}

/// Residuals of every strong equation and condition, sampled at `n_check` points.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `(equation, max |residual|)`.
    pub entries: Vec<(String, f64)>,
    pub max_residual: f64,
}

impl ResidualReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == name).map(|e| e.1)
    }
}

/// Checks that the data of `case` satisfy the reduced equations for its exact fields,
/// using central differences with step `h` and 64-point circle means.
pub fn verify_manufactured<T: Real>(
    case: &ManufacturedCase<T>,
    n_check: usize,
    h: T,
) -> ResidualReport {
    let (t, e1, e2, len) = case.frame();
    let pi = T::PI();
    let two = T::lit(2.0);
    let four_pi = T::lit(4.0) * pi;
    let r0 = case.radius;
    let (eps_s, eps_g) = (case.eps_s, case.eps_g);
    let n = n_check.max(1);
    let on_axis = |s: T| case.axis_a + t.scale(s);
    let ring =
        |s: T, rho: T, th: T| on_axis(s) + (e1.scale(th.cos()) + e2.scale(th.sin())).scale(rho);
    let n_circle = 64;
    let angles: Vec<T> = (0..n_circle)
        .map(|k| two * pi * T::from_count(k) / T::from_count(n_circle))
        .collect();
    let circle_mean = |s: T| {
        angles
            .iter()
            .map(|&a| (case.phi_s)(&ring(s, r0, a)))
            .sum::<T>()
            / T::from_count(n_circle)
    };
    let phi_lambda = |s: T| (case.phi_g)(T::zero(), s);
    let dphi_g_dr = |r: T, s: T| ((case.phi_g)(r + h, s) - (case.phi_g)(r - h, s)) / (two * h);
    let grad = |f: &dyn Fn(&Vec3<T>) -> T, x: &Vec3<T>| {
        let mut g = Vec3::zero();
        for k in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp.0[k] += h;
            xm.0[k] -= h;
            g.0[k] = (f(&xp) - f(&xm)) / (two * h);
        }
        g
    };
    let golden = T::lit(2.399_963_229_728_653);

    let mut worst: BTreeMap<&'static str, T> = BTreeMap::new();
    let mut record = |name: &'static str, v: T| {
        let e = worst.entry(name).or_insert(T::zero());
        *e = e.max(v.abs());
    };
    for k in 0..n {
        let frac = (T::from_count(k) + T::lit(0.5)) / T::from_count(n);
        let s = frac * len;
        let x_axis = on_axis(s);
        let th = golden * T::from_count(k);
        let q = (case.q_over_eps0)(&x_axis);
        let g = (case.g)(&x_axis);
        let pl = phi_lambda(s);
        let mean = circle_mean(s);

        let d2 = (phi_lambda(s + h) - two * pl + phi_lambda(s - h)) / (h * h);
        record(
            "graph_equation",
            -pi * r0 * r0 * eps_g * d2 + four_pi * eps_g * (pl - mean) - pi * r0 * r0 * q,
        );

        let flux: T = angles
            .iter()
            .map(|&a| {
                let u = e1.scale(a.cos()) + e2.scale(a.sin());
                (case.d_s)(&ring(s, r0, a)).dot(&u) * r0
            })
            .sum::<T>()
            * two
            * pi
            / T::from_count(n_circle);
        record(
            "line_source",
            flux - (four_pi * eps_g * (pl - mean) - two * pi * r0 * g),
        );

        let dg_r = -eps_g * dphi_g_dr(r0, s);
        record("gas_equation", two * pi * r0 * dg_r - pi * r0 * r0 * q);

        let x_r = ring(s, r0, th);
        let u = e1.scale(th.cos()) + e2.scale(th.sin());
        record(
            "interface_continuity",
            (case.phi_g)(r0, s) - (case.phi_s)(&x_r),
        );
        record("interface_flux", (case.d_s)(&x_r).dot(&u) - dg_r + g);

        // bulk points away from the axis
        let span = case.box_hi - case.box_lo;
        let rho = T::lit(0.05) + T::lit(0.4) * frac;
        let xb = ring(s, rho, th + T::one());
        if (0..3).all(|c| xb[c] > case.box_lo[c] && xb[c] < case.box_hi[c]) {
            let gphi = grad(&*case.phi_s, &xb);
            record("constitutive", ((case.d_s)(&xb) + gphi.scale(eps_s)).norm());
            let mut div = T::zero();
            for c in 0..3 {
                let mut xp = xb;
                let mut xm = xb;
                xp.0[c] += h;
                xm.0[c] -= h;
                div += ((case.d_s)(&xp)[c] - (case.d_s)(&xm)[c]) / (two * h);
            }
            record("divergence", div);
        }

        // boundary samples: lateral faces (Dirichlet) and end caps (Neumann)
        let a = frac;
        let b = (golden * T::from_count(k + 1)).sin().abs();
        let lateral = [
            Vec3::new(
                case.box_lo.x(),
                case.box_lo.y() + a * span.y(),
                case.box_lo.z() + b * span.z(),
            ),
            Vec3::new(
                case.box_hi.x(),
                case.box_lo.y() + b * span.y(),
                case.box_lo.z() + a * span.z(),
            ),
            Vec3::new(
                case.box_lo.x() + a * span.x(),
                case.box_lo.y(),
                case.box_lo.z() + b * span.z(),
            ),
            Vec3::new(
                case.box_lo.x() + b * span.x(),
                case.box_hi.y(),
                case.box_lo.z() + a * span.z(),
            ),
        ];
        for p in &lateral {
            record("dirichlet_boundary", (case.phi_s)(p) - (case.phi_bar)(p));
        }
        for (z, nz) in [(case.box_lo.z(), -T::one()), (case.box_hi.z(), T::one())] {
            let p = Vec3::new(
                case.box_lo.x() + a * span.x(),
                case.box_lo.y() + b * span.y(),
                z,
            );
            record("neumann_boundary", (case.d_s)(&p).z() * nz - (case.nu)(&p));
        }
    }
    record(
        "graph_dirichlet",
        phi_lambda(T::zero()) - case.graph_dirichlet.0,
    );
    record("graph_dirichlet", phi_lambda(len) - case.graph_dirichlet.1);

    let entries: Vec<(String, f64)> = worst
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_f64_lossy()))
        .collect();
    let max_residual = entries.iter().fold(0.0f64, |m, e| m.max(e.1));
    ResidualReport {
        entries,
        max_residual,
    }
}

/// Line from the centre of the bottom face to the middle of the straight-line box,
/// ending in a null-flux tip; no exact solution.
pub fn tc2_case<T: Real>(
    radius: T,
    h_far: T,
    h_near: T,
    band: T,
    n_e: usize,
) -> Result<CaseDefinition<T>> {
    let base = tc1_case(radius)?;
    let tip = Vec3::new(T::lit(0.5), T::lit(0.5), T::lit(0.5));
    let mut dir = BTreeMap::new();
    dir.insert(0, radius / T::lit(2.0));
    let network = Network1D::single_edge(base.axis_a, tip, radius, n_e, dir)?;
    Ok(CaseDefinition {
        name: "tc2".into(),
        mesh_spec: BoxMeshSpec::new(base.box_lo, base.box_hi, h_far).refine_polyline(
            &[base.axis_a, tip],
            h_near,
            band,
        ),
        boundary: caps_neumann(),
        network,
        eps_s: constant(T::one()),
        eps_g: constant(T::one()),
        phi_bar: base.phi_bar.clone(),
        nu: constant(T::zero()),
        q_over_eps0: base.q_over_eps0.clone(),
        g: base.g.clone(),
        g_tip: constant(T::zero()),
        tip_factor: T::one(),
        exact: None,
    })
}

/// Parameters of the synthetic tree case.
#[derive(Debug, Clone)]
pub struct Tc3Params<T> {
    pub tree: TreeParams<T>,
    /// Uniform mesh size of the unit cube.
    pub h: T,
}

impl<T: Real> Tc3Params<T> {
    /// Default scale: about 12k segments in a cube of 48k tets. `scale` in (0, 1]
    /// shrinks the number of tree generations.
    pub fn new(seed: u64, scale: f64) -> Self {
        let depth = ((22.0 * scale).round() as usize).max(1);
        let mut tree = TreeParams::unit_cube(depth, seed);
        tree.branch_prob = 0.47;
        Tc3Params {
            tree,
            h: T::lit(0.05),
        }
    }
}

/// Random tree grown from the centre of the top face of the unit cube. The bottom face
/// is grounded, the top face and the root are held at 1, the side faces are insulating
/// and every leaf is a null-flux tip.
pub fn tc3_case<T: Real>(params: &Tc3Params<T>) -> Result<CaseDefinition<T>> {
    let network = generate_random_tree(&params.tree)?;
    let rule: BoundaryRule<T> = Arc::new(|_: &Vec3<T>, n: &Vec3<T>| {
        Some(if n.z().abs() > T::lit(0.5) {
            BoundaryKind::Dirichlet
        } else {
            BoundaryKind::Neumann
        })
    });
    Ok(CaseDefinition {
        name: "tc3".into(),
        mesh_spec: BoxMeshSpec::new(
            Vec3::zero(),
            Vec3::new(T::one(), T::one(), T::one()),
            params.h,
        ),
        boundary: rule,
        network,
        eps_s: constant(T::one()),
        eps_g: constant(T::one()),
        phi_bar: Arc::new(|x: &Vec3<T>| x.z()),
        nu: constant(T::zero()),
        q_over_eps0: constant(T::zero()),
        g: constant(T::zero()),
        g_tip: constant(T::zero()),
        tip_factor: T::one(),
        exact: None,
    })
}
