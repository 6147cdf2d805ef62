//! Error norms, gas reconstruction, convergence fits and VTK/CSV output.

use std::io::{BufRead, Write};

use crate::assembly1d::GasSplitting;
use crate::assembly3d::rt0_value;
use crate::coupling::AverageStencil;
use crate::error::{Error, Result};
use crate::geometry::{tet_quadrature_deg2, Vec3};
use crate::graph1d::GraphMesh;
use crate::mesh3d::TetMesh;
use crate::scalar::Real;
use crate::spatial::SegmentIndex;

/// `‖φ_h − φ‖_{L²(Ω)}` for a cellwise constant `φ_h`, by degree-2 quadrature.
pub fn l2_error_cells<T, F>(mesh: &TetMesh<T>, phi_h: &[T], exact: &F) -> T
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    l2_error_impl(mesh, phi_h, exact, |_| true)
}

/// As [`l2_error_cells`], ignoring quadrature points closer than `r_cut` to any segment.
pub fn l2_error_cells_excluding<T, F>(
    mesh: &TetMesh<T>,
    phi_h: &[T],
    exact: &F,
    segments: &[(Vec3<T>, Vec3<T>)],
    r_cut: T,
) -> T
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    if segments.is_empty() || !(r_cut > T::zero()) {
        return l2_error_cells(mesh, phi_h, exact);
    }
    let index = SegmentIndex::from_segments(segments);
    l2_error_impl(mesh, phi_h, exact, |x| !index.any_within(x, r_cut))
}

fn l2_error_impl<T, F>(
    mesh: &TetMesh<T>,
    phi_h: &[T],
    exact: &F,
    keep: impl Fn(&Vec3<T>) -> bool,
) -> T
where
    T: Real,
    F: Fn(&Vec3<T>) -> T + ?Sized,
{
    assert_eq!(phi_h.len(), mesh.n_tets(), "one value per tet expected");
    let rule = tet_quadrature_deg2::<T>();
    let mut sum = T::zero();
    for t in 0..mesh.n_tets() {
        let p = mesh.tet_points(t);
        let vol = mesh.tet_volume(t);
        for (lam, w) in &rule {
            let x =
                p[0].scale(lam[0]) + p[1].scale(lam[1]) + p[2].scale(lam[2]) + p[3].scale(lam[3]);
            if keep(&x) {
                let d = phi_h[t] - exact(&x);
                sum += *w * vol * d * d;
            }
        }
    }
    sum.sqrt()
}

/// Gas potential and field at one point of the tube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSample<T> {
    pub phi: T,
    /// Field component along the edge tangent.
    pub e_tangential: T,
    /// Field component along the outward radial direction.
    pub e_radial: T,
}

/// Evaluates `Φ_g = Φ_Λ(s) + Φ_r(s) r²` and `E_g = −∇Φ_g` at arc length `s` on edge `e`.
pub fn reconstruct_gas<T: Real>(
    split: &GasSplitting<T>,
    e: usize,
    s: T,
    r: T,
) -> Result<GasSample<T>> {
    let gm = &split.gmesh;
    let net = gm.network();
    if e >= net.edges().len() {
        return Err(Error::Domain(format!("edge {e} does not exist")));
    }
    let radius = net.edges()[e].radius;
    let len = net.edge_length(e);
    if r < T::zero() || r > radius {
        return Err(Error::Domain(format!(
            "radial position {r} outside [0, {radius}]"
        )));
    }
    if s < T::zero() || s > len {
        return Err(Error::Domain(format!("arc length {s} outside [0, {len}]")));
    }
    let x = net.point_at(e, s);
    let phi_r = split.phi_r(&x);
    let prof = GasSplitting::<T>::profile(r);
    let phi = gm.eval(&split.phi_lambda, e, s) + phi_r * prof;

    let k = gm.spacing(e);
    let n_e = net.edges()[e].n_e;
    let j = (s / k).floor().to_usize().unwrap_or(0).min(n_e - 1);
    let dofs = gm.edge_dofs(e);
    let dphi_lambda = (split.phi_lambda[dofs[j + 1]] - split.phi_lambda[dofs[j]]) / k;
    let half = k / T::lit(2.0);
    let (s0, s1) = ((s - half).max(T::zero()), (s + half).min(len));
    let dphi_r =
        (split.phi_r(&net.point_at(e, s1)) - split.phi_r(&net.point_at(e, s0))) / (s1 - s0);
    Ok(GasSample {
        phi,
        e_tangential: -(dphi_lambda + dphi_r * prof),
        e_radial: -(T::lit(2.0) * r * phi_r),
    })
}

/// `|Φ_g(R, s) − Φ̂_s(s)|` at every coupling quadrature point: the mismatch between the
/// reconstructed gas potential on the tube wall and the circle average of `Φ_s`.
pub fn interface_gaps<T: Real>(
    stencils: &[AverageStencil<T>],
    split: &GasSplitting<T>,
    phi_s: &[T],
) -> Result<Vec<T>> {
    let net = split.gmesh.network();
    stencils
        .iter()
        .map(|st| {
            let e = st.edge;
            let a = net.nodes()[net.edges()[e].a];
            let s = (st.point - a)
                .dot(&net.tangent(e))
                .max(T::zero())
                .min(net.edge_length(e));
            let gas = reconstruct_gas(split, e, s, st.radius)?;
            Ok((gas.phi - st.apply(phi_s)).abs())
        })
        .collect()
}

/// Least-squares fit of `log(error)` against `log(R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
}

impl ConvergenceTable {
    /// CSV with a header row `R,error`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("R,error\n");
        for (r, e) in &self.points {
            s.push_str(&format!("{r:.6e},{e:.10e}\n"));
        }
        s
    }
}

pub fn convergence_table(points: &[(f64, f64)]) -> Result<ConvergenceTable> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a convergence fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some((r, e)) = points.iter().find(|(r, e)| !(*r > 0.0) || !(*e > 0.0)) {
        return Err(Error::Domain(format!(
            "non-positive entry ({r}, {e}) in convergence data"
        )));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::InvalidParameter(format!("radius {} repeated", a.0)));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(ConvergenceTable {
        points: points.to_vec(),
        slope,
        intercept: my - slope * mx,
    })
}

/// Named fields on the 3D mesh.
#[derive(Debug, Clone, Default)]
pub struct FieldSet<T> {
    pub cell_scalars: Vec<(String, Vec<T>)>,
    pub cell_vectors: Vec<(String, Vec<Vec3<T>>)>,
}

impl<T: Real> FieldSet<T> {
    /// `Phi_s` and the RT0 flux `D_s` evaluated at tet centroids.
    pub fn from_solution(mesh: &TetMesh<T>, phi_s: &[T], d: &[T]) -> Self {
        let dc = (0..mesh.n_tets())
            .map(|t| rt0_value(mesh, d, t, &mesh.tet_centroid(t)))
            .collect();
        FieldSet {
            cell_scalars: vec![("Phi_s".into(), phi_s.to_vec())],
            cell_vectors: vec![("D_s".into(), dc)],
        }
    }
}

fn vtk_header<W: Write>(w: &mut W, title: &str) -> std::io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")
}

fn vtk_points<T: Real, W: Write>(w: &mut W, pts: &[Vec3<T>]) -> std::io::Result<()> {
    writeln!(w, "POINTS {} double", pts.len())?;
    for p in pts {
        let c = p.to_f64();
        writeln!(w, "{:.16e} {:.16e} {:.16e}", c[0], c[1], c[2])?;
    }
    Ok(())
}

/// Legacy ASCII VTK unstructured grid with cell data.
pub fn write_vtk<T: Real, W: Write>(
    mesh: &TetMesh<T>,
    fields: &FieldSet<T>,
    mut w: W,
) -> Result<()> {
    for (name, v) in &fields.cell_scalars {
        if v.len() != mesh.n_tets() {
            return Err(Error::Dimension(format!(
                "cell field {name} has {} values for {} tets",
                v.len(),
                mesh.n_tets()
            )));
        }
    }
    for (name, v) in &fields.cell_vectors {
        if v.len() != mesh.n_tets() {
            return Err(Error::Dimension(format!(
                "cell field {name} has {} values for {} tets",
                v.len(),
                mesh.n_tets()
            )));
        }
    }
    vtk_header(&mut w, "emdim 3D fields")?;
    vtk_points(&mut w, mesh.vertices())?;
    let nt = mesh.n_tets();
    writeln!(w, "CELLS {} {}", nt, 5 * nt)?;
    for t in mesh.tets() {
        writeln!(w, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "10")?;
    }
    if !fields.cell_scalars.is_empty() || !fields.cell_vectors.is_empty() {
        writeln!(w, "CELL_DATA {nt}")?;
        for (name, v) in &fields.cell_scalars {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for x in v {
                writeln!(w, "{:.16e}", x.to_f64_lossy())?;
            }
        }
        for (name, v) in &fields.cell_vectors {
            writeln!(w, "VECTORS {name} double")?;
            for x in v {
                let c = x.to_f64();
                writeln!(w, "{:.16e} {:.16e} {:.16e}", c[0], c[1], c[2])?;
            }
        }
    }
    Ok(())
}

/// Legacy ASCII VTK polyline file of the extended graph with `Phi_Lambda` point data.
pub fn write_graph_vtk<T: Real, W: Write>(
    gm: &GraphMesh<T>,
    phi_lambda: &[T],
    mut w: W,
) -> Result<()> {
    if phi_lambda.len() != gm.n_dofs() {
        return Err(Error::Dimension(format!(
            "graph field has {} values for {} dofs",
            phi_lambda.len(),
            gm.n_dofs()
        )));
    }
    vtk_header(&mut w, "emdim graph fields")?;
    vtk_points(&mut w, gm.points())?;
    let ns = gm.n_segments();
    writeln!(w, "CELLS {} {}", ns, 3 * ns)?;
    for s in gm.segments() {
        writeln!(w, "2 {} {}", s.dofs[0], s.dofs[1])?;
    }
    writeln!(w, "CELL_TYPES {ns}")?;
    for _ in 0..ns {
        writeln!(w, "3")?;
    }
    writeln!(w, "CELL_DATA {ns}")?;
    writeln!(w, "SCALARS radius double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for s in gm.segments() {
        writeln!(w, "{:.16e}", s.radius.to_f64_lossy())?;
    }
    writeln!(w, "POINT_DATA {}", gm.n_dofs())?;
    writeln!(w, "SCALARS Phi_Lambda double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for x in phi_lambda {
        writeln!(w, "{:.16e}", x.to_f64_lossy())?;
    }
    Ok(())
}

/// Contents of a legacy VTK file as read back by [`read_vtk`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtkData {
    pub n_points: usize,
    pub n_cells: usize,
    pub cell_scalars: Vec<(String, Vec<f64>)>,
    pub point_scalars: Vec<(String, Vec<f64>)>,
}

/// Reads the geometry counts and scalar data of a file written by this module.
pub fn read_vtk<R: BufRead>(r: R) -> Result<VtkData> {
    let mut tokens: Vec<(usize, String)> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i < 3 {
            continue;
        }
        tokens.extend(line.split_whitespace().map(|t| (i + 1, t.to_string())));
    }
    let mut out = VtkData::default();
    let mut it = tokens.into_iter().peekable();
    let bad = |line: usize, msg: &str| Error::Format {
        line,
        msg: msg.to_string(),
    };
    let num = |it: &mut std::iter::Peekable<std::vec::IntoIter<(usize, String)>>| -> Result<(usize, f64)> {
        let (l, t) = it.next().ok_or_else(|| bad(0, "unexpected end of file"))?;
        t.parse::<f64>().map(|v| (l, v)).map_err(|_| bad(l, "expected a number"))
    };
    let mut in_point_data = false;
    while let Some((line, key)) = it.next() {
        match key.as_str() {
            "DATASET" => {
                it.next();
            }
            "POINTS" => {
                out.n_points = num(&mut it)?.1 as usize;
                it.next();
                for _ in 0..3 * out.n_points {
                    num(&mut it)?;
                }
            }
            "CELLS" => {
                out.n_cells = num(&mut it)?.1 as usize;
                let total = num(&mut it)?.1 as usize;
                for _ in 0..total {
                    num(&mut it)?;
                }
            }
            "CELL_TYPES" => {
                let n = num(&mut it)?.1 as usize;
                for _ in 0..n {
                    num(&mut it)?;
                }
            }
            "CELL_DATA" => {
                num(&mut it)?;
                in_point_data = false;
            }
            "POINT_DATA" => {
                num(&mut it)?;
                in_point_data = true;
            }
            "SCALARS" => {
                let (_, name) = it.next().ok_or_else(|| bad(line, "missing field name"))?;
                it.next();
                if it.peek().map(|t| t.1.parse::<usize>().is_ok()) == Some(true) {
                    it.next();
                }
                if it.peek().map(|t| t.1.as_str()) == Some("LOOKUP_TABLE") {
                    it.next();
                    it.next();
                }
                let n = if in_point_data {
                    out.n_points
                } else {
                    out.n_cells
                };
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(num(&mut it)?.1);
                }
                if in_point_data {
                    out.point_scalars.push((name, v));
                } else {
                    out.cell_scalars.push((name, v));
                }
            }
            "VECTORS" => {
                it.next();
                it.next();
                let n = if in_point_data {
                    out.n_points
                } else {
                    out.n_cells
                };
                for _ in 0..3 * n {
                    num(&mut it)?;
                }
            }
            other => return Err(bad(line, &format!("unexpected keyword '{other}'"))),
        }
    }
    Ok(out)
}
