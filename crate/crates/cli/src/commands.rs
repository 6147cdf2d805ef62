//! Subcommand implementations.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use emdim::assembly1d::GasSplitting;
use emdim::cases::{tc1_case, tc1_published, verify_manufactured};
use emdim::graph1d::write_graph;
use emdim::mesh3d::write_mesh_dump;
use emdim::postproc::{
    convergence_table, interface_gaps, l2_error_cells, write_graph_vtk, write_vtk, FieldSet,
};
use emdim::problem::{discretize, solve, Discretization};
use emdim::solver::{Solution, SolverReport};
use emdim::{CoupledProblem, Mesh};
use serde_json::{json, Value};

use crate::config::{CaseName, RunConfig};

/// Failure classes mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Solver(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn solver_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Solver(e.into())
}

/// Maximum number of circle samples per coupling point; used by the verify check.
const VERIFY_POINTS: usize = 200;
const VERIFY_STEP: f64 = 1e-6;
const VERIFY_LIMIT: f64 = 1e-8;

fn out_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    let dir = cfg.output.dir.as_deref().unwrap_or(Path::new("out"));
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
        .map_err(config_err)?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(solver_err)
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    write_text(path, &s)
}

fn build_problem(
    cfg: &RunConfig,
    radius: Option<f64>,
    mesh: Option<&Mesh>,
) -> Result<CoupledProblem, Failure> {
    if cfg.case == CaseName::Custom {
        return cfg.custom_problem().map_err(config_err);
    }
    let def = cfg.case_definition(radius).map_err(config_err)?;
    let mesh = match mesh {
        Some(m) => m.clone(),
        None => def.build_mesh().map_err(config_err)?,
    };
    Ok(def.problem(mesh))
}

fn report_json(rep: &SolverReport) -> Value {
    json!({
        "iterations": rep.iterations,
        "restarts": rep.restarts,
        "relative_residual": rep.relative_residual,
        "converged": rep.converged,
        "stagnated": rep.stagnated,
    })
}

struct Solved {
    disc: Discretization<f64>,
    sol: Solution<f64>,
    report: SolverReport,
}

fn assemble_and_solve(cfg: &RunConfig, problem: &CoupledProblem) -> Result<Solved, Failure> {
    let disc = discretize(problem, &cfg.discretization())
        .context("assembly failed")
        .map_err(solver_err)?;
    let (sol, report) = solve(&disc, &cfg.solve_options())
        .context("solve failed")
        .map_err(solver_err)?;
    log::info!(
        "assembly {:.2}s, preconditioner setup {:.2}s, gmres {:.2}s",
        disc.assembly_time_s,
        report.setup_time_s,
        report.wall_time_s
    );
    Ok(Solved { disc, sol, report })
}

pub fn run(cfg: &RunConfig) -> CmdResult {
    let dir = out_dir(cfg)?;
    let problem = build_problem(cfg, None, None)?;
    let Solved { disc, sol, report } = assemble_and_solve(cfg, &problem)?;
    let radius = cfg.radius.unwrap_or(0.01);

    let exact = match cfg.case {
        CaseName::Tc1 => Some(tc1_case(radius).map_err(config_err)?),
        _ => None,
    };
    let l2_error = exact
        .as_ref()
        .map(|c| l2_error_cells(&problem.mesh, &sol.phi_s, &*c.phi_s));
    let split = GasSplitting::new(
        disc.gmesh.clone(),
        sol.phi_lambda.clone(),
        problem.q_over_eps0.clone(),
        problem.eps_g.clone(),
    );
    let gaps = interface_gaps(&disc.stencils, &split, &sol.phi_s).map_err(solver_err)?;
    let max_gap = gaps.iter().fold(0.0f64, |m, g| m.max(*g));

    let mut csv = String::from("R,error\n");
    if let Some(e) = l2_error {
        csv.push_str(&format!("{radius:.6e},{e:.10e}\n"));
    }
    write_text(&dir.join("errors.csv"), &csv)?;
    let mut graph_csv = String::from("dof,x,y,z,phi_lambda\n");
    for (i, (p, v)) in disc.gmesh.points().iter().zip(&sol.phi_lambda).enumerate() {
        graph_csv.push_str(&format!(
            "{i},{:.10e},{:.10e},{:.10e},{v:.10e}\n",
            p.x(),
            p.y(),
            p.z()
        ));
    }
    write_text(&dir.join("graph.csv"), &graph_csv)?;

    if cfg.output.vtk.unwrap_or(true) {
        let fields = FieldSet::from_solution(&problem.mesh, &sol.phi_s, &sol.d);
        let f = File::create(dir.join("fields.vtk")).map_err(solver_err)?;
        write_vtk(&problem.mesh, &fields, BufWriter::new(f)).map_err(solver_err)?;
        let f = File::create(dir.join("graph.vtk")).map_err(solver_err)?;
        write_graph_vtk(&disc.gmesh, &sol.phi_lambda, BufWriter::new(f)).map_err(solver_err)?;
    }

    let dims = disc.system.dims;
    let summary = json!({
        "case": cfg.case,
        "radius": radius,
        "l2_error": l2_error,
        "slope": Value::Null,
        "iterations": report.iterations,
        "solver": report_json(&report),
        "neumann_residual": sol.neumann_residual(&disc.system),
        "relative_asymmetry": disc.system.relative_asymmetry(),
        "max_interface_gap": max_gap,
        "mesh": {
            "tets": problem.mesh.n_tets(),
            "faces": problem.mesh.n_faces(),
            "graph_dofs": disc.gmesh.n_dofs(),
            "graph_segments": disc.gmesh.n_segments(),
            "unknowns": dims.total(),
        },
        "config": cfg.to_json(),
    });
    write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "{}: {} unknowns, {} iterations, residual {:.3e}{}",
        serde_json::to_string(&cfg.case)
            .unwrap_or_default()
            .trim_matches('"'),
        dims.total(),
        report.iterations,
        report.relative_residual,
        l2_error.map_or(String::new(), |e| format!(", L2 error {e:.4e}"))
    );
    if !report.converged {
        return Err(solver_err(anyhow!(
            "GMRES stopped after {} iterations at relative residual {:.3e}",
            report.iterations,
            report.relative_residual
        )));
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> CmdResult {
    if cfg.case != CaseName::Tc1 {
        return Err(config_err(anyhow!(
            "sweep needs a case with an exact solution (case = \"tc1\")"
        )));
    }
    let radii = cfg.sweep.radii.clone().unwrap_or_default();
    if radii.len() < 3 {
        return Err(config_err(anyhow!(
            "sweep.radii needs at least 3 radii, got {}",
            radii.len()
        )));
    }
    let dir = out_dir(cfg)?;
    // the mesh depends on the line, not on the radius
    let mesh = cfg
        .case_definition(Some(radii[0]))
        .and_then(|d| Ok(d.build_mesh()?))
        .map_err(config_err)?;
    let mut points = Vec::new();
    let mut runs = Vec::new();
    let mut failure = None;
    for &r in &radii {
        let problem = build_problem(cfg, Some(r), Some(&mesh))?;
        let exact = tc1_case(r).map_err(config_err)?;
        match assemble_and_solve(cfg, &problem) {
            Ok(s) => {
                let e = l2_error_cells(&problem.mesh, &s.sol.phi_s, &*exact.phi_s);
                println!(
                    "R = {r:.1e}: L2 error {e:.4e}, {} iterations",
                    s.report.iterations
                );
                runs.push(json!({"R": r, "l2_error": e, "solver": report_json(&s.report)}));
                points.push((r, e));
                if !s.report.converged {
                    failure = Some(anyhow!("solve at R = {r:e} did not converge"));
                    break;
                }
            }
            Err(Failure::Solver(e)) => {
                failure = Some(e.context(format!("solve at R = {r:e} failed")));
                break;
            }
            Err(other) => return Err(other),
        }
    }
    let complete = failure.is_none();
    let (csv, slope) = match convergence_table(&points) {
        Ok(t) => (t.to_csv(), Some(t.slope)),
        Err(_) => {
            let mut s = String::from("R,error\n");
            for (r, e) in &points {
                s.push_str(&format!("{r:.6e},{e:.10e}\n"));
            }
            (s, None)
        }
    };
    write_text(&dir.join("errors.csv"), &csv)?;
    let summary = json!({
        "case": cfg.case,
        "l2_error": points.first().map(|p| p.1),
        "slope": slope,
        "complete": complete,
        "runs": runs,
        "mesh": {"tets": mesh.n_tets(), "faces": mesh.n_faces()},
        "config": cfg.to_json(),
    });
    write_json(&dir.join("summary.json"), &summary)?;
    if let Some(s) = slope {
        println!("fitted slope {s:.4}");
    }
    match failure {
        None => Ok(()),
        Some(e) => Err(solver_err(
            e.context("sweep incomplete; partial table written"),
        )),
    }
}

pub fn gen(cfg: &RunConfig) -> CmdResult {
    if cfg.case == CaseName::Custom {
        return Err(config_err(anyhow!(
            "gen writes the built-in cases; the custom case is already on disk"
        )));
    }
    let dir = out_dir(cfg)?;
    let def = cfg.case_definition(None).map_err(config_err)?;
    let mesh = def
        .build_mesh()
        .context("mesh generation")
        .map_err(config_err)?;
    let mut w = BufWriter::new(File::create(dir.join("mesh.emdim")).map_err(config_err)?);
    write_mesh_dump(&mesh, &mut w).map_err(config_err)?;
    w.flush().map_err(config_err)?;
    let mut w = BufWriter::new(File::create(dir.join("graph.emdim")).map_err(config_err)?);
    write_graph(&def.network, &mut w).map_err(config_err)?;
    w.flush().map_err(config_err)?;
    let (n_dir, n_neu) = mesh.boundary_counts();
    println!("vertices {}", mesh.n_vertices());
    println!("tets {}", mesh.n_tets());
    println!(
        "faces {} (dirichlet {n_dir}, neumann {n_neu})",
        mesh.n_faces()
    );
    println!("volume {}", mesh.total_volume());
    println!("graph nodes {}", def.network.nodes().len());
    println!("graph edges {}", def.network.edges().len());
    println!("graph length {}", def.network.total_length());
    Ok(())
}

pub fn verify(cfg: &RunConfig, published: bool) -> CmdResult {
    if cfg.case != CaseName::Tc1 {
        return Err(config_err(anyhow!(
            "verify checks the manufactured straight-line case (case = \"tc1\")"
        )));
    }
    let r = cfg.radius.unwrap_or(0.01);
    let case = if published {
        tc1_published(r)
    } else {
        tc1_case(r)
    }
    .map_err(config_err)?;
    let rep = verify_manufactured(&case, VERIFY_POINTS, VERIFY_STEP);
    for (name, v) in &rep.entries {
        println!("{name:<22} {v:.3e}");
    }
    let passed = rep.max_residual <= VERIFY_LIMIT;
    println!(
        "max residual {:.3e}: {}",
        rep.max_residual,
        if passed { "consistent" } else { "INCONSISTENT" }
    );
    let dir = out_dir(cfg)?;
    let residuals: serde_json::Map<String, Value> = rep
        .entries
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    write_json(
        &dir.join("verify.json"),
        &json!({
            "case": case.name,
            "radius": r,
            "step": VERIFY_STEP,
            "residuals": residuals,
            "max_residual": rep.max_residual,
            "passed": passed,
        }),
    )?;
    if passed {
        Ok(())
    } else {
        Err(solver_err(anyhow!(
            "manufactured data violate the equations (max residual {:.3e})",
            rep.max_residual
        )))
    }
}
