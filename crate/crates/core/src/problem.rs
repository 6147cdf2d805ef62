//! End-to-end pipeline: problem data → block system → solution.

use std::time::Instant;

use crate::assembly1d::{
    assemble_dirichlet_multiplier, assemble_graph_reaction, assemble_graph_source,
    assemble_graph_stiffness, assemble_tip_neumann,
};
use crate::assembly3d::{
    assemble_divergence, assemble_flux_mass, assemble_neumann_multiplier, assemble_rhs_dirichlet,
    assemble_rhs_neumann, DofLayout3D,
};
use crate::coupling::{
    assemble_coupling_cross, assemble_coupling_self, assemble_line_rhs, build_average_stencils,
    AverageStencil, CouplingOptions,
};
use crate::error::Result;
use crate::field::Field;
use crate::graph1d::{build_graph_mesh, GraphMesh, Network1D};
use crate::mesh3d::TetMesh;
use crate::scalar::Real;
use crate::solver::{
    assemble_global, build_preconditioner, extract_solution, gmres, BlockRhs, BlockSystem, Blocks,
    GmresOptions, PreconditionerOptions, Solution, SolverReport,
};

/// Geometry, coefficients and data of a coupled problem.
#[derive(Clone)]
pub struct Problem<T: Real> {
    /// Tetrahedral mesh with boundary tags; may be empty (graph problem only).
    pub mesh: TetMesh<T>,
    /// Embedded network; may be empty (3D problem only).
    pub network: Network1D<T>,
    pub eps_s: Field<T>,
    pub eps_g: Field<T>,
    /// Potential on Dirichlet faces.
    pub phi_bar: Field<T>,
    /// Normal flux `D_s·n` on Neumann faces.
    pub nu: Field<T>,
    /// Line charge `q/ε₀` on the graph.
    pub q_over_eps0: Field<T>,
    /// Exchange datum `g` along the graph (line source).
    pub g: Field<T>,
    /// Datum `g(S)` at Neumann tips.
    pub g_tip: Field<T>,
    /// Scaling of the tip slope `dΦ_Λ/ds = −factor · g(S) / ε_g`.
    pub tip_factor: T,
}

impl<T: Real> std::fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("n_tets", &self.mesh.n_tets())
            .field("n_edges", &self.network.edges().len())
            .field("tip_factor", &self.tip_factor)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiscretizationOptions {
    pub coupling: CouplingOptions,
    /// Row-lumped reaction mass instead of the consistent one.
    pub lumped_reaction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    pub gmres: GmresOptions,
    pub precond: PreconditionerOptions,
}

/// Everything produced by discretizing a problem.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub layout: DofLayout3D,
    pub gmesh: GraphMesh<T>,
    pub stencils: Vec<AverageStencil<T>>,
    pub system: BlockSystem<T>,
    pub assembly_time_s: f64,
}

/// Assembles the global block system.
///
/// Without tetrahedra the graph equation is solved with a vanishing circle average.
pub fn discretize<T: Real>(
    problem: &Problem<T>,
    opts: &DiscretizationOptions,
) -> Result<Discretization<T>> {
    let start = Instant::now();
    let mesh = &problem.mesh;
    let layout = DofLayout3D::new(mesh);
    let gmesh = build_graph_mesh(&problem.network)?;
    let stencils = if mesh.n_tets() > 0 {
        build_average_stencils(mesh, &gmesh, &opts.coupling)?
    } else {
        Vec::new()
    };
    let eps_g = &*problem.eps_g;

    let stiffness = assemble_graph_stiffness(&gmesh, eps_g);
    let reaction = assemble_graph_reaction(&gmesh, eps_g, opts.lumped_reaction);
    let a_lambda = stiffness.add_scaled(&reaction, T::one()).scaled(-T::one());
    let (l_d, f_dl) = assemble_dirichlet_multiplier(&gmesh);
    let source = assemble_graph_source(&gmesh, &*problem.q_over_eps0);
    let tips = assemble_tip_neumann(&gmesh, &*problem.g_tip, problem.tip_factor);
    let f: Vec<T> = source.iter().zip(&tips).map(|(a, b)| -(*a + *b)).collect();

    let blocks = Blocks {
        a_s: assemble_flux_mass(mesh, &*problem.eps_s)?,
        b: assemble_divergence(mesh),
        c_ss: assemble_coupling_self(mesh, &stencils, eps_g),
        c_ls: assemble_coupling_cross(mesh, &gmesh, &stencils, eps_g),
        a_lambda,
        l: assemble_neumann_multiplier(mesh, &layout),
        l_d,
    };
    let rhs = BlockRhs {
        f_d: assemble_rhs_dirichlet(mesh, &*problem.phi_bar),
        g: assemble_line_rhs(mesh, &stencils, &*problem.g),
        f,
        f_n: assemble_rhs_neumann(mesh, &layout, &*problem.nu),
        f_dl,
    };
    let system = assemble_global(blocks, rhs)?;
    let assembly_time_s = start.elapsed().as_secs_f64();
    log::info!(
        "assembled {} unknowns ({} faces, {} tets, {} graph dofs, {} neumann faces, {} graph dirichlet) in {:.2}s",
        system.dims.total(),
        system.dims.n_f,
        system.dims.n_t,
        system.dims.n_l,
        system.dims.n_g,
        system.dims.n_d,
        assembly_time_s
    );
    Ok(Discretization {
        layout,
        gmesh,
        stencils,
        system,
        assembly_time_s,
    })
}

/// Solves the assembled system. A preconditioner failure is an error; a solve that
/// misses the tolerance returns the best iterate with `report.converged == false`.
pub fn solve<T: Real>(
    disc: &Discretization<T>,
    opts: &SolveOptions,
) -> Result<(Solution<T>, SolverReport)> {
    let sys = &disc.system;
    let precond = build_preconditioner(sys, &opts.precond)?;
    let (x, report) = gmres(
        &sys.matrix,
        &sys.rhs_vec,
        None,
        precond.as_ref(),
        &opts.gmres,
    );
    let sol = extract_solution(sys, &x)?;
    Ok((sol, report))
}

/// Discretizes and solves in one call.
pub fn run<T: Real>(
    problem: &Problem<T>,
    dopts: &DiscretizationOptions,
    sopts: &SolveOptions,
) -> Result<(Discretization<T>, Solution<T>, SolverReport)> {
    let disc = discretize(problem, dopts)?;
    let (sol, report) = solve(&disc, sopts)?;
    Ok((disc, sol, report))
}
