//! Run configuration: TOML on disk, resolved against per-case defaults.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use emdim::cases::{tc1_case, tc2_case, tc3_case, CaseDefinition, Tc3Params};
use emdim::coupling::CouplingOptions;
use emdim::field::constant;
use emdim::graph1d::read_graph;
use emdim::mesh3d::{load_gmsh, read_mesh_dump, GmshOptions};
use emdim::problem::{DiscretizationOptions, SolveOptions};
use emdim::solver::{AsInverse, GmresOptions, PrecondKind, PreconditionerOptions};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseName {
    Tc1,
    Tc2,
    Tc3,
    /// Mesh and graph read from files, constant data.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondName {
    Block,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsInverseName {
    Lumped,
    Exact,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub h_far: Option<f64>,
    pub h_near: Option<f64>,
    pub band: Option<f64>,
    /// `.msh` (gmsh 2 ASCII) or an EMDIM-MESH dump; custom case only.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// Elements per edge for the straight-line cases.
    pub n_e: Option<usize>,
    /// EMDIM-GRAPH file; custom case only.
    pub file: Option<PathBuf>,
    /// Tree generations relative to the default depth (tc3).
    pub scale: Option<f64>,
    pub seed: Option<u64>,
}

/// Constant coefficients and data for the custom case.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub eps_s: Option<f64>,
    pub eps_g: Option<f64>,
    pub phi_bar: Option<f64>,
    pub nu: Option<f64>,
    pub q_over_eps0: Option<f64>,
    pub g: Option<f64>,
    pub g_tip: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: Option<f64>,
    pub restart: Option<usize>,
    pub max_iter: Option<usize>,
    pub precond: Option<PrecondName>,
    pub a_s_inverse: Option<AsInverseName>,
    pub shift: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub n_circle: Option<usize>,
    pub n_quad: Option<usize>,
    pub lumped_reaction: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub vtk: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseName,
    pub radius: Option<f64>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(name: &str, v: Option<f64>) -> anyhow::Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => bail!("{name} must be positive, got {x}"),
        _ => Ok(()),
    }
}

fn fill<T>(slot: &mut Option<T>, v: T) {
    if slot.is_none() {
        *slot = Some(v);
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let c: RunConfig = toml::from_str(text)?;
        Ok(c)
    }

    /// Fills every unset value with the default of the selected case and validates.
    pub fn resolve(mut self) -> anyhow::Result<Self> {
        let (h_far, h_near, band) = match self.case {
            CaseName::Tc1 | CaseName::Tc2 => (0.1, 0.01, 0.02),
            CaseName::Tc3 => (0.05, 0.05, 0.05),
            CaseName::Custom => (0.1, 0.1, 0.1),
        };
        fill(&mut self.radius, 0.01);
        fill(&mut self.mesh.h_far, h_far);
        fill(&mut self.mesh.h_near, h_near);
        fill(&mut self.mesh.band, band);
        fill(&mut self.graph.n_e, 100);
        fill(&mut self.graph.scale, 1.0);
        fill(&mut self.graph.seed, 7);
        if self.case != CaseName::Custom && self.physics != PhysicsConfig::default() {
            bail!("the physics section applies only to case = \"custom\"; the built-in cases fix their data");
        }
        let p = &mut self.physics;
        if self.case == CaseName::Custom {
            fill(&mut p.eps_s, 1.0);
            fill(&mut p.eps_g, 1.0);
            fill(&mut p.phi_bar, 0.0);
            fill(&mut p.nu, 0.0);
            fill(&mut p.q_over_eps0, 0.0);
            fill(&mut p.g, 0.0);
            fill(&mut p.g_tip, 0.0);
        }
        let s = &mut self.solver;
        let d = GmresOptions::default();
        fill(&mut s.tol, d.tol);
        fill(&mut s.restart, d.restart);
        fill(&mut s.max_iter, d.max_iter);
        fill(&mut s.precond, PrecondName::Block);
        fill(&mut s.a_s_inverse, AsInverseName::Lumped);
        fill(&mut s.shift, 0.0);
        let c = &mut self.coupling;
        let cd = CouplingOptions::default();
        fill(&mut c.n_circle, cd.n_circle);
        fill(&mut c.n_quad, cd.n_quad);
        fill(&mut c.lumped_reaction, false);
        fill(&mut self.sweep.radii, vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6]);
        fill(&mut self.output.dir, PathBuf::from("out"));
        fill(&mut self.output.vtk, true);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> anyhow::Result<()> {
        positive("radius", self.radius)?;
        positive("mesh.h_far", self.mesh.h_far)?;
        positive("mesh.h_near", self.mesh.h_near)?;
        positive("mesh.band", self.mesh.band)?;
        positive("graph.scale", self.graph.scale)?;
        positive("physics.eps_s", self.physics.eps_s)?;
        positive("physics.eps_g", self.physics.eps_g)?;
        if let Some(t) = self.solver.tol {
            if !(t > 0.0 && t < 1.0) {
                bail!("solver.tol must lie in (0, 1), got {t}");
            }
        }
        if let Some(s) = self.solver.shift {
            if !(s >= 0.0 && s.is_finite()) {
                bail!("solver.shift must be non-negative, got {s}");
            }
        }
        if self.solver.restart == Some(0) {
            bail!("solver.restart must be at least 1");
        }
        if self.graph.n_e == Some(0) {
            bail!("graph.n_e must be at least 1");
        }
        for r in self.sweep.radii.iter().flatten() {
            positive("sweep.radii", Some(*r))?;
        }
        let custom = self.case == CaseName::Custom;
        if custom && (self.mesh.file.is_none() || self.graph.file.is_none()) {
            bail!("case = \"custom\" needs mesh.file and graph.file");
        }
        if !custom && (self.mesh.file.is_some() || self.graph.file.is_some()) {
            bail!("mesh.file and graph.file are only read for case = \"custom\"");
        }
        Ok(())
    }

    pub fn discretization(&self) -> DiscretizationOptions {
        DiscretizationOptions {
            coupling: CouplingOptions {
                n_circle: self.coupling.n_circle.unwrap_or(8),
                n_quad: self.coupling.n_quad.unwrap_or(2),
            },
            lumped_reaction: self.coupling.lumped_reaction.unwrap_or(false),
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        let mut o = SolveOptions::default();
        o.gmres.tol = s.tol.unwrap_or(o.gmres.tol);
        o.gmres.restart = s.restart.unwrap_or(o.gmres.restart);
        o.gmres.max_iter = s.max_iter.unwrap_or(o.gmres.max_iter);
        o.precond = PreconditionerOptions {
            kind: match s.precond {
                Some(PrecondName::None) => PrecondKind::None,
                _ => PrecondKind::Block,
            },
            a_s_inverse: match s.a_s_inverse {
                Some(AsInverseName::Exact) => AsInverse::Exact,
                _ => AsInverse::Lumped,
            },
            shift: s.shift.unwrap_or(0.0),
            ..o.precond
        };
        o
    }

    /// Problem definition for radius `radius` (the configured one when `None`).
    pub fn case_definition(&self, radius: Option<f64>) -> anyhow::Result<CaseDefinition<f64>> {
        let r = radius.or(self.radius).unwrap_or(0.01);
        let m = &self.mesh;
        let (h_far, h_near, band) = (
            m.h_far.unwrap_or(0.1),
            m.h_near.unwrap_or(0.01),
            m.band.unwrap_or(0.02),
        );
        let n_e = self.graph.n_e.unwrap_or(100);
        Ok(match self.case {
            CaseName::Tc1 => tc1_case(r)?.definition(h_far, h_near, band, n_e)?,
            CaseName::Tc2 => tc2_case(r, h_far, h_near, band, n_e)?,
            CaseName::Tc3 => {
                let mut p = Tc3Params::new(
                    self.graph.seed.unwrap_or(7),
                    self.graph.scale.unwrap_or(1.0),
                );
                p.h = h_far;
                tc3_case(&p)?
            }
            CaseName::Custom => bail!("the custom case has no built-in definition"),
        })
    }

    /// Reads mesh and graph of the custom case.
    pub fn custom_problem(&self) -> anyhow::Result<emdim::CoupledProblem> {
        let mesh_path = self.mesh.file.as_ref().context("mesh.file is required")?;
        let graph_path = self.graph.file.as_ref().context("graph.file is required")?;
        let mesh = if mesh_path.extension().is_some_and(|e| e == "msh") {
            load_gmsh(mesh_path, &GmshOptions::default())
        } else {
            File::open(mesh_path)
                .map_err(emdim::Error::from)
                .and_then(|f| read_mesh_dump(BufReader::new(f)))
        }
        .with_context(|| format!("cannot load mesh {}", mesh_path.display()))?;
        let network = File::open(graph_path)
            .map_err(emdim::Error::from)
            .and_then(|f| read_graph(BufReader::new(f)))
            .with_context(|| format!("cannot load graph {}", graph_path.display()))?;
        let p = &self.physics;
        Ok(emdim::CoupledProblem {
            mesh,
            network,
            eps_s: constant(p.eps_s.unwrap_or(1.0)),
            eps_g: constant(p.eps_g.unwrap_or(1.0)),
            phi_bar: constant(p.phi_bar.unwrap_or(0.0)),
            nu: constant(p.nu.unwrap_or(0.0)),
            q_over_eps0: constant(p.q_over_eps0.unwrap_or(0.0)),
            g: constant(p.g.unwrap_or(0.0)),
            g_tip: constant(p.g_tip.unwrap_or(0.0)),
            tip_factor: 1.0,
        })
    }

    /// The resolved configuration as a JSON value (map keys sorted).
    pub fn to_json(&self) -> serde_json::Value {
        let v = serde_json::to_value(self).expect("config serializes");
        sort_keys(v)
    }
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(m) => {
            let sorted: BTreeMap<String, serde_json::Value> =
                m.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            serde_json::Value::Object(sorted.into_iter().collect())
        }
        other => other,
    }
}
