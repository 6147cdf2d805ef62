//! Embedded 1D networks and their P1 meshes.

mod io;
mod tree;

pub use io::{read_graph, write_graph, GRAPH_HEADER};
pub use tree::{generate_random_tree, TreeParams};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Role of a network node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Dirichlet,
    NeumannTip,
    Bifurcation,
    Internal,
}

impl NodeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeClass::Dirichlet => "dirichlet",
            NodeClass::NeumannTip => "neumann_tip",
            NodeClass::Bifurcation => "bifurcation",
            NodeClass::Internal => "internal",
        }
    }
}

/// A straight branch from node `a` to node `b`, parametrized by arc length from `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge<T> {
    pub a: usize,
    pub b: usize,
    pub radius: T,
    /// Number of P1 intervals on this edge.
    pub n_e: usize,
}

/// A connected network of straight tubes.
#[derive(Debug, Clone)]
pub struct Network1D<T> {
    nodes: Vec<Vec3<T>>,
    edges: Vec<GraphEdge<T>>,
    classes: Vec<NodeClass>,
    dirichlet: BTreeMap<usize, T>,
    degree: Vec<usize>,
    warnings: Vec<String>,
}

impl<T: Real> Network1D<T> {
    /// Builds and validates a network. Degree-1 nodes listed in `dirichlet` become
    /// Dirichlet nodes, other degree-1 nodes Neumann tips; degree ≥ 3 nodes are
    /// bifurcations and degree-2 nodes internal.
    pub fn new(
        nodes: Vec<Vec3<T>>,
        edges: Vec<GraphEdge<T>>,
        dirichlet: BTreeMap<usize, T>,
    ) -> Result<Self> {
        let nn = nodes.len();
        let mut degree = vec![0usize; nn];
        let mut warnings = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            if e.a >= nn || e.b >= nn {
                return Err(Error::Topology(format!(
                    "edge {i} references a missing node"
                )));
            }
            let len = nodes[e.a].distance(&nodes[e.b]);
            if !(len > T::zero()) {
                return Err(Error::InvalidGeometry(format!("edge {i} has zero length")));
            }
            if !(e.radius > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "edge {i} has non-positive radius {}",
                    e.radius
                )));
            }
            if e.radius > T::lit(0.1) * len {
                let w = format!(
                    "edge {i}: radius {} exceeds a tenth of its length {}",
                    e.radius, len
                );
                log::warn!("{w}");
                warnings.push(w);
            }
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        for (&v, val) in &dirichlet {
            if v >= nn {
                return Err(Error::Topology(format!(
                    "dirichlet node {v} does not exist"
                )));
            }
            if degree[v] != 1 {
                return Err(Error::Topology(format!(
                    "dirichlet node {v} has degree {}, expected an end node",
                    degree[v]
                )));
            }
            if !val.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "dirichlet value at node {v} is not finite"
                )));
            }
        }
        if nn > 1 && degree.contains(&0) {
            let v = degree.iter().position(|&d| d == 0).unwrap_or(0);
            return Err(Error::Topology(format!("node {v} is isolated")));
        }
        let classes = (0..nn)
            .map(|v| match degree[v] {
                0 | 1 if dirichlet.contains_key(&v) => NodeClass::Dirichlet,
                0 | 1 => NodeClass::NeumannTip,
                2 => NodeClass::Internal,
                _ => NodeClass::Bifurcation,
            })
            .collect();
        let net = Network1D {
            nodes,
            edges,
            classes,
            dirichlet,
            degree,
            warnings,
        };
        net.check_connected()?;
        Ok(net)
    }

    /// A single straight edge from `a` to `b`.
    pub fn single_edge(
        a: Vec3<T>,
        b: Vec3<T>,
        radius: T,
        n_e: usize,
        dirichlet: BTreeMap<usize, T>,
    ) -> Result<Self> {
        Self::new(
            vec![a, b],
            vec![GraphEdge {
                a: 0,
                b: 1,
                radius,
                n_e,
            }],
            dirichlet,
        )
    }

    /// The network with no nodes (no 1D domain).
    pub fn empty() -> Self {
        Network1D {
            nodes: Vec::new(),
            edges: Vec::new(),
            classes: Vec::new(),
            dirichlet: BTreeMap::new(),
            degree: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn check_connected(&self) -> Result<()> {
        let nn = self.nodes.len();
        if nn == 0 {
            return Ok(());
        }
        let mut adj = vec![Vec::new(); nn];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let mut seen = vec![false; nn];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(v) => Err(Error::Topology(format!(
                "network is not connected: node {v} unreachable from node 0"
            ))),
            None => Ok(()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3<T>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge<T>] {
        &self.edges
    }

    pub fn node_class(&self, v: usize) -> NodeClass {
        self.classes[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    /// Dirichlet nodes and their values, by increasing node index.
    pub fn dirichlet_values(&self) -> &BTreeMap<usize, T> {
        &self.dirichlet
    }

    pub fn nodes_of_class(&self, c: NodeClass) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| self.classes[v] == c)
            .collect()
    }

    /// Validation warnings (thin-tube assumption violations).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn edge_length(&self, e: usize) -> T {
        let ed = &self.edges[e];
        self.nodes[ed.a].distance(&self.nodes[ed.b])
    }

    pub fn total_length(&self) -> T {
        (0..self.edges.len()).map(|e| self.edge_length(e)).sum()
    }

    /// Unit tangent of edge `e`, pointing from `a` to `b`.
    pub fn tangent(&self, e: usize) -> Vec3<T> {
        let ed = &self.edges[e];
        (self.nodes[ed.b] - self.nodes[ed.a]).normalized()
    }

    /// Point at arc length `s` from the start of edge `e`.
    pub fn point_at(&self, e: usize, s: T) -> Vec3<T> {
        let ed = &self.edges[e];
        self.nodes[ed.a].lerp(&self.nodes[ed.b], s / self.edge_length(e))
    }

    /// Copy with edge `e` parametrized in the opposite direction.
    pub fn with_reversed_edge(&self, e: usize) -> Self {
        let mut out = self.clone();
        let ed = &mut out.edges[e];
        std::mem::swap(&mut ed.a, &mut ed.b);
        out
    }

    /// Copy with every edge subdivided into `n_e` intervals.
    pub fn with_subdivisions(&self, n_e: usize) -> Self {
        let mut out = self.clone();
        out.edges.iter_mut().for_each(|e| e.n_e = n_e);
        out
    }

    /// Copy with every edge radius set to `radius`.
    pub fn with_radius(&self, radius: T) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.iter_mut().for_each(|e| e.radius = radius);
        Self::new(self.nodes.clone(), edges, self.dirichlet.clone())
    }

    /// Copy with new Dirichlet node values.
    pub fn with_dirichlet(&self, dirichlet: BTreeMap<usize, T>) -> Result<Self> {
        Self::new(self.nodes.clone(), self.edges.clone(), dirichlet)
    }
}

/// Incident edges of a bifurcation node with sign +1 when the edge's tangent points
/// toward `v` (the edge ends at `v`) and −1 when it starts there.
pub fn classify_incidence<T: Real>(net: &Network1D<T>, v: usize) -> Result<Vec<(usize, i8)>> {
    if v >= net.nodes.len() || net.classes[v] != NodeClass::Bifurcation {
        return Err(Error::Domain(format!("node {v} is not a bifurcation")));
    }
    Ok(net
        .edges
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            if e.b == v {
                Some((i, 1))
            } else if e.a == v {
                Some((i, -1))
            } else {
                None
            }
        })
        .collect())
}

/// One P1 interval of the extended graph.
#[derive(Debug, Clone, Copy)]
pub struct GraphSegment<T> {
    pub edge: usize,
    /// Position of the interval on its edge (0-based).
    pub index: usize,
    /// Dofs at the interval start and end (in edge direction).
    pub dofs: [usize; 2],
    pub start: Vec3<T>,
    pub end: Vec3<T>,
    pub length: T,
    pub radius: T,
}

/// Extended graph: equispaced points on every edge and the global P1 dof numbering.
///
/// Dofs are numbered edge by edge: the start node (if not yet numbered), the interior
/// points, then the end node (if not yet numbered).
#[derive(Debug, Clone)]
pub struct GraphMesh<T> {
    net: Network1D<T>,
    edge_dofs: Vec<Vec<usize>>,
    node_dof: Vec<usize>,
    points: Vec<Vec3<T>>,
    dof_edge: Vec<usize>,
}

pub fn build_graph_mesh<T: Real>(net: &Network1D<T>) -> Result<GraphMesh<T>> {
    for (i, e) in net.edges.iter().enumerate() {
        if e.n_e == 0 {
            return Err(Error::InvalidParameter(format!("edge {i} has n_e = 0")));
        }
    }
    const UNSET: usize = usize::MAX;
    let mut node_dof = vec![UNSET; net.nodes.len()];
    let mut points = Vec::new();
    let mut dof_edge = Vec::new();
    let mut edge_dofs = Vec::with_capacity(net.edges.len());
    for (ei, e) in net.edges.iter().enumerate() {
        let mut dofs = Vec::with_capacity(e.n_e + 1);
        let mut node = |v: usize, points: &mut Vec<Vec3<T>>, dof_edge: &mut Vec<usize>| {
            if node_dof[v] == UNSET {
                node_dof[v] = points.len();
                points.push(net.nodes[v]);
                dof_edge.push(ei);
            }
            node_dof[v]
        };
        dofs.push(node(e.a, &mut points, &mut dof_edge));
        let pa = net.nodes[e.a];
        let pb = net.nodes[e.b];
        for j in 1..e.n_e {
            dofs.push(points.len());
            points.push(pa.lerp(&pb, T::from_count(j) / T::from_count(e.n_e)));
            dof_edge.push(ei);
        }
        dofs.push(node(e.b, &mut points, &mut dof_edge));
        edge_dofs.push(dofs);
    }
    // a lone node without edges still carries a dof
    for (v, d) in node_dof.iter_mut().enumerate() {
        if *d == UNSET {
            *d = points.len();
            points.push(net.nodes[v]);
            dof_edge.push(usize::MAX);
        }
    }
    Ok(GraphMesh {
        net: net.clone(),
        edge_dofs,
        node_dof,
        points,
        dof_edge,
    })
}

impl<T: Real> GraphMesh<T> {
    pub fn network(&self) -> &Network1D<T> {
        &self.net
    }

    pub fn n_dofs(&self) -> usize {
        self.points.len()
    }

    /// Position of each dof.
    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    /// Dofs of the `n_e + 1` points of edge `e`, in edge direction.
    pub fn edge_dofs(&self, e: usize) -> &[usize] {
        &self.edge_dofs[e]
    }

    pub fn node_dof(&self, v: usize) -> usize {
        self.node_dof[v]
    }

    /// Edge on which the dof was created (`usize::MAX` for a lone node).
    pub fn dof_edge(&self, d: usize) -> usize {
        self.dof_edge[d]
    }

    /// Interval length `k_e` of edge `e`.
    pub fn spacing(&self, e: usize) -> T {
        self.net.edge_length(e) / T::from_count(self.net.edges[e].n_e)
    }

    pub fn n_segments(&self) -> usize {
        self.net.edges.iter().map(|e| e.n_e).sum()
    }

    /// All P1 intervals, edge by edge.
    pub fn segments(&self) -> impl Iterator<Item = GraphSegment<T>> + '_ {
        self.net.edges.iter().enumerate().flat_map(move |(ei, e)| {
            let dofs = &self.edge_dofs[ei];
            let h = self.spacing(ei);
            (0..e.n_e).map(move |j| GraphSegment {
                edge: ei,
                index: j,
                dofs: [dofs[j], dofs[j + 1]],
                start: self.points[dofs[j]],
                end: self.points[dofs[j + 1]],
                length: h,
                radius: e.radius,
            })
        })
    }

    /// Dofs of Dirichlet nodes with their values, by increasing node index.
    pub fn dirichlet_dofs(&self) -> Vec<(usize, T)> {
        self.net
            .dirichlet
            .iter()
            .map(|(&v, &val)| (self.node_dof[v], val))
            .collect()
    }

    /// Neumann tip nodes as (node, dof, edge, outward unit tangent).
    pub fn tips(&self) -> Vec<(usize, usize, usize, Vec3<T>)> {
        self.net
            .nodes_of_class(NodeClass::NeumannTip)
            .into_iter()
            .filter_map(|v| {
                let (ei, e) = self
                    .net
                    .edges
                    .iter()
                    .enumerate()
                    .find(|(_, e)| e.a == v || e.b == v)?;
                let t = self.net.tangent(ei);
                let out = if e.b == v { t } else { -t };
                Some((v, self.node_dof[v], ei, out))
            })
            .collect()
    }

    /// Value of the P1 field `u` at arc length `s` on edge `e`.
    pub fn eval(&self, u: &[T], e: usize, s: T) -> T {
        let n = self.net.edges[e].n_e;
        let h = self.spacing(e);
        let x = (s / h).max(T::zero());
        let j = x.floor().to_usize().unwrap_or(0).min(n - 1);
        let lam = x - T::from_count(j);
        let d = &self.edge_dofs[e];
        u[d[j]] * (T::one() - lam) + u[d[j + 1]] * lam
    }
}
