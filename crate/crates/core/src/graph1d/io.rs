//! Plain-text network files ("EMDIM-GRAPH 1").
//!
//! ```text
//! EMDIM-GRAPH 1
//! nodes <n>
//! <id> <x> <y> <z> <class> [<dirichlet value>]
//! edges <m>
//! <id> <a> <b> <radius> <n_e>
//! ```
//!
//! Ids must be `0..n` and `0..m` in order. The class column is checked against the
//! degree rule when the network is rebuilt.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

use super::{GraphEdge, Network1D, NodeClass};

pub const GRAPH_HEADER: &str = "EMDIM-GRAPH 1";

pub fn write_graph<T: Real, W: Write>(net: &Network1D<T>, mut w: W) -> Result<()> {
    writeln!(w, "{GRAPH_HEADER}")?;
    writeln!(w, "nodes {}", net.nodes().len())?;
    for (i, p) in net.nodes().iter().enumerate() {
        let c = p.to_f64();
        let class = net.node_class(i);
        write!(
            w,
            "{i} {:.17e} {:.17e} {:.17e} {}",
            c[0],
            c[1],
            c[2],
            class.as_str()
        )?;
        if let Some(v) = net.dirichlet_values().get(&i) {
            write!(w, " {:.17e}", v.to_f64_lossy())?;
        }
        writeln!(w)?;
    }
    writeln!(w, "edges {}", net.edges().len())?;
    for (i, e) in net.edges().iter().enumerate() {
        writeln!(
            w,
            "{i} {} {} {:.17e} {}",
            e.a,
            e.b,
            e.radius.to_f64_lossy(),
            e.n_e
        )?;
    }
    Ok(())
}

pub fn read_graph<T: Real, R: BufRead>(r: R) -> Result<Network1D<T>> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|s| (i + 1, s.trim().to_string())))
        .filter(|l| match l {
            Ok((_, s)) => !s.is_empty() && !s.starts_with('#'),
            Err(_) => true,
        });
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some(Ok(v)) => Ok(v),
            Some(Err(e)) => Err(e.into()),
            None => Err(Error::Format {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let bad = |line: usize, msg: String| Error::Format { line, msg };

    let (ln, h) = next("header")?;
    if h != GRAPH_HEADER {
        return Err(bad(
            ln,
            format!("expected header '{GRAPH_HEADER}', found '{h}'"),
        ));
    }
    let count = |ln: usize, s: &str, key: &str| -> Result<usize> {
        let mut it = s.split_whitespace();
        if it.next() != Some(key) {
            return Err(bad(ln, format!("expected '{key} <count>'")));
        }
        it.next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| bad(ln, format!("bad {key} count")))
    };

    let (ln, s) = next("node count")?;
    let nn = count(ln, &s, "nodes")?;
    let mut nodes = Vec::with_capacity(nn);
    let mut classes = Vec::with_capacity(nn);
    let mut dirichlet = BTreeMap::new();
    for i in 0..nn {
        let (ln, s) = next("node")?;
        let tok: Vec<&str> = s.split_whitespace().collect();
        if tok.len() < 5 {
            return Err(bad(ln, "node line needs id, x, y, z, class".into()));
        }
        if tok[0].parse::<usize>().ok() != Some(i) {
            return Err(bad(ln, format!("expected node id {i}")));
        }
        let mut c = [0.0; 3];
        for k in 0..3 {
            c[k] = tok[k + 1]
                .parse()
                .map_err(|_| bad(ln, "bad node coordinate".into()))?;
        }
        nodes.push(Vec3::from_f64(c));
        let class = match tok[4] {
            "dirichlet" => NodeClass::Dirichlet,
            "neumann_tip" => NodeClass::NeumannTip,
            "bifurcation" => NodeClass::Bifurcation,
            "internal" => NodeClass::Internal,
            other => return Err(bad(ln, format!("unknown node class '{other}'"))),
        };
        if class == NodeClass::Dirichlet {
            let v: f64 = tok
                .get(5)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(ln, "dirichlet node needs a value".into()))?;
            dirichlet.insert(i, T::lit(v));
        }
        classes.push(class);
    }
    let (ln, s) = next("edge count")?;
    let ne = count(ln, &s, "edges")?;
    let mut edges = Vec::with_capacity(ne);
    for i in 0..ne {
        let (ln, s) = next("edge")?;
        let tok: Vec<&str> = s.split_whitespace().collect();
        if tok.len() != 5 || tok[0].parse::<usize>().ok() != Some(i) {
            return Err(bad(ln, format!("expected edge line '{i} a b radius n_e'")));
        }
        let a: usize = tok[1]
            .parse()
            .map_err(|_| bad(ln, "bad node index".into()))?;
        let b: usize = tok[2]
            .parse()
            .map_err(|_| bad(ln, "bad node index".into()))?;
        let radius: f64 = tok[3].parse().map_err(|_| bad(ln, "bad radius".into()))?;
        let n_e: usize = tok[4].parse().map_err(|_| bad(ln, "bad n_e".into()))?;
        edges.push(GraphEdge {
            a,
            b,
            radius: T::lit(radius),
            n_e,
        });
    }
    let net = Network1D::new(nodes, edges, dirichlet)?;
    for (i, c) in classes.iter().enumerate() {
        if net.node_class(i) != *c {
            return Err(Error::Topology(format!(
                "node {i} is declared {} but its degree makes it {}",
                c.as_str(),
                net.node_class(i).as_str()
            )));
        }
    }
    Ok(net)
}
