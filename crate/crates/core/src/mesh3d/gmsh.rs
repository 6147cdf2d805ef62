//! Gmsh MSH 2.2 ASCII input/output.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

use super::{BoundaryKind, TetMesh};

const PHYS_DIRICHLET: i64 = 1;
const PHYS_NEUMANN: i64 = 2;
const PHYS_VOLUME: i64 = 10;

/// Mapping from physical tags of boundary triangles to patch labels.
#[derive(Debug, Clone)]
pub struct GmshOptions {
    pub dirichlet_tags: Vec<i64>,
    pub neumann_tags: Vec<i64>,
    /// Label for boundary faces without a triangle or with an unlisted tag.
    pub default_kind: BoundaryKind,
}

impl Default for GmshOptions {
    fn default() -> Self {
        GmshOptions {
            dirichlet_tags: vec![PHYS_DIRICHLET],
            neumann_tags: vec![PHYS_NEUMANN],
            default_kind: BoundaryKind::Dirichlet,
        }
    }
}

pub fn load_gmsh<T: Real>(path: impl AsRef<Path>, opts: &GmshOptions) -> Result<TetMesh<T>> {
    let f = std::fs::File::open(path)?;
    read_gmsh(BufReader::new(f), opts)
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(l) => {
                self.line += 1;
                Ok(Some(l?.trim().to_string()))
            }
        }
    }

    fn expect(&mut self, what: &str) -> Result<String> {
        self.next()?.ok_or_else(|| Error::Format {
            line: self.line,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            line: self.line,
            msg: msg.into(),
        }
    }
}

fn parse<V: std::str::FromStr>(
    tok: Option<&str>,
    lines: &Lines<impl BufRead>,
    what: &str,
) -> Result<V> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err(format!("cannot parse {what}")))
}

pub fn read_gmsh<T: Real, R: BufRead>(reader: R, opts: &GmshOptions) -> Result<TetMesh<T>> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let mut node_ids: HashMap<i64, usize> = HashMap::new();
    let mut verts: Vec<Vec3<T>> = Vec::new();
    let mut tets: Vec<[usize; 4]> = Vec::new();
    // (element id, physical tag, nodes)
    let mut tris: Vec<(i64, i64, [usize; 3])> = Vec::new();
    let mut saw_format = false;

    while let Some(l) = lines.next()? {
        match l.as_str() {
            "" => continue,
            "$MeshFormat" => {
                let h = lines.expect("format line")?;
                let mut it = h.split_whitespace();
                let version: String = parse(it.next(), &lines, "version")?;
                let ftype: i32 = parse(it.next(), &lines, "file type")?;
                if !version.starts_with("2.") {
                    return Err(lines.err(format!("unsupported MSH version {version}, need 2.2")));
                }
                if ftype != 0 {
                    return Err(lines.err("binary MSH files are not supported"));
                }
                if lines.expect("$EndMeshFormat")? != "$EndMeshFormat" {
                    return Err(lines.err("expected $EndMeshFormat"));
                }
                saw_format = true;
            }
            "$Nodes" => {
                let n: usize = parse(
                    Some(lines.expect("node count")?.as_str()),
                    &lines,
                    "node count",
                )?;
                verts.reserve(n);
                for _ in 0..n {
                    let s = lines.expect("node line")?;
                    let mut it = s.split_whitespace();
                    let id: i64 = parse(it.next(), &lines, "node id")?;
                    let mut c = [0.0f64; 3];
                    for v in &mut c {
                        *v = parse(it.next(), &lines, "node coordinate")?;
                    }
                    if node_ids.insert(id, verts.len()).is_some() {
                        return Err(lines.err(format!("duplicate node id {id}")));
                    }
                    verts.push(Vec3::from_f64(c));
                }
                if lines.expect("$EndNodes")? != "$EndNodes" {
                    return Err(lines.err("expected $EndNodes"));
                }
            }
            "$Elements" => {
                let n: usize = parse(
                    Some(lines.expect("element count")?.as_str()),
                    &lines,
                    "element count",
                )?;
                for _ in 0..n {
                    let s = lines.expect("element line")?;
                    let mut it = s.split_whitespace();
                    let id: i64 = parse(it.next(), &lines, "element id")?;
                    let ty: i64 = parse(it.next(), &lines, "element type")?;
                    let ntags: usize = parse(it.next(), &lines, "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(parse::<i64>(it.next(), &lines, "tag")?);
                    }
                    let nn = match ty {
                        1 | 15 => continue,
                        2 => 3,
                        4 => 4,
                        other => {
                            return Err(lines
                                .err(format!("unsupported element type {other} (element {id})")))
                        }
                    };
                    let mut nodes = [0usize; 4];
                    for slot in nodes.iter_mut().take(nn) {
                        let nid: i64 = parse(it.next(), &lines, "element node")?;
                        *slot = *node_ids.get(&nid).ok_or_else(|| {
                            lines.err(format!("element {id} uses unknown node {nid}"))
                        })?;
                    }
                    if ty == 4 {
                        tets.push(nodes);
                    } else {
                        let phys = tags.first().copied().unwrap_or(0);
                        tris.push((id, phys, [nodes[0], nodes[1], nodes[2]]));
                    }
                }
                if lines.expect("$EndElements")? != "$EndElements" {
                    return Err(lines.err("expected $EndElements"));
                }
            }
            s if s.starts_with('$') => {
                // skip unknown sections such as $PhysicalNames
                let end = format!("$End{}", &s[1..]);
                loop {
                    if lines.expect(&end)? == end {
                        break;
                    }
                }
            }
            other => return Err(lines.err(format!("unexpected content '{other}'"))),
        }
    }
    if !saw_format {
        return Err(Error::Format {
            line: lines.line,
            msg: "missing $MeshFormat section".into(),
        });
    }

    let mut mesh = TetMesh::new(verts, tets)?;
    for f in mesh.boundary_faces().collect::<Vec<_>>() {
        mesh.set_boundary_kind(f, opts.default_kind)?;
    }
    let lookup = mesh.face_lookup();
    for (id, phys, mut nodes) in tris {
        nodes.sort_unstable();
        let f = *lookup.get(&nodes).ok_or_else(|| {
            Error::Topology(format!("boundary triangle {id} is not a face of any tet"))
        })?;
        if !mesh.is_boundary_face(f) {
            log::debug!("triangle {id} lies on an interior face; ignored");
            continue;
        }
        let kind = if opts.neumann_tags.contains(&phys) {
            BoundaryKind::Neumann
        } else if opts.dirichlet_tags.contains(&phys) {
            BoundaryKind::Dirichlet
        } else {
            opts.default_kind
        };
        mesh.set_boundary_kind(f, kind)?;
    }
    Ok(mesh)
}

/// Writes the mesh with its boundary faces as tagged triangles
/// (physical tag 1 = dirichlet, 2 = neumann).
pub fn write_gmsh<T: Real, W: Write>(mesh: &TetMesh<T>, mut w: W) -> Result<()> {
    writeln!(w, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;
    writeln!(w, "$Nodes\n{}", mesh.n_vertices())?;
    for (i, v) in mesh.vertices().iter().enumerate() {
        let c = v.to_f64();
        writeln!(w, "{} {:.17e} {:.17e} {:.17e}", i + 1, c[0], c[1], c[2])?;
    }
    writeln!(w, "$EndNodes")?;
    let bfaces: Vec<usize> = mesh.boundary_faces().collect();
    writeln!(w, "$Elements\n{}", bfaces.len() + mesh.n_tets())?;
    let mut id = 1;
    for &f in &bfaces {
        let phys = match mesh.boundary_kind(f) {
            Some(BoundaryKind::Neumann) => PHYS_NEUMANN,
            _ => PHYS_DIRICHLET,
        };
        let v = mesh.faces()[f];
        writeln!(
            w,
            "{id} 2 2 {phys} {phys} {} {} {}",
            v[0] + 1,
            v[1] + 1,
            v[2] + 1
        )?;
        id += 1;
    }
    for t in mesh.tets() {
        writeln!(
            w,
            "{id} 4 2 {PHYS_VOLUME} {PHYS_VOLUME} {} {} {} {}",
            t[0] + 1,
            t[1] + 1,
            t[2] + 1,
            t[3] + 1
        )?;
        id += 1;
    }
    writeln!(w, "$EndElements")?;
    Ok(())
}
