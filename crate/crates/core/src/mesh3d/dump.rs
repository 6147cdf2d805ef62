//! Plain-text mesh dump ("EMDIM-MESH 1").
//!
//! ```text
//! EMDIM-MESH 1
//! vertices <n>
//! <x> <y> <z>            (n lines)
//! tets <m>
//! <a> <b> <c> <d>        (m lines, 0-based vertex ids)
//! boundary <k>
//! <a> <b> <c> <kind>     (k lines, kind = dirichlet | neumann)
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

use super::{BoundaryKind, TetMesh};

pub const MESH_HEADER: &str = "EMDIM-MESH 1";

pub fn write_mesh_dump<T: Real, W: Write>(mesh: &TetMesh<T>, mut w: W) -> Result<()> {
    writeln!(w, "{MESH_HEADER}")?;
    writeln!(w, "vertices {}", mesh.n_vertices())?;
    for v in mesh.vertices() {
        let c = v.to_f64();
        writeln!(w, "{:.17e} {:.17e} {:.17e}", c[0], c[1], c[2])?;
    }
    writeln!(w, "tets {}", mesh.n_tets())?;
    for t in mesh.tets() {
        writeln!(w, "{} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    let bf: Vec<usize> = mesh.boundary_faces().collect();
    writeln!(w, "boundary {}", bf.len())?;
    for f in bf {
        let v = mesh.faces()[f];
        let kind = match mesh.boundary_kind(f) {
            Some(BoundaryKind::Neumann) => "neumann",
            _ => "dirichlet",
        };
        writeln!(w, "{} {} {} {kind}", v[0], v[1], v[2])?;
    }
    Ok(())
}

pub fn read_mesh_dump<T: Real, R: BufRead>(r: R) -> Result<TetMesh<T>> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|s| (i + 1, s)))
        .filter(|l| match l {
            Ok((_, s)) => !s.trim().is_empty() && !s.trim_start().starts_with('#'),
            Err(_) => true,
        });
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some(Ok((n, s))) => Ok((n, s.trim().to_string())),
            Some(Err(e)) => Err(e.into()),
            None => Err(Error::Format {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let (n, h) = next("header")?;
    if h != MESH_HEADER {
        return Err(Error::Format {
            line: n,
            msg: format!("expected header '{MESH_HEADER}', found '{h}'"),
        });
    }
    let count = |line: usize, s: &str, key: &str| -> Result<usize> {
        let mut it = s.split_whitespace();
        if it.next() != Some(key) {
            return Err(Error::Format {
                line,
                msg: format!("expected '{key} <count>'"),
            });
        }
        it.next().and_then(|c| c.parse().ok()).ok_or(Error::Format {
            line,
            msg: format!("bad {key} count"),
        })
    };
    let bad = |line: usize, what: &str| Error::Format {
        line,
        msg: format!("cannot parse {what}"),
    };

    let (ln, s) = next("vertex count")?;
    let nv = count(ln, &s, "vertices")?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, s) = next("vertex")?;
        let c: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(ln, "vertex"))?;
        if c.len() != 3 {
            return Err(bad(ln, "vertex"));
        }
        verts.push(Vec3::from_f64([c[0], c[1], c[2]]));
    }
    let (ln, s) = next("tet count")?;
    let nt = count(ln, &s, "tets")?;
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, s) = next("tet")?;
        let c: Vec<usize> = s
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(ln, "tet"))?;
        if c.len() != 4 {
            return Err(bad(ln, "tet"));
        }
        tets.push([c[0], c[1], c[2], c[3]]);
    }
    let mut mesh = TetMesh::new(verts, tets)?;
    let (ln, s) = next("boundary count")?;
    let nb = count(ln, &s, "boundary")?;
    let lookup = mesh.face_lookup();
    for _ in 0..nb {
        let (ln, s) = next("boundary face")?;
        let tok: Vec<&str> = s.split_whitespace().collect();
        if tok.len() != 4 {
            return Err(bad(ln, "boundary face"));
        }
        let mut key = [0usize; 3];
        for k in 0..3 {
            key[k] = tok[k].parse().map_err(|_| bad(ln, "boundary face"))?;
        }
        key.sort_unstable();
        let kind = match tok[3] {
            "dirichlet" => BoundaryKind::Dirichlet,
            "neumann" => BoundaryKind::Neumann,
            other => {
                return Err(Error::Format {
                    line: ln,
                    msg: format!("unknown boundary kind '{other}'"),
                })
            }
        };
        let f = *lookup.get(&key).ok_or_else(|| {
            Error::Topology(format!("boundary face on line {ln} is not a mesh face"))
        })?;
        mesh.set_boundary_kind(f, kind)?;
    }
    Ok(mesh)
}
