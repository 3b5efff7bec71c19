//! Plain-text mesh format:
//!
//! ```text
//! NV NC
//! x y            (NV lines)
//! m i1 ... im    (NC lines, 0-based counter-clockwise vertex indices)
//! ```

use std::io::{BufRead, Write};

use super::PolygonMesh;
use crate::error::MeshError;
use crate::geometry::Point2;

pub fn write_mesh<W: Write>(mesh: &PolygonMesh, mut out: W) -> Result<(), MeshError> {
    writeln!(out, "{} {}", mesh.vertices().len(), mesh.num_cells())?;
    for p in mesh.vertices() {
        // `{:?}` on f64 prints the shortest round-tripping representation.
        writeln!(out, "{:?} {:?}", p.x, p.y)?;
    }
    for cell in mesh.cells() {
        write!(out, "{}", cell.len())?;
        for i in cell {
            write!(out, " {i}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<PolygonMesh, MeshError> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut next = || -> Result<(usize, Vec<String>), MeshError> {
        match lines.next() {
            Some((no, line)) => Ok((no, line?.split_whitespace().map(str::to_owned).collect())),
            None => Err(MeshError::Parse {
                line: 0,
                msg: "unexpected end of file".into(),
            }),
        }
    };
    let parse_err = |line: usize, msg: String| MeshError::Parse { line, msg };

    let (no, header) = next()?;
    if header.len() != 2 {
        return Err(parse_err(no, "expected 'NV NC'".into()));
    }
    let nv: usize = header[0].parse().map_err(|e| parse_err(no, format!("{e}")))?;
    let nc: usize = header[1].parse().map_err(|e| parse_err(no, format!("{e}")))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, tok) = next()?;
        if tok.len() != 2 {
            return Err(parse_err(no, "expected 'x y'".into()));
        }
        let x: f64 = tok[0].parse().map_err(|e| parse_err(no, format!("{e}")))?;
        let y: f64 = tok[1].parse().map_err(|e| parse_err(no, format!("{e}")))?;
        vertices.push(Point2::new(x, y));
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (no, tok) = next()?;
        let m: usize = tok
            .first()
            .ok_or_else(|| parse_err(no, "empty cell line".into()))?
            .parse()
            .map_err(|e| parse_err(no, format!("{e}")))?;
        if tok.len() != m + 1 {
            return Err(parse_err(no, format!("expected {m} vertex indices")));
        }
        let idx = tok[1..]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|e| parse_err(no, format!("{e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(idx);
    }
    PolygonMesh::from_cells(vertices, cells)
}
