use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PolygonMesh;
use crate::error::MeshError;
use crate::geometry::{self, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    /// Uniform squares.
    #[serde(alias = "t1")]
    Quad,
    /// Each square split into one convex and one concave pentagon.
    #[serde(alias = "t2")]
    Pentagon,
    /// Octagons with edge midpoints pushed into or out of the cell.
    #[serde(alias = "t3")]
    Octagon,
}

impl MeshKind {
    pub fn default_delta(self) -> f64 {
        match self {
            MeshKind::Quad => 0.0,
            MeshKind::Pentagon => 0.1,
            MeshKind::Octagon => 0.15,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeshKind::Quad => "quad",
            MeshKind::Pentagon => "pentagon",
            MeshKind::Octagon => "octagon",
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshKind {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "quad" | "t1" => Ok(MeshKind::Quad),
            "pentagon" | "t2" => Ok(MeshKind::Pentagon),
            "octagon" | "t3" => Ok(MeshKind::Octagon),
            other => Err(MeshError::InvalidParameter(format!(
                "unknown mesh family '{other}' (expected quad, pentagon or octagon)"
            ))),
        }
    }
}

/// A mesh family together with its shape parameter `δ`, the displacement of
/// the non-grid vertices as a fraction of the grid cell width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshFamily {
    pub kind: MeshKind,
    pub delta: f64,
}

impl MeshFamily {
    pub const MAX_DELTA: f64 = 0.25;

    pub fn new(kind: MeshKind) -> Self {
        Self {
            kind,
            delta: kind.default_delta(),
        }
    }

    pub fn with_delta(kind: MeshKind, delta: f64) -> Self {
        Self { kind, delta }
    }
}

/// Deduplicates vertices on a `1e-12` lattice; insertion order is preserved.
struct VertexPool {
    points: Vec<Point2>,
    lookup: HashMap<(i64, i64), usize>,
}

impl VertexPool {
    fn new() -> Self {
        Self {
            points: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    fn add(&mut self, p: Point2) -> usize {
        let key = ((p.x * 1e12).round() as i64, (p.y * 1e12).round() as i64);
        *self.lookup.entry(key).or_insert_with(|| {
            self.points.push(p);
            self.points.len() - 1
        })
    }
}

/// Generates one of the three polygonal families on `[0,1]²` from an
/// `n × n` background grid.
pub fn generate_mesh(family: MeshFamily, n: usize) -> Result<PolygonMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("n must be at least 1".into()));
    }
    if !(0.0..=MeshFamily::MAX_DELTA).contains(&family.delta) || !family.delta.is_finite() {
        return Err(MeshError::InvalidParameter(format!(
            "delta = {} outside [0, {}]",
            family.delta,
            MeshFamily::MAX_DELTA
        )));
    }
    let mut pool = VertexPool::new();
    let cells = match family.kind {
        MeshKind::Quad => quads(&mut pool, n),
        MeshKind::Pentagon => pentagons(&mut pool, n, family.delta),
        MeshKind::Octagon => octagons(&mut pool, n, family.delta),
    };
    for (c, cell) in cells.iter().enumerate() {
        let poly: Vec<Point2> = cell.iter().map(|&i| pool.points[i]).collect();
        if geometry::signed_area(&poly) <= 0.0 || !geometry::is_simple(&poly) {
            return Err(MeshError::BadCell {
                cell: c,
                reason: "not a simple counter-clockwise polygon".into(),
            });
        }
        if geometry::kernel_chebyshev_ball(&poly).is_none() {
            return Err(MeshError::BadCell {
                cell: c,
                reason: "not star-shaped".into(),
            });
        }
    }
    PolygonMesh::from_cells(pool.points, cells)
}

/// Grid node at half-resolution index `(i, j)`, i.e. `(i/(2n), j/(2n))`.
fn node(n: usize, i: usize, j: usize) -> Point2 {
    let m = (2 * n) as f64;
    Point2::new(i as f64 / m, j as f64 / m)
}

fn quads(pool: &mut VertexPool, n: usize) -> Vec<Vec<usize>> {
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (x0, x1, y0, y1) = (2 * i, 2 * i + 2, 2 * j, 2 * j + 2);
            cells.push(vec![
                pool.add(node(n, x0, y0)),
                pool.add(node(n, x1, y0)),
                pool.add(node(n, x1, y1)),
                pool.add(node(n, x0, y1)),
            ]);
        }
    }
    cells
}

/// Each grid square with corners A, B, C, D, bottom/top midpoints M_b, M_t and
/// interior point P (centre shifted right by `δ·w`) becomes the pentagons
/// `{A, M_b, P, M_t, D}` (convex) and `{M_b, B, C, M_t, P}` (reflex at P).
fn pentagons(pool: &mut VertexPool, n: usize, delta: f64) -> Vec<Vec<usize>> {
    let w = 1.0 / n as f64;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (x0, xm, x1) = (2 * i, 2 * i + 1, 2 * i + 2);
            let (y0, ym, y1) = (2 * j, 2 * j + 1, 2 * j + 2);
            let a = pool.add(node(n, x0, y0));
            let mb = pool.add(node(n, xm, y0));
            let b = pool.add(node(n, x1, y0));
            let c = pool.add(node(n, x1, y1));
            let mt = pool.add(node(n, xm, y1));
            let d = pool.add(node(n, x0, y1));
            let center = node(n, xm, ym);
            let p = pool.add(Point2::new(center.x + delta * w, center.y));
            cells.push(vec![a, mb, p, mt, d]);
            cells.push(vec![mb, b, c, mt, p]);
        }
    }
    cells
}

/// Each grid square keeps its corners and edge midpoints. Interior midpoints
/// of vertical edges move (by `δ·w`, perpendicular to the edge) into the
/// adjacent cell with even `i + j`, those of horizontal edges into the cell
/// with odd `i + j`; boundary midpoints stay put. For `n >= 2` every cell
/// therefore receives at least one inward dent.
fn octagons(pool: &mut VertexPool, n: usize, delta: f64) -> Vec<Vec<usize>> {
    let w = 1.0 / n as f64;
    let shift = delta * w;
    // Midpoint of the vertical edge on grid line `line` (x = line/n), row `row`.
    let vertical_mid = |line: usize, row: usize| {
        let p = node(n, 2 * line, 2 * row + 1);
        if line == 0 || line == n {
            p
        } else if (line + row) % 2 == 0 {
            Point2::new(p.x + shift, p.y)
        } else {
            Point2::new(p.x - shift, p.y)
        }
    };
    // Midpoint of the horizontal edge on grid line `line` (y = line/n), column `col`.
    let horizontal_mid = |line: usize, col: usize| {
        let p = node(n, 2 * col + 1, 2 * line);
        if line == 0 || line == n {
            p
        } else if (line + col) % 2 == 1 {
            Point2::new(p.x, p.y + shift)
        } else {
            Point2::new(p.x, p.y - shift)
        }
    };
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![
                pool.add(node(n, 2 * i, 2 * j)),
                pool.add(horizontal_mid(j, i)),
                pool.add(node(n, 2 * i + 2, 2 * j)),
                pool.add(vertical_mid(i + 1, j)),
                pool.add(node(n, 2 * i + 2, 2 * j + 2)),
                pool.add(horizontal_mid(j + 1, i)),
                pool.add(node(n, 2 * i, 2 * j + 2)),
                pool.add(vertical_mid(i, j)),
            ]);
        }
    }
    cells
}
