//! Conforming polygonal meshes of the unit square.

mod generate;
mod io;
mod validate;

use std::collections::HashMap;

pub use generate::{generate_mesh, MeshFamily, MeshKind};
pub use io::{read_mesh, write_mesh};
pub use validate::{validate_mesh, ValidationReport};

use crate::error::MeshError;
use crate::geometry::{self, Point2};

/// Tolerance for deciding that a coordinate lies on the boundary of `[0,1]²`.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// An undirected edge stored with its global orientation `v[0] < v[1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub v: [usize; 2],
    /// Cell that traverses the edge from `v[0]` to `v[1]` (interior on its left).
    pub left: Option<usize>,
    /// Cell that traverses the edge from `v[1]` to `v[0]`.
    pub right: Option<usize>,
}

impl Edge {
    pub fn cell_count(&self) -> usize {
        self.left.is_some() as usize + self.right.is_some() as usize
    }
}

/// Cached per-cell geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub centroid: Point2,
    pub diameter: f64,
    pub area: f64,
    /// Point from which the whole cell is visible; used for fan triangulation.
    pub star_point: Point2,
}

#[derive(Debug, Clone)]
pub struct PolygonMesh {
    vertices: Vec<Point2>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    /// Local edge `j` of a cell joins local vertices `j` and `j+1`.
    cell_edges: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    geometry: Vec<CellGeometry>,
}

fn on_boundary(p: Point2) -> bool {
    p.x.abs() <= BOUNDARY_TOL
        || (p.x - 1.0).abs() <= BOUNDARY_TOL
        || p.y.abs() <= BOUNDARY_TOL
        || (p.y - 1.0).abs() <= BOUNDARY_TOL
}

fn on_same_side(a: Point2, b: Point2) -> bool {
    let sides = |p: Point2| {
        [
            p.x.abs() <= BOUNDARY_TOL,
            (p.x - 1.0).abs() <= BOUNDARY_TOL,
            p.y.abs() <= BOUNDARY_TOL,
            (p.y - 1.0).abs() <= BOUNDARY_TOL,
        ]
    };
    let (sa, sb) = (sides(a), sides(b));
    (0..4).any(|i| sa[i] && sb[i])
}

impl PolygonMesh {
    /// Builds the edge structure and geometry cache from vertex cycles.
    ///
    /// Only structural consistency is enforced here (index ranges, at most
    /// two oppositely oriented cells per edge, single-cell edges on the
    /// boundary of the unit square). Geometric quality is the business of
    /// [`validate_mesh`].
    pub fn from_cells(vertices: Vec<Point2>, cells: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        let nv = vertices.len();
        let mut edge_lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::Structure(format!(
                    "cell {c} has {} vertices",
                    cell.len()
                )));
            }
            let mut local = Vec::with_capacity(cell.len());
            for j in 0..cell.len() {
                let (a, b) = (cell[j], cell[(j + 1) % cell.len()]);
                if a >= nv || b >= nv {
                    return Err(MeshError::Structure(format!(
                        "cell {c} references vertex out of range"
                    )));
                }
                if a == b {
                    return Err(MeshError::Structure(format!(
                        "cell {c} repeats vertex {a}"
                    )));
                }
                let key = (a.min(b), a.max(b));
                let e = *edge_lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        v: [key.0, key.1],
                        left: None,
                        right: None,
                    });
                    edges.len() - 1
                });
                let slot = if a < b {
                    &mut edges[e].left
                } else {
                    &mut edges[e].right
                };
                if slot.is_some() {
                    return Err(MeshError::Structure(format!(
                        "edge ({}, {}) traversed twice in the same direction (cell {c})",
                        key.0, key.1
                    )));
                }
                *slot = Some(c);
                local.push(e);
            }
            cell_edges.push(local);
        }

        let boundary_vertex: Vec<bool> = vertices.iter().map(|&p| on_boundary(p)).collect();
        let mut boundary_edge = vec![false; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.cell_count() == 1 {
                let (a, b) = (vertices[e.v[0]], vertices[e.v[1]]);
                if !on_same_side(a, b) {
                    return Err(MeshError::Structure(format!(
                        "edge ({}, {}) has one incident cell but is not on the boundary",
                        e.v[0], e.v[1]
                    )));
                }
                boundary_edge[i] = true;
            }
        }

        let geometry = cells
            .iter()
            .map(|cell| {
                let poly: Vec<Point2> = cell.iter().map(|&i| vertices[i]).collect();
                cell_geometry(&poly)
            })
            .collect();

        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            boundary_vertex,
            boundary_edge,
            geometry,
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    pub fn cell_polygon(&self, c: usize) -> Vec<Point2> {
        self.cells[c].iter().map(|&i| self.vertices[i]).collect()
    }

    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn boundary_vertex_count(&self) -> usize {
        self.boundary_vertex.iter().filter(|&&b| b).count()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.boundary_edge.iter().filter(|&&b| b).count()
    }

    /// Mesh size `h = max_E h_E`.
    pub fn mesh_size(&self) -> f64 {
        self.geometry.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }

    /// Replaces the polygon geometry by a rigid translation (used in tests of
    /// translation covariance). Boundary flags are kept.
    pub fn translated(&self, shift: Point2) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v = *v + shift;
        }
        for g in &mut out.geometry {
            g.centroid = g.centroid + shift;
            g.star_point = g.star_point + shift;
        }
        out
    }
}

/// Mesh size `h = max_E h_E`.
pub fn mesh_size(mesh: &PolygonMesh) -> f64 {
    mesh.mesh_size()
}

pub(crate) fn cell_geometry(poly: &[Point2]) -> CellGeometry {
    let area = geometry::signed_area(poly);
    let centroid = geometry::centroid(poly);
    let diameter = geometry::diameter(poly);
    let margin = 1e-10 * diameter;
    let visible = geometry::edge_line_distances(poly, centroid)
        .iter()
        .all(|&d| d > margin);
    let star_point = if visible {
        centroid
    } else {
        geometry::kernel_chebyshev_ball(poly)
            .map(|(p, _)| p)
            .unwrap_or(centroid)
    };
    CellGeometry {
        centroid,
        diameter,
        area,
        star_point,
    }
}
