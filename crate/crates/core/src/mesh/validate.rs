use serde::Serialize;

use super::PolygonMesh;
use crate::geometry;

/// Shape-regularity summary of a mesh.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    /// `min_E r_E / h_E`, with `r_E` the radius of the largest disc in the
    /// kernel of `E` (zero when the kernel is empty).
    pub min_star_ratio: f64,
    /// `min_e h_e / h_E` over all cell edges.
    pub min_edge_ratio: f64,
    pub max_vertices: usize,
    pub offending_cells: Vec<usize>,
    pub non_simple_cells: Vec<usize>,
}

/// Checks both shape-regularity conditions against the constant `c_t`.
pub fn validate_mesh(mesh: &PolygonMesh, c_t: f64) -> ValidationReport {
    let mut min_star_ratio = f64::INFINITY;
    let mut min_edge_ratio = f64::INFINITY;
    let mut max_vertices = 0;
    let mut offending = Vec::new();
    let mut non_simple = Vec::new();
    for c in 0..mesh.num_cells() {
        let poly = mesh.cell_polygon(c);
        max_vertices = max_vertices.max(poly.len());
        let h = geometry::diameter(&poly);
        let area = geometry::signed_area(&poly);
        let simple = h > 0.0 && area > 1e-14 * h * h && geometry::is_simple(&poly);
        if !simple {
            non_simple.push(c);
            offending.push(c);
            min_star_ratio = 0.0;
            min_edge_ratio = min_edge_ratio.min(0.0);
            continue;
        }
        let star = geometry::kernel_chebyshev_ball(&poly).map_or(0.0, |(_, r)| r) / h;
        let n = poly.len();
        let edge = (0..n)
            .map(|i| poly[i].dist(poly[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
            / h;
        min_star_ratio = min_star_ratio.min(star);
        min_edge_ratio = min_edge_ratio.min(edge);
        if star < c_t || edge < c_t {
            offending.push(c);
        }
    }
    ValidationReport {
        passed: offending.is_empty(),
        min_star_ratio,
        min_edge_ratio,
        max_vertices,
        offending_cells: offending,
        non_simple_cells: non_simple,
    }
}
