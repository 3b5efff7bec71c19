//! Polygon quadrature by star-point fan triangulation and collapsed
//! Gauss–Legendre rules, plus Gauss–Legendre rules on edges.

use crate::error::QuadratureError;
use crate::geometry::Point2;
use crate::mesh::PolygonMesh;

/// Highest polynomial degree the triangle rules are built for.
pub const MAX_CELL_EXACTNESS: usize = 40;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone)]
pub struct CellRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl CellRule {
    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    /// Position of each point as a fraction of the way from start to end,
    /// shifted to `[-1/2, 1/2]`.
    pub params: Vec<f64>,
    pub exactness: usize,
}

impl EdgeRule {
    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Fan triangulation of a polygon from a point of its kernel.
pub fn triangulate_polygon(poly: &[Point2], star: Point2) -> Result<Vec<[Point2; 3]>, QuadratureError> {
    let n = poly.len();
    let scale = crate::geometry::diameter(poly);
    let mut tris = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let area = 0.5 * (a - star).cross(b - star);
        if area <= 1e-14 * scale * scale {
            return Err(QuadratureError::StarPointOutsideKernel { triangle: i, area });
        }
        tris.push([star, a, b]);
    }
    Ok(tris)
}

/// Fan triangulation of mesh cell `c` from its stored star point.
pub fn triangulate_cell(mesh: &PolygonMesh, c: usize) -> Result<Vec<[Point2; 3]>, QuadratureError> {
    triangulate_polygon(&mesh.cell_polygon(c), mesh.geometry(c).star_point)
}

/// Collapsed (Duffy) product rule on a triangle, exact for total degree
/// `exactness`, with strictly positive weights.
pub fn triangle_rule(tri: &[Point2; 3], exactness: usize) -> (Vec<Point2>, Vec<f64>) {
    // In (u, v) the integrand has degree exactness + 1 in u (Jacobian 1 - u)
    // and exactness in v.
    let nu = (exactness + 2).div_ceil(2);
    let nv = (exactness + 1).div_ceil(2).max(1);
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let [p0, p1, p2] = *tri;
    let twice_area = (p1 - p0).cross(p2 - p0);
    let mut pts = Vec::with_capacity(nu * nv);
    let mut wts = Vec::with_capacity(nu * nv);
    for (&a, &wa) in xu.iter().zip(&wu) {
        let u = 0.5 * (a + 1.0);
        for (&b, &wb) in xv.iter().zip(&wv) {
            let v = 0.5 * (b + 1.0);
            let s = u;
            let t = (1.0 - u) * v;
            pts.push(p0 + (p1 - p0) * s + (p2 - p0) * t);
            wts.push(0.25 * wa * wb * (1.0 - u) * twice_area);
        }
    }
    (pts, wts)
}

/// Composite rule over the fan triangulation of a polygon.
pub fn polygon_rule(poly: &[Point2], star: Point2, exactness: usize) -> Result<CellRule, QuadratureError> {
    if exactness > MAX_CELL_EXACTNESS {
        return Err(QuadratureError::DegreeTooHigh {
            requested: exactness,
            max: MAX_CELL_EXACTNESS,
        });
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for tri in triangulate_polygon(poly, star)? {
        let (p, w) = triangle_rule(&tri, exactness);
        points.extend(p);
        weights.extend(w);
    }
    Ok(CellRule {
        points,
        weights,
        exactness,
    })
}

/// Composite rule for mesh cell `c`.
pub fn build_cell_rule(mesh: &PolygonMesh, c: usize, exactness: usize) -> Result<CellRule, QuadratureError> {
    polygon_rule(&mesh.cell_polygon(c), mesh.geometry(c).star_point, exactness)
}

/// Gauss–Legendre rule with `⌈(exactness+1)/2⌉` points on the segment
/// from `start` to `end`.
pub fn build_edge_rule(start: Point2, end: Point2, exactness: usize) -> EdgeRule {
    let n = (exactness + 1).div_ceil(2).max(1);
    let (x, w) = gauss_legendre(n);
    let len = start.dist(end);
    let params: Vec<f64> = x.iter().map(|&t| 0.5 * t).collect();
    EdgeRule {
        points: params
            .iter()
            .map(|&s| start + (end - start) * (s + 0.5))
            .collect(),
        weights: w.iter().map(|&wi| 0.5 * wi * len).collect(),
        params,
        exactness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshFamily, MeshKind};

    fn unit_square() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn square_fan_has_quarter_triangles() {
        let sq = unit_square();
        let tris = triangulate_polygon(&sq, Point2::new(0.5, 0.5)).unwrap();
        assert_eq!(tris.len(), 4);
        for t in &tris {
            let area = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]);
            assert!((area - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_cell_fan() {
        let tri = vec![Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 1.0)];
        let star = crate::geometry::centroid(&tri);
        let fan = triangulate_polygon(&tri, star).unwrap();
        assert_eq!(fan.len(), 3);
        let total: f64 = fan.iter().map(|t| 0.5 * (t[1] - t[0]).cross(t[2] - t[0])).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn octagon_fan_covers_cell() {
        let m = generate_mesh(MeshFamily::new(MeshKind::Octagon), 4).unwrap();
        for c in 0..m.num_cells() {
            let fan = triangulate_cell(&m, c).unwrap();
            assert_eq!(fan.len(), 8);
            let areas: Vec<f64> = fan.iter().map(|t| 0.5 * (t[1] - t[0]).cross(t[2] - t[0])).collect();
            assert!(areas.iter().all(|&a| a > 0.0));
            let total: f64 = areas.iter().sum();
            assert!((total - m.geometry(c).area).abs() < 1e-15);
        }
    }

    #[test]
    fn star_point_outside_kernel_is_rejected() {
        let err = triangulate_polygon(&unit_square(), Point2::new(1.5, 0.5)).unwrap_err();
        assert!(matches!(err, QuadratureError::StarPointOutsideKernel { .. }));
    }

    #[test]
    fn unit_square_integrals() {
        let rule = polygon_rule(&unit_square(), Point2::new(0.5, 0.5), 4).unwrap();
        assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((rule.integrate(|p| p.x * p.x * p.y) - 1.0 / 6.0).abs() < 1e-14);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn too_high_degree_is_rejected() {
        let err = polygon_rule(&unit_square(), Point2::new(0.5, 0.5), 41).unwrap_err();
        assert!(matches!(err, QuadratureError::DegreeTooHigh { max: 40, .. }));
    }

    #[test]
    fn edge_rule_examples() {
        let r = build_edge_rule(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), 3);
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((r.integrate(|p| p.x.powi(3)) - 0.25).abs() < 1e-15);
        let (a, b) = (Point2::new(0.1, 0.2), Point2::new(0.4, 0.6));
        let r = build_edge_rule(a, b, 7);
        assert!((r.integrate(|_| 1.0) - 0.5).abs() < 1e-15);
    }
}
