//! Planar points and polygon primitives shared by the mesh and quadrature code.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Signed area of a closed polygon (positive for counter-clockwise order).
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| poly[i].cross(poly[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

/// Area centroid. Falls back to the vertex average for degenerate polygons.
pub fn centroid(poly: &[Point2]) -> Point2 {
    let n = poly.len();
    let area = signed_area(poly);
    let scale = diameter(poly).max(f64::MIN_POSITIVE);
    if area.abs() <= 1e-14 * scale * scale {
        let s = poly.iter().fold(Point2::default(), |acc, &p| acc + p);
        return s * (1.0 / n as f64);
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let c = p.cross(q);
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point2::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Maximum pairwise vertex distance.
pub fn diameter(poly: &[Point2]) -> f64 {
    let mut h: f64 = 0.0;
    for (i, &p) in poly.iter().enumerate() {
        for &q in &poly[i + 1..] {
            h = h.max(p.dist(q));
        }
    }
    h
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2, tol: f64) -> bool {
    let orient = |p: Point2, q: Point2, r: Point2| (q - p).cross(r - p);
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    let on_segment = |p: Point2, q: Point2, r: Point2| {
        orient(p, q, r).abs() <= tol
            && r.x >= p.x.min(q.x) - tol
            && r.x <= p.x.max(q.x) + tol
            && r.y >= p.y.min(q.y) - tol
            && r.y <= p.y.max(q.y) + tol
    };
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

/// True when no two non-adjacent edges touch and no vertex is repeated.
pub fn is_simple(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let tol = 1e-14 * diameter(poly).powi(2);
    for i in 0..n {
        for j in i + 1..n {
            if poly[i].dist(poly[j]) <= 1e-14 * diameter(poly) {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d, tol) {
                return false;
            }
        }
    }
    true
}

/// Signed distances from `p` to the supporting lines of each edge, positive on
/// the interior side of a counter-clockwise polygon.
pub fn edge_line_distances(poly: &[Point2], p: Point2) -> Vec<f64> {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let len = a.dist(b);
            if len == 0.0 {
                f64::INFINITY
            } else {
                (b - a).cross(p - a) / len
            }
        })
        .collect()
}

/// Largest disc inside the kernel of a counter-clockwise polygon.
///
/// The kernel is the intersection of the interior half-planes of all edges;
/// its Chebyshev centre maximizes the minimum signed line distance, a small
/// linear program whose optimum sits at the intersection of three active
/// constraints. Returns `None` when the kernel is empty.
pub fn kernel_chebyshev_ball(poly: &[Point2]) -> Option<(Point2, f64)> {
    let n = poly.len();
    // Each line: unit normal (into the interior) and offset, n·p - c >= r.
    let lines: Vec<(Point2, f64)> = (0..n)
        .filter_map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let t = b - a;
            let len = t.norm();
            (len > 0.0).then(|| {
                let nrm = Point2::new(-t.y / len, t.x / len);
                (nrm, nrm.dot(a))
            })
        })
        .collect();
    let scale = diameter(poly);
    let tol = 1e-12 * scale;
    let mut best: Option<(Point2, f64)> = None;
    let m = lines.len();
    for i in 0..m {
        for j in i + 1..m {
            for l in j + 1..m {
                // Solve n_q·p - r = c_q for q in {i, j, l}.
                let rows = [lines[i], lines[j], lines[l]];
                let a = [
                    [rows[0].0.x, rows[0].0.y, -1.0],
                    [rows[1].0.x, rows[1].0.y, -1.0],
                    [rows[2].0.x, rows[2].0.y, -1.0],
                ];
                let rhs = [rows[0].1, rows[1].1, rows[2].1];
                let Some(sol) = solve3(a, rhs) else { continue };
                let (p, r) = (Point2::new(sol[0], sol[1]), sol[2]);
                if r < -tol {
                    continue;
                }
                if lines.iter().all(|(nrm, c)| nrm.dot(p) - c >= r - tol)
                    && best.is_none_or(|(_, rb)| r > rb)
                {
                    best = Some((p, r));
                }
            }
        }
    }
    best.filter(|&(_, r)| r > tol)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-14 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *slot = det(m) / d;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn square_area_centroid_diameter() {
        let sq = unit_square();
        assert!((signed_area(&sq) - 1.0).abs() < 1e-15);
        let c = centroid(&sq);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        assert!((diameter(&sq) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_ball_of_square() {
        let (c, r) = kernel_chebyshev_ball(&unit_square()).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        assert!(c.dist(Point2::new(0.5, 0.5)) < 1e-12);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let p = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(!is_simple(&p));
        assert!(is_simple(&unit_square()));
    }

    #[test]
    fn u_shape_has_empty_kernel() {
        // The inner walls x = 1 and x = 2 face away from each other.
        let u = vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 3.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 3.0),
            Point2::new(0.0, 3.0),
        ];
        assert!(kernel_chebyshev_ball(&u).is_none());
    }

    #[test]
    fn l_shape_kernel_is_corner_square() {
        let l = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let (c, r) = kernel_chebyshev_ball(&l).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        assert!(c.dist(Point2::new(0.5, 0.5)) < 1e-12);
    }
}
