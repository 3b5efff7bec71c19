//! Scaled monomial bases on cells and edges, and the enriched vector space
//! `x·P_{k-2} ⊕ curl P_{k+ℓ}` used for the gradient projection.
//!
//! All multi-indices follow graded lexicographic order:
//! `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.

use crate::geometry::Point2;

/// `dim P_k` in two variables; zero for negative degrees.
pub fn poly_dim(degree: i32) -> usize {
    if degree < 0 {
        0
    } else {
        let d = degree as usize;
        (d + 1) * (d + 2) / 2
    }
}

/// Position of `x^a y^b` in graded lexicographic order.
pub fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Exponents of the `i`-th monomial.
pub fn monomial_exponents(i: usize) -> (usize, usize) {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= i {
        d += 1;
    }
    let b = i - d * (d + 1) / 2;
    (d - b, b)
}

/// Values of all monomials `ξ^α` of degree `<= degree` at a point `ξ`.
pub fn raw_monomials(xi: Point2, degree: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(poly_dim(degree as i32));
    let mut xp = vec![1.0; degree + 1];
    let mut yp = vec![1.0; degree + 1];
    for d in 1..=degree {
        xp[d] = xp[d - 1] * xi.x;
        yp[d] = yp[d - 1] * xi.y;
    }
    for d in 0..=degree {
        for b in 0..=d {
            out.push(xp[d - b] * yp[b]);
        }
    }
    out
}

/// Scaled monomials `m_α(x) = ((x - x_E)/h_E)^α` on one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialBasis {
    pub center: Point2,
    pub scale: f64,
    pub degree: usize,
}

/// Values, gradients and Laplacians of a [`MonomialBasis`] at a set of points.
#[derive(Debug, Clone)]
pub struct MonomialTable {
    pub values: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<[f64; 2]>>,
    pub laplacians: Vec<Vec<f64>>,
}

impl MonomialBasis {
    pub fn new(center: Point2, scale: f64, degree: usize) -> Self {
        Self { center, scale, degree }
    }

    pub fn len(&self) -> usize {
        poly_dim(self.degree as i32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_local(&self, p: Point2) -> Point2 {
        (p - self.center) * (1.0 / self.scale)
    }

    pub fn values(&self, p: Point2) -> Vec<f64> {
        raw_monomials(self.to_local(p), self.degree)
    }

    pub fn gradients(&self, p: Point2) -> Vec<[f64; 2]> {
        let xi = self.to_local(p);
        let low = if self.degree == 0 {
            vec![]
        } else {
            raw_monomials(xi, self.degree - 1)
        };
        let inv = 1.0 / self.scale;
        (0..self.len())
            .map(|i| {
                let (a, b) = monomial_exponents(i);
                let gx = if a > 0 { a as f64 * low[monomial_index(a - 1, b)] } else { 0.0 };
                let gy = if b > 0 { b as f64 * low[monomial_index(a, b - 1)] } else { 0.0 };
                [gx * inv, gy * inv]
            })
            .collect()
    }

    pub fn laplacians(&self, p: Point2) -> Vec<f64> {
        let xi = self.to_local(p);
        let low = if self.degree < 2 {
            vec![]
        } else {
            raw_monomials(xi, self.degree - 2)
        };
        let inv2 = 1.0 / (self.scale * self.scale);
        (0..self.len())
            .map(|i| {
                let (a, b) = monomial_exponents(i);
                let mut s = 0.0;
                if a > 1 {
                    s += (a * (a - 1)) as f64 * low[monomial_index(a - 2, b)];
                }
                if b > 1 {
                    s += (b * (b - 1)) as f64 * low[monomial_index(a, b - 2)];
                }
                s * inv2
            })
            .collect()
    }

    pub fn evaluate(&self, points: &[Point2]) -> MonomialTable {
        MonomialTable {
            values: points.iter().map(|&p| self.values(p)).collect(),
            gradients: points.iter().map(|&p| self.gradients(p)).collect(),
            laplacians: points.iter().map(|&p| self.laplacians(p)).collect(),
        }
    }

    /// Coefficients of `Δm_α` in the basis of degree `degree - 2`.
    pub fn laplacian_coefficients(&self, alpha: usize) -> Vec<f64> {
        let mut out = vec![0.0; poly_dim(self.degree as i32 - 2)];
        let (a, b) = monomial_exponents(alpha);
        let inv2 = 1.0 / (self.scale * self.scale);
        if a > 1 {
            out[monomial_index(a - 2, b)] += (a * (a - 1)) as f64 * inv2;
        }
        if b > 1 {
            out[monomial_index(a, b - 2)] += (b * (b - 1)) as f64 * inv2;
        }
        out
    }

    /// Coefficients of `∂m_α/∂x_dir` in the basis of degree `degree - 1`.
    pub fn derivative_coefficients(&self, alpha: usize, dir: usize) -> Vec<f64> {
        let mut out = vec![0.0; poly_dim(self.degree as i32 - 1)];
        let (a, b) = monomial_exponents(alpha);
        let inv = 1.0 / self.scale;
        match dir {
            0 if a > 0 => out[monomial_index(a - 1, b)] = a as f64 * inv,
            1 if b > 0 => out[monomial_index(a, b - 1)] = b as f64 * inv,
            _ => {}
        }
        out
    }
}

/// One-dimensional scaled monomials `((x - x_e)·t / h_e)^i` on an edge.
///
/// The tangent `t` follows the global edge orientation so that both cells
/// sharing the edge see the same basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeMonomialBasis {
    pub midpoint: Point2,
    pub tangent: Point2,
    pub length: f64,
    pub degree: usize,
}

impl EdgeMonomialBasis {
    pub fn new(start: Point2, end: Point2, degree: usize) -> Self {
        let length = start.dist(end);
        Self {
            midpoint: (start + end) * 0.5,
            tangent: (end - start) * (1.0 / length),
            length,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Edge parameter in `[-1/2, 1/2]`.
    pub fn parameter(&self, p: Point2) -> f64 {
        (p - self.midpoint).dot(self.tangent) / self.length
    }

    pub fn values(&self, p: Point2) -> Vec<f64> {
        let s = self.parameter(p);
        let mut out = vec![1.0; self.len()];
        for i in 1..out.len() {
            out[i] = out[i - 1] * s;
        }
        out
    }
}

/// Generators of `P_{k,ℓ} = x·P_{k-2} ⊕ curl P_{k+ℓ}` on one cell.
///
/// Generators are written in the scaled variable `ξ = (x - x_E)/h_E`: the
/// first block is `ξ m_α` for `|α| <= k-2`, the second `curl_ξ m_α` for
/// `1 <= |α| <= k+ℓ`. Both blocks are `O(1)` in magnitude on the cell.
#[derive(Debug, Clone)]
pub struct PklBasis {
    pub k: usize,
    pub ell: usize,
    pub monomials: MonomialBasis,
    /// Component coefficients of each generator in the scaled monomials of
    /// degree `k + ℓ - 1`.
    components: Vec<[Vec<f64>; 2]>,
    /// Physical divergence of each generator in the basis of degree `k - 2`.
    divergences: Vec<Vec<f64>>,
}

impl PklBasis {
    pub fn new(center: Point2, scale: f64, k: usize, ell: usize) -> Self {
        assert!(k >= 2, "P_{{k,l}} requires k >= 2");
        let top = k + ell - 1;
        let ncomp = poly_dim(top as i32);
        let nlow = poly_dim(k as i32 - 2);
        let mut components = Vec::new();
        let mut divergences = Vec::new();
        for alpha in 0..nlow {
            let (a, b) = monomial_exponents(alpha);
            let mut cx = vec![0.0; ncomp];
            let mut cy = vec![0.0; ncomp];
            cx[monomial_index(a + 1, b)] = 1.0;
            cy[monomial_index(a, b + 1)] = 1.0;
            components.push([cx, cy]);
            let mut div = vec![0.0; nlow];
            div[alpha] = (2 + a + b) as f64 / scale;
            divergences.push(div);
        }
        for alpha in 1..poly_dim((k + ell) as i32) {
            let (a, b) = monomial_exponents(alpha);
            let mut cx = vec![0.0; ncomp];
            let mut cy = vec![0.0; ncomp];
            if b > 0 {
                cx[monomial_index(a, b - 1)] = b as f64;
            }
            if a > 0 {
                cy[monomial_index(a - 1, b)] = -(a as f64);
            }
            components.push([cx, cy]);
            divergences.push(vec![0.0; nlow]);
        }
        Self {
            k,
            ell,
            monomials: MonomialBasis::new(center, scale, top),
            components,
            divergences,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Number of generators in the `x·P_{k-2}` block.
    pub fn radial_count(&self) -> usize {
        poly_dim(self.k as i32 - 2)
    }

    /// Divergence coefficients of generator `i` in the basis of degree `k-2`.
    pub fn divergence(&self, i: usize) -> &[f64] {
        &self.divergences[i]
    }

    pub fn component_coefficients(&self, i: usize) -> &[Vec<f64>; 2] {
        &self.components[i]
    }

    /// Values of every generator at `p`.
    pub fn values(&self, p: Point2) -> Vec<[f64; 2]> {
        let m = self.monomials.values(p);
        self.components
            .iter()
            .map(|[cx, cy]| [dot(cx, &m), dot(cy, &m)])
            .collect()
    }
}

/// Divergence of a linear combination of generators.
pub fn pkl_divergence(basis: &PklBasis, coefficients: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis.radial_count()];
    for (c, div) in coefficients.iter().zip(&basis.divergences) {
        for (o, d) in out.iter_mut().zip(div) {
            *o += c * d;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for i in 0..55 {
            let (a, b) = monomial_exponents(i);
            assert_eq!(monomial_index(a, b), i);
        }
        assert_eq!(monomial_exponents(3), (2, 0));
        assert_eq!(monomial_exponents(4), (1, 1));
    }

    #[test]
    fn values_at_center() {
        let basis = MonomialBasis::new(Point2::new(0.3, 0.7), 0.25, 3);
        let v = basis.values(basis.center);
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_and_laplacian_examples() {
        let h = 0.4;
        let basis = MonomialBasis::new(Point2::new(0.1, 0.2), h, 2);
        let p = Point2::new(0.77, -0.3);
        let g = basis.gradients(p);
        assert_eq!(g[monomial_index(1, 0)], [1.0 / h, 0.0]);
        let l = basis.laplacians(p);
        assert!((l[monomial_index(2, 0)] - 2.0 / (h * h)).abs() < 1e-12);
        assert_eq!(l[monomial_index(1, 1)], 0.0);
    }

    #[test]
    fn pkl_dimensions() {
        let c = Point2::new(0.0, 0.0);
        assert_eq!(PklBasis::new(c, 1.0, 2, 1).len(), 10);
        assert_eq!(PklBasis::new(c, 1.0, 2, 0).len(), 6);
        assert_eq!(PklBasis::new(c, 1.0, 3, 2).len(), 23);
        for k in 2..5 {
            for ell in 0..4 {
                let b = PklBasis::new(c, 1.0, k, ell);
                assert_eq!(
                    b.len(),
                    poly_dim(k as i32 - 2) + poly_dim((k + ell) as i32) - 1
                );
            }
        }
    }

    #[test]
    fn radial_divergence_on_unit_diameter_cell() {
        let b = PklBasis::new(Point2::new(0.5, 0.5), 1.0, 3, 1);
        assert_eq!(b.divergence(0), &[2.0, 0.0, 0.0]);
        let i = b.radial_count();
        assert!(b.divergence(i).iter().all(|&d| d == 0.0));
        // x·m_(1,0): div = 2 m + ξ·∇m = 3 m_(1,0)
        assert_eq!(b.divergence(1), &[0.0, 3.0, 0.0]);
    }
}
