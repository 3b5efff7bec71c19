#![allow(dead_code)]

use faer::c64;
use faer::sparse::SparseColMat;
use faer::Mat;
use rand::Rng;
use sfvem::polybasis::{monomial_exponents, poly_dim, MonomialBasis};
use sfvem::quadrature::gauss_legendre;
use sfvem::Point2;

pub const FAMILIES: [sfvem::MeshKind; 3] = [sfvem::MeshKind::Quad, sfvem::MeshKind::Pentagon, sfvem::MeshKind::Octagon];

/// Exact `∫_P ξ^a η^b` over a counter-clockwise polygon by Green's theorem,
/// `∫ x^a y^b dA = 1/(a+1) ∮ x^(a+1) y^b dy`. Each edge integrand is a
/// polynomial of degree `a+b+1` in the edge parameter, integrated exactly by
/// Gauss-Legendre.
pub fn green_monomial_integral(poly: &[Point2], a: usize, b: usize) -> f64 {
    let (t, w) = gauss_legendre((a + b + 3).div_ceil(2));
    let n = poly.len();
    let mut total = 0.0;
    for j in 0..n {
        let (p, q) = (poly[j], poly[(j + 1) % n]);
        let dy = q.y - p.y;
        if dy == 0.0 {
            continue;
        }
        let edge: f64 = t
            .iter()
            .zip(&w)
            .map(|(&ti, &wi)| {
                let s = 0.5 * (ti + 1.0);
                let x = p.x + s * (q.x - p.x);
                let y = p.y + s * dy;
                0.5 * wi * x.powi(a as i32 + 1) * y.powi(b as i32)
            })
            .sum();
        total += edge * dy;
    }
    total / (a + 1) as f64
}

/// Exact integrals of the scaled monomials `((x − c)/h)^α` for every
/// `|α| ≤ degree` over a polygon.
pub fn exact_scaled_moments(poly: &[Point2], basis: &MonomialBasis, degree: usize) -> Vec<f64> {
    let local: Vec<Point2> = poly.iter().map(|&p| basis.to_local(p)).collect();
    let h2 = basis.scale * basis.scale;
    (0..poly_dim(degree as i32))
        .map(|i| {
            let (a, b) = monomial_exponents(i);
            h2 * green_monomial_integral(&local, a, b)
        })
        .collect()
}

/// Random polynomial in the scaled monomials of `basis`, as coefficients.
pub fn random_coefficients(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn eval(coeffs: &[f64], basis: &MonomialBasis, p: Point2) -> f64 {
    coeffs.iter().zip(basis.values(p)).map(|(c, m)| c * m).sum()
}

pub fn eval_grad(coeffs: &[f64], basis: &MonomialBasis, p: Point2) -> [f64; 2] {
    coeffs.iter().zip(basis.gradients(p)).fold([0.0, 0.0], |acc, (c, g)| [acc[0] + c * g[0], acc[1] + c * g[1]])
}

pub fn apply(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

pub fn dense(a: &SparseColMat<usize, c64>) -> Mat<c64> {
    let r = a.as_ref();
    let mut out = Mat::<c64>::zeros(r.nrows(), r.ncols());
    for j in 0..r.ncols() {
        for (&i, v) in r.row_idx_of_col_raw(j).iter().zip(r.val_of_col(j)) {
            out[(i, j)] += *v;
        }
    }
    out
}

pub fn frobenius(a: &Mat<c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}
