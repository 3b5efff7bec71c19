//! Local degrees of freedom and the four polynomial projections of a virtual
//! element function, all computed from its degrees of freedom.

use faer::Mat;

use crate::error::ProjectionError;
use crate::geometry::{self, Point2};
use crate::linalg::{solve_square, GramFactor};
use crate::mesh::PolygonMesh;
use crate::polybasis::{poly_dim, MonomialBasis, PklBasis};
use crate::quadrature::{build_edge_rule, polygon_rule, CellRule, EdgeRule};

/// Condition numbers above this attach a warning to the element.
pub const CONDITION_WARNING: f64 = 1e12;

/// Cell and edge quadrature exactness used by an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureDegrees {
    pub cell: usize,
    pub edge: usize,
}

impl QuadratureDegrees {
    pub fn for_order(k: usize, ell: usize) -> Self {
        Self {
            cell: 2 * (k + ell) + 2,
            edge: 2 * k + ell + 2,
        }
    }
}

/// Local ordering: vertex values, then `k-1` scaled moments per edge, then
/// `k(k-1)/2` scaled interior moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub k: usize,
    pub num_vertices: usize,
}

impl DofLayout {
    pub fn new(k: usize, num_vertices: usize) -> Self {
        assert!(k >= 2, "virtual element spaces require k >= 2");
        Self { k, num_vertices }
    }

    pub fn vertex(&self, j: usize) -> usize {
        j
    }

    pub fn edge(&self, j: usize, i: usize) -> usize {
        self.num_vertices + j * (self.k - 1) + i
    }

    pub fn interior(&self, beta: usize) -> usize {
        self.num_vertices * self.k + beta
    }

    pub fn interior_count(&self) -> usize {
        self.k * (self.k - 1) / 2
    }

    pub fn len(&self) -> usize {
        self.num_vertices * self.k + self.interior_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Maps the `k+1` edge data `[v(a), v(b), μ_0, ..., μ_{k-2}]` (endpoint
/// values and scaled moments, in the edge's own orientation `a → b`) to the
/// coefficients of the degree-`k` trace in powers of `s ∈ [-1/2, 1/2]`.
pub fn edge_trace_matrix(k: usize) -> Mat<f64> {
    let n = k + 1;
    let mut t = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        t[(0, i)] = (-0.5f64).powi(i as i32);
        t[(1, i)] = 0.5f64.powi(i as i32);
    }
    for r in 0..k - 1 {
        for i in 0..n {
            let p = r + i;
            t[(2 + r, i)] = if p % 2 == 1 {
                0.0
            } else {
                2.0 * 0.5f64.powi(p as i32 + 1) / (p as f64 + 1.0)
            };
        }
    }
    let (inv, _) = solve_square(&t, &Mat::<f64>::identity(n, n)).expect("edge trace system is invertible");
    inv
}

/// One edge of an element, seen from the element.
#[derive(Debug, Clone)]
pub struct ElementEdge {
    /// Whether the element traverses the edge in its global orientation.
    pub forward: bool,
    pub normal: Point2,
    pub length: f64,
    /// Gauss points in the element's traversal direction.
    pub rule: EdgeRule,
    /// Edge parameter of each rule point in the global orientation.
    pub params: Vec<f64>,
    /// Row `g` gives the trace of a virtual function at point `g` as a
    /// combination of local DOFs.
    pub trace: Mat<f64>,
}

/// Geometry, bases and quadrature of one polygonal element.
#[derive(Debug, Clone)]
pub struct VirtualElement {
    pub polygon: Vec<Point2>,
    pub centroid: Point2,
    pub diameter: f64,
    pub area: f64,
    pub k: usize,
    pub ell: usize,
    pub layout: DofLayout,
    pub monomials: MonomialBasis,
    pub rule: CellRule,
    pub edges: Vec<ElementEdge>,
}

impl VirtualElement {
    /// Builds the element for mesh cell `c`.
    pub fn from_mesh(
        mesh: &PolygonMesh,
        c: usize,
        k: usize,
        ell: usize,
        degrees: QuadratureDegrees,
    ) -> Result<Self, ProjectionError> {
        let cell = mesh.cell(c);
        let forward: Vec<bool> = mesh
            .cell_edges(c)
            .iter()
            .enumerate()
            .map(|(j, &e)| mesh.edges()[e].v[0] == cell[j])
            .collect();
        Self::new(
            mesh.cell_polygon(c),
            mesh.geometry(c).star_point,
            &forward,
            k,
            ell,
            degrees,
        )
    }

    /// Builds an element from a counter-clockwise polygon, a point of its
    /// kernel, and the orientation flag of each edge `j → j+1`.
    pub fn new(
        polygon: Vec<Point2>,
        star: Point2,
        forward: &[bool],
        k: usize,
        ell: usize,
        degrees: QuadratureDegrees,
    ) -> Result<Self, ProjectionError> {
        let n = polygon.len();
        assert_eq!(forward.len(), n);
        let layout = DofLayout::new(k, n);
        let centroid = geometry::centroid(&polygon);
        let diameter = geometry::diameter(&polygon);
        let area = geometry::signed_area(&polygon);
        let rule = polygon_rule(&polygon, star, degrees.cell)?;
        let tinv = edge_trace_matrix(k);
        let mut edges = Vec::with_capacity(n);
        for j in 0..n {
            let (a, b) = (polygon[j], polygon[(j + 1) % n]);
            let rule = build_edge_rule(a, b, degrees.edge);
            let length = a.dist(b);
            let normal = Point2::new(b.y - a.y, a.x - b.x) * (1.0 / length);
            let fwd = forward[j];
            let params: Vec<f64> = rule.params.iter().map(|&s| if fwd { s } else { -s }).collect();
            // Local indices of the edge data in global orientation.
            let (va, vb) = if fwd { (j, (j + 1) % n) } else { ((j + 1) % n, j) };
            let mut cols = vec![layout.vertex(va), layout.vertex(vb)];
            cols.extend((0..k - 1).map(|i| layout.edge(j, i)));
            let mut trace = Mat::<f64>::zeros(params.len(), layout.len());
            for (g, &s) in params.iter().enumerate() {
                for (r, &col) in cols.iter().enumerate() {
                    let mut v = 0.0;
                    let mut sp = 1.0;
                    for i in 0..=k {
                        v += sp * tinv[(i, r)];
                        sp *= s;
                    }
                    trace[(g, col)] = v;
                }
            }
            edges.push(ElementEdge {
                forward: fwd,
                normal,
                length,
                rule,
                params,
                trace,
            });
        }
        Ok(Self {
            polygon,
            centroid,
            diameter,
            area,
            k,
            ell,
            layout,
            monomials: MonomialBasis::new(centroid, diameter, k),
            rule,
            edges,
        })
    }

    pub fn num_dofs(&self) -> usize {
        self.layout.len()
    }

    /// Basis of the generators of `P_{k,ℓ}` on this element.
    pub fn pkl_basis(&self) -> PklBasis {
        PklBasis::new(self.centroid, self.diameter, self.k, self.ell)
    }

    /// Scaled monomials of degree `k` at the cell quadrature points
    /// (`n_q × dim P_k`).
    pub fn monomial_values(&self) -> Mat<f64> {
        let nk = self.monomials.len();
        let vals: Vec<Vec<f64>> = self.rule.points.iter().map(|&p| self.monomials.values(p)).collect();
        Mat::from_fn(vals.len(), nk, |q, a| vals[q][a])
    }

    /// `D_{iα} = dof_i(m_α)`.
    pub fn dof_matrix(&self) -> Mat<f64> {
        let k = self.k;
        let nk = self.monomials.len();
        let lay = self.layout;
        let mut d = Mat::<f64>::zeros(lay.len(), nk);
        for (j, &p) in self.polygon.iter().enumerate() {
            for (a, v) in self.monomials.values(p).into_iter().enumerate() {
                d[(lay.vertex(j), a)] = v;
            }
        }
        for (j, e) in self.edges.iter().enumerate() {
            for (g, (&x, &w)) in e.rule.points.iter().zip(&e.rule.weights).enumerate() {
                let m = self.monomials.values(x);
                let s = e.params[g];
                let mut sp = w / e.length;
                for i in 0..k - 1 {
                    for a in 0..nk {
                        d[(lay.edge(j, i), a)] += sp * m[a];
                    }
                    sp *= s;
                }
            }
        }
        let nint = lay.interior_count();
        for (&x, &w) in self.rule.points.iter().zip(&self.rule.weights) {
            let m = self.monomials.values(x);
            for b in 0..nint {
                for a in 0..nk {
                    d[(lay.interior(b), a)] += w * m[b] * m[a] / self.area;
                }
            }
        }
        d
    }

    /// Local DOF values of a function, with moments taken by the element's
    /// quadrature.
    pub fn interpolate(&self, f: impl Fn(Point2) -> f64) -> Vec<f64> {
        let lay = self.layout;
        let mut out = vec![0.0; lay.len()];
        for (j, &p) in self.polygon.iter().enumerate() {
            out[lay.vertex(j)] = f(p);
        }
        for (j, e) in self.edges.iter().enumerate() {
            for (g, (&x, &w)) in e.rule.points.iter().zip(&e.rule.weights).enumerate() {
                let fx = f(x);
                let mut sp = w / e.length;
                for i in 0..self.k - 1 {
                    out[lay.edge(j, i)] += sp * fx;
                    sp *= e.params[g];
                }
            }
        }
        for (&x, &w) in self.rule.points.iter().zip(&self.rule.weights) {
            let fx = w * f(x) / self.area;
            for (b, m) in self.monomials.values(x).into_iter().take(lay.interior_count()).enumerate() {
                out[lay.interior(b)] += fx * m;
            }
        }
        out
    }

    /// `∫_∂E (q·n) v` for every local DOF, where `q(x)` is a vector field.
    fn boundary_flux_row(&self, q: impl Fn(Point2) -> [f64; 2], out: &mut [f64]) {
        for e in &self.edges {
            for (g, (&x, &w)) in e.rule.points.iter().zip(&e.rule.weights).enumerate() {
                let v = q(x);
                let flux = w * (v[0] * e.normal.x + v[1] * e.normal.y);
                if flux == 0.0 {
                    continue;
                }
                for (o, t) in out.iter_mut().zip(e.trace.row(g).iter()) {
                    *o += flux * t;
                }
            }
        }
    }

    /// Coefficient matrix of `Π∇_k` (`dim P_k × #dofs`). Also returns the
    /// condition estimate of the constrained system.
    pub fn elliptic_projector(&self, d: &Mat<f64>) -> Result<(Mat<f64>, f64), ProjectionError> {
        let nk = self.monomials.len();
        let ndof = self.num_dofs();
        let lay = self.layout;
        let mut b = Mat::<f64>::zeros(nk, ndof);
        b[(0, lay.interior(0))] = 1.0;
        let mut row = vec![0.0; ndof];
        for a in 1..nk {
            row.iter_mut().for_each(|r| *r = 0.0);
            for (beta, c) in self.monomials.laplacian_coefficients(a).into_iter().enumerate() {
                row[lay.interior(beta)] -= self.area * c;
            }
            let mb = self.monomials;
            self.boundary_flux_row(|x| mb.gradients(x)[a], &mut row);
            for (i, &r) in row.iter().enumerate() {
                b[(a, i)] = r;
            }
        }
        let g = &b * d;
        let (pi, cond) = solve_square(&g, &b).ok_or(ProjectionError::Singular { what: "elliptic projection" })?;
        Ok((pi, cond))
    }

    /// Coefficient matrix of `Π⁰_k` using the enhancement: moments against
    /// `P_k \ P_{k-2}` are taken from `Π∇_k`.
    pub fn l2_projector(&self, pi_nabla: &Mat<f64>) -> Result<(Mat<f64>, f64), ProjectionError> {
        let nk = self.monomials.len();
        let lay = self.layout;
        let mq = self.monomial_values();
        let sw = Mat::from_fn(mq.nrows(), nk, |q, a| self.rule.weights[q].sqrt() * mq[(q, a)]);
        let gram = GramFactor::new(&sw);
        if gram.rank() < nk {
            return Err(ProjectionError::Singular { what: "monomial mass" });
        }
        let h = sw.transpose() * &sw;
        let hp = &h * pi_nabla;
        let nint = lay.interior_count();
        let mut c = Mat::<f64>::zeros(nk, lay.len());
        for a in 0..nk {
            if a < nint {
                c[(a, lay.interior(a))] = self.area;
            } else {
                for i in 0..lay.len() {
                    c[(a, i)] = hp[(a, i)];
                }
            }
        }
        Ok((gram.solve(&c), gram.condition_estimate()))
    }

    /// Coefficient matrix of `Π⁰_{k-1}∇` (`2·dim P_{k-1} × #dofs`): rows
    /// `0..n` hold the x-component, rows `n..2n` the y-component.
    pub fn grad_l2_projector(&self) -> Result<(Mat<f64>, f64), ProjectionError> {
        let n1 = poly_dim(self.k as i32 - 1);
        let lay = self.layout;
        let ndof = lay.len();
        let mq = self.monomial_values();
        let sw = Mat::from_fn(mq.nrows(), n1, |q, a| self.rule.weights[q].sqrt() * mq[(q, a)]);
        let gram = GramFactor::new(&sw);
        if gram.rank() < n1 {
            return Err(ProjectionError::Singular { what: "gradient mass" });
        }
        let low = MonomialBasis::new(self.centroid, self.diameter, self.k - 1);
        let mut rhs = Mat::<f64>::zeros(n1, 2 * ndof);
        let mut row = vec![0.0; ndof];
        for dir in 0..2 {
            for beta in 0..n1 {
                row.iter_mut().for_each(|r| *r = 0.0);
                for (gm, c) in low.derivative_coefficients(beta, dir).into_iter().enumerate() {
                    row[lay.interior(gm)] -= self.area * c;
                }
                let mb = self.monomials;
                self.boundary_flux_row(
                    |x| {
                        let v = mb.values(x)[beta];
                        if dir == 0 {
                            [v, 0.0]
                        } else {
                            [0.0, v]
                        }
                    },
                    &mut row,
                );
                for (i, &r) in row.iter().enumerate() {
                    rhs[(beta, dir * ndof + i)] = r;
                }
            }
        }
        let sol = gram.solve(&rhs);
        let out = Mat::from_fn(2 * n1, ndof, |r, i| {
            let (dir, beta) = (r / n1, r % n1);
            sol[(beta, dir * ndof + i)]
        });
        Ok((out, gram.condition_estimate()))
    }

    /// Values of the `P_{k,ℓ}` generators at the cell quadrature points,
    /// scaled by `√w`: row `2q + c` holds component `c` at point `q`.
    pub fn weighted_pkl_values(&self, pkl: &PklBasis) -> Mat<f64> {
        let nq = self.rule.len();
        let mut w = Mat::<f64>::zeros(2 * nq, pkl.len());
        for (q, (&x, &wt)) in self.rule.points.iter().zip(&self.rule.weights).enumerate() {
            let s = wt.sqrt();
            for (i, v) in pkl.values(x).into_iter().enumerate() {
                w[(2 * q, i)] = s * v[0];
                w[(2 * q + 1, i)] = s * v[1];
            }
        }
        w
    }

    /// Coefficient matrix of `Π⁰_P∇` in the generators of `P_{k,ℓ}`.
    pub fn pkl_grad_projector(&self, pkl: &PklBasis) -> Result<(Mat<f64>, f64), ProjectionError> {
        let lay = self.layout;
        let ndof = lay.len();
        let np = pkl.len();
        let gram = GramFactor::new(&self.weighted_pkl_values(pkl));
        if gram.rank() < np {
            return Err(ProjectionError::RankDeficient {
                rank: gram.rank(),
                dim: np,
            });
        }
        let mut rhs = Mat::<f64>::zeros(np, ndof);
        let mut row = vec![0.0; ndof];
        for i in 0..np {
            row.iter_mut().for_each(|r| *r = 0.0);
            for (gm, c) in pkl.divergence(i).iter().enumerate() {
                row[lay.interior(gm)] -= self.area * c;
            }
            self.boundary_flux_row(|x| pkl.values(x)[i], &mut row);
            for (j, &r) in row.iter().enumerate() {
                rhs[(i, j)] = r;
            }
        }
        Ok((gram.solve(&rhs), gram.condition_estimate()))
    }
}

/// All projection matrices of one element.
#[derive(Debug, Clone)]
pub struct ElementProjections {
    pub element: VirtualElement,
    pub pkl: PklBasis,
    pub d: Mat<f64>,
    pub pi_nabla: Mat<f64>,
    pub pi_zero: Mat<f64>,
    pub pi_zero_grad: Mat<f64>,
    pub pi_pgrad: Mat<f64>,
    /// Ill-conditioning notes collected while computing the projections.
    pub warnings: Vec<String>,
}

impl ElementProjections {
    pub fn compute(element: VirtualElement) -> Result<Self, ProjectionError> {
        let mut warnings = Vec::new();
        let mut note = |what: &str, cond: f64| {
            if cond > CONDITION_WARNING {
                warnings.push(format!("{what}: condition number {cond:.2e}"));
            }
        };
        let d = element.dof_matrix();
        let (pi_nabla, c) = element.elliptic_projector(&d)?;
        note("elliptic projection", c);
        let (pi_zero, c) = element.l2_projector(&pi_nabla)?;
        note("monomial mass", c);
        let (pi_zero_grad, c) = element.grad_l2_projector()?;
        note("gradient mass", c);
        let pkl = element.pkl_basis();
        let (pi_pgrad, c) = element.pkl_grad_projector(&pkl)?;
        note("P_(k,l) Gram", c);
        Ok(Self {
            element,
            pkl,
            d,
            pi_nabla,
            pi_zero,
            pi_zero_grad,
            pi_pgrad,
            warnings,
        })
    }

    pub fn for_cell(
        mesh: &PolygonMesh,
        c: usize,
        k: usize,
        ell: usize,
        degrees: QuadratureDegrees,
    ) -> Result<Self, ProjectionError> {
        Self::compute(VirtualElement::from_mesh(mesh, c, k, ell, degrees)?)
    }

    /// `Π⁰_k φ_i` at the cell quadrature points (`n_q × #dofs`).
    pub fn values_at_quadrature(&self) -> Mat<f64> {
        self.element.monomial_values() * &self.pi_zero
    }

    /// Components of `Π⁰_{k-1}∇φ_i` at the cell quadrature points.
    pub fn grad_l2_at_quadrature(&self) -> [Mat<f64>; 2] {
        let n1 = poly_dim(self.element.k as i32 - 1);
        let mq = self.element.monomial_values();
        let low = mq.subcols(0, n1);
        [
            low * self.pi_zero_grad.subrows(0, n1),
            low * self.pi_zero_grad.subrows(n1, n1),
        ]
    }

    /// Components of `Π⁰_P∇φ_i` at the cell quadrature points.
    pub fn pkl_grad_at_quadrature(&self) -> [Mat<f64>; 2] {
        let el = &self.element;
        let nq = el.rule.len();
        let np = self.pkl.len();
        let mut vx = Mat::<f64>::zeros(nq, np);
        let mut vy = Mat::<f64>::zeros(nq, np);
        for (q, &x) in el.rule.points.iter().enumerate() {
            for (i, v) in self.pkl.values(x).into_iter().enumerate() {
                vx[(q, i)] = v[0];
                vy[(q, i)] = v[1];
            }
        }
        [&vx * &self.pi_pgrad, &vy * &self.pi_pgrad]
    }

    /// Gradients of `Π∇_k φ_i` at the cell quadrature points.
    pub fn nabla_grad_at_quadrature(&self) -> [Mat<f64>; 2] {
        let el = &self.element;
        let nq = el.rule.len();
        let nk = el.monomials.len();
        let mut gx = Mat::<f64>::zeros(nq, nk);
        let mut gy = Mat::<f64>::zeros(nq, nk);
        for (q, &x) in el.rule.points.iter().enumerate() {
            for (a, g) in el.monomials.gradients(x).into_iter().enumerate() {
                gx[(q, a)] = g[0];
                gy[(q, a)] = g[1];
            }
        }
        [&gx * &self.pi_nabla, &gy * &self.pi_nabla]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshFamily, MeshKind};

    fn unit_square(k: usize, ell: usize) -> VirtualElement {
        let poly = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        VirtualElement::new(poly, Point2::new(0.5, 0.5), &[true; 4], k, ell, QuadratureDegrees::for_order(k, ell)).unwrap()
    }

    fn max_identity_defect(m: &Mat<f64>) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((m[(i, j)] - target).abs());
            }
        }
        err
    }

    #[test]
    fn dof_count() {
        assert_eq!(DofLayout::new(2, 4).len(), 9);
        assert_eq!(DofLayout::new(3, 5).len(), 18);
        assert_eq!(DofLayout::new(4, 8).len(), 38);
    }

    #[test]
    fn trace_matrix_reproduces_edge_polynomials() {
        for k in 2..=4 {
            let tinv = edge_trace_matrix(k);
            // v(s) = s^k: data are endpoint values and moments ∫ s^{k+r}.
            let mut data = vec![(-0.5f64).powi(k as i32), 0.5f64.powi(k as i32)];
            for r in 0..k - 1 {
                let p = k + r;
                data.push(if p % 2 == 1 { 0.0 } else { 2.0 * 0.5f64.powi(p as i32 + 1) / (p as f64 + 1.0) });
            }
            for i in 0..=k {
                let c: f64 = (0..=k).map(|r| tinv[(i, r)] * data[r]).sum();
                let target = if i == k { 1.0 } else { 0.0 };
                assert!((c - target).abs() < 1e-12, "k={k} i={i} c={c}");
            }
        }
    }

    #[test]
    fn vertex_and_interior_rows_of_constant() {
        let el = unit_square(2, 1);
        let d = el.dof_matrix();
        assert!((d[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((d[(el.layout.interior(0), 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_projects_to_first_coefficient() {
        let el = unit_square(3, 1);
        let p = ElementProjections::compute(el).unwrap();
        let ones = Mat::<f64>::from_fn(p.d.nrows(), 1, |i, _| p.d[(i, 0)]);
        let c = &p.pi_nabla * &ones;
        assert!((c[(0, 0)] - 1.0).abs() < 1e-13);
        for a in 1..c.nrows() {
            assert!(c[(a, 0)].abs() < 1e-13);
        }
        let g = &p.pi_pgrad * &ones;
        assert!(g.norm_max() < 1e-12);
    }

    #[test]
    fn linear_gradient_projection() {
        // v = x on the unit square, ∇v = (1, 0) = h_E·∇m_(1,0).
        let el = unit_square(2, 1);
        let p = ElementProjections::compute(el).unwrap();
        let h = p.element.diameter;
        let vx = Mat::<f64>::from_fn(p.d.nrows(), 1, |i, _| h * p.d[(i, 1)] + 0.5 * p.d[(i, 0)]);
        let g = &p.pi_zero_grad * &vx;
        let n1 = 3;
        assert!((g[(0, 0)] - 1.0).abs() < 1e-13);
        for r in 1..2 * n1 {
            assert!(g[(r, 0)].abs() < 1e-13, "{r}: {}", g[(r, 0)]);
        }
    }

    #[test]
    fn reproduction_on_every_family() {
        for kind in [MeshKind::Quad, MeshKind::Pentagon, MeshKind::Octagon] {
            let mesh = generate_mesh(MeshFamily::new(kind), 2).unwrap();
            for k in 2..=4 {
                for c in 0..mesh.num_cells() {
                    let ell = 2;
                    let p = ElementProjections::for_cell(&mesh, c, k, ell, QuadratureDegrees::for_order(k, ell)).unwrap();
                    let e1 = max_identity_defect(&(&p.pi_nabla * &p.d));
                    let e2 = max_identity_defect(&(&p.pi_zero * &p.d));
                    assert!(e1 < 1e-10 && e2 < 1e-10, "{kind} k={k} cell {c}: {e1:e} {e2:e}");
                }
            }
        }
    }

    #[test]
    fn pkl_gradient_reproduces_monomial_gradients() {
        let mesh = generate_mesh(MeshFamily::new(MeshKind::Pentagon), 2).unwrap();
        for k in 2..=4 {
            for ell in 0..=3 {
                let p = ElementProjections::for_cell(&mesh, 1, k, ell, QuadratureDegrees::for_order(k, ell)).unwrap();
                let coef = &p.pi_pgrad * &p.d;
                let el = &p.element;
                for &x in el.polygon.iter().chain([el.centroid, Point2::new(0.3, 0.2)].iter()) {
                    let g = p.pkl.values(x);
                    let exact = el.monomials.gradients(x);
                    for a in 0..el.monomials.len() {
                        for c in 0..2 {
                            let v: f64 = (0..p.pkl.len()).map(|i| coef[(i, a)] * g[i][c]).sum();
                            assert!((v - exact[a][c]).abs() < 1e-9, "k={k} l={ell} a={a}: {v} vs {}", exact[a][c]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn translation_leaves_projectors_unchanged() {
        let mesh = generate_mesh(MeshFamily::new(MeshKind::Octagon), 3).unwrap();
        let moved = mesh.translated(Point2::new(0.37, 0.11));
        for c in [0, 4] {
            let a = ElementProjections::for_cell(&mesh, c, 3, 2, QuadratureDegrees::for_order(3, 2)).unwrap();
            let b = ElementProjections::for_cell(&moved, c, 3, 2, QuadratureDegrees::for_order(3, 2)).unwrap();
            for (x, y) in [(&a.d, &b.d), (&a.pi_nabla, &b.pi_nabla), (&a.pi_zero, &b.pi_zero), (&a.pi_zero_grad, &b.pi_zero_grad), (&a.pi_pgrad, &b.pi_pgrad)] {
                let scale = x.norm_max().max(1.0);
                assert!((x - y).norm_max() <= 1e-12 * scale, "cell {c}: {:e}", (x - y).norm_max());
            }
        }
    }

    #[test]
    fn l2_projection_matches_low_moments() {
        let mesh = generate_mesh(MeshFamily::new(MeshKind::Pentagon), 2).unwrap();
        let p = ElementProjections::for_cell(&mesh, 0, 3, 1, QuadratureDegrees::for_order(3, 1)).unwrap();
        let el = &p.element;
        let ndof = el.num_dofs();
        let v = Mat::<f64>::from_fn(ndof, 1, |i, _| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.4);
        let coef = &p.pi_zero * &v;
        for beta in 0..el.layout.interior_count() {
            let moment = el.rule.integrate(|x| {
                let m = el.monomials.values(x);
                m[beta] * (0..m.len()).map(|a| coef[(a, 0)] * m[a]).sum::<f64>()
            });
            assert!((moment / el.area - v[(el.layout.interior(beta), 0)]).abs() < 1e-12);
        }
    }
}
