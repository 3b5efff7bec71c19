//! Local SFVEM/SVEM forms and global assembly with homogeneous Dirichlet
//! elimination.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};
use rayon::prelude::*;

use crate::error::AssemblyError;
use crate::geometry::Point2;
use crate::mesh::PolygonMesh;
use crate::projection::{ElementProjections, QuadratureDegrees, VirtualElement};

/// A coefficient that is either constant or a function of position.
#[derive(Clone)]
pub enum Field<T> {
    Constant(T),
    Function(Arc<dyn Fn(Point2) -> T + Send + Sync>),
}

impl<T: Copy> Field<T> {
    pub fn function(f: impl Fn(Point2) -> T + Send + Sync + 'static) -> Self {
        Field::Function(Arc::new(f))
    }

    pub fn at(&self, p: Point2) -> T {
        match self {
            Field::Constant(v) => *v,
            Field::Function(f) => f(p),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Field<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Field::Function(_) => f.write_str("Function(..)"),
        }
    }
}

pub type Tensor = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sfvem,
    Svem,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Sfvem => "sfvem",
            Scheme::Svem => "svem",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sfvem" => Ok(Scheme::Sfvem),
            "svem" => Ok(Scheme::Svem),
            _ => Err(format!("unknown scheme '{s}' (expected sfvem or svem)")),
        }
    }
}

/// Choice of the enrichment degree `ℓ` per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllRule {
    /// Starts from 4 → 1, 5 → 2, 8 → 3, otherwise `max(1, ⌈(N_E - 2)/2⌉)`,
    /// and raises `ℓ` on cells whose local stiffness still has spurious
    /// kernel modes (symmetric cells can need more than the tabulated value).
    ByVertexCount,
    /// Uses exactly this `ℓ`; a spurious kernel is an assembly error for the
    /// stabilization-free scheme.
    Fixed(usize),
}

/// How far [`EllRule::ByVertexCount`] may raise `ℓ` above its starting value.
pub const MAX_ELL_RAISE: usize = 4;

impl EllRule {
    pub fn ell(self, num_vertices: usize) -> usize {
        match self {
            EllRule::Fixed(l) => l,
            EllRule::ByVertexCount => match num_vertices {
                4 => 1,
                5 => 2,
                8 => 3,
                n => n.saturating_sub(2).div_ceil(2).max(1),
            },
        }
    }
}

/// Coefficients and discretization choices for
/// `-div(K∇u) + β·∇u + γu = λu` (or `= f`) with `u = 0` on the boundary.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub diffusion: Field<Tensor>,
    pub convection: Field<[f64; 2]>,
    pub reaction: Field<f64>,
    pub k: usize,
    pub ell: EllRule,
    pub scheme: Scheme,
    /// Overrides the default quadrature exactness when set.
    pub quadrature: Option<QuadratureDegrees>,
}

impl ProblemSpec {
    /// Constant-coefficient problem with the default `ℓ` rule.
    pub fn constant(k: usize, diffusion: Tensor, convection: [f64; 2], reaction: f64, scheme: Scheme) -> Self {
        Self {
            diffusion: Field::Constant(diffusion),
            convection: Field::Constant(convection),
            reaction: Field::Constant(reaction),
            k,
            ell: EllRule::ByVertexCount,
            scheme,
            quadrature: None,
        }
    }

    pub fn laplacian(k: usize, scheme: Scheme) -> Self {
        Self::constant(k, [[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], 0.0, scheme)
    }

    pub fn degrees(&self, ell: usize) -> QuadratureDegrees {
        self.quadrature.unwrap_or_else(|| QuadratureDegrees::for_order(self.k, ell))
    }

    fn check_at(&self, p: Point2) -> Result<(), AssemblyError> {
        let k = self.diffusion.at(p);
        let sym = (k[0][1] - k[1][0]).abs() <= 1e-12 * (k[0][0].abs() + k[1][1].abs());
        let pd = k[0][0] > 0.0 && k[0][0] * k[1][1] - k[0][1] * k[1][0] > 0.0;
        if !sym || !pd {
            return Err(AssemblyError::InvalidProblem(format!(
                "K = {k:?} at ({}, {}) is not symmetric positive definite",
                p.x, p.y
            )));
        }
        let g = self.reaction.at(p);
        if !(g >= 0.0) {
            return Err(AssemblyError::InvalidProblem(format!("γ = {g} < 0 at ({}, {})", p.x, p.y)));
        }
        Ok(())
    }
}

/// Global numbering: vertices, then `k-1` moments per edge, then interior
/// moments per cell. Boundary vertex and edge DOFs are eliminated.
#[derive(Debug, Clone)]
pub struct GlobalDofMap {
    pub k: usize,
    pub total: usize,
    /// Free index of each global DOF, `None` for Dirichlet DOFs.
    pub free_index: Vec<Option<usize>>,
    pub free_to_global: Vec<usize>,
    pub cell_dofs: Vec<Vec<usize>>,
}

impl GlobalDofMap {
    pub fn new(mesh: &PolygonMesh, k: usize) -> Self {
        let nv = mesh.vertices().len();
        let ne = mesh.edges().len();
        let nint = k * (k - 1) / 2;
        let total = nv + ne * (k - 1) + mesh.num_cells() * nint;
        let mut dirichlet = vec![false; total];
        for v in 0..nv {
            dirichlet[v] = mesh.is_boundary_vertex(v);
        }
        for e in 0..ne {
            if mesh.is_boundary_edge(e) {
                for i in 0..k - 1 {
                    dirichlet[nv + e * (k - 1) + i] = true;
                }
            }
        }
        let mut free_index = vec![None; total];
        let mut free_to_global = Vec::new();
        for (g, &d) in dirichlet.iter().enumerate() {
            if !d {
                free_index[g] = Some(free_to_global.len());
                free_to_global.push(g);
            }
        }
        let cell_dofs = (0..mesh.num_cells())
            .map(|c| {
                let mut dofs: Vec<usize> = mesh.cell(c).to_vec();
                for &e in mesh.cell_edges(c) {
                    dofs.extend((0..k - 1).map(|i| nv + e * (k - 1) + i));
                }
                let base = nv + ne * (k - 1) + c * nint;
                dofs.extend(base..base + nint);
                dofs
            })
            .collect();
        Self {
            k,
            total,
            free_index,
            free_to_global,
            cell_dofs,
        }
    }

    pub fn num_free(&self) -> usize {
        self.free_to_global.len()
    }

    /// Expands a free-DOF vector to all DOFs with zero boundary values.
    pub fn expand<T: Copy + Default>(&self, free: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); self.total];
        for (i, &g) in self.free_to_global.iter().enumerate() {
            out[g] = free[i];
        }
        out
    }
}

/// Global matrices on the free DOFs.
#[derive(Debug, Clone)]
pub struct SparsePair {
    pub a: SparseColMat<usize, c64>,
    pub m: SparseColMat<usize, c64>,
    /// Per-cell conditioning warnings.
    pub warnings: Vec<(usize, String)>,
}

/// Element matrices in local DOF order.
#[derive(Debug, Clone)]
pub struct LocalForms {
    pub a: Mat<f64>,
    pub m: Mat<f64>,
}

/// Projections of every cell, computed in parallel, with `ℓ` chosen per
/// cell by `spec.ell`.
pub fn compute_projections(mesh: &PolygonMesh, spec: &ProblemSpec) -> Result<Vec<ElementProjections>, AssemblyError> {
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| cell_projections(mesh, c, spec))
        .collect()
}

fn cell_projections(mesh: &PolygonMesh, c: usize, spec: &ProblemSpec) -> Result<ElementProjections, AssemblyError> {
    let base = spec.ell.ell(mesh.cell(c).len());
    let mut ell = base;
    loop {
        let mut proj = VirtualElement::from_mesh(mesh, c, spec.k, ell, spec.degrees(ell))
            .and_then(ElementProjections::compute)
            .map_err(|source| AssemblyError::Element { cell: c, source })?;
        if ell == base {
            for &p in &proj.element.rule.points {
                spec.check_at(p)?;
            }
        }
        let stiff = diffusion_matrix(&proj.pkl_grad_at_quadrature(), &proj, &spec.diffusion);
        let dim = kernel_dimension(&stiff);
        if dim == 1 {
            if ell > base {
                proj.warnings.push(format!("l raised from {base} to {ell} to remove spurious kernel modes"));
            }
            return Ok(proj);
        }
        let adaptive = spec.ell == EllRule::ByVertexCount && ell < base + MAX_ELL_RAISE;
        if !adaptive {
            if spec.scheme == Scheme::Sfvem {
                return Err(AssemblyError::KernelDimension { cell: c, dim });
            }
            return Ok(proj);
        }
        ell += 1;
    }
}

/// `Σ_q w_q (∇φ_i)ᵀ K ∇φ_j` from gradient values at quadrature points.
fn diffusion_matrix(grad: &[Mat<f64>; 2], proj: &ElementProjections, k: &Field<Tensor>) -> Mat<f64> {
    let rule = &proj.element.rule;
    let [gx, gy] = grad;
    let (nq, nd) = (gx.nrows(), gx.ncols());
    let mut sx = Mat::<f64>::zeros(nq, nd);
    let mut sy = Mat::<f64>::zeros(nq, nd);
    for q in 0..nq {
        let kk = k.at(rule.points[q]);
        let w = rule.weights[q];
        for j in 0..nd {
            sx[(q, j)] = w * (kk[0][0] * gx[(q, j)] + kk[0][1] * gy[(q, j)]);
            sy[(q, j)] = w * (kk[1][0] * gx[(q, j)] + kk[1][1] * gy[(q, j)]);
        }
    }
    gx.transpose() * &sx + gy.transpose() * &sy
}

/// Convection, reaction and mass blocks shared by both schemes.
fn lower_order(proj: &ElementProjections, spec: &ProblemSpec) -> (Mat<f64>, Mat<f64>) {
    let rule = &proj.element.rule;
    let p = proj.values_at_quadrature();
    let [gx, gy] = proj.grad_l2_at_quadrature();
    let (nq, nd) = (p.nrows(), p.ncols());
    let mut conv = Mat::<f64>::zeros(nq, nd);
    let mut wp = Mat::<f64>::zeros(nq, nd);
    for q in 0..nq {
        let x = rule.points[q];
        let w = rule.weights[q];
        let b = spec.convection.at(x);
        let g = spec.reaction.at(x);
        for j in 0..nd {
            conv[(q, j)] = w * (b[0] * gx[(q, j)] + b[1] * gy[(q, j)] + g * p[(q, j)]);
            wp[(q, j)] = w * p[(q, j)];
        }
    }
    (p.transpose() * &conv, p.transpose() * &wp)
}

/// Stabilization-free local matrices.
pub fn local_forms(proj: &ElementProjections, spec: &ProblemSpec) -> LocalForms {
    let stiff = diffusion_matrix(&proj.pkl_grad_at_quadrature(), proj, &spec.diffusion);
    let (lower, m) = lower_order(proj, spec);
    LocalForms { a: stiff + lower, m }
}

/// `max_q ‖K(x_q)‖₂` over the cell quadrature points.
fn diffusion_sup_norm(proj: &ElementProjections, k: &Field<Tensor>) -> f64 {
    proj.element
        .rule
        .points
        .iter()
        .map(|&x| {
            let t = k.at(x);
            let (a, b, d) = (t[0][0], 0.5 * (t[0][1] + t[1][0]), t[1][1]);
            0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Stiffness of the stabilized scheme: `Π⁰_{k-1}∇` consistency plus the
/// dofi-dofi stabilization scaled by `‖K‖_∞`.
pub fn svem_local_stiffness(proj: &ElementProjections, spec: &ProblemSpec) -> Mat<f64> {
    let consistency = diffusion_matrix(&proj.grad_l2_at_quadrature(), proj, &spec.diffusion);
    let nd = proj.element.num_dofs();
    let defect = Mat::<f64>::identity(nd, nd) - &proj.d * &proj.pi_nabla;
    let stab = defect.transpose() * &defect;
    consistency + stab * diffusion_sup_norm(proj, &spec.diffusion)
}

/// Local matrices for the scheme selected in `spec`.
pub fn scheme_local_forms(proj: &ElementProjections, spec: &ProblemSpec) -> LocalForms {
    match spec.scheme {
        Scheme::Sfvem => local_forms(proj, spec),
        Scheme::Svem => {
            let (lower, m) = lower_order(proj, spec);
            LocalForms {
                a: svem_local_stiffness(proj, spec) + lower,
                m,
            }
        }
    }
}

/// Dimension of the numerical kernel of a local stiffness matrix,
/// thresholded at `1e-10·‖A‖₂`.
pub fn kernel_dimension(a: &Mat<f64>) -> usize {
    let s = a.singular_values().expect("singular values of a small dense matrix");
    let top = s.iter().cloned().fold(0.0, f64::max);
    s.iter().filter(|&&v| v <= 1e-10 * top).count()
}

fn to_sparse(n: usize, triplets: &[Triplet<usize, usize, c64>]) -> SparseColMat<usize, c64> {
    SparseColMat::try_new_from_triplets(n, n, triplets).expect("triplet indices are in range")
}

/// Assembles `(A, M)` from precomputed projections.
pub fn assemble_with(
    mesh: &PolygonMesh,
    spec: &ProblemSpec,
    projections: &[ElementProjections],
) -> Result<(SparsePair, GlobalDofMap), AssemblyError> {
    let dofs = GlobalDofMap::new(mesh, spec.k);
    let locals: Vec<LocalForms> = projections
        .par_iter()
        .map(|proj| scheme_local_forms(proj, spec))
        .collect();
    let mut ta = Vec::new();
    let mut tm = Vec::new();
    for (c, loc) in locals.iter().enumerate() {
        let map = &dofs.cell_dofs[c];
        for (i, &gi) in map.iter().enumerate() {
            let Some(fi) = dofs.free_index[gi] else { continue };
            for (j, &gj) in map.iter().enumerate() {
                let Some(fj) = dofs.free_index[gj] else { continue };
                ta.push(Triplet::new(fi, fj, c64::new(loc.a[(i, j)], 0.0)));
                tm.push(Triplet::new(fi, fj, c64::new(loc.m[(i, j)], 0.0)));
            }
        }
    }
    let n = dofs.num_free();
    let warnings = projections
        .iter()
        .enumerate()
        .flat_map(|(c, p)| p.warnings.iter().map(move |w| (c, w.clone())))
        .collect();
    Ok((
        SparsePair {
            a: to_sparse(n, &ta),
            m: to_sparse(n, &tm),
            warnings,
        },
        dofs,
    ))
}

pub fn assemble(mesh: &PolygonMesh, spec: &ProblemSpec) -> Result<(SparsePair, GlobalDofMap), AssemblyError> {
    let projections = compute_projections(mesh, spec)?;
    assemble_with(mesh, spec, &projections)
}

/// `(f, Π⁰_k φ_i)` on the free DOFs.
pub fn assemble_source_rhs_with(
    dofs: &GlobalDofMap,
    projections: &[ElementProjections],
    f: &(dyn Fn(Point2) -> f64 + Sync),
) -> Vec<c64> {
    let locals: Vec<Vec<f64>> = projections
        .par_iter()
        .map(|proj| {
            let rule = &proj.element.rule;
            let p = proj.values_at_quadrature();
            let mut r = vec![0.0; p.ncols()];
            for q in 0..p.nrows() {
                let wf = rule.weights[q] * f(rule.points[q]);
                for (j, rj) in r.iter_mut().enumerate() {
                    *rj += wf * p[(q, j)];
                }
            }
            r
        })
        .collect();
    let mut out = vec![c64::new(0.0, 0.0); dofs.num_free()];
    for (c, r) in locals.iter().enumerate() {
        for (i, &g) in dofs.cell_dofs[c].iter().enumerate() {
            if let Some(fi) = dofs.free_index[g] {
                out[fi] += c64::new(r[i], 0.0);
            }
        }
    }
    out
}

pub fn assemble_source_rhs(
    mesh: &PolygonMesh,
    spec: &ProblemSpec,
    f: &(dyn Fn(Point2) -> f64 + Sync),
) -> Result<Vec<c64>, AssemblyError> {
    let projections = compute_projections(mesh, spec)?;
    let dofs = GlobalDofMap::new(mesh, spec.k);
    Ok(assemble_source_rhs_with(&dofs, &projections, f))
}

/// Global DOF values of `f` (all DOFs, boundary included).
pub fn interpolate(dofs: &GlobalDofMap, projections: &[ElementProjections], f: &(dyn Fn(Point2) -> f64 + Sync)) -> Vec<f64> {
    let mut out = vec![0.0; dofs.total];
    for (c, proj) in projections.iter().enumerate() {
        for (&g, v) in dofs.cell_dofs[c].iter().zip(proj.element.interpolate(f)) {
            out[g] = v;
        }
    }
    out
}

/// Writes a sparse matrix as `i j re im` lines with 0-based indices.
pub fn write_coordinate<W: Write>(mat: &SparseColMat<usize, c64>, mut out: W) -> std::io::Result<()> {
    let m = mat.as_ref();
    for j in 0..m.ncols() {
        let rows = m.row_idx_of_col_raw(j);
        let vals = m.val_of_col(j);
        for (&i, v) in rows.iter().zip(vals) {
            writeln!(out, "{i} {j} {:?} {:?}", v.re, v.im)?;
        }
    }
    Ok(())
}
