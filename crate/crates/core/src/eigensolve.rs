//! Generalized eigenvalue problems `A x = λ M x`, eigenvalue clustering and
//! sparse linear solves.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};
use serde::Serialize;

use crate::assembly::SparsePair;
use crate::error::SolverError;

/// Free-DOF count at or below which [`Strategy::Auto`] uses the dense path.
pub const DENSE_LIMIT: usize = 3000;
/// Eigenvalues of larger modulus are treated as infinite and discarded.
pub const INFINITE_EIGENVALUE: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Auto,
    Dense,
    ShiftInvert,
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "dense" => Ok(Strategy::Dense),
            "shift-invert" => Ok(Strategy::ShiftInvert),
            _ => Err(format!("unknown strategy '{s}' (expected auto, dense or shift-invert)")),
        }
    }
}

/// Arnoldi parameters for the shift-invert path.
#[derive(Debug, Clone, Copy)]
pub struct ArnoldiOptions {
    pub tol: f64,
    pub max_restarts: usize,
    /// Subspace dimension; `None` means `max(2·nev + 10, 30)`.
    pub subspace: Option<usize>,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_restarts: 300,
            subspace: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Sorted by modulus; near-ties by real then imaginary part.
    pub eigenvalues: Vec<c64>,
    /// Column `i` is the unit-norm right eigenvector of `eigenvalues[i]`.
    pub eigenvectors: Mat<c64>,
    /// `‖A x − λ M x‖ / (‖A‖_F ‖x‖)`.
    pub residuals: Vec<f64>,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub members: Vec<usize>,
    pub mean: c64,
    pub multiplicity: usize,
}

/// Sparse `y = A x`.
pub fn spmv(a: &SparseColMat<usize, c64>, x: &[c64]) -> Vec<c64> {
    let a = a.as_ref();
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        for (&i, &v) in a.row_idx_of_col_raw(j).iter().zip(a.val_of_col(j)) {
            y[i] += v * xj;
        }
    }
    y
}

pub fn frobenius_norm(a: &SparseColMat<usize, c64>) -> f64 {
    let a = a.as_ref();
    (0..a.ncols())
        .flat_map(|j| a.val_of_col(j).iter())
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn vec_norm(x: &[c64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Conjugate transpose of a sparse matrix.
pub fn adjoint(a: &SparseColMat<usize, c64>) -> SparseColMat<usize, c64> {
    let r = a.as_ref();
    let mut t = Vec::new();
    for j in 0..r.ncols() {
        for (&i, &v) in r.row_idx_of_col_raw(j).iter().zip(r.val_of_col(j)) {
            t.push(Triplet::new(j, i, v.conj()));
        }
    }
    SparseColMat::try_new_from_triplets(r.ncols(), r.nrows(), &t).expect("indices in range")
}

fn to_dense(a: &SparseColMat<usize, c64>) -> Mat<c64> {
    let r = a.as_ref();
    let mut d = Mat::<c64>::zeros(r.nrows(), r.ncols());
    for j in 0..r.ncols() {
        for (&i, &v) in r.row_idx_of_col_raw(j).iter().zip(r.val_of_col(j)) {
            d[(i, j)] += v;
        }
    }
    d
}

/// Sorts indices of `values` by modulus, ordering values whose moduli agree
/// to `1e-10` relative by real part and then imaginary part.
pub fn modulus_order(values: &[c64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()));
    let mut start = 0;
    while start < idx.len() {
        let base = values[idx[start]].norm();
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]].norm() - base <= 1e-10 * base.max(f64::MIN_POSITIVE) {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| {
            values[a]
                .re
                .total_cmp(&values[b].re)
                .then(values[a].im.total_cmp(&values[b].im))
        });
        start = end;
    }
    idx
}

/// Unit norm with the largest entry real and positive.
fn normalize(x: &mut [c64]) {
    let big = x
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(c64::new(1.0, 0.0));
    let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { c64::new(1.0, 0.0) };
    let n = vec_norm(x);
    for v in x.iter_mut() {
        *v = *v * phase / n;
    }
}

fn residual(a: &SparseColMat<usize, c64>, m: &SparseColMat<usize, c64>, norm_a: f64, lambda: c64, x: &[c64]) -> f64 {
    let ax = spmv(a, x);
    let mx = spmv(m, x);
    let r: Vec<c64> = ax.iter().zip(&mx).map(|(p, q)| p - lambda * q).collect();
    vec_norm(&r) / (norm_a * vec_norm(x))
}

fn finish(
    a: &SparseColMat<usize, c64>,
    m: &SparseColMat<usize, c64>,
    mut pairs: Vec<(c64, Option<Vec<c64>>)>,
    nev: usize,
    strategy: Strategy,
) -> Result<EigenResult, SolverError> {
    pairs.retain(|(l, _)| l.re.is_finite() && l.im.is_finite() && l.norm() <= INFINITE_EIGENVALUE);
    let values: Vec<c64> = pairs.iter().map(|p| p.0).collect();
    let order = modulus_order(&values);
    let take: Vec<usize> = order.into_iter().take(nev).collect();
    let n = a.nrows();
    let norm_a = frobenius_norm(a);
    let mut vecs = Mat::<c64>::zeros(n, take.len());
    let mut eigenvalues = Vec::with_capacity(take.len());
    let mut residuals = Vec::with_capacity(take.len());
    for (c, &i) in take.iter().enumerate() {
        let l = pairs[i].0;
        let mut x = match pairs[i].1.take() {
            Some(x) => x,
            None => inverse_iteration(a, m, l, c as u64)?,
        };
        normalize(&mut x);
        for (r, v) in x.iter().enumerate() {
            vecs[(r, c)] = *v;
        }
        eigenvalues.push(l);
        residuals.push(residual(a, m, norm_a, l, &x));
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors: vecs,
        residuals,
        strategy,
    })
}

/// Eigenvector for a known eigenvalue by inverse iteration with a sparse
/// factorization of `A − λ̃M`, `λ̃` a slightly perturbed `λ`.
fn inverse_iteration(
    a: &SparseColMat<usize, c64>,
    m: &SparseColMat<usize, c64>,
    lambda: c64,
    seed: u64,
) -> Result<Vec<c64>, SolverError> {
    let shift = lambda + c64::new(1e-10 * lambda.norm().max(1.0), 0.0);
    let lu = shifted(a, m, shift)
        .sp_lu()
        .map_err(|e| SolverError::Singular(format!("sparse LU failed: {e:?}")))?;
    let n = a.nrows();
    let mut x = fresh_vector(n, 100 + seed, &[]).expect("nonzero start vector");
    for _ in 0..3 {
        let rhs = spmv(m, &x);
        let b = Mat::<c64>::from_fn(n, 1, |i, _| rhs[i]);
        let y = lu.solve(&b);
        x = (0..n).map(|i| y[(i, 0)]).collect();
        let nx = vec_norm(&x);
        if !(nx.is_finite() && nx > 0.0) {
            return Err(SolverError::Decomposition(format!("inverse iteration failed at λ = {lambda}")));
        }
        x.iter_mut().for_each(|v| *v /= nx);
    }
    Ok(x)
}

fn is_real(a: &SparseColMat<usize, c64>) -> bool {
    let r = a.as_ref();
    (0..r.ncols()).all(|j| r.val_of_col(j).iter().all(|v| v.im == 0.0))
}

/// Relative threshold on the diagonal of the pivoted QR of `M` below which
/// a direction counts as part of its kernel.
const MASS_RANK_TOL: f64 = 1e-11;

/// All finite generalized eigenvalues, without eigenvectors. With
/// `M = Q R Pᵀ` truncated to its numerical rank `r`, the nonzero eigenvalues
/// `θ` of `(A − σM)⁻¹M` are those of the `r × r` matrix
/// `R Pᵀ (A − σM)⁻¹ Q`, and `λ = σ + 1/θ`. Dropping the kernel of `M` up
/// front keeps the dense Hessenberg iteration away from a large
/// zero eigenvalue cluster.
fn dense_eigenvalues(a: &SparseColMat<usize, c64>, m: &SparseColMat<usize, c64>, sigma: c64) -> Result<Vec<c64>, SolverError> {
    let n = a.nrows();
    let factor = Factor::new(&shifted(a, m, sigma))?;
    let md = to_dense(m);
    let qr = md.col_piv_qr();
    let r_full = qr.thin_R();
    let r00 = r_full[(0, 0)].norm();
    let rank = (0..n).take_while(|&j| r_full[(j, j)].norm() > MASS_RANK_TOL * r00).count();
    if rank == 0 {
        return Ok(Vec::new());
    }
    let q = qr.compute_thin_Q();
    let q = q.subcols(0, rank).to_owned();
    let perm = qr.P().arrays().0.to_vec();
    // R Pᵀ: column perm[j] of the product is column j of R.
    let mut rp = Mat::<c64>::zeros(rank, n);
    for j in 0..n {
        for i in 0..rank.min(j + 1) {
            rp[(i, perm[j])] = r_full[(i, j)];
        }
    }
    let small = &rp * factor.lu.solve(&q);
    let evd_err = |e| SolverError::Decomposition(format!("eigenvalues: {e:?}"));
    let thetas = if is_real(a) && is_real(m) && sigma.im == 0.0 {
        Mat::<f64>::from_fn(rank, rank, |i, j| small[(i, j)].re).eigenvalues().map_err(evd_err)?
    } else {
        small.eigenvalues().map_err(evd_err)?
    };
    Ok(thetas
        .into_iter()
        .filter(|t| t.norm() != 0.0)
        .map(|t| sigma + c64::new(1.0, 0.0) / t)
        .collect())
}

/// `A − σM` from the union of both sparsity patterns.
fn shifted(a: &SparseColMat<usize, c64>, m: &SparseColMat<usize, c64>, sigma: c64) -> SparseColMat<usize, c64> {
    let mut t = Vec::new();
    for (mat, s) in [(a, c64::new(1.0, 0.0)), (m, -sigma)] {
        let r = mat.as_ref();
        for j in 0..r.ncols() {
            for (&i, &v) in r.row_idx_of_col_raw(j).iter().zip(r.val_of_col(j)) {
                t.push(Triplet::new(i, j, s * v));
            }
        }
    }
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &t).expect("indices in range")
}

/// Sparse LU of a square matrix whose solves are checked for finiteness and
/// accuracy on a probe right-hand side.
struct Factor {
    lu: faer::sparse::linalg::solvers::Lu<usize, c64>,
    n: usize,
}

impl Factor {
    fn new(mat: &SparseColMat<usize, c64>) -> Result<Self, SolverError> {
        let lu = mat
            .sp_lu()
            .map_err(|e| SolverError::Singular(format!("sparse LU failed: {e:?}")))?;
        let f = Self { lu, n: mat.nrows() };
        let probe: Vec<c64> = (0..f.n).map(|i| c64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05)).collect();
        let x = f.solve(&probe);
        let r = spmv(mat, &x);
        let err: Vec<c64> = r.iter().zip(&probe).map(|(p, q)| p - q).collect();
        let rel = vec_norm(&err) / vec_norm(&probe);
        if !x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) || !(rel <= 1e-6) {
            return Err(SolverError::Singular(format!("LU solve residual {rel:e}")));
        }
        Ok(f)
    }

    fn solve(&self, b: &[c64]) -> Vec<c64> {
        let rhs = Mat::<c64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

/// Deterministic pseudo-random unit vector orthogonal to `basis`.
fn fresh_vector(n: usize, seed: u64, basis: &[Vec<c64>]) -> Option<Vec<c64>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let mut v: Vec<c64> = (0..n).map(|_| c64::new(next(), next())).collect();
    for _ in 0..2 {
        for b in basis {
            let h = dot(b, &v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= h * bi;
            }
        }
    }
    let nv = vec_norm(&v);
    if nv < 1e-8 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    Some(v)
}

/// Restarted Arnoldi on `OP = (A − σM)⁻¹ M` keeping an invariant subspace of
/// the wanted (largest `|μ|`) Ritz values at each restart.
fn arnoldi(
    a: &SparseColMat<usize, c64>,
    m: &SparseColMat<usize, c64>,
    sigma: c64,
    nev: usize,
    opts: ArnoldiOptions,
) -> Result<Vec<(c64, Vec<c64>)>, SolverError> {
    let n = a.nrows();
    let factor = Factor::new(&shifted(a, m, sigma))?;
    let op = |x: &[c64]| factor.solve(&spmv(m, x));
    let want = (nev + 3).min(n);
    let msize = opts.subspace.unwrap_or((2 * nev + 10).max(30)).max(want + 2).min(n);
    let keep = (want + (msize - want) / 2).min(msize.saturating_sub(1)).max(want.min(msize));

    // Start in the range of OP so that the M-kernel does not pollute the basis.
    let start = fresh_vector(n, 1, &[]).expect("nonzero start vector");
    let mut v0 = op(&start);
    let nv = vec_norm(&v0);
    if !(nv > 0.0) {
        return Err(SolverError::Singular("M annihilates the start vector".into()));
    }
    v0.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<c64>> = vec![v0];
    // h[j] holds column j of the (m+1) × m projected matrix.
    let mut h: Vec<Vec<c64>> = Vec::new();
    let mut seed = 2;
    let mut last_res = Vec::new();
    for restart in 0..=opts.max_restarts {
        let p = h.len();
        for j in p..msize {
            let mut w = op(&basis[j]);
            let wnorm = vec_norm(&w);
            let mut col = vec![c64::new(0.0, 0.0); msize + 1];
            // Two passes of classical Gram–Schmidt (DGKS).
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    col[i] += c;
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= c * bi;
                    }
                }
            }
            let beta = vec_norm(&w);
            if beta <= 1e-13 * wnorm.max(f64::MIN_POSITIVE) {
                col[j + 1] = c64::new(0.0, 0.0);
                h.push(col);
                let Some(v) = fresh_vector(n, seed, &basis) else {
                    break;
                };
                seed += 1;
                basis.push(v);
            } else {
                col[j + 1] = c64::new(beta, 0.0);
                h.push(col);
                w.iter_mut().for_each(|x| *x /= beta);
                basis.push(w);
            }
        }
        let mm = h.len();
        let hm = Mat::<c64>::from_fn(mm, mm, |i, j| h[j][i]);
        let eig = hm
            .eigen()
            .map_err(|e| SolverError::Decomposition(format!("projected eigenproblem: {e:?}")))?;
        let (s, u) = (eig.S(), eig.U());
        let mut order: Vec<usize> = (0..mm).collect();
        order.sort_by(|&x, &y| s[y].norm().total_cmp(&s[x].norm()));
        // Residual row of the Arnoldi relation: h[j][mm] for every column j.
        let f_row: Vec<c64> = (0..mm).map(|j| if mm < h[j].len() { h[j][mm] } else { c64::new(0.0, 0.0) }).collect();
        let resid = |i: usize| -> f64 {
            let y: Vec<c64> = (0..mm).map(|r| u[(r, i)]).collect();
            let yn = vec_norm(&y);
            f_row.iter().zip(&y).map(|(f, yv)| f * yv).sum::<c64>().norm() / (yn * s[i].norm())
        };
        let wanted: Vec<usize> = order.iter().copied().take(want.min(mm)).collect();
        last_res = wanted.iter().map(|&i| resid(i)).collect();
        let converged = last_res.iter().all(|&r| r <= opts.tol);
        if converged || mm >= n {
            return Ok(wanted
                .iter()
                .map(|&i| {
                    let mut x = vec![c64::new(0.0, 0.0); n];
                    for (r, b) in basis.iter().take(mm).enumerate() {
                        let c = u[(r, i)];
                        for (xi, bi) in x.iter_mut().zip(b) {
                            *xi += c * bi;
                        }
                    }
                    (sigma + c64::new(1.0, 0.0) / s[i], x)
                })
                .collect());
        }
        if restart == opts.max_restarts {
            break;
        }
        // Orthonormal basis of the wanted invariant subspace of H.
        let kept: Vec<usize> = order.iter().copied().take(keep).collect();
        let y = Mat::<c64>::from_fn(mm, kept.len(), |r, c| u[(r, kept[c])]);
        let q = y.qr().compute_thin_Q();
        let hq = &hm * &q;
        let hp = q.adjoint() * &hq;
        let kp = q.ncols();
        let mut new_basis = Vec::with_capacity(msize + 1);
        for c in 0..kp {
            let mut x = vec![c64::new(0.0, 0.0); n];
            for (r, b) in basis.iter().take(mm).enumerate() {
                let coef = q[(r, c)];
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi += coef * bi;
                }
            }
            new_basis.push(x);
        }
        new_basis.push(basis[mm].clone());
        let mut new_h = Vec::with_capacity(msize);
        for c in 0..kp {
            let mut col = vec![c64::new(0.0, 0.0); msize + 1];
            for r in 0..kp {
                col[r] = hp[(r, c)];
            }
            col[kp] = (0..mm).map(|r| f_row[r] * q[(r, c)]).sum();
            new_h.push(col);
        }
        basis = new_basis;
        h = new_h;
    }
    Err(SolverError::NotConverged {
        restarts: opts.max_restarts,
        residuals: last_res,
    })
}

/// The `nev` smallest-modulus eigenpairs of `A x = λ M x`.
pub fn solve_gevp(pair: &SparsePair, nev: usize, strategy: Strategy, shift: c64) -> Result<EigenResult, SolverError> {
    solve_gevp_with(&pair.a, &pair.m, nev, strategy, shift, ArnoldiOptions::default())
}

pub fn solve_gevp_with(
    a: &SparseColMat<usize, c64>,
    m: &SparseColMat<usize, c64>,
    nev: usize,
    strategy: Strategy,
    shift: c64,
    opts: ArnoldiOptions,
) -> Result<EigenResult, SolverError> {
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(SolverError::Dimension(format!(
            "A is {}x{}, M is {}x{}",
            a.nrows(),
            a.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    if nev == 0 || n == 0 {
        return Err(SolverError::Dimension(format!("nev = {nev} on a problem of size {n}")));
    }
    let strategy = match strategy {
        Strategy::Auto if n <= DENSE_LIMIT => Strategy::Dense,
        Strategy::Auto => Strategy::ShiftInvert,
        s => s,
    };
    let run = |sigma: c64| -> Result<Vec<(c64, Option<Vec<c64>>)>, SolverError> {
        Ok(match strategy {
            Strategy::Dense => dense_eigenvalues(a, m, sigma)?.into_iter().map(|l| (l, None)).collect(),
            _ => arnoldi(a, m, sigma, nev, opts)?.into_iter().map(|(l, x)| (l, Some(x))).collect(),
        })
    };
    // The dense path only needs some factorizable `A − σM`; it ignores the
    // caller's shift, which targets the Arnoldi iteration.
    let sigma = if strategy == Strategy::Dense { c64::new(0.0, 0.0) } else { shift };
    let pairs = match run(sigma) {
        Err(SolverError::Singular(_)) => {
            let delta = 1e-3 * frobenius_norm(a) / frobenius_norm(m);
            run(sigma + c64::new(delta, 0.0))?
        }
        other => other?,
    };
    finish(a, m, pairs, nev, strategy)
}

/// Greedy clustering of modulus-sorted values: a value joins the current
/// cluster when every member, itself included, stays within `tol·|mean|` of
/// the updated mean.
pub fn cluster_eigenvalues(values: &[c64], tol: f64) -> Vec<EigenCluster> {
    let mut out: Vec<EigenCluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if let Some(last) = out.last_mut() {
            let q = last.members.len() as f64;
            let mean = (last.mean * q + v) / (q + 1.0);
            let fits = last
                .members
                .iter()
                .map(|&j| values[j])
                .chain(std::iter::once(v))
                .all(|x| (x - mean).norm() <= tol * mean.norm());
            if fits {
                last.members.push(i);
                last.mean = mean;
                last.multiplicity += 1;
                continue;
            }
        }
        out.push(EigenCluster {
            members: vec![i],
            mean: v,
            multiplicity: 1,
        });
    }
    out
}

/// Sparse direct solve of `A x = b`.
pub fn solve_linear(a: &SparseColMat<usize, c64>, rhs: &[c64]) -> Result<Vec<c64>, SolverError> {
    if a.nrows() != a.ncols() || a.nrows() != rhs.len() {
        return Err(SolverError::Dimension(format!(
            "A is {}x{}, rhs has length {}",
            a.nrows(),
            a.ncols(),
            rhs.len()
        )));
    }
    let factor = Factor::new(a)?;
    Ok(factor.solve(rhs))
}

/// `‖A x − b‖ / ‖b‖` (or `‖A x‖` when `b = 0`).
pub fn relative_residual(a: &SparseColMat<usize, c64>, x: &[c64], b: &[c64]) -> f64 {
    let ax = spmv(a, x);
    let r: Vec<c64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = vec_norm(b);
    if nb > 0.0 {
        vec_norm(&r) / nb
    } else {
        vec_norm(&r)
    }
}
