//! Small dense solves used by the element projections.

use faer::Mat;

/// Factor of a Gram matrix `G = WᵀW` obtained from a column-pivoted QR of the
/// (quadrature-weighted) sample matrix `W`, so that `G` is never formed and
/// its conditioning is only felt through `R`.
#[derive(Debug, Clone)]
pub struct GramFactor {
    r: Mat<f64>,
    /// Column `j` of `R` belongs to basis function `perm[j]`.
    perm: Vec<usize>,
    rank: usize,
}

/// Relative threshold on `|R_jj| / |R_00|` below which a direction is
/// treated as numerically absent.
pub const RANK_TOL: f64 = 1e-13;

impl GramFactor {
    pub fn new(samples: &Mat<f64>) -> Self {
        let n = samples.ncols();
        let qr = samples.col_piv_qr();
        let r_full = qr.thin_R();
        let mut r = Mat::<f64>::zeros(n, n);
        for i in 0..n.min(r_full.nrows()) {
            for j in i..n {
                r[(i, j)] = r_full[(i, j)];
            }
        }
        let perm = qr.P().arrays().0.to_vec();
        let r00 = r[(0, 0)].abs();
        let rank = (0..n)
            .take_while(|&j| r[(j, j)].abs() > RANK_TOL * r00)
            .count();
        Self { r, perm, rank }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Estimate of the 2-norm condition number of `G` (squared ratio of the
    /// extreme diagonal entries of `R`).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim();
        let big = self.r[(0, 0)].abs();
        let small = self.r[(n - 1, n - 1)].abs();
        (big / small).powi(2)
    }

    /// Solves `G X = B`.
    pub fn solve(&self, b: &Mat<f64>) -> Mat<f64> {
        let n = self.dim();
        let mut out = Mat::<f64>::zeros(n, b.ncols());
        let mut y = vec![0.0; n];
        for col in 0..b.ncols() {
            // G = P Rᵀ R Pᵀ
            for j in 0..n {
                y[j] = b[(self.perm[j], col)];
            }
            // Rᵀ z = y
            for i in 0..n {
                let mut s = y[i];
                for l in 0..i {
                    s -= self.r[(l, i)] * y[l];
                }
                y[i] = s / self.r[(i, i)];
            }
            // R w = z
            for i in (0..n).rev() {
                let mut s = y[i];
                for l in i + 1..n {
                    s -= self.r[(i, l)] * y[l];
                }
                y[i] = s / self.r[(i, i)];
            }
            for j in 0..n {
                out[(self.perm[j], col)] = y[j];
            }
        }
        out
    }
}

/// Solves the square system `A X = B` with a column-pivoted QR. Returns the
/// solution and a condition estimate from the diagonal of `R`; `None` when
/// `A` is numerically singular.
pub fn solve_square(a: &Mat<f64>, b: &Mat<f64>) -> Option<(Mat<f64>, f64)> {
    use faer::linalg::solvers::Solve;
    let qr = a.col_piv_qr();
    let r = qr.thin_R();
    let n = a.nrows();
    let r00 = r[(0, 0)].abs();
    let rnn = r[(n - 1, n - 1)].abs();
    if !(rnn > RANK_TOL * r00) {
        return None;
    }
    Some((qr.solve(b), r00 / rnn))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_solve_matches_normal_equations() {
        let w = Mat::<f64>::from_fn(9, 4, |i, j| ((i + 1) as f64).powi(j as i32) / 10f64.powi(j as i32) + 0.1 * (i * j) as f64);
        let g = w.transpose() * &w;
        let b = Mat::<f64>::from_fn(4, 2, |i, j| (i + 2 * j) as f64 - 1.5);
        let f = GramFactor::new(&w);
        assert_eq!(f.rank(), 4);
        let x = f.solve(&b);
        let res = &g * &x - &b;
        for i in 0..4 {
            for j in 0..2 {
                assert!(res[(i, j)].abs() < 1e-9, "{:?}", res);
            }
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        let w = Mat::<f64>::from_fn(6, 3, |i, j| if j == 2 { 2.0 * i as f64 } else { (i as f64).powi(j as i32) });
        // column 2 = 2 * column 1
        let f = GramFactor::new(&w);
        assert_eq!(f.rank(), 2);
    }

    #[test]
    fn square_solve() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { 4.0 } else { 1.0 });
        let b = Mat::<f64>::from_fn(3, 1, |i, _| i as f64);
        let (x, cond) = solve_square(&a, &b).unwrap();
        let r = &a * &x - &b;
        assert!(r.norm_max() < 1e-14);
        assert!(cond >= 1.0);
        let s = Mat::<f64>::from_fn(2, 2, |_, _| 1.0);
        assert!(solve_square(&s, &Mat::<f64>::zeros(2, 1)).is_none());
    }
}
