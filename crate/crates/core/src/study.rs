//! Convergence experiments: eigenvalue studies against closed-form spectra,
//! manufactured source problems, and CSV/SVG output.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::assembly::{self, EllRule, Field, GlobalDofMap, ProblemSpec, Scheme, Tensor};
use crate::eigensolve::{self, Strategy};
use crate::error::{Error, StudyError};
use crate::geometry::Point2;
use crate::mesh::{generate_mesh, MeshFamily, MeshKind};
use crate::projection::ElementProjections;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// `K = I`, `β = (1, 0)`.
    Case1,
    /// `K = I`, `β = (10, 0)`.
    Case2,
    /// `K = diag(8e-3, 1)`, `β = 0`.
    Case3,
    Laplace,
    /// Source problem with `u = sin(πx) sin(πy)` and Laplace coefficients.
    Manufactured,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Case1 => "case1",
            Case::Case2 => "case2",
            Case::Case3 => "case3",
            Case::Laplace => "laplace",
            Case::Manufactured => "manufactured",
        }
    }

    /// `(K, β, γ)`.
    pub fn coefficients(self) -> (Tensor, [f64; 2], f64) {
        let id = [[1.0, 0.0], [0.0, 1.0]];
        match self {
            Case::Case1 => (id, [1.0, 0.0], 0.0),
            Case::Case2 => (id, [10.0, 0.0], 0.0),
            Case::Case3 => ([[8e-3, 0.0], [0.0, 1.0]], [0.0, 0.0], 0.0),
            Case::Laplace | Case::Manufactured => (id, [0.0, 0.0], 0.0),
        }
    }

    pub fn problem(self, k: usize, scheme: Scheme) -> ProblemSpec {
        let (kk, b, g) = self.coefficients();
        ProblemSpec::constant(k, kk, b, g, scheme)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = StudyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "case1" => Ok(Case::Case1),
            "case2" => Ok(Case::Case2),
            "case3" => Ok(Case::Case3),
            "laplace" => Ok(Case::Laplace),
            "manufactured" => Ok(Case::Manufactured),
            other => Err(StudyError::UnknownCase(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactEigenvalue {
    pub value: f64,
    pub multiplicity: usize,
}

/// The `count` smallest distinct exact eigenvalues with multiplicities.
///
/// With constant diagonal `K` and constant `β`, the substitution
/// `u = exp(β·x / 2K) w` turns the operator into a shifted Laplacian, so
/// `λ_mn = Σ β_i²/(4K_ii) + γ + π²(K_xx m² + K_yy n²)`.
pub fn exact_reference(case: Case, count: usize) -> Result<Vec<ExactEigenvalue>, StudyError> {
    if case == Case::Manufactured {
        return Err(StudyError::UnknownCase("manufactured has no eigenvalue reference".into()));
    }
    let (kk, b, g) = case.coefficients();
    let shift = b[0] * b[0] / (4.0 * kk[0][0]) + b[1] * b[1] / (4.0 * kk[1][1]) + g;
    let pi2 = std::f64::consts::PI.powi(2);
    let max = 80usize;
    let mut values = Vec::new();
    for m in 1..=max {
        for n in 1..=max {
            values.push(shift + pi2 * (kk[0][0] * (m * m) as f64 + kk[1][1] * (n * n) as f64));
        }
    }
    values.sort_by(f64::total_cmp);
    // Anything below the smallest value with an index past `max` is complete.
    let bound = shift + pi2 * (kk[0][0].min(kk[1][1]) * ((max + 1) * (max + 1)) as f64);
    let mut out: Vec<ExactEigenvalue> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some(last) if (v - last.value).abs() <= 1e-12 * v.abs() => last.multiplicity += 1,
            _ => {
                if out.len() == count {
                    break;
                }
                if v >= bound {
                    return Err(StudyError::Config(format!("{count} exact eigenvalues exceed the enumeration range")));
                }
                out.push(ExactEigenvalue {
                    value: v,
                    multiplicity: 1,
                });
            }
        }
    }
    Ok(out)
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Sfvem]
}

fn default_nev() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub case: Case,
    pub family: MeshKind,
    /// Refinement parameters `n`, strictly increasing.
    pub levels: Vec<usize>,
    pub k: usize,
    #[serde(default)]
    pub ell: Option<usize>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_nev")]
    pub nev: usize,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl StudyConfig {
    pub fn new(case: Case, family: MeshKind, levels: Vec<usize>, k: usize) -> Self {
        Self {
            case,
            family,
            levels,
            k,
            ell: None,
            schemes: default_schemes(),
            nev: default_nev(),
            delta: None,
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, StudyError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, StudyError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: String| Err(StudyError::Config(m));
        if !(2..=4).contains(&self.k) {
            return bad(format!("k = {} (expected 2, 3 or 4)", self.k));
        }
        if self.levels.is_empty() || self.levels[0] == 0 {
            return bad("levels must be a nonempty list of positive integers".into());
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("levels {:?} are not strictly increasing", self.levels));
        }
        if self.schemes.is_empty() {
            return bad("no scheme selected".into());
        }
        if self.nev == 0 {
            return bad("nev must be positive".into());
        }
        Ok(())
    }

    pub fn mesh_family(&self) -> MeshFamily {
        match self.delta {
            Some(d) => MeshFamily::with_delta(self.family, d),
            None => MeshFamily::new(self.family),
        }
    }

    pub fn problem(&self, scheme: Scheme) -> ProblemSpec {
        let mut spec = self.case.problem(self.k, scheme);
        if let Some(l) = self.ell {
            spec.ell = EllRule::Fixed(l);
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    /// 1-based position in the modulus-sorted discrete spectrum.
    pub eig_index: usize,
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Distance of the cluster mean containing this eigenvalue to the exact
    /// value.
    pub abs_error: f64,
    pub rate: Option<f64>,
}

/// Multiplicities of the clusters found in one level's discrete spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelClusters {
    pub level: usize,
    pub tolerance: f64,
    pub multiplicities: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub case: Case,
    pub family: MeshKind,
    pub k: usize,
    pub scheme: Scheme,
    pub exact: Vec<ExactEigenvalue>,
    pub rows: Vec<ReportRow>,
    pub clusters: Vec<LevelClusters>,
    pub warnings: Vec<String>,
    /// First failing level, if any; later levels are not run.
    pub failure: Option<String>,
}

impl ConvergenceReport {
    /// Rows of one eigenvalue index, in level order.
    pub fn series(&self, eig_index: usize) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.eig_index == eig_index).collect()
    }

    pub fn last_rate(&self, eig_index: usize) -> Option<f64> {
        self.series(eig_index).last().and_then(|r| r.rate)
    }

    pub fn file_stem(&self) -> String {
        format!("{}_{}_k{}_{}", self.case, self.family, self.k, self.scheme)
    }
}

/// `log(e₀/e₁) / log(h₀/h₁)`; `None` unless both errors are positive and
/// finite.
pub fn observed_rate(e0: f64, e1: f64, h0: f64, h1: f64) -> Option<f64> {
    let ok = |e: f64| e.is_finite() && e > 0.0;
    if !(ok(e0) && ok(e1)) || h0 == h1 {
        return None;
    }
    Some((e0 / e1).ln() / (h0 / h1).ln())
}

/// Relative clustering tolerance: `1e-6` on the finest mesh, growing like
/// `h^{2k}` on coarser ones.
pub fn cluster_tolerance(h: f64, h_finest: f64, k: usize) -> f64 {
    1e-6 * (h / h_finest).powi(2 * k as i32)
}

fn fill_rates<R>(rows: &mut [R], key: impl Fn(&R) -> (f64, f64), mut set: impl FnMut(&mut R, Option<f64>)) {
    for i in 0..rows.len() {
        let rate = if i == 0 {
            None
        } else {
            let (h0, e0) = key(&rows[i - 1]);
            let (h1, e1) = key(&rows[i]);
            observed_rate(e0, e1, h0, h1)
        };
        set(&mut rows[i], rate);
    }
}

fn level_error(level: usize, e: impl Into<Error>) -> String {
    StudyError::Level {
        level,
        source: Box::new(e.into()),
    }
    .to_string()
}

/// Eigenvalue convergence series, one report per configured scheme.
pub fn run_convergence(config: &StudyConfig) -> Result<Vec<ConvergenceReport>, StudyError> {
    config.validate()?;
    let exact_all = exact_reference(config.case, config.nev)?;
    // Enough exact values to cover `nev` discrete ones with whole clusters.
    let mut exact = Vec::new();
    let mut nsolve = 0;
    for e in exact_all {
        if nsolve >= config.nev {
            break;
        }
        nsolve += e.multiplicity;
        exact.push(e);
    }
    let family = config.mesh_family();
    let mut reports = Vec::new();
    for &scheme in &config.schemes {
        let spec = config.problem(scheme);
        let mut report = ConvergenceReport {
            case: config.case,
            family: config.family,
            k: config.k,
            scheme,
            exact: exact.clone(),
            rows: Vec::new(),
            clusters: Vec::new(),
            warnings: Vec::new(),
            failure: None,
        };
        let mut spectra = Vec::new();
        for &n in &config.levels {
            let solved = generate_mesh(family, n)
                .map_err(|e| level_error(n, e))
                .and_then(|mesh| {
                    let (pair, dofs) = assembly::assemble(&mesh, &spec).map_err(|e| level_error(n, e))?;
                    let res = eigensolve::solve_gevp(&pair, nsolve, Strategy::Auto, c64::new(1.0, 0.0))
                        .map_err(|e| level_error(n, e))?;
                    if res.eigenvalues.len() < nsolve {
                        let msg = format!("only {} of {nsolve} eigenvalues found", res.eigenvalues.len());
                        return Err(level_error(n, eigensolve_error(msg)));
                    }
                    let nw = pair.warnings.len();
                    Ok((mesh.mesh_size(), dofs.num_free(), res.eigenvalues, nw))
                });
            match solved {
                Ok((h, ndof, values, nw)) => {
                    if nw > 0 {
                        report.warnings.push(format!("n = {n}: {nw} cell warnings"));
                    }
                    spectra.push((n, h, ndof, values));
                }
                Err(msg) => {
                    report.failure = Some(msg);
                    break;
                }
            }
        }
        let h_finest = spectra.last().map(|s| s.1).unwrap_or(1.0);
        for (n, h, ndof, values) in &spectra {
            let tol = cluster_tolerance(*h, h_finest, config.k);
            report.clusters.push(LevelClusters {
                level: *n,
                tolerance: tol,
                multiplicities: eigensolve::cluster_eigenvalues(values, tol)
                    .iter()
                    .map(|c| c.multiplicity)
                    .collect(),
            });
            let mut start = 0;
            for e in &exact {
                let group = &values[start..start + e.multiplicity];
                let mean = group.iter().fold(c64::new(0.0, 0.0), |s, v| s + v) / e.multiplicity as f64;
                let err = (mean - c64::new(e.value, 0.0)).norm();
                for (i, v) in group.iter().enumerate() {
                    report.rows.push(ReportRow {
                        level: *n,
                        h: *h,
                        ndof: *ndof,
                        eig_index: start + i + 1,
                        lambda_re: v.re,
                        lambda_im: v.im,
                        abs_error: err,
                        rate: None,
                    });
                }
                start += e.multiplicity;
            }
        }
        for idx in 1..=nsolve {
            let mut series: Vec<&mut ReportRow> = report.rows.iter_mut().filter(|r| r.eig_index == idx).collect();
            fill_rates(&mut series, |r| (r.h, r.abs_error), |r, v| r.rate = v);
        }
        reports.push(report);
    }
    Ok(reports)
}

fn eigensolve_error(msg: String) -> crate::error::SolverError {
    crate::error::SolverError::Decomposition(msg)
}

/// `u = sin(πx) sin(πy)`.
pub fn manufactured_solution(p: Point2) -> f64 {
    use std::f64::consts::PI;
    (PI * p.x).sin() * (PI * p.y).sin()
}

pub fn manufactured_gradient(p: Point2) -> [f64; 2] {
    use std::f64::consts::PI;
    let (sx, cx) = (PI * p.x).sin_cos();
    let (sy, cy) = (PI * p.y).sin_cos();
    [PI * cx * sy, PI * sx * cy]
}

/// `f = −div(K∇u) + β·∇u + γu` for the manufactured `u` and constant
/// coefficients.
pub fn manufactured_source(kk: Tensor, b: [f64; 2], g: f64) -> impl Fn(Point2) -> f64 + Send + Sync {
    use std::f64::consts::PI;
    move |p| {
        let u = manufactured_solution(p);
        let [ux, uy] = manufactured_gradient(p);
        let uxy = PI * PI * (PI * p.x).cos() * (PI * p.y).cos();
        let lap = kk[0][0] * (-PI * PI * u) + (kk[0][1] + kk[1][0]) * uxy + kk[1][1] * (-PI * PI * u);
        -lap + b[0] * ux + b[1] * uy + g * u
    }
}

/// `(‖u − Π⁰_k u_h‖₀, ‖√K(∇u − Π⁰_P∇u_h)‖₀)` summed over cells. `values`
/// holds every global DOF, boundary included.
pub fn compute_error_norms(
    values: &[f64],
    u: &(dyn Fn(Point2) -> f64 + Sync),
    grad: &(dyn Fn(Point2) -> [f64; 2] + Sync),
    diffusion: &Field<Tensor>,
    dofs: &GlobalDofMap,
    projections: &[ElementProjections],
) -> (f64, f64) {
    let mut l2 = 0.0;
    let mut energy = 0.0;
    for (c, proj) in projections.iter().enumerate() {
        let local: Vec<f64> = dofs.cell_dofs[c].iter().map(|&g| values[g]).collect();
        let rule = &proj.element.rule;
        let p = proj.values_at_quadrature();
        let [gx, gy] = proj.pkl_grad_at_quadrature();
        for (q, (&x, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let mut uh = 0.0;
            let mut gh = [0.0, 0.0];
            for (j, &v) in local.iter().enumerate() {
                uh += p[(q, j)] * v;
                gh[0] += gx[(q, j)] * v;
                gh[1] += gy[(q, j)] * v;
            }
            l2 += w * (u(x) - uh).powi(2);
            let g = grad(x);
            let e = [g[0] - gh[0], g[1] - gh[1]];
            let kk = diffusion.at(x);
            let ke = [kk[0][0] * e[0] + kk[0][1] * e[1], kk[1][0] * e[0] + kk[1][1] * e[1]];
            energy += w * (e[0] * ke[0] + e[1] * ke[1]);
        }
    }
    (l2.sqrt(), energy.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceRow {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub l2_error: f64,
    pub energy_error: f64,
    pub l2_rate: Option<f64>,
    pub energy_rate: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceReport {
    pub case: Case,
    pub family: MeshKind,
    pub k: usize,
    pub scheme: Scheme,
    pub rows: Vec<SourceRow>,
    pub failure: Option<String>,
}

impl SourceReport {
    pub fn file_stem(&self) -> String {
        format!("{}_{}_k{}_{}_source", self.case, self.family, self.k, self.scheme)
    }
}

/// Source problem with the manufactured solution and the case's
/// coefficients, one report per scheme.
pub fn run_source_study(config: &StudyConfig) -> Result<Vec<SourceReport>, StudyError> {
    config.validate()?;
    let (kk, b, g) = config.case.coefficients();
    let f = manufactured_source(kk, b, g);
    let family = config.mesh_family();
    let mut reports = Vec::new();
    for &scheme in &config.schemes {
        let spec = config.problem(scheme);
        let mut report = SourceReport {
            case: config.case,
            family: config.family,
            k: config.k,
            scheme,
            rows: Vec::new(),
            failure: None,
        };
        for &n in &config.levels {
            let row = (|| -> Result<SourceRow, Error> {
                let mesh = generate_mesh(family, n)?;
                let projs = assembly::compute_projections(&mesh, &spec)?;
                let (pair, dofs) = assembly::assemble_with(&mesh, &spec, &projs)?;
                let rhs = assembly::assemble_source_rhs_with(&dofs, &projs, &f);
                let x = eigensolve::solve_linear(&pair.a, &rhs)?;
                let residual = eigensolve::relative_residual(&pair.a, &x, &rhs);
                let free: Vec<f64> = x.iter().map(|v| v.re).collect();
                let (l2, en) = compute_error_norms(
                    &dofs.expand(&free),
                    &manufactured_solution,
                    &manufactured_gradient,
                    &spec.diffusion,
                    &dofs,
                    &projs,
                );
                Ok(SourceRow {
                    level: n,
                    h: mesh.mesh_size(),
                    ndof: dofs.num_free(),
                    l2_error: l2,
                    energy_error: en,
                    l2_rate: None,
                    energy_rate: None,
                    residual,
                })
            })();
            match row {
                Ok(r) => report.rows.push(r),
                Err(e) => {
                    report.failure = Some(level_error(n, e));
                    break;
                }
            }
        }
        fill_rates(&mut report.rows, |r| (r.h, r.l2_error), |r, v| r.l2_rate = v);
        fill_rates(&mut report.rows, |r| (r.h, r.energy_error), |r, v| r.energy_rate = v);
        reports.push(report);
    }
    Ok(reports)
}

pub const CSV_HEADER: &str = "level,h,ndof,eig_index,lambda_re,lambda_im,abs_error,rate";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn report_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.level,
            r.h,
            r.ndof,
            r.eig_index,
            r.lambda_re,
            r.lambda_im,
            r.abs_error,
            opt(r.rate)
        );
    }
    s
}

pub fn source_csv(report: &SourceReport) -> String {
    let mut s = String::from("level,h,ndof,l2_error,energy_error,l2_rate,energy_rate\n");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.level,
            r.h,
            r.ndof,
            r.l2_error,
            r.energy_error,
            opt(r.l2_rate),
            opt(r.energy_rate)
        );
    }
    s
}

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// Log-log plot of `(h, error)` series with a reference slope.
fn loglog_svg(title: &str, series: &[(String, Vec<(f64, f64)>)], slope: f64) -> String {
    let (w, hgt, m) = (640.0, 480.0, 60.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.1.iter())
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.log10(), p.1.log10()))
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{hgt}" viewBox="0 0 {w} {hgt}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{hgt}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>"#, w / 2.0);
    if pts.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| hgt - m - (y - y0) / (y1 - y0) * (hgt - 2.0 * m);
    let _ = writeln!(
        out,
        r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
        hgt - m,
        w - m
    );
    for (v, x, y, anchor) in [
        (x0, px(x0), hgt - m + 18.0, "middle"),
        (x1, px(x1), hgt - m + 18.0, "middle"),
    ] {
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{v:.2}</text>"#);
    }
    for v in [y0, y1] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.2}</text>"#,
            m - 6.0,
            py(v) + 4.0
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">log10 h</text>"#, w / 2.0, hgt - 16.0);
    let _ = writeln!(out, r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">log10 error</text>"#, hgt / 2.0, hgt / 2.0);
    // Reference slope through the finest point of the first series.
    if let Some(&(ax, ay)) = series.first().and_then(|s| s.1.iter().rev().find(|p| p.0 > 0.0 && p.1 > 0.0)) {
        let (ax, ay) = (ax.log10(), ay.log10());
        let ya = ay + slope * (x0 - ax);
        let yb = ay + slope * (x1 - ax);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            px(x0),
            py(ya),
            px(x1),
            py(yb)
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="gray">slope {slope}</text>"#, w - m - 60.0, m + 14.0);
    }
    for (i, (label, s)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s
            .iter()
            .filter(|p| p.0 > 0.0 && p.1 > 0.0)
            .map(|p| format!("{:.2},{:.2}", px(p.0.log10()), py(p.1.log10())))
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
        for c in &coords {
            let (cx, cy) = c.split_once(',').unwrap();
            let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{color}">{label}</text>"#,
            m + 10.0,
            m + 14.0 * (i + 1) as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn report_svg(report: &ConvergenceReport) -> String {
    let maxi = report.rows.iter().map(|r| r.eig_index).max().unwrap_or(0);
    let series: Vec<(String, Vec<(f64, f64)>)> = (1..=maxi)
        .map(|i| {
            (
                format!("lambda {i}"),
                report.series(i).iter().map(|r| (r.h, r.abs_error)).collect(),
            )
        })
        .collect();
    let title = format!("{} {} k={} {}", report.case, report.family, report.k, report.scheme);
    loglog_svg(&title, &series, 2.0 * report.k as f64)
}

pub fn source_svg(report: &SourceReport) -> String {
    let series = vec![
        ("L2".to_string(), report.rows.iter().map(|r| (r.h, r.l2_error)).collect()),
        ("energy".to_string(), report.rows.iter().map(|r| (r.h, r.energy_error)).collect()),
    ];
    let title = format!("{} {} k={} {} source", report.case, report.family, report.k, report.scheme);
    loglog_svg(&title, &series, report.k as f64 + 1.0)
}

fn write_pair(dir: &Path, stem: &str, csv: &str, svg: &str) -> Result<(PathBuf, PathBuf), StudyError> {
    fs::create_dir_all(dir)?;
    let c = dir.join(format!("{stem}.csv"));
    let s = dir.join(format!("{stem}.svg"));
    fs::write(&c, csv)?;
    fs::write(&s, svg)?;
    Ok((c, s))
}

/// Writes `<stem>.csv` and `<stem>.svg` into `dir`.
pub fn emit_outputs(report: &ConvergenceReport, dir: &Path) -> Result<(PathBuf, PathBuf), StudyError> {
    if report.rows.is_empty() {
        return Err(StudyError::Config("empty report".into()));
    }
    write_pair(dir, &report.file_stem(), &report_csv(report), &report_svg(report))
}

pub fn emit_source_outputs(report: &SourceReport, dir: &Path) -> Result<(PathBuf, PathBuf), StudyError> {
    if report.rows.is_empty() {
        return Err(StudyError::Config("empty report".into()));
    }
    write_pair(dir, &report.file_stem(), &source_csv(report), &source_svg(report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_spectra() {
        let pi2 = PI * PI;
        let e = exact_reference(Case::Case1, 5).unwrap();
        let want = [(2.0, 1), (5.0, 2), (8.0, 1), (10.0, 2), (13.0, 2)];
        for (got, (v, m)) in e.iter().zip(want) {
            assert!((got.value - (0.25 + v * pi2)).abs() < 1e-12);
            assert_eq!(got.multiplicity, m);
        }
        let e = exact_reference(Case::Case2, 1).unwrap();
        assert!((e[0].value - (25.0 + 2.0 * pi2)).abs() < 1e-12);
        let e = exact_reference(Case::Case3, 3).unwrap();
        assert!((e[0].value - 1.008 * pi2).abs() < 1e-12);
        assert!((e[1].value - 1.032 * pi2).abs() < 1e-12);
        assert!(exact_reference(Case::Manufactured, 1).is_err());
        assert!("case9".parse::<Case>().is_err());
    }

    #[test]
    fn config_validation() {
        let ok = StudyConfig::from_json(r#"{"case":"case1","family":"t1","levels":[4,8],"k":2,"schemes":["sfvem","svem"],"nev":5,"delta":null,"out_dir":"out"}"#).unwrap();
        assert_eq!(ok.family, MeshKind::Quad);
        assert_eq!(ok.schemes.len(), 2);
        assert!(StudyConfig::from_json(r#"{"case":"case1","family":"quad","levels":[8,4],"k":2}"#).is_err());
        assert!(StudyConfig::from_json(r#"{"case":"case1","family":"quad","levels":[4],"k":5}"#).is_err());
    }

    #[test]
    fn rate_of_power_law() {
        let r = observed_rate(3.0 * 0.5f64.powi(4), 3.0 * 0.25f64.powi(4), 0.5, 0.25).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        assert!(observed_rate(0.0, 1.0, 0.5, 0.25).is_none());
    }

    #[test]
    fn laplace_source_term() {
        let f = manufactured_source([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], 0.0);
        let p = Point2::new(0.3, 0.7);
        assert!((f(p) - 2.0 * PI * PI * manufactured_solution(p)).abs() < 1e-12);
    }

    fn synthetic(levels: &[usize]) -> ConvergenceReport {
        let rows = levels
            .iter()
            .map(|&n| ReportRow {
                level: n,
                h: 1.0 / n as f64,
                ndof: n * n,
                eig_index: 1,
                lambda_re: 1.0,
                lambda_im: 0.0,
                abs_error: (1.0 / n as f64).powi(4),
                rate: None,
            })
            .collect::<Vec<_>>();
        let mut r = ConvergenceReport {
            case: Case::Case1,
            family: MeshKind::Quad,
            k: 2,
            scheme: Scheme::Sfvem,
            exact: vec![],
            rows,
            clusters: vec![],
            warnings: vec![],
            failure: None,
        };
        let mut s: Vec<&mut ReportRow> = r.rows.iter_mut().collect();
        fill_rates(&mut s, |r| (r.h, r.abs_error), |r, v| r.rate = v);
        r
    }

    #[test]
    fn csv_layout() {
        let one = report_csv(&synthetic(&[4]));
        let lines: Vec<&str> = one.lines().collect();
        assert_eq!(lines, vec![CSV_HEADER, "4,0.25,16,1,1,0,0.00390625,"]);
        let two = report_csv(&synthetic(&[4, 8]));
        let lines: Vec<&str> = two.lines().collect();
        assert!(lines[1].ends_with(','));
        let rate: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
        assert!((rate - 4.0).abs() < 1e-12);
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let (c, s) = emit_outputs(&synthetic(&[4, 8, 16]), dir.path()).unwrap();
        assert!(fs::read_to_string(c).unwrap().starts_with(CSV_HEADER));
        let svg = fs::read_to_string(s).unwrap();
        assert!(svg.contains("<polyline") && svg.contains("slope 4"));
        let file = dir.path().join("file");
        fs::write(&file, "x").unwrap();
        assert!(emit_outputs(&synthetic(&[4]), &file.join("sub")).is_err());
    }
}
