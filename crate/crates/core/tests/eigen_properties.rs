use std::f64::consts::PI;

use faer::c64;
use faer::sparse::{SparseColMat, Triplet};
use proptest::prelude::*;
use sfvem::assembly::{self, ProblemSpec, Scheme};
use sfvem::eigensolve::{self, adjoint, cluster_eigenvalues, solve_gevp, solve_gevp_with, ArnoldiOptions, Strategy};
use sfvem::study::cluster_tolerance;
use sfvem::{generate_mesh, Case, MeshFamily, MeshKind};

fn c(re: f64) -> c64 {
    c64::new(re, 0.0)
}

fn pair(kind: MeshKind, n: usize, case: Case, k: usize) -> assembly::SparsePair {
    let mesh = generate_mesh(MeshFamily::new(kind), n).unwrap();
    assembly::assemble(&mesh, &case.problem(k, Scheme::Sfvem)).unwrap().0
}

#[test]
fn laplace_first_eigenvalue_on_quads() {
    let mesh = generate_mesh(MeshFamily::new(MeshKind::Quad), 8).unwrap();
    let (p, _) = assembly::assemble(&mesh, &ProblemSpec::laplacian(2, Scheme::Sfvem)).unwrap();
    let res = solve_gevp(&p, 3, Strategy::Auto, c(1.0)).unwrap();
    let exact = 2.0 * PI * PI;
    assert!((res.eigenvalues[0].re - exact).abs() <= 1e-3 * exact, "{}", res.eigenvalues[0]);
    assert!(res.residuals.iter().all(|&r| r <= 1e-8));
}

#[test]
fn case1_second_and_third_eigenvalues_cluster() {
    let p = pair(MeshKind::Quad, 16, Case::Case1, 2);
    let res = solve_gevp(&p, 5, Strategy::Auto, c(1.0)).unwrap();
    // tolerance of n = 16 within the usual 4..32 sweep
    let h = |n: usize| generate_mesh(MeshFamily::new(MeshKind::Quad), n).unwrap().mesh_size();
    let clusters = cluster_eigenvalues(&res.eigenvalues, cluster_tolerance(h(16), h(32), 2));
    assert_eq!(clusters[1].members, vec![1, 2]);
    let exact = 0.25 + 5.0 * PI * PI;
    assert!((clusters[1].mean.re - exact).abs() < 1e-3 * exact);
    assert!(res.residuals.iter().all(|&r| r <= 1e-8), "{:?}", res.residuals);
}

#[test]
fn dense_and_shift_invert_agree() {
    for (kind, n, case, k) in [
        (MeshKind::Octagon, 4, Case::Case2, 2),
        (MeshKind::Pentagon, 4, Case::Case1, 3),
        (MeshKind::Quad, 8, Case::Case3, 2),
    ] {
        let p = pair(kind, n, case, k);
        let d = solve_gevp(&p, 5, Strategy::Dense, c(1.0)).unwrap();
        let s = solve_gevp(&p, 5, Strategy::ShiftInvert, c(1.0)).unwrap();
        for (a, b) in d.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!((a - b).norm() <= 1e-8 * a.norm(), "{kind} {case}: {a} vs {b}");
        }
        for r in d.residuals.iter().chain(&s.residuals) {
            assert!(*r <= 1e-8);
        }
    }
}

#[test]
fn adjoint_pair_has_conjugate_spectrum() {
    let p = pair(MeshKind::Pentagon, 4, Case::Case2, 2);
    let (ah, mh) = (adjoint(&p.a), adjoint(&p.m));
    let opts = ArnoldiOptions::default();
    let primal = solve_gevp_with(&p.a, &p.m, 5, Strategy::Dense, c(0.0), opts).unwrap();
    let dual = solve_gevp_with(&ah, &mh, 5, Strategy::Dense, c(0.0), opts).unwrap();
    for (a, b) in primal.eigenvalues.iter().zip(&dual.eigenvalues) {
        assert!((a.conj() - b).norm() <= 1e-8 * a.norm(), "{a} vs {b}");
    }
}

#[test]
fn symmetric_problems_have_real_spectra() {
    for kind in [MeshKind::Quad, MeshKind::Pentagon, MeshKind::Octagon] {
        let p = pair(kind, 4, Case::Case3, 2);
        let res = solve_gevp(&p, 5, Strategy::Auto, c(1.0)).unwrap();
        for l in &res.eigenvalues {
            assert!(l.im.abs() <= 1e-8 * l.norm(), "{kind}: {l}");
        }
    }
}

#[test]
fn cluster_examples() {
    let v = [c(5.0), c(5.0001), c(9.0)];
    let cl = cluster_eigenvalues(&v, 1e-3);
    assert_eq!(cl.len(), 2);
    assert_eq!(cl[0].multiplicity, 2);
    assert!((cl[0].mean.re - 5.00005).abs() < 1e-12);
    let cl = cluster_eigenvalues(&[c(1.0), c(2.0), c(3.0)], 0.0);
    assert!(cl.iter().all(|x| x.multiplicity == 1));
}

fn identity(n: usize) -> SparseColMat<usize, c64> {
    let t: Vec<_> = (0..n).map(|i| Triplet::new(i, i, c(1.0))).collect();
    SparseColMat::try_new_from_triplets(n, n, &t).unwrap()
}

#[test]
fn linear_solver_examples() {
    let id = identity(4);
    let b = vec![c(1.0), c64::new(0.0, 2.0), c(-3.0), c(4.5)];
    assert_eq!(eigensolve::solve_linear(&id, &b).unwrap(), b);
    let zero = vec![c(0.0); 4];
    assert!(eigensolve::solve_linear(&id, &zero).unwrap().iter().all(|v| v.norm() == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn clusters_hold_members_near_their_mean(
        mut vals in proptest::collection::vec(1.0..100.0f64, 1..30), tol in 0.0..0.1f64
    ) {
        vals.sort_by(f64::total_cmp);
        let cv: Vec<c64> = vals.iter().map(|&v| c(v)).collect();
        let cl = cluster_eigenvalues(&cv, tol);
        let mut seen = 0;
        for k in &cl {
            prop_assert_eq!(k.members.len(), k.multiplicity);
            let mean = k.members.iter().map(|&i| cv[i]).sum::<c64>() / k.multiplicity as f64;
            prop_assert!((mean - k.mean).norm() <= 1e-12 * mean.norm());
            for &i in &k.members {
                prop_assert_eq!(i, seen);
                seen += 1;
                prop_assert!((cv[i] - k.mean).norm() <= tol * k.mean.norm() * (1.0 + 1e-12));
            }
        }
        prop_assert_eq!(seen, cv.len());
    }

    #[test]
    fn diagonal_pencils_are_solved_in_modulus_order(
        diag in proptest::collection::vec(0.5..50.0f64, 6..40), mscale in 0.5..2.0f64, dense in any::<bool>()
    ) {
        let n = diag.len();
        let ta: Vec<_> = diag.iter().enumerate().map(|(i, &d)| Triplet::new(i, i, c(d))).collect();
        let tm: Vec<_> = (0..n).map(|i| Triplet::new(i, i, c(mscale))).collect();
        let a = SparseColMat::try_new_from_triplets(n, n, &ta).unwrap();
        let m = SparseColMat::try_new_from_triplets(n, n, &tm).unwrap();
        let strategy = if dense { Strategy::Dense } else { Strategy::ShiftInvert };
        let nev = 3.min(n);
        let res = solve_gevp_with(&a, &m, nev, strategy, c(0.1), ArnoldiOptions::default()).unwrap();
        let mut exact: Vec<f64> = diag.iter().map(|d| d / mscale).collect();
        exact.sort_by(f64::total_cmp);
        for i in 0..nev {
            prop_assert!((res.eigenvalues[i].re - exact[i]).abs() <= 1e-8 * exact[i]);
            prop_assert!(res.residuals[i] <= 1e-8);
        }
    }
}
