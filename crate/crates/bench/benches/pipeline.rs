use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use faer::c64;
use sfvem::assembly::{self, ProblemSpec, Scheme};
use sfvem::eigensolve::{solve_gevp, Strategy};
use sfvem::{generate_mesh, Case, MeshFamily, MeshKind};

const FAMILIES: [MeshKind; 3] = [MeshKind::Quad, MeshKind::Pentagon, MeshKind::Octagon];

fn projections(c: &mut Criterion) {
    let mut g = c.benchmark_group("projections");
    for kind in FAMILIES {
        let mesh = generate_mesh(MeshFamily::new(kind), 8).unwrap();
        for k in [2, 4] {
            let spec = ProblemSpec::laplacian(k, Scheme::Sfvem);
            g.bench_with_input(BenchmarkId::new(format!("{kind}_n8"), k), &spec, |b, spec| {
                b.iter(|| assembly::compute_projections(black_box(&mesh), spec).unwrap())
            });
        }
    }
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    for kind in FAMILIES {
        let mesh = generate_mesh(MeshFamily::new(kind), 16).unwrap();
        let spec = Case::Case1.problem(2, Scheme::Sfvem);
        let projs = assembly::compute_projections(&mesh, &spec).unwrap();
        g.bench_function(format!("{kind}_n16_k2"), |b| {
            b.iter(|| assembly::assemble_with(black_box(&mesh), &spec, &projs).unwrap())
        });
    }
    g.finish();
}

fn eigensolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigensolve");
    g.sample_size(10);
    let mesh = generate_mesh(MeshFamily::new(MeshKind::Octagon), 8).unwrap();
    let (pair, _) = assembly::assemble(&mesh, &Case::Case1.problem(2, Scheme::Sfvem)).unwrap();
    for strategy in [Strategy::Dense, Strategy::ShiftInvert] {
        g.bench_function(format!("{strategy:?}_octagon_n8"), |b| {
            b.iter(|| solve_gevp(black_box(&pair), 5, strategy, c64::new(1.0, 0.0)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, projections, assembly, eigensolve);
criterion_main!(benches);
