use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use idca::geometry::project_onto_c;
use idca::spectral::{jacobi_eigenvalues, DEFAULT_JACOBI_TOL};
use idca::worked_example::{example_problem, reproduce_example};
use idca::{qc_check, run, solve_qp, Algorithm};
use idca_bench::{default_setup, instances, qp_subproblems};
use nalgebra::DVector;

fn bench_qp(c: &mut Criterion) {
    let subs = qp_subproblems(32, 6, 10);
    c.bench_function("solve_qp/32 random", |b| {
        b.iter(|| {
            for sub in &subs {
                black_box(solve_qp(sub).unwrap());
            }
        })
    });

    let insts = instances(32, 6, 10);
    let targets: Vec<DVector<f64>> = insts
        .iter()
        .map(|i| DVector::from_element(i.problem.n(), 3.0))
        .collect();
    c.bench_function("project_onto_c/32 random", |b| {
        b.iter(|| {
            for (inst, u) in insts.iter().zip(&targets) {
                black_box(project_onto_c(&inst.problem, u).unwrap());
            }
        })
    });
}

fn bench_engine(c: &mut Criterion) {
    let insts = instances(16, 6, 10);
    let mut group = c.benchmark_group("run");
    for algo in [Algorithm::InDca1, Algorithm::InDca2] {
        let setups: Vec<_> = insts.iter().map(|i| default_setup(i, algo)).collect();
        group.bench_with_input(
            BenchmarkId::new(format!("{algo:?}"), 16),
            &setups,
            |b, setups| {
                b.iter(|| {
                    for (inst, (dc, cfg)) in insts.iter().zip(setups) {
                        black_box(run(&inst.problem, dc, cfg, &inst.x0, algo).unwrap());
                    }
                })
            },
        );
    }
    group.finish();
}

fn bench_example(c: &mut Criterion) {
    let p = example_problem();
    c.bench_function("qc_check/example", |b| {
        b.iter(|| black_box(qc_check(&p).unwrap()))
    });
    c.bench_function("reproduce_example", |b| {
        b.iter(|| black_box(reproduce_example().unwrap()))
    });

    let insts = instances(8, 6, 10);
    c.bench_function("jacobi/8 random Q", |b| {
        b.iter(|| {
            for inst in &insts {
                black_box(jacobi_eigenvalues(inst.problem.q_mat(), DEFAULT_JACOBI_TOL).unwrap());
            }
        })
    });
}

criterion_group!(benches, bench_qp, bench_engine, bench_example);
criterion_main!(benches);
