use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use raising_core::harmonic::DEFAULT_NULL_TOL;
use raising_core::solver::{DirectSolver, LocalSolvers};
use raising_core::{
    build_cover, generate_torus, harmonic_basis, Execution, Operators, Solver, SolverConfig,
};

const EXECUTIONS: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn factor_patches(c: &mut Criterion) {
    let mut group = c.benchmark_group("factor_patches");
    group.sample_size(10);
    for m in [32, 64] {
        let k = generate_torus(m, m).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let cover = build_cover(&k, 4, 1, 0).unwrap();
        for (name, execution) in EXECUTIONS {
            let cfg = SolverConfig {
                execution,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| LocalSolvers::prepare(&ops, &cover, 1, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn threshold_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_with_threshold");
    group.sample_size(10);
    for m in [32, 64] {
        let k = generate_torus(m, m).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let cover = build_cover(&k, 4, 1, 0).unwrap();
        let basis = harmonic_basis(&ops, 1, DEFAULT_NULL_TOL).unwrap();
        let omega = basis.remove_harmonic(&ops, &ops.random(1, 7)).unwrap();
        for (name, execution) in EXECUTIONS {
            let cfg = SolverConfig {
                execution,
                ..Default::default()
            };
            let solver = Solver::new(&ops, &cover, &basis, &cfg).unwrap();
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| solver.solve_with_threshold(&omega).unwrap())
            });
        }
        let direct = DirectSolver::new(&ops, &basis).unwrap();
        group.bench_with_input(BenchmarkId::new("direct", m), &m, |b, _| {
            b.iter(|| direct.solve(&omega).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, factor_patches, threshold_solve);
criterion_main!(benches);
