use criterion::{criterion_group, criterion_main, Criterion};
use lyapunov_irregular::cocycle::MatrixCocycle;
use lyapunov_irregular::exec::Execution;
use lyapunov_irregular::irregular::{density_scan, IrregularTarget};
use lyapunov_irregular::linalg::{Matrix, Vector};
use lyapunov_irregular::symbolic::{legal_words, Cylinder, ShiftSpace};

fn scan(c: &mut Criterion) {
    let space = ShiftSpace::full_shift(2);
    let a = MatrixCocycle::new(vec![
        Matrix::from_diagonal(&Vector::from_column_slice(&[2.0, 0.5])),
        Matrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 1.0]),
    ])
    .unwrap();
    let cylinders: Vec<Cylinder> = legal_words(&space, 6)
        .iter()
        .map(|w| Cylinder::centered(&space, w).unwrap())
        .collect();
    let measures = ["0".parse().unwrap(), "1".parse().unwrap()];
    let target = IrregularTarget::from_measures(&a, &space, &measures, None, &cylinders[0], 1).unwrap();
    let eps = target.tau / 4.0;
    let mut group = c.benchmark_group("density_scan_window6_levels3");
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| density_scan(&a, &space, &target, &cylinders, 10, 3, eps, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, scan);
criterion_main!(benches);
