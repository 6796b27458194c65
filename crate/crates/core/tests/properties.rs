use lyapunov_irregular::cocycle::{compound_matrix, MatrixCocycle};
use lyapunov_irregular::exec::Execution;
use lyapunov_irregular::irregular::{
    build_point, certify_witness, density_scan, plan_schedule, IrregularTarget, IrregularWitness, PlanOptions,
};
use lyapunov_irregular::linalg::{max_abs, Matrix, Vector};
use lyapunov_irregular::lyapunov::periodic_spectrum;
use lyapunov_irregular::symbolic::{legal_words, Cylinder, ShiftPoint, ShiftSpace, Word};
use proptest::prelude::*;

fn matrix(m: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0..2.0f64, m * m)
        .prop_map(move |v| Matrix::from_row_slice(m, m, &v))
        .prop_filter("invertible", |b| b.determinant().abs() > 1e-2)
}

fn cocycle_and_word() -> impl Strategy<Value = (MatrixCocycle, Word)> {
    (1usize..=3).prop_flat_map(|m| {
        (
            prop::collection::vec(matrix(m), 2),
            prop::collection::vec(0u8..2, 1..=6),
        )
            .prop_map(|(g, w)| (MatrixCocycle::new(g).unwrap(), Word::new(w)))
    })
}

fn diagonal() -> MatrixCocycle {
    MatrixCocycle::new(vec![
        Matrix::from_diagonal(&Vector::from_column_slice(&[2.0, 0.5])),
        Matrix::identity(2, 2),
    ])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_is_rotation_invariant((a, w) in cocycle_and_word(), k in 0usize..6) {
        let space = ShiftSpace::full_shift(2);
        let s = periodic_spectrum(&a, &space, &w).unwrap();
        let r = periodic_spectrum(&a, &space, &w.rotated(k % w.len())).unwrap();
        let (x, y) = (s.exponents_desc(), r.exponents_desc());
        prop_assert_eq!(x.len(), y.len());
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() < 1e-9, "{:?} vs {:?}", x, y);
        }
    }

    #[test]
    fn compound_is_multiplicative(m in 2usize..=4, k in 1usize..=4, seed in prop::collection::vec(-2.0..2.0f64, 32)) {
        let k = k.min(m);
        let a = Matrix::from_fn(m, m, |i, j| seed[i * m + j]);
        let b = Matrix::from_fn(m, m, |i, j| seed[16 + i * m + j]);
        let lhs = compound_matrix(&(&a * &b), k);
        let rhs = compound_matrix(&a, k) * compound_matrix(&b, k);
        prop_assert!(max_abs(&(&lhs - &rhs)) <= 1e-9 * (1.0 + max_abs(&lhs)));
    }

    #[test]
    fn log_norm_is_subadditive((a, w) in cocycle_and_word(), n in 0u64..40, k in 0u64..40) {
        let x = ShiftPoint::periodic(&w);
        let whole = a.log_norm_product(&x, n + k);
        let split = a.log_norm_product(&x, n) + a.log_norm_product(&x.shift(n as i64), k);
        prop_assert!(whole <= split + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn golden_mean_witnesses_are_legal_and_certified(idx in 0usize..64, len in 1usize..=5, n in 0u64..30) {
        let space = ShiftSpace::golden_mean();
        let words = legal_words(&space, len);
        let window = &words[idx % words.len()];
        let cyl = Cylinder::centered(&space, window).unwrap();
        let a = diagonal();
        let measures = ["0".parse().unwrap(), "01".parse().unwrap()];
        let target = IrregularTarget::from_measures(&a, &space, &measures, None, &cyl, 1).unwrap();
        let options = PlanOptions { min_time: n, ..PlanOptions::default() };
        let schedule = plan_schedule(&a, &space, &target, 2, target.tau / 4.0, &options).unwrap();
        let y = build_point(&schedule, &space).unwrap();
        let end = schedule.levels.last().unwrap().n2 as i64;
        prop_assert!(space.check_point_window(&y, -50, end + 50));
        prop_assert!(cyl.contains(&y));
        let w = certify_witness(&a, &space, &y, &schedule, &target).unwrap();
        prop_assert!(w.levels[0].n1 > n);
        let json = serde_json::to_string(&w).unwrap();
        let back: IrregularWitness = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(json, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn scan_does_not_depend_on_execution(len in 1usize..=3) {
        let space = ShiftSpace::full_shift(2);
        let a = diagonal();
        let cylinders: Vec<Cylinder> =
            legal_words(&space, len).iter().map(|w| Cylinder::centered(&space, w).unwrap()).collect();
        let measures = ["0".parse().unwrap(), "1".parse().unwrap()];
        let target = IrregularTarget::from_measures(&a, &space, &measures, None, &cylinders[0], 1).unwrap();
        let run = |e| {
            let r = density_scan(&a, &space, &target, &cylinders, 5, 1, target.tau / 4.0, e).unwrap();
            serde_json::to_string(&r).unwrap()
        };
        prop_assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }
}
