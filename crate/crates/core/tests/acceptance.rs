use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lyapunov_irregular::cocycle::{compound_matrix, exterior_power, MatrixCocycle};
use lyapunov_irregular::exec::Execution;
use lyapunov_irregular::experiments::{
    cmd_bounds, cmd_irregular, cmd_spectrum, cmd_verify, Experiment, ExperimentError, Overrides, WitnessFile,
};
use lyapunov_irregular::irregular::{
    build_point, density_scan, lift_to_li, on_membership, BlockSchedule, IrregularError, IrregularTarget,
    LiftOptions,
};
use lyapunov_irregular::linalg::{op_norm, Matrix, Vector};
use lyapunov_irregular::lyapunov::{
    cone_verify, lemma31_verify, lyapunov_gram, oseledec_splitting_periodic, periodic_spectrum, verify_norm_bounds,
    BoundsOptions, ConeOptions, GramOptions, LyapunovError,
};
use lyapunov_irregular::symbolic::{legal_words, splice, Cylinder, Segment, ShiftPoint, ShiftSpace, Word};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Written past the test harness capture so every line lands in the log.
fn report(criterion: u32, pass: bool, detail: &str) {
    let line = format!("criterion {criterion}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("lyirr-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn load(config: &str, overrides: Overrides) -> Experiment {
    let o = Overrides {
        out: Some(scratch(config)),
        ..overrides
    };
    Experiment::load(&configs().join(config), &o).unwrap()
}

fn word(w: &str) -> Word {
    w.parse().unwrap()
}

fn diag(d: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_column_slice(d))
}

fn diagonal_cocycle() -> MatrixCocycle {
    MatrixCocycle::new(vec![diag(&[2.0, 0.5]), Matrix::identity(2, 2)]).unwrap()
}

/// (exponent, multiplicity) rows of one measure in `spectrum.jsonl`.
fn spectrum_rows(path: &Path, measure: &str) -> Vec<(f64, u64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["record"] == "block" && v["measure"] == measure)
        .map(|v| (v["exponent"].as_f64().unwrap(), v["multiplicity"].as_u64().unwrap()))
        .collect()
}

fn rows_match(got: &[(f64, u64)], want: &[(f64, u64)], tol: f64) -> bool {
    got.len() == want.len()
        && got
            .iter()
            .zip(want)
            .all(|(g, w)| (g.0 - w.0).abs() <= tol && g.1 == w.1)
}

#[test]
fn criterion_1_spectrum_exactness() {
    let l2 = 2f64.ln();
    let start = Instant::now();
    let diag_exp = load("diagonal.toml", Overrides::default());
    let out = cmd_spectrum(&diag_exp).unwrap();
    let at0 = spectrum_rows(&out.files[0], "0");
    let at1 = spectrum_rows(&out.files[0], "1");
    let rot = load("rotation.toml", Overrides::default());
    let out = cmd_spectrum(&rot).unwrap();
    let at01 = spectrum_rows(&out.files[0], "01");
    let elapsed = start.elapsed().as_secs_f64();

    // the two-step product diag(2,1/2) then the quarter turn
    let r = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let two_step = &r * diag(&[2.0, 0.5]);
    let eig = two_step.complex_eigenvalues();
    let rot_oracle = eig.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12 && z.re.abs() < 1e-12);

    let pass = rows_match(&at0, &[(l2, 1), (-l2, 1)], 1e-10)
        && rows_match(&at1, &[(0.0, 2)], 1e-10)
        && rows_match(&at01, &[(0.0, 2)], 1e-10)
        && rot_oracle
        && elapsed < 1.0;
    report(
        1,
        pass,
        &format!("at 0 {at0:?}, at 1 {at1:?}, at 01 {at01:?}, eigenvalues ±i: {rot_oracle}, {elapsed:.3} s"),
    );
    assert!(pass);
}

struct RandomCase {
    a: MatrixCocycle,
    word: Word,
}

/// Cocycles over the full 2-shift with entries in [-2, 2], dimension at
/// most 4, and a random periodic word of length at most 6.
fn random_family(seed: u64, count: usize) -> Vec<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = rng.gen_range(1..=4);
        let gens: Vec<Matrix> = (0..2)
            .map(|_| Matrix::from_fn(m, m, |_, _| rng.gen_range(-2.0..2.0)))
            .collect();
        if gens.iter().any(|g| g.determinant().abs() < 1e-2) {
            continue;
        }
        let p = rng.gen_range(1..=6);
        let w = Word::new((0..p).map(|_| rng.gen_range(0..2u8)).collect());
        out.push(RandomCase {
            a: MatrixCocycle::new(gens).unwrap(),
            word: w,
        });
    }
    out
}

#[test]
fn criterion_2_determinant_identity() {
    let space = ShiftSpace::full_shift(2);
    let mut worst = 0f64;
    let mut failures = 0;
    for case in random_family(2024, 100) {
        let s = periodic_spectrum(&case.a, &space, &case.word).unwrap();
        let oracle: f64 = case
            .word
            .symbols()
            .iter()
            .map(|&k| case.a.generator(k).determinant().abs().ln())
            .sum::<f64>()
            / case.word.len() as f64;
        let err = (s.weighted_sum() - oracle).abs();
        worst = worst.max(err);
        if err > 1e-10 {
            failures += 1;
        }
    }
    let pass = failures == 0;
    report(2, pass, &format!("100 random cocycles, worst deviation {worst:.2e}, tolerance 1e-10"));
    assert!(pass);
}

#[test]
fn criterion_3_exterior_power_law() {
    let space = ShiftSpace::full_shift(2);
    let mut worst_sum = 0f64;
    for case in random_family(2024, 100) {
        let s = periodic_spectrum(&case.a, &space, &case.word).unwrap();
        for i in 1..=case.a.dim() {
            let ext = exterior_power(&case.a, i).unwrap();
            let top = periodic_spectrum(&ext, &space, &case.word).unwrap().max_exponent();
            worst_sum = worst_sum.max((top - s.top_sum(i)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_norm = 0f64;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=4);
        let b = Matrix::from_fn(m, m, |_, _| rng.gen_range(-2.0..2.0));
        // singular values from the eigenvalues of BᵀB
        let mut sv: Vec<f64> = SymmetricEigen::new(b.transpose() * &b)
            .eigenvalues
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        for i in 1..=m {
            let oracle: f64 = sv[..i].iter().product();
            let got = op_norm(&compound_matrix(&b, i));
            worst_norm = worst_norm.max((got - oracle).abs() / oracle.max(1.0));
        }
    }
    let pass = worst_sum <= 1e-9 && worst_norm <= 1e-9;
    report(
        3,
        pass,
        &format!("Λ_i vs top-i sums worst {worst_sum:.2e}; compound norms vs singular values worst {worst_norm:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_4_lyapunov_metric_suite() {
    let space = ShiftSpace::full_shift(2);
    let triangular = MatrixCocycle::new(vec![
        Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]),
        Matrix::identity(2, 2),
    ])
    .unwrap();
    let options = BoundsOptions {
        n_min: -20,
        n_max: 20,
        tolerance: 1e-6,
        ..BoundsOptions::default()
    };
    let mut pass = true;
    let mut details = Vec::new();
    for (name, a) in [("diagonal", diagonal_cocycle()), ("triangular", triangular)] {
        for w in ["0", "1"] {
            let s = oseledec_splitting_periodic(&a, &space, &word(w)).unwrap();
            let g = lyapunov_gram(&a, &s, 0.1, &GramOptions::default()).unwrap();
            match verify_norm_bounds(&a, &s, &g, &options) {
                Ok(r) => {
                    pass &= r.failures == 0 && r.drift_ok;
                    details.push(format!("{name}@{w}: {} checks, drift ok {}", r.checks, r.drift_ok));
                }
                Err(e) => {
                    pass = false;
                    details.push(format!("{name}@{w}: {e}"));
                }
            }
        }
    }
    let a = diagonal_cocycle();
    let s = oseledec_splitting_periodic(&a, &space, &word("0")).unwrap();
    let g = lyapunov_gram(&a, &s, 0.1, &GramOptions::default()).unwrap();
    let e1 = Vector::from_column_slice(&[1.0, 0.0]);
    let analytic = 2.0 / (0.05f64).tanh();
    let err = (g.norm(0, &e1).powi(2) - analytic).abs();
    pass &= err <= 1e-8;
    details.push(format!("|e1|^2 vs 2 coth(0.05): {err:.2e}"));
    report(4, pass, &details.join("; "));
    assert!(pass);
}

/// Zeros of `y` on `[0, n)` for a schedule whose high word is `0` and
/// low word is `1`.
fn zeros_before(y: &ShiftPoint, schedule: &BlockSchedule, n: u64) -> u64 {
    let n = n as i64;
    let count = |lo: i64, hi: i64| (lo..hi.min(n)).filter(|&i| y.symbol(i) == 0).count() as u64;
    let mut zeros = 0;
    let mut cursor = 0i64;
    for lv in &schedule.levels {
        if cursor >= n {
            break;
        }
        zeros += count(cursor, lv.high_start);
        let end = lv.high_start + lv.high_len as i64;
        zeros += (end.min(n) - lv.high_start).max(0) as u64;
        zeros += count(end, lv.low_start);
        cursor = lv.low_start + lv.low_len as i64;
    }
    zeros + count(cursor, n)
}

#[test]
fn criterion_5_irregularity_witness() {
    let tau = 0.05;
    let l2 = 2f64.ln();
    let start = Instant::now();
    let exp = load(
        "diagonal.toml",
        Overrides {
            tau: Some(tau),
            levels: Some(5),
            ..Overrides::default()
        },
    );
    cmd_irregular(&exp).unwrap();
    let witness_path = exp.out_dir.join("witness.json");
    let verified = cmd_verify(&exp, &witness_path).is_ok();
    let elapsed = start.elapsed().as_secs_f64();

    let file: WitnessFile = serde_json::from_str(&std::fs::read_to_string(&witness_path).unwrap()).unwrap();
    let w = &file.witness;
    assert_eq!((w.schedule.high.to_string(), w.schedule.low.to_string()), ("0".into(), "1".into()));
    let y = build_point(&w.schedule, &exp.space).unwrap();
    let mut certified = w.levels.len() == 5;
    for lv in &w.levels {
        // ‖A(y, n)‖ = 2^(zeros of y on [0, n))
        let high = zeros_before(&y, &w.schedule, lv.n1) as f64 * l2 / lv.n1 as f64;
        let low = zeros_before(&y, &w.schedule, lv.n2) as f64 * l2 / lv.n2 as f64;
        certified &= high > l2 - tau && low < tau;
        certified &= (high - lv.high_average).abs() < 1e-9 && (low - lv.low_average).abs() < 1e-9;
    }
    let n2 = w.levels.last().map_or(0, |l| l.n2);
    // ‖A(y, n)‖ never decreases here, so each crossing multiplies time by
    // more than (log 2 - τ)/τ and n2 of level 5 exceeds this ratio to the 9th
    let ratio = (l2 - tau) / tau;
    let lower = ratio.powi(9);
    let within_budget = n2 <= 1_000_000;
    let pass = certified && verified && elapsed < 60.0 && within_budget;
    report(
        5,
        pass,
        &format!(
            "10 strict comparisons certified against the zero-count oracle: {certified}; verify: {verified}; \
             {elapsed:.2} s; n2 of level 5 = {n2} vs allowance 1e6 (any point meeting all ten inequalities \
             has n2 of level 5 > {lower:.3e})"
        ),
    );
    assert!(certified && verified && elapsed < 60.0);
    assert!(
        within_budget,
        "n2 of level 5 is {n2}; the allowance 1e6 is below the lower bound {lower:.3e}"
    );
}

/// Legal words of length `len` avoiding `11`, by brute force.
fn golden_mean_count(len: u32) -> usize {
    (0u32..1 << len).filter(|v| v & (v >> 1) == 0).count()
}

#[test]
fn criterion_6_density_evidence() {
    let mut pass = true;
    let mut details = Vec::new();
    for (space, expected) in [
        (ShiftSpace::full_shift(2), 8usize),
        (ShiftSpace::golden_mean(), golden_mean_count(3)),
    ] {
        let a = diagonal_cocycle();
        let measures = [word("0"), word("01")];
        let cylinders: Vec<Cylinder> = legal_words(&space, 3)
            .iter()
            .map(|w| Cylinder::centered(&space, w).unwrap())
            .collect();
        let target = IrregularTarget::from_measures(&a, &space, &measures, None, &cylinders[0], 1).unwrap();
        let report = density_scan(&a, &space, &target, &cylinders, 10, 1, target.tau / 4.0, Execution::default())
            .unwrap();
        let agree = report.rows.iter().all(|r| r.agrees_on_window);
        let in_o10 = report.rows.iter().all(|r| r.n1.is_some_and(|n1| n1 > 10));
        pass &= report.total == expected && report.complete() && agree && in_o10;
        details.push(format!(
            "{}: {}/{} certified (expected {expected} cylinders), windows exact {agree}",
            if expected == 8 { "full 2-shift" } else { "golden mean" },
            report.certified,
            report.total
        ));
    }
    report(6, pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn criterion_7_dichotomy_control() {
    let space = ShiftSpace::full_shift(2);
    let cyl = Cylinder::centered(&space, &word("0")).unwrap();
    let constant = MatrixCocycle::constant(Matrix::from_row_slice(2, 2, &[3.0, 1.0, 0.0, 0.5]), 2).unwrap();
    let const_branch = matches!(
        lift_to_li(&constant, &space, &[word("0"), word("1"), word("01")], &cyl, &LiftOptions::default()),
        Err(IrregularError::AllSpectraEqual)
    );
    let single_branch = matches!(
        lift_to_li(&diagonal_cocycle(), &space, &[word("0")], &cyl, &LiftOptions::default()),
        Err(IrregularError::AllSpectraEqual)
    );
    let exp = load("constant.toml", Overrides::default());
    let err = cmd_irregular(&exp).unwrap_err();
    let cli_branch = matches!(&err, ExperimentError::NoGap(m) if m.contains("same Lyapunov spectrum"))
        && err.exit_code() == 3
        && !exp.out_dir.join("witness.json").exists();

    let a = diagonal_cocycle();
    let y = ShiftPoint::periodic(&word("0"));
    let l2 = 2f64.ln();
    let m = on_membership(&a, &y, 10, l2, 0.0, 0.05, 100_000);
    let pass = const_branch && single_branch && cli_branch && !m.member;
    report(
        7,
        pass,
        &format!(
            "constant cocycle: {const_branch}; single measure: {single_branch}; cli exit 3 without witness: \
             {cli_branch}; high fixed point in O_10 up to 1e5: {}",
            m.member
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_lift_correctness() {
    let exp = load("det_lift.toml", Overrides::default());
    let out = cmd_irregular(&exp).unwrap();
    let flagged = out.summary.contains("via exterior power i=2");
    let witness_path = exp.out_dir.join("witness.json");
    let verified = cmd_verify(&exp, &witness_path).is_ok();
    let file: WitnessFile = serde_json::from_str(&std::fs::read_to_string(&witness_path).unwrap()).unwrap();
    let w = &file.witness;
    let spectra_ok = {
        let s0 = periodic_spectrum(&exp.cocycle, &exp.space, &word("0")).unwrap();
        let s1 = periodic_spectrum(&exp.cocycle, &exp.space, &word("1")).unwrap();
        (s0.max_exponent() - s1.max_exponent()).abs() < 1e-12 && (s0.top_sum(2) - s1.top_sum(2)).abs() > 0.5
    };

    // log|A(y, t) e_2| = -(zeros log 2 + ones log 4) for these generators
    let y = build_point(&w.schedule, &exp.space).unwrap();
    let times = w.schedule.certified_times();
    let l2 = 2f64.ln();
    let mut ones = 0u64;
    let mut zeros = 0u64;
    let mut k = 0i64;
    let mut averages = Vec::new();
    for &t in &times {
        while (k as u64) < t {
            if y.symbol(k) == 0 {
                zeros += 1;
            } else {
                ones += 1;
            }
            k += 1;
        }
        averages.push(-(zeros as f64 * l2 + ones as f64 * 2.0 * l2) / t as f64);
    }
    let hi = averages.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = averages.iter().copied().fold(f64::INFINITY, f64::min);
    let oscillation = hi - lo;
    let pass = file.exterior_index == 2 && flagged && verified && spectra_ok && oscillation >= w.tau;
    report(
        8,
        pass,
        &format!(
            "index {}, flagged {flagged}, verify {verified}, e_2 oscillation {oscillation:.4} vs tau {:.4}",
            file.exterior_index, w.tau
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_lemma_instances() {
    let a = diagonal_cocycle();
    let space = ShiftSpace::full_shift(2);
    let s = oseledec_splitting_periodic(&a, &space, &word("0")).unwrap();
    let g = lyapunov_gram(&a, &s, 0.1, &GramOptions::default()).unwrap();
    let pair = |keep: i64, steps: i64| {
        splice(
            &[
                Segment::new(ShiftPoint::periodic(&word("0")), -5, keep),
                Segment::new(ShiftPoint::periodic(&word("1")), keep + 2, keep + 52 + steps),
            ],
            &space,
        )
        .unwrap()
    };
    let mut cone_ok = true;
    let mut eq9_min = f64::INFINITY;
    for (keep, steps) in [(30, 20), (40, 30), (25, 25), (60, 50)] {
        let y = pair(keep, steps);
        cone_ok &= cone_verify(&a, &space, &s, &g, &y, steps as usize, &ConeOptions::default()).is_ok();
        let r = lemma31_verify(&a, &space, &s, &g, &y, steps as u64, 1.0, 2 * (keep + steps + 60) as u64).unwrap();
        eq9_min = eq9_min.min(if r.eq9_pass { r.eq9_ratio } else { 0.0 });
    }
    let mut shipped = Vec::new();
    for c in ["diagonal.toml", "triangular.toml", "rotation.toml", "det_lift.toml", "golden_mean.toml", "constant.toml"]
    {
        let exp = load(c, Overrides::default());
        if let Err(e) = cmd_bounds(&exp) {
            shipped.push(format!("{c}: {e}"));
        }
    }
    let truncated = matches!(
        cone_verify(&a, &space, &s, &g, &pair(10, 20), 20, &ConeOptions::default()),
        Err(LyapunovError::ConeEscape { .. })
    );
    let s2 = oseledec_splitting_periodic(&a, &space, &word("01")).unwrap();
    let g2 = lyapunov_gram(&a, &s2, 0.1, &GramOptions::default()).unwrap();
    let corrupted = matches!(
        verify_norm_bounds(&a, &s2, &g2.scaled_at(0, 10.0), &BoundsOptions::default()),
        Err(LyapunovError::BoundViolation(_))
    );
    let pass = cone_ok && eq9_min > 1.0 && shipped.is_empty() && truncated && corrupted;
    report(
        9,
        pass,
        &format!(
            "cone on window-agreeing pairs: {cone_ok}; smallest norm-estimate margin {eq9_min:.3e}; shipped suites: {}; \
             truncated window escapes: {truncated}; corrupted Gram caught: {corrupted}",
            if shipped.is_empty() { "all pass".to_string() } else { shipped.join(", ") }
        ),
    );
    assert!(pass);
}
