//! Cross-checks the SMO trainer against a solver-independent brute-force
//! maximization of the SVM dual on small datasets.

mod common;

use careguard::svm::{decision_value, predict_binary, train_binary, KernelSpec, SvmParams};
use common::{
    brute_force_dual_max, dual_objective, enc, oracle_corpus, oracle_kernel_matrix, oracle_sign,
};

/// Trainer settings for the oracle comparisons: tight tolerance so the dual
/// gap stays well under the 1e-4 comparison budget.
fn oracle_params(c: f64) -> SvmParams {
    SvmParams {
        c,
        tolerance: 1e-6,
        max_passes: 200,
        ..SvmParams::default()
    }
}

/// Six points around the unit square with one margin violator per class.
fn six_point_toy() -> (Vec<Vec<f64>>, Vec<f64>, f64, KernelSpec) {
    let xs = vec![
        vec![0.10, 0.20],
        vec![0.25, 0.05],
        vec![0.45, 0.55], // positive point pushed toward the negatives
        vec![0.90, 0.85],
        vec![0.75, 0.95],
        vec![0.60, 0.40], // negative point pushed toward the positives
    ];
    let ys = vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
    (xs, ys, 1.0, KernelSpec::rbf(1.0).unwrap())
}

#[test]
fn six_point_toy_set_matches_the_brute_force_dual() {
    let (xs, ys, c, kernel) = six_point_toy();
    let oracle = brute_force_dual_max(&xs, &ys, c, &kernel);
    let train: Vec<_> = xs.iter().zip(&ys).map(|(x, y)| (enc(x), *y)).collect();
    let report = train_binary(&train, &oracle_params(c), &kernel).unwrap();
    assert!(report.converged);
    assert!(
        (report.dual_objective - oracle.objective).abs() <= 1e-4,
        "smo {} vs oracle {}",
        report.dual_objective,
        oracle.objective
    );
    // Frozen from the oracle; guards against both sides drifting together.
    assert!(
        (oracle.objective - 3.61416).abs() < 5e-3,
        "oracle objective {}",
        oracle.objective
    );
}

#[test]
fn six_point_toy_set_signs_agree_with_the_oracle() {
    let (xs, ys, c, kernel) = six_point_toy();
    let oracle = brute_force_dual_max(&xs, &ys, c, &kernel);
    let k = oracle_kernel_matrix(&xs, &kernel);
    let train: Vec<_> = xs.iter().zip(&ys).map(|(x, y)| (enc(x), *y)).collect();
    let report = train_binary(&train, &oracle_params(c), &kernel).unwrap();
    for (i, x) in xs.iter().enumerate() {
        let smo_sign = if decision_value(&report.model, &enc(x)).unwrap() >= 0.0 {
            1.0
        } else {
            -1.0
        };
        assert_eq!(
            smo_sign,
            oracle_sign(&oracle, &ys, &k, i),
            "sign disagreement on point {i}"
        );
    }
}

#[test]
fn oracle_reproduces_the_analytic_two_point_solution() {
    // Two opposite points at distance 2 under the linear kernel: the dual
    // maximum is alpha = (0.5, 0.5) with objective 0.5, bias -1.
    let xs = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
    let ys = vec![-1.0, 1.0];
    let oracle = brute_force_dual_max(&xs, &ys, 1.0, &KernelSpec::linear());
    assert!((oracle.alpha[0] - 0.5).abs() < 1e-3);
    assert!((oracle.alpha[1] - 0.5).abs() < 1e-3);
    assert!((oracle.objective - 0.5).abs() < 1e-6);
    assert!((oracle.bias - (-1.0)).abs() < 1e-2);
}

#[test]
fn oracle_respects_the_box_on_inseparable_data() {
    // Identical points with opposite labels: both multipliers ride the box.
    let xs = vec![vec![0.3, 0.3], vec![0.3, 0.3]];
    let ys = vec![1.0, -1.0];
    let c = 0.75;
    let oracle = brute_force_dual_max(&xs, &ys, c, &KernelSpec::rbf(1.0).unwrap());
    assert!((oracle.alpha[0] - c).abs() < 1e-6);
    assert!((oracle.alpha[1] - c).abs() < 1e-6);
    // W = alpha1 + alpha2 - 1/2 (alpha1 - alpha2 pattern) ... with K == 1
    // everywhere the quadratic term vanishes: W = 2C - 0 = 2C - (C^2 - 2C^2 + C^2) = 2C.
    assert!((oracle.objective - 2.0 * c).abs() < 1e-6);
}

#[test]
fn corpus_objectives_match_brute_force_within_1e4() {
    let mut checked = 0;
    for case in oracle_corpus() {
        let oracle = brute_force_dual_max(&case.xs, &case.ys, case.c, &case.kernel);
        let train: Vec<_> = case
            .xs
            .iter()
            .zip(&case.ys)
            .map(|(x, y)| (enc(x), *y))
            .collect();
        let report = train_binary(&train, &oracle_params(case.c), &case.kernel).unwrap();
        let gap = (report.dual_objective - oracle.objective).abs();
        assert!(
            gap <= 1e-4,
            "case {}: smo {} vs oracle {} (gap {gap:.2e})",
            case.name,
            report.dual_objective,
            oracle.objective
        );
        // The SMO point must itself be feasible for the dual the oracle saw.
        let k = oracle_kernel_matrix(&case.xs, &case.kernel);
        let mut alpha = vec![0.0; case.xs.len()];
        // Recover full alpha vector from the model's support set.
        for (sv, coeff) in report
            .model
            .support_vectors
            .iter()
            .zip(&report.model.dual_coefficients)
        {
            let idx = case
                .xs
                .iter()
                .position(|x| x.as_slice() == sv.values.as_slice())
                .expect("support vector is a training point");
            // Duplicated training points share coordinates; accumulate.
            alpha[idx] += coeff.abs();
        }
        let smo_obj_recomputed = dual_objective(&alpha, &case.ys, &k);
        // Duplicates make the per-index recovery ambiguous; only check when
        // coordinates are unique.
        let unique = case
            .xs
            .iter()
            .enumerate()
            .all(|(i, x)| !case.xs[..i].iter().any(|p| p == x));
        if unique {
            assert!(
                (smo_obj_recomputed - report.dual_objective).abs() < 1e-8,
                "case {}: recomputed objective diverges",
                case.name
            );
        }
        checked += 1;
    }
    assert!(
        checked >= 40,
        "expected a substantive corpus, ran {checked}"
    );
}

#[test]
fn corpus_models_satisfy_kkt_within_1e3() {
    for case in oracle_corpus() {
        let train: Vec<_> = case
            .xs
            .iter()
            .zip(&case.ys)
            .map(|(x, y)| (enc(x), *y))
            .collect();
        let report = train_binary(&train, &oracle_params(case.c), &case.kernel).unwrap();
        assert!(
            report.max_kkt_violation <= 1e-3,
            "case {}: max KKT violation {}",
            case.name,
            report.max_kkt_violation
        );
        assert!(
            report.coefficient_sum.abs() <= 1e-6 * case.c,
            "case {}",
            case.name
        );
        for coeff in &report.model.dual_coefficients {
            assert!(coeff.abs() <= case.c + 1e-9, "case {}", case.name);
        }
    }
}

#[test]
fn twenty_point_separable_set_reaches_full_training_accuracy() {
    // Two parallel bands separated by a corridor of width 2 in the first
    // coordinate; with a large box constraint nothing is sacrificed.
    let mut train = Vec::new();
    for i in 0..10 {
        let shift = 0.13 * i as f64;
        train.push((enc(&[2.0 + shift, shift.sin()]), 1.0));
        train.push((enc(&[-2.0 - shift, shift.cos()]), -1.0));
    }
    let params = SvmParams {
        c: 1000.0,
        tolerance: 1e-4,
        max_passes: 100,
        ..SvmParams::default()
    };
    let report = train_binary(&train, &params, &KernelSpec::linear()).unwrap();
    for (x, y) in &train {
        let want = if *y > 0.0 { "+1" } else { "-1" };
        assert_eq!(predict_binary(&report.model, x).unwrap(), want);
    }
}
