//! Shared test support: an SMO-independent brute-force maximizer for the SVM
//! dual, plus small deterministic dataset builders.
//!
//! The oracle never touches the solver under test: it evaluates the dual
//! objective directly on a refining grid over the feasible box, with the last
//! multiplier eliminated through the equality constraint.

#![allow(dead_code)]

use careguard::nslkdd::EncodedVector;
use careguard::svm::KernelSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn enc(values: &[f64]) -> EncodedVector {
    EncodedVector {
        values: values.to_vec(),
        class_index: None,
    }
}

/// Result of the grid maximization.
pub struct OracleSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub bias: f64,
}

/// Dual objective W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
pub fn dual_objective(alpha: &[f64], ys: &[f64], k: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let mut w: f64 = alpha.iter().sum();
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            w -= 0.5 * alpha[i] * alpha[j] * ys[i] * ys[j] * k[i][j];
        }
    }
    w
}

fn kernel_matrix(xs: &[Vec<f64>], kernel: &KernelSpec) -> Vec<Vec<f64>> {
    xs.iter()
        .map(|a| xs.iter().map(|b| kernel.eval(a, b).unwrap()).collect())
        .collect()
}

/// Maximizes the dual by refining grid search; exact enough that the returned
/// objective is within ~1e-6 of the true maximum for n <= 6 and C <= 10.
pub fn brute_force_dual_max(
    xs: &[Vec<f64>],
    ys: &[f64],
    c: f64,
    kernel: &KernelSpec,
) -> OracleSolution {
    let n = xs.len();
    assert!(n >= 2, "oracle needs at least two points");
    assert!(n <= 6, "grid oracle is exponential in n");
    let k = kernel_matrix(xs, kernel);
    let free = n - 1;
    let levels = 13usize;

    let mut centers = vec![c / 2.0; free];
    let mut half_width = c / 2.0;
    let mut best_alpha = vec![0.0; n];
    let mut best_obj = f64::NEG_INFINITY;

    for _round in 0..9 {
        let lo: Vec<f64> = centers.iter().map(|m| (m - half_width).max(0.0)).collect();
        let hi: Vec<f64> = centers.iter().map(|m| (m + half_width).min(c)).collect();
        let step: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l) / (levels - 1) as f64)
            .collect();

        let mut idx = vec![0usize; free];
        let mut alpha = vec![0.0; n];
        loop {
            for d in 0..free {
                alpha[d] = lo[d] + step[d] * idx[d] as f64;
            }
            let partial: f64 = (0..free).map(|d| alpha[d] * ys[d]).sum();
            let last = -partial * ys[n - 1];
            if (-1e-12..=c + 1e-12).contains(&last) {
                alpha[n - 1] = last.clamp(0.0, c);
                let obj = dual_objective(&alpha, ys, &k);
                if obj > best_obj {
                    best_obj = obj;
                    best_alpha.copy_from_slice(&alpha);
                }
            }
            // Odometer over the free dimensions.
            let mut d = 0;
            loop {
                if d == free {
                    break;
                }
                idx[d] += 1;
                if idx[d] < levels {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == free {
                break;
            }
        }

        centers.copy_from_slice(&best_alpha[..free]);
        let grid_h = 2.0 * half_width / (levels - 1) as f64;
        half_width = (2.5 * grid_h).max(1e-9 * c);
    }

    let bias = oracle_bias(&best_alpha, ys, &k, c);
    OracleSolution {
        alpha: best_alpha,
        objective: best_obj,
        bias,
    }
}

/// Bias consistent with the KKT conditions of a dual solution: the exact
/// margin value of interior points when any exist, else the midpoint of the
/// interval the bound points admit.
fn oracle_bias(alpha: &[f64], ys: &[f64], k: &[Vec<f64>], c: f64) -> f64 {
    let n = alpha.len();
    let g = |i: usize| -> f64 { (0..n).map(|j| alpha[j] * ys[j] * k[j][i]).sum() };
    // Coarser than the final grid pitch, so bound multipliers that the grid
    // left epsilon-off a bound still count as bound.
    let eps = 1e-3 * c;
    let interior: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > eps && alpha[i] < c - eps)
        .collect();
    if !interior.is_empty() {
        return interior.iter().map(|&i| ys[i] - g(i)).sum::<f64>() / interior.len() as f64;
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..n {
        let r = ys[i] - g(i);
        let at_zero = alpha[i] <= eps;
        let positive = ys[i] > 0.0;
        // alpha = 0 requires y f >= 1; alpha = C requires y f <= 1.
        match (at_zero, positive) {
            (true, true) | (false, false) => lower = lower.max(r),
            (true, false) | (false, true) => upper = upper.min(r),
        }
    }
    if lower.is_finite() && upper.is_finite() {
        0.5 * (lower + upper)
    } else if lower.is_finite() {
        lower
    } else if upper.is_finite() {
        upper
    } else {
        0.0
    }
}

/// Sign the oracle solution assigns to a training point.
pub fn oracle_sign(solution: &OracleSolution, ys: &[f64], k: &[Vec<f64>], i: usize) -> f64 {
    let f: f64 = (0..ys.len())
        .map(|j| solution.alpha[j] * ys[j] * k[j][i])
        .sum::<f64>()
        + solution.bias;
    if f >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn oracle_kernel_matrix(xs: &[Vec<f64>], kernel: &KernelSpec) -> Vec<Vec<f64>> {
    kernel_matrix(xs, kernel)
}

/// One dataset of the fixed oracle corpus.
pub struct CorpusCase {
    pub name: String,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub c: f64,
    pub kernel: KernelSpec,
}

/// Deterministic corpus of two-class datasets with 2..=6 points, mixing
/// kernels, box constraints, duplicates and overlapping classes.
pub fn oracle_corpus() -> Vec<CorpusCase> {
    let mut cases = Vec::new();

    let mut push = |name: &str, xs: Vec<Vec<f64>>, ys: Vec<f64>, c: f64, kernel: KernelSpec| {
        cases.push(CorpusCase {
            name: name.to_string(),
            xs,
            ys,
            c,
            kernel,
        });
    };

    push(
        "two-point-linear",
        vec![vec![0.0, 0.0], vec![2.0, 0.0]],
        vec![-1.0, 1.0],
        1.0,
        KernelSpec::linear(),
    );
    push(
        "two-point-rbf",
        vec![vec![0.1, 0.4], vec![0.9, 0.6]],
        vec![1.0, -1.0],
        2.0,
        KernelSpec::rbf(1.0).unwrap(),
    );
    push(
        "duplicate-same-label",
        vec![vec![0.2, 0.2], vec![0.2, 0.2], vec![0.8, 0.8]],
        vec![1.0, 1.0, -1.0],
        1.0,
        KernelSpec::rbf(2.0).unwrap(),
    );
    push(
        "duplicate-opposite-label",
        vec![
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![0.1, 0.9],
            vec![0.9, 0.1],
        ],
        vec![1.0, -1.0, 1.0, -1.0],
        1.5,
        KernelSpec::rbf(1.0).unwrap(),
    );
    push(
        "collinear-linear",
        vec![
            vec![0.0, 0.0],
            vec![0.25, 0.0],
            vec![0.5, 0.0],
            vec![1.0, 0.0],
        ],
        vec![-1.0, -1.0, 1.0, 1.0],
        5.0,
        KernelSpec::linear(),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let kernels = [
        KernelSpec::linear(),
        KernelSpec::rbf(0.5).unwrap(),
        KernelSpec::rbf(2.0).unwrap(),
    ];
    let boxes = [0.5, 1.0, 10.0];
    for size in 3..=6usize {
        for (ki, kernel) in kernels.iter().enumerate() {
            for (ci, c) in boxes.iter().enumerate() {
                let dim = 2 + (size + ki) % 2;
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for p in 0..size {
                    xs.push((0..dim).map(|_| rng.random_range(0.0..1.0)).collect());
                    // Guarantee both classes, then randomize the rest.
                    ys.push(match p {
                        0 => 1.0,
                        1 => -1.0,
                        _ => {
                            if rng.random::<bool>() {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                    });
                }
                push(&format!("random-n{size}-k{ki}-c{ci}"), xs, ys, *c, *kernel);
            }
        }
    }
    cases
}
