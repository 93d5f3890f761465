//! Sequential minimal optimization for the soft-margin SVM dual.
//!
//! The solver repeatedly picks a KKT-violating multiplier and optimizes it
//! jointly with a partner chosen to make the largest step (Platt's
//! second-choice heuristic, with randomized fallbacks). Sweeps over the full
//! set alternate with sweeps over the non-bound multipliers; the solver stops
//! when a full sweep changes nothing, or gives up after `max_passes` full
//! sweeps. Kernel rows are cached under a byte budget.

use std::collections::HashMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::KernelSpec;
use super::SvmParams;

/// Minimum relative change of a multiplier for a step to count as progress.
const STEP_EPS: f64 = 1e-10;

/// Multipliers this close to a bound are snapped onto it.
const BOUND_SNAP: f64 = 1e-12;

pub(crate) struct SmoOutcome {
    pub alpha: Vec<f64>,
    pub converged: bool,
    pub full_passes: u32,
    pub updates: u64,
}

struct RowCache<'a> {
    xs: &'a [&'a [f64]],
    kernel: &'a KernelSpec,
    rows: HashMap<usize, (u64, Rc<[f64]>)>,
    clock: u64,
    max_rows: usize,
}

impl<'a> RowCache<'a> {
    fn new(xs: &'a [&'a [f64]], kernel: &'a KernelSpec, budget_bytes: usize) -> Self {
        let row_bytes = std::mem::size_of::<f64>() * xs.len().max(1);
        RowCache {
            xs,
            kernel,
            rows: HashMap::new(),
            clock: 0,
            max_rows: (budget_bytes / row_bytes).max(2),
        }
    }

    fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.clock += 1;
        if let Some((stamp, row)) = self.rows.get_mut(&i) {
            *stamp = self.clock;
            return row.clone();
        }
        let xi = self.xs[i];
        let row: Rc<[f64]> = self
            .xs
            .iter()
            .map(|xk| self.kernel.eval_unchecked(xi, xk))
            .collect();
        if self.rows.len() >= self.max_rows {
            if let Some(oldest) = self
                .rows
                .iter()
                .min_by_key(|(_, (s, _))| *s)
                .map(|(k, _)| *k)
            {
                self.rows.remove(&oldest);
            }
        }
        self.rows.insert(i, (self.clock, row.clone()));
        row
    }
}

struct Solver<'a> {
    ys: &'a [f64],
    c: f64,
    tol: f64,
    alpha: Vec<f64>,
    bias: f64,
    /// errors[i] = f(x_i) - y_i, maintained incrementally.
    errors: Vec<f64>,
    cache: RowCache<'a>,
    rng: ChaCha8Rng,
    updates: u64,
    update_cap: u64,
}

/// Runs SMO over the given samples. `rng_stream` decouples the randomized
/// partner fallback of concurrently trained models sharing one seed.
pub(crate) fn solve(
    xs: &[&[f64]],
    ys: &[f64],
    kernel: &KernelSpec,
    params: &SvmParams,
    rng_stream: u64,
) -> SmoOutcome {
    let n = xs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(rng_stream);
    let mut solver = Solver {
        ys,
        c: params.c,
        tol: params.tolerance,
        alpha: vec![0.0; n],
        bias: 0.0,
        errors: ys.iter().map(|y| -y).collect(),
        cache: RowCache::new(xs, kernel, params.cache_bytes),
        rng,
        updates: 0,
        // Generous safety net against cycling; normal runs stop well short.
        update_cap: 200_000 + 50 * n as u64,
    };

    let mut examine_all = true;
    let mut full_passes = 0u32;
    let mut converged = false;
    'outer: loop {
        let mut num_changed = 0usize;
        if examine_all {
            if full_passes >= params.max_passes {
                break;
            }
            full_passes += 1;
            for i in 0..n {
                num_changed += solver.examine(i) as usize;
                if solver.updates >= solver.update_cap {
                    break 'outer;
                }
            }
            if num_changed == 0 {
                converged = true;
                break;
            }
            examine_all = false;
        } else {
            for i in solver.non_bound() {
                num_changed += solver.examine(i) as usize;
                if solver.updates >= solver.update_cap {
                    break 'outer;
                }
            }
            if num_changed == 0 {
                examine_all = true;
            }
        }
    }

    SmoOutcome {
        alpha: solver.alpha,
        converged,
        full_passes,
        updates: solver.updates,
    }
}

impl Solver<'_> {
    fn non_bound(&self) -> Vec<usize> {
        (0..self.alpha.len())
            .filter(|&i| 0.0 < self.alpha[i] && self.alpha[i] < self.c)
            .collect()
    }

    fn examine(&mut self, i2: usize) -> bool {
        let y2 = self.ys[i2];
        let alph2 = self.alpha[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;
        let violates = (r2 < -self.tol && alph2 < self.c) || (r2 > self.tol && alph2 > 0.0);
        if !violates {
            return false;
        }

        let non_bound = self.non_bound();
        if non_bound.len() > 1 {
            let mut best = None;
            let mut best_gap = -1.0;
            for &k in &non_bound {
                if k == i2 {
                    continue;
                }
                let gap = (e2 - self.errors[k]).abs();
                if gap > best_gap {
                    best_gap = gap;
                    best = Some(k);
                }
            }
            if let Some(i1) = best {
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        if !non_bound.is_empty() {
            let start = self.rng.random_range(0..non_bound.len());
            for off in 0..non_bound.len() {
                let i1 = non_bound[(start + off) % non_bound.len()];
                if i1 != i2 && self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        let n = self.alpha.len();
        let start = self.rng.random_range(0..n);
        for off in 0..n {
            let i1 = (start + off) % n;
            if i1 != i2 && self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        debug_assert_ne!(i1, i2);
        let (y1, y2) = (self.ys[i1], self.ys[i2]);
        let (alph1, alph2) = (self.alpha[i1], self.alpha[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let c = self.c;

        let (low, high) = if (y1 - y2).abs() > 0.5 {
            ((alph2 - alph1).max(0.0), (c + alph2 - alph1).min(c))
        } else {
            ((alph1 + alph2 - c).max(0.0), (alph1 + alph2).min(c))
        };
        if high - low < BOUND_SNAP {
            return false;
        }

        let row1 = self.cache.row(i1);
        let row2 = self.cache.row(i2);
        let (k11, k12, k22) = (row1[i1], row1[i2], row2[i2]);
        let eta = k11 + k22 - 2.0 * k12;

        let mut a2 = if eta > 0.0 {
            (alph2 + y2 * (e1 - e2) / eta).clamp(low, high)
        } else {
            // Flat direction: the restricted objective is linear, so the
            // optimum sits at an end of the feasible segment.
            let f1 = y1 * (e1 + self.bias) - alph1 * k11 - s * alph2 * k12;
            let f2 = y2 * (e2 + self.bias) - s * alph1 * k12 - alph2 * k22;
            let l1 = alph1 + s * (alph2 - low);
            let h1 = alph1 + s * (alph2 - high);
            let psi_low = l1 * f1
                + low * f2
                + 0.5 * l1 * l1 * k11
                + 0.5 * low * low * k22
                + s * low * l1 * k12;
            let psi_high = h1 * f1
                + high * f2
                + 0.5 * h1 * h1 * k11
                + 0.5 * high * high * k22
                + s * high * h1 * k12;
            if psi_low < psi_high - STEP_EPS {
                low
            } else if psi_low > psi_high + STEP_EPS {
                high
            } else {
                return false;
            }
        };
        if (a2 - alph2).abs() < STEP_EPS * (a2 + alph2 + STEP_EPS) {
            return false;
        }
        if a2 < BOUND_SNAP {
            a2 = 0.0;
        } else if a2 > c - BOUND_SNAP {
            a2 = c;
        }

        let mut a1 = alph1 + s * (alph2 - a2);
        if a1 < BOUND_SNAP {
            a1 = 0.0;
        } else if a1 > c - BOUND_SNAP {
            a1 = c;
        }

        let d1 = y1 * (a1 - alph1);
        let d2 = y2 * (a2 - alph2);
        let b1 = self.bias - e1 - d1 * k11 - d2 * k12;
        let b2 = self.bias - e2 - d1 * k12 - d2 * k22;
        let new_bias = if 0.0 < a1 && a1 < c {
            b1
        } else if 0.0 < a2 && a2 < c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        let db = new_bias - self.bias;

        for k in 0..self.errors.len() {
            self.errors[k] += d1 * row1[k] + d2 * row2[k] + db;
        }
        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        self.bias = new_bias;
        self.updates += 1;
        true
    }
}
