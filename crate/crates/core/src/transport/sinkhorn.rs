//! Log-domain Sinkhorn iterations with epsilon scaling.

use crate::error::{Error, Result};

pub(crate) struct EntropicSolution {
    pub plan: Vec<f64>,
    /// Scaled log-potentials `f`, `g` with `pi_kj = exp((f_k + g_j + s_kj) / eps)`.
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub iterations: usize,
}

/// Marginal violation accepted at exit.
pub(crate) const MARGINAL_TOL: f64 = 1e-6;

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Maximizes `<pi, s> + eps * H(pi)` over couplings of `a` and `b`.
pub(crate) fn solve(
    a: &[f64],
    b: &[f64],
    score: &[f64],
    epsilon: f64,
    max_iter: usize,
) -> Result<EntropicSolution> {
    let (n, m) = (a.len(), b.len());
    let log_a: Vec<f64> = a.iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|w| w.ln()).collect();
    let spread = {
        let lo = score.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo).max(epsilon)
    };

    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut eps = spread;
    let mut iterations = 0;
    let mut violation = f64::INFINITY;

    while iterations < max_iter {
        eps = (eps * 0.5).max(epsilon);
        let last_stage = eps == epsilon;
        // a few sweeps per stage, until convergence on the final one
        let sweeps = if last_stage {
            max_iter - iterations
        } else {
            10.min(max_iter - iterations)
        };
        for _ in 0..sweeps {
            for k in 0..n {
                let row = &score[k * m..(k + 1) * m];
                f[k] = eps * log_a[k] - eps * log_sum_exp((0..m).map(|j| (g[j] + row[j]) / eps));
            }
            for j in 0..m {
                g[j] = eps * log_b[j]
                    - eps * log_sum_exp((0..n).map(|k| (f[k] + score[k * m + j]) / eps));
            }
            iterations += 1;
            if last_stage {
                // columns are exact after the g-update; check the rows
                violation = (0..n)
                    .map(|k| {
                        let row = &score[k * m..(k + 1) * m];
                        let mass: f64 = (0..m).map(|j| ((f[k] + g[j] + row[j]) / eps).exp()).sum();
                        (mass - a[k]).abs()
                    })
                    .fold(0.0, f64::max);
                if violation <= 1e-12 {
                    break;
                }
            }
        }
        if last_stage {
            break;
        }
    }

    if !(violation <= MARGINAL_TOL) {
        return Err(Error::NonConvergence {
            iterations,
            violation,
        });
    }
    let mut plan = vec![0.0; n * m];
    for k in 0..n {
        for j in 0..m {
            plan[k * m + j] = ((f[k] + g[j] + score[k * m + j]) / epsilon).exp();
        }
    }
    Ok(EntropicSolution {
        plan,
        f,
        g,
        iterations,
    })
}
