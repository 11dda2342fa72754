//! Canonical dual potentials for an optimal plan.
//!
//! Optimal duals of a discrete transport problem form a polytope, not a
//! point. Fixing the support of an optimal plan, the admissible target-side
//! potentials are exactly the solutions of the difference constraints
//!
//! ```text
//! psi*_j' - psi*_j >= s_kj' - s_kj     for every supported (k, j) and every j'
//! ```
//!
//! with `psi*_0` pinned to zero. Shortest-path distances give the
//! coordinatewise largest and smallest solutions; their midpoint is again
//! admissible and is what we return, followed by the conjugate
//! `psi_k = max_j (s_kj - psi*_j)` and the gauge `min_k psi_k = 0`.

use crate::error::{Error, Result};

/// Rows supporting each column of the plan.
fn column_support(plan: &[f64], n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut supp = vec![Vec::new(); m];
    for k in 0..n {
        for (j, &p) in plan[k * m..(k + 1) * m].iter().enumerate() {
            if p > 0.0 {
                supp[j].push(k);
            }
        }
    }
    supp
}

/// Weight of the constraint edge `u -> v`: `psi*_v - psi*_u <= w(u, v)`.
fn edge_weight(score: &[f64], m: usize, supp: &[usize], u: usize, v: usize) -> f64 {
    // w(u, v) = -max_{k in supp(v)} (s_ku - s_kv)
    let worst = supp
        .iter()
        .map(|&k| score[k * m + u] - score[k * m + v])
        .fold(f64::NEG_INFINITY, f64::max);
    -worst
}

/// Dense Dijkstra with a feasible potential to remove negative weights.
/// `reverse` walks edges backwards, yielding distances *to* `source`.
fn distances(
    score: &[f64],
    m: usize,
    supp: &[Vec<usize>],
    feasible: &[f64],
    source: usize,
    reverse: bool,
) -> Vec<f64> {
    // reduced weight: w(u, v) + p_u - p_v >= 0 (forward); on the reversed
    // graph the potential is -p.
    let pot = |node: usize| {
        if reverse {
            -feasible[node]
        } else {
            feasible[node]
        }
    };
    let mut dist = vec![f64::INFINITY; m];
    let mut done = vec![false; m];
    dist[source] = 0.0;
    for _ in 0..m {
        let mut u = usize::MAX;
        let mut best = f64::INFINITY;
        for (v, &d) in dist.iter().enumerate() {
            if !done[v] && d < best {
                best = d;
                u = v;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for v in 0..m {
            if done[v] {
                continue;
            }
            let w = if reverse {
                edge_weight(score, m, &supp[u], v, u)
            } else {
                edge_weight(score, m, &supp[v], u, v)
            };
            let reduced = (w + pot(u) - pot(v)).max(0.0);
            if dist[u] + reduced < dist[v] {
                dist[v] = dist[u] + reduced;
            }
        }
    }
    // undo the potential shift: d(s, v) = d'(s, v) - p_s + p_v
    (0..m).map(|v| dist[v] - pot(source) + pot(v)).collect()
}

/// Returns `(psi, psi_star)` for the maximization of `sum pi_kj s_kj`.
///
/// `feasible_star` must be target potentials of some optimal dual for the
/// same plan (e.g. the solver's own duals); it only seeds Dijkstra.
pub(crate) fn central_potentials(
    score: &[f64],
    n: usize,
    m: usize,
    plan: &[f64],
    feasible_star: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let supp = column_support(plan, n, m);
    if supp.iter().any(Vec::is_empty) {
        return Err(Error::SolverFailure(
            "plan leaves a target atom without mass".into(),
        ));
    }
    let upper = distances(score, m, &supp, feasible_star, 0, false);
    let lower = distances(score, m, &supp, feasible_star, 0, true);
    let scale = score.iter().fold(1.0f64, |acc, s| acc.max(s.abs()));
    if upper.iter().zip(&lower).any(|(u, l)| -l > u + 1e-9 * scale) {
        return Err(Error::SolverFailure(
            "dual constraints are inconsistent with the plan".into(),
        ));
    }
    let mut psi_star: Vec<f64> = upper
        .iter()
        .zip(&lower)
        .map(|(u, l)| 0.5 * (u - l))
        .collect();

    let mut psi: Vec<f64> = (0..n)
        .map(|k| {
            let row = &score[k * m..(k + 1) * m];
            row.iter()
                .zip(&psi_star)
                .map(|(s, p)| s - p)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let shift = psi.iter().copied().fold(f64::INFINITY, f64::min);
    for p in &mut psi {
        *p -= shift;
    }
    for p in &mut psi_star {
        *p += shift;
    }
    Ok((psi, psi_star))
}
