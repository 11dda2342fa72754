//! Dense Hungarian method (shortest augmenting path form) for square
//! minimum-cost assignment problems.

pub(crate) struct Assignment {
    /// `row_to_col[i]` is the column assigned to row `i`.
    pub row_to_col: Vec<usize>,
    /// Row duals `u` with `u[i] + v[j] <= cost[i][j]`.
    #[cfg_attr(not(test), allow(dead_code))]
    pub row_duals: Vec<f64>,
    /// Column duals `v`.
    pub col_duals: Vec<f64>,
}

/// Solves `min sum_i cost[i * n + sigma(i)]` over permutations `sigma`.
pub(crate) fn solve(cost: &[f64], n: usize) -> Assignment {
    debug_assert_eq!(cost.len(), n * n);
    // 1-based arrays; index 0 is the virtual column used to start each phase.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            let row = &cost[(i0 - 1) * n..i0 * n];
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    Assignment {
        row_to_col,
        row_duals: u[1..].to_vec(),
        col_duals: v[1..].to_vec(),
    }
}
