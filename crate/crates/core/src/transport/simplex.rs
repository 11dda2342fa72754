//! Transportation simplex (MODI method) on a dense cost matrix.
//!
//! The basis is kept as a spanning tree of `n + m - 1` cells over the
//! bipartite row/column graph, degenerate zero-flow cells included. Each
//! iteration recomputes the node potentials along the tree, prices all
//! non-basic cells and pivots the most negative one around its unique cycle.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub(crate) struct Solution {
    /// Row-major `n x m` flows.
    pub flows: Vec<f64>,
    /// Row potentials `a` with `a[i] + b[j] <= cost[i][j]` up to the pricing tolerance.
    #[cfg_attr(not(test), allow(dead_code))]
    pub row_duals: Vec<f64>,
    pub col_duals: Vec<f64>,
}

const NO_CELL: usize = usize::MAX;

struct Basis {
    n: usize,
    m: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    /// Basis slot of each matrix cell, or `NO_CELL`.
    slot: Vec<usize>,
}

impl Basis {
    fn northwest_corner(supply: &[f64], demand: &[f64]) -> Self {
        let (n, m) = (supply.len(), demand.len());
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let mut cells = Vec::with_capacity(n + m - 1);
        let mut flow = Vec::with_capacity(n + m - 1);
        let mut slot = vec![NO_CELL; n * m];
        let (mut i, mut j) = (0, 0);
        loop {
            let q = if i == n - 1 && j == m - 1 {
                s[i].max(d[j])
            } else {
                s[i].min(d[j])
            };
            slot[i * m + j] = cells.len();
            cells.push((i, j));
            flow.push(q);
            s[i] -= q;
            d[j] -= q;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if i + 1 < n && (s[i] <= 0.0 || j + 1 == m) {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            n,
            m,
            cells,
            flow,
            slot,
        }
    }

    /// Adjacency of the basis tree; nodes `0..n` are rows, `n..n+m` columns.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n + self.m];
        for (idx, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.n + j, idx));
            adj[self.n + j].push((i, idx));
        }
        adj
    }

    fn potentials(
        &self,
        adj: &[Vec<(usize, usize)>],
        cost: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let (n, m) = (self.n, self.m);
        let mut pot = vec![f64::NAN; n + m];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        let mut seen = 1;
        while let Some(node) = queue.pop_front() {
            for &(next, idx) in &adj[node] {
                if pot[next].is_nan() {
                    let (i, j) = self.cells[idx];
                    // a_i + b_j = c_ij on basic cells
                    pot[next] = cost[i * m + j] - pot[node];
                    seen += 1;
                    queue.push_back(next);
                }
            }
        }
        if seen != n + m {
            return Err(Error::SolverFailure("basis is not a spanning tree".into()));
        }
        let cols = pot.split_off(n);
        Ok((pot, cols))
    }

    /// Tree path from column node `col` to row node `row`, as basis slots in order.
    fn path(&self, adj: &[Vec<(usize, usize)>], col: usize, row: usize) -> Result<Vec<usize>> {
        let start = self.n + col;
        let mut parent = vec![(NO_CELL, NO_CELL); self.n + self.m];
        parent[start] = (start, NO_CELL);
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == row {
                break;
            }
            for &(next, idx) in &adj[node] {
                if parent[next].0 == NO_CELL {
                    parent[next] = (node, idx);
                    queue.push_back(next);
                }
            }
        }
        if parent[row].0 == NO_CELL {
            return Err(Error::SolverFailure(
                "no tree path for entering cell".into(),
            ));
        }
        let mut edges = Vec::new();
        let mut node = row;
        while node != start {
            let (prev, idx) = parent[node];
            edges.push(idx);
            node = prev;
        }
        edges.reverse();
        Ok(edges)
    }
}

/// Minimizes `sum cost[i][j] * x[i][j]` subject to row sums `supply` and
/// column sums `demand` (which must have equal totals).
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Solution> {
    let (n, m) = (supply.len(), demand.len());
    debug_assert_eq!(cost.len(), n * m);
    let mut basis = Basis::northwest_corner(supply, demand);
    let scale = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let tol = 1e-12 * (1.0 + scale);
    let max_iter = 50 * (n + m) * (n + m) + 1000;

    for _ in 0..max_iter {
        let adj = basis.adjacency();
        let (a, b) = basis.potentials(&adj, cost)?;

        let mut best = (-tol, NO_CELL, NO_CELL);
        for i in 0..n {
            let row = &cost[i * m..(i + 1) * m];
            for j in 0..m {
                if basis.slot[i * m + j] != NO_CELL {
                    continue;
                }
                let reduced = row[j] - a[i] - b[j];
                if reduced < best.0 {
                    best = (reduced, i, j);
                }
            }
        }
        let (_, ei, ej) = best;
        if ei == NO_CELL {
            let mut flows = vec![0.0; n * m];
            for (&(i, j), &f) in basis.cells.iter().zip(&basis.flow) {
                flows[i * m + j] = f.max(0.0);
            }
            return Ok(Solution {
                flows,
                row_duals: a,
                col_duals: b,
            });
        }

        // Cycle: entering cell (+), then the tree path from column ej back to
        // row ei with alternating signs starting with (-).
        let path = basis.path(&adj, ej, ei)?;
        let mut theta = f64::INFINITY;
        let mut leaving = NO_CELL;
        for &idx in path.iter().step_by(2) {
            if basis.flow[idx] < theta {
                theta = basis.flow[idx];
                leaving = idx;
            }
        }
        let theta = theta.max(0.0);
        for (pos, &idx) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis.flow[idx] = (basis.flow[idx] - theta).max(0.0);
            } else {
                basis.flow[idx] += theta;
            }
        }
        let (li, lj) = basis.cells[leaving];
        basis.slot[li * m + lj] = NO_CELL;
        basis.cells[leaving] = (ei, ej);
        basis.flow[leaving] = theta;
        basis.slot[ei * m + ej] = leaving;
    }
    Err(Error::SolverFailure(format!(
        "no optimal basis after {max_iter} pivots"
    )))
}
