//! Maximal correlation functionals and optimal couplings.
//!
//! `max_correlation(mu, x)` returns a coupling `pi` of the reference measure
//! `mu` and the prospect `x` maximizing `sum_kj pi_kj (u_k . x_j)`, together
//! with dual potentials certifying optimality. Equal-weight problems with
//! equal atom counts go through the Hungarian method; everything else through
//! the transportation simplex. Both maximize by minimizing the cost `-u . x`.

mod assignment;
mod duals;
mod simplex;
mod sinkhorn;

use crate::error::{Error, Result};
use crate::measure::{dot, DiscreteMeasure};

/// Tolerance used by the exact-solver invariants.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance used for entropic plans.
pub const ENTROPIC_TOL: f64 = 1e-6;

/// Plan entries below this fraction of the smaller marginal are treated as
/// round-off and removed.
const SUPPORT_RTOL: f64 = 1e-12;

/// Dual potentials: `psi` on reference atoms, `psi_star` on prospect atoms.
///
/// For exact plans: `psi_k + psi_star_j >= u_k . x_j` everywhere, with
/// equality on the support, and `min_k psi_k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials {
    pub psi: Vec<f64>,
    pub psi_star: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    Assignment,
    NetworkSimplex,
    Entropic { epsilon: f64, iterations: usize },
}

/// Sense of the optimization that produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Residuals of the plan invariants; all zero for a perfect certificate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanResiduals {
    pub row_marginal: f64,
    pub column_marginal: f64,
    pub value: f64,
    pub dual_feasibility: f64,
    pub slackness: f64,
    pub duality_gap: f64,
    pub cyclical_monotonicity: f64,
}

impl PlanResiduals {
    pub fn max(&self) -> f64 {
        [
            self.row_marginal,
            self.column_marginal,
            self.value,
            self.dual_feasibility,
            self.slackness,
            self.duality_gap,
            self.cyclical_monotonicity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// A coupling between a reference measure and a prospect.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    plan: Vec<f64>,
    value: f64,
    potentials: DualPotentials,
    solver: SolverKind,
    sense: Sense,
}

impl TransportPlan {
    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    /// Attained correlation `sum pi_kj (u_k . x_j)`.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Dual potentials. For minimizing plans these belong to the problem
    /// against the negated reference measure.
    pub fn potentials(&self) -> &DualPotentials {
        &self.potentials
    }

    pub fn solver(&self) -> SolverKind {
        self.solver
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Row-major `n x m` masses.
    pub fn masses(&self) -> &[f64] {
        &self.plan
    }

    pub fn mass(&self, k: usize, j: usize) -> f64 {
        self.plan[k * self.target.len() + j]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.target.len();
        &self.plan[k * m..(k + 1) * m]
    }

    /// Supported cells `(k, j)` in row-major order.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.target.len();
        self.plan
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(idx, _)| (idx / m, idx % m))
    }

    /// Columns receiving mass from reference atom `k`.
    pub fn row_support(&self, k: usize) -> Vec<usize> {
        self.row(k)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Scores `s_kj` seen by the dual problem (negated for minimizing plans).
    fn dual_score(&self, k: usize, j: usize) -> f64 {
        let s = dot(self.source.atom(k), self.target.atom(j));
        match self.sense {
            Sense::Maximize => s,
            Sense::Minimize => -s,
        }
    }

    /// Measures how far the plan is from satisfying every invariant.
    pub fn residuals(&self) -> PlanResiduals {
        let (n, m) = (self.source.len(), self.target.len());
        let mut r = PlanResiduals::default();
        for k in 0..n {
            let rs: f64 = self.row(k).iter().sum();
            r.row_marginal = r.row_marginal.max((rs - self.source.weight(k)).abs());
        }
        for j in 0..m {
            let cs: f64 = (0..n).map(|k| self.mass(k, j)).sum();
            r.column_marginal = r.column_marginal.max((cs - self.target.weight(j)).abs());
        }
        let recomputed = correlation_of(&self.source, &self.target, &self.plan);
        r.value = (recomputed - self.value).abs();

        let DualPotentials { psi, psi_star } = &self.potentials;
        for k in 0..n {
            for j in 0..m {
                let s = self.dual_score(k, j);
                let excess = psi[k] + psi_star[j] - s;
                r.dual_feasibility = r.dual_feasibility.max(-excess);
                if self.mass(k, j) > 0.0 {
                    r.slackness = r.slackness.max(excess.abs());
                }
            }
        }
        let dual: f64 = self
            .source
            .weights()
            .iter()
            .zip(psi)
            .map(|(w, p)| w * p)
            .sum::<f64>()
            + self
                .target
                .weights()
                .iter()
                .zip(psi_star)
                .map(|(w, p)| w * p)
                .sum::<f64>();
        let primal = match self.sense {
            Sense::Maximize => self.value,
            Sense::Minimize => -self.value,
        };
        r.duality_gap = (primal - dual).abs();

        let support: Vec<(usize, usize)> = self.support().collect();
        for &(k, j) in &support {
            for &(k2, j2) in &support {
                let lhs = self.dual_score(k, j) + self.dual_score(k2, j2);
                let rhs = self.dual_score(k, j2) + self.dual_score(k2, j);
                r.cyclical_monotonicity = r.cyclical_monotonicity.max(rhs - lhs);
            }
        }
        r
    }
}

/// Row-major matrix of `u_k . x_j`.
fn score_matrix(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> Vec<f64> {
    let mut s = Vec::with_capacity(mu.len() * x.len());
    for u in mu.atoms() {
        s.extend(x.atoms().map(|v| dot(u, v)));
    }
    s
}

/// `sum_kj pi_kj (u_k . x_j)`, summed row-major.
fn correlation_of(mu: &DiscreteMeasure, x: &DiscreteMeasure, plan: &[f64]) -> f64 {
    let m = x.len();
    let mut total = 0.0;
    for (k, u) in mu.atoms().enumerate() {
        for (j, v) in x.atoms().enumerate() {
            let p = plan[k * m + j];
            if p != 0.0 {
                total += p * dot(u, v);
            }
        }
    }
    total
}

fn check_dims(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}

/// Solves `max <pi, score>` exactly and returns the cleaned plan with central duals.
fn solve_exact(
    mu: &DiscreteMeasure,
    x: &DiscreteMeasure,
    score: &[f64],
) -> Result<(Vec<f64>, DualPotentials, SolverKind)> {
    let (n, m) = (mu.len(), x.len());
    let cost: Vec<f64> = score.iter().map(|s| -s).collect();
    let (mut plan, feasible_star, solver) = if n == m && mu.is_equal_weight() && x.is_equal_weight()
    {
        let sol = assignment::solve(&cost, n);
        let mut plan = vec![0.0; n * m];
        for (k, &j) in sol.row_to_col.iter().enumerate() {
            plan[k * m + j] = mu.weight(k);
        }
        let star: Vec<f64> = sol.col_duals.iter().map(|v| -v).collect();
        (plan, star, SolverKind::Assignment)
    } else {
        let sol = simplex::solve(mu.weights(), x.weights(), &cost)?;
        let star: Vec<f64> = sol.col_duals.iter().map(|v| -v).collect();
        (sol.flows, star, SolverKind::NetworkSimplex)
    };
    for k in 0..n {
        for j in 0..m {
            let cell = &mut plan[k * m + j];
            if *cell <= SUPPORT_RTOL * mu.weight(k).min(x.weight(j)) {
                *cell = 0.0;
            }
        }
    }
    let (psi, psi_star) = duals::central_potentials(score, n, m, &plan, &feasible_star)?;
    Ok((plan, DualPotentials { psi, psi_star }, solver))
}

/// Maximal correlation `rho_mu(X)` with its optimal coupling.
pub fn max_correlation(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> Result<TransportPlan> {
    check_dims(mu, x)?;
    let score = score_matrix(mu, x);
    let (plan, potentials, solver) = solve_exact(mu, x, &score)?;
    let value = correlation_of(mu, x, &plan);
    Ok(TransportPlan {
        source: mu.clone(),
        target: x.clone(),
        plan,
        value,
        potentials,
        solver,
        sense: Sense::Maximize,
    })
}

/// Minimal correlation over couplings, i.e. `-rho_{-mu}(X)`.
///
/// The plan rows follow `mu`'s atoms; the potentials certify the equivalent
/// maximization against the negated reference.
pub fn min_correlation(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> Result<TransportPlan> {
    check_dims(mu, x)?;
    let score: Vec<f64> = score_matrix(mu, x).into_iter().map(|s| -s).collect();
    let (plan, potentials, solver) = solve_exact(mu, x, &score)?;
    let value = correlation_of(mu, x, &plan);
    Ok(TransportPlan {
        source: mu.clone(),
        target: x.clone(),
        plan,
        value,
        potentials,
        solver,
        sense: Sense::Minimize,
    })
}

/// Entropically regularized approximation of [`max_correlation`].
///
/// Marginals hold within [`ENTROPIC_TOL`]; the value sits below the exact
/// optimum by at most `O(epsilon * log(n m))`.
pub fn sinkhorn_correlation(
    mu: &DiscreteMeasure,
    x: &DiscreteMeasure,
    epsilon: f64,
    max_iter: usize,
) -> Result<TransportPlan> {
    check_dims(mu, x)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    let score = score_matrix(mu, x);
    let sol = sinkhorn::solve(mu.weights(), x.weights(), &score, epsilon, max_iter)?;
    let mut psi: Vec<f64> = sol.f.iter().map(|f| -f).collect();
    let mut psi_star: Vec<f64> = sol.g.iter().map(|g| -g).collect();
    let shift = psi.iter().copied().fold(f64::INFINITY, f64::min);
    psi.iter_mut().for_each(|p| *p -= shift);
    psi_star.iter_mut().for_each(|p| *p += shift);
    let value = correlation_of(mu, x, &sol.plan);
    Ok(TransportPlan {
        source: mu.clone(),
        target: x.clone(),
        plan: sol.plan,
        value,
        potentials: DualPotentials { psi, psi_star },
        solver: SolverKind::Entropic {
            epsilon,
            iterations: sol.iterations,
        },
        sense: Sense::Maximize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni(values: &[f64]) -> DiscreteMeasure {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        DiscreteMeasure::from_samples(&rows, None).unwrap()
    }

    fn brute_force_max(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> f64 {
        // all permutations via Heap's algorithm
        let n = mu.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut c = vec![0usize; n];
        let eval = |p: &[usize]| -> f64 {
            let mut t = 0.0;
            for k in 0..n {
                let mut d = 0.0;
                for (a, b) in mu.atom(k).iter().zip(x.atom(p[k])) {
                    d += a * b;
                }
                t += mu.weight(k) * d;
            }
            t
        };
        let mut best = eval(&perm);
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                best = best.max(eval(&perm));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        best
    }

    #[test]
    fn monotone_matching_in_one_dimension() {
        let mu = uni(&[0.1, 0.5, 0.9]);
        let x = uni(&[1.0, 2.0, 3.0]);
        let plan = max_correlation(&mu, &x).unwrap();
        let oracle = brute_force_max(&mu, &x);
        assert_eq!(plan.value(), oracle);
        assert!((plan.value() - 3.8 / 3.0).abs() < 1e-12);
        for k in 0..3 {
            assert_eq!(plan.row_support(k), vec![k]);
        }
        assert!(plan.residuals().max() < EXACT_TOL);
        assert_eq!(plan.solver(), SolverKind::Assignment);
    }

    #[test]
    fn identity_pairing_in_two_dimensions() {
        let e = DiscreteMeasure::from_samples(&[[1.0, 0.0], [0.0, 1.0]], None).unwrap();
        let plan = max_correlation(&e, &e).unwrap();
        assert_eq!(plan.value(), brute_force_max(&e, &e));
        assert!((plan.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass_forces_the_coupling() {
        let mu =
            DiscreteMeasure::from_samples(&[[0.0, 0.0], [1.0, 1.0], [0.5, 0.5]], None).unwrap();
        assert_eq!(mu.mean(), vec![0.5, 0.5]);
        let c = DiscreteMeasure::point_mass(&[2.0, 3.0]).unwrap();
        let plan = max_correlation(&mu, &c).unwrap();
        assert!((plan.value() - 2.5).abs() < 1e-12);
        assert_eq!(plan.solver(), SolverKind::NetworkSimplex);
        assert!(plan.residuals().max() < EXACT_TOL);
        let low = min_correlation(&mu, &c).unwrap();
        assert!((low.value() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn min_correlation_examples() {
        let mu = uni(&[0.1, 0.5, 0.9]);
        let x = uni(&[1.0, 2.0, 3.0]);
        let low = min_correlation(&mu, &x).unwrap();
        assert!((low.value() - 2.2 / 3.0).abs() < 1e-12);
        let via_negation = max_correlation(&mu.negated(), &x).unwrap();
        assert!((low.value() + via_negation.value()).abs() < EXACT_TOL);
        assert!(low.residuals().max() < EXACT_TOL);

        let e = DiscreteMeasure::from_samples(&[[1.0, 0.0], [0.0, 1.0]], None).unwrap();
        assert!(min_correlation(&e, &e).unwrap().value().abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = uni(&[1.0]);
        let b = DiscreteMeasure::point_mass(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            max_correlation(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            sinkhorn_correlation(&a, &b, 1.0, 10),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unequal_weights_use_the_simplex() {
        let mu =
            DiscreteMeasure::from_samples(&[[0.0], [0.5], [1.0]], Some(&[0.2, 0.5, 0.3])).unwrap();
        let x = DiscreteMeasure::from_samples(&[[1.0], [4.0]], Some(&[0.6, 0.4])).unwrap();
        let plan = max_correlation(&mu, &x).unwrap();
        assert_eq!(plan.solver(), SolverKind::NetworkSimplex);
        // monotone: 0.2@0 ->1, 0.4@0.5 ->1, 0.1@0.5 ->4, 0.3@1 ->4
        let expected = 0.0 + 0.4 * 0.5 + 0.1 * 0.5 * 4.0 + 0.3 * 4.0;
        assert!((plan.value() - expected).abs() < 1e-12);
        assert!(plan.residuals().max() < EXACT_TOL);
    }

    #[test]
    fn sinkhorn_limits() {
        let mu = uni(&[0.1, 0.5, 0.9]);
        let x = uni(&[1.0, 2.0, 3.0]);
        let exact = max_correlation(&mu, &x).unwrap().value();

        let sharp = sinkhorn_correlation(&mu, &x, 1e-3, 100_000).unwrap();
        assert!((sharp.value() - exact).abs() < 1e-2);
        assert!(sharp.residuals().row_marginal < ENTROPIC_TOL);
        assert!(sharp.residuals().column_marginal < ENTROPIC_TOL);

        let blurred = sinkhorn_correlation(&mu, &x, 1e6, 1000).unwrap();
        let product = dot(&mu.mean(), &x.mean());
        assert!((blurred.value() - product).abs() < 1e-5);

        let loose = sinkhorn_correlation(&mu, &x, 0.1, 10_000).unwrap();
        assert!(loose.value() <= exact + 1e-12);
        assert!(sharp.value() >= loose.value());

        let p = DiscreteMeasure::point_mass(&[2.0]).unwrap();
        let q = DiscreteMeasure::point_mass(&[0.3]).unwrap();
        let single = sinkhorn_correlation(&p, &q, 1e-4, 10).unwrap();
        assert!((single.value() - 0.6).abs() < 1e-12);
    }
}
