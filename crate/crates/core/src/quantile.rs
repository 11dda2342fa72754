//! Discrete mu-quantiles and the classical univariate quantile.
//!
//! The mu-quantile of a prospect `X` sends each reference atom `u_k` to the
//! point of `X` it is coupled with under the maximal correlation plan. When
//! the plan splits the mass of `u_k` the conditional mean of its targets is
//! used instead and the map is flagged as barycentric.

use crate::error::{Error, Result};
use crate::measure::{AlignedSample, DiscreteMeasure};
use crate::transport::{max_correlation, TransportPlan};

/// Default tolerance for [`quantile_additivity_check`].
pub const ADDITIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileKind {
    /// Every reference atom is sent to a single prospect atom.
    Assignment,
    /// Some reference atom is split; its value is a conditional mean.
    Barycentric,
}

#[derive(Debug, Clone)]
pub struct QuantileMap {
    plan: TransportPlan,
    values: Vec<f64>,
    kind: QuantileKind,
    degenerate_reference: bool,
}

impl QuantileMap {
    pub fn mu(&self) -> &DiscreteMeasure {
        self.plan.source()
    }

    pub fn prospect(&self) -> &DiscreteMeasure {
        self.plan.target()
    }

    pub fn plan(&self) -> &TransportPlan {
        &self.plan
    }

    pub fn kind(&self) -> QuantileKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.plan.source().dim()
    }

    pub fn len(&self) -> usize {
        self.plan.source().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Q_X(u_k)`.
    pub fn value(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.values[k * d..(k + 1) * d]
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks(self.dim())
    }

    /// Row-major `n x d` values.
    pub fn flat_values(&self) -> &[f64] {
        &self.values
    }

    /// Set when two reference atoms share a coordinate along some axis. The
    /// optimal plan may then be non-unique and the canonical atom order
    /// decides between optima.
    pub fn has_degenerate_reference(&self) -> bool {
        self.degenerate_reference
    }

    /// Largest violation of `(Q(u_k) - Q(u_l)) . (u_k - u_l) >= 0`; zero when monotone.
    pub fn monotonicity_violation(&self) -> f64 {
        let mu = self.mu();
        let mut worst = 0.0f64;
        for k in 0..mu.len() {
            for l in k + 1..mu.len() {
                let s: f64 = (0..self.dim())
                    .map(|c| {
                        (self.value(k)[c] - self.value(l)[c]) * (mu.atom(k)[c] - mu.atom(l)[c])
                    })
                    .sum();
                worst = worst.max(-s);
            }
        }
        worst
    }
}

fn degenerate(mu: &DiscreteMeasure) -> bool {
    (0..mu.dim()).any(|c| {
        let mut column: Vec<f64> = mu.atoms().map(|a| a[c]).collect();
        column.sort_by(f64::total_cmp);
        column.windows(2).any(|w| w[0] == w[1])
    })
}

/// mu-quantile of `x`.
pub fn mu_quantile(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> Result<QuantileMap> {
    let plan = max_correlation(mu, x)?;
    Ok(from_plan(plan))
}

/// Builds the quantile map induced by an optimal plan.
pub fn from_plan(plan: TransportPlan) -> QuantileMap {
    let d = plan.source().dim();
    let mut values = Vec::with_capacity(plan.source().len() * d);
    let mut kind = QuantileKind::Assignment;
    for k in 0..plan.source().len() {
        let support = plan.row_support(k);
        if let [j] = support[..] {
            values.extend_from_slice(plan.target().atom(j));
        } else {
            kind = QuantileKind::Barycentric;
            let w = plan.source().weight(k);
            let mut acc = vec![0.0; d];
            for j in support {
                let p = plan.mass(k, j);
                for (a, &v) in acc.iter_mut().zip(plan.target().atom(j)) {
                    *a += p * v;
                }
            }
            values.extend(acc.into_iter().map(|a| a / w));
        }
    }
    let degenerate_reference = degenerate(plan.source());
    QuantileMap {
        plan,
        values,
        kind,
        degenerate_reference,
    }
}

/// `Q_X(t) = inf { x : Pr(X <= x) > t }` for a univariate prospect.
pub fn univariate_quantile(x: &DiscreteMeasure, t: f64) -> Result<f64> {
    if x.dim() != 1 {
        return Err(Error::NotUnivariate { dim: x.dim() });
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutsideUnitInterval { value: t });
    }
    let mut cumulative = 0.0;
    for (atom, &w) in x.atoms().zip(x.weights()) {
        cumulative += w;
        if cumulative > t {
            return Ok(atom[0]);
        }
    }
    // rounding left the total just below t; the largest atom is the answer
    Ok(x.atom(x.len() - 1)[0])
}

/// Outcome of [`quantile_additivity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditivityCheck {
    pub holds: bool,
    /// `max_k |Q_{X+Y}(u_k) - Q_X(u_k) - Q_Y(u_k)|` over all coordinates.
    pub max_deviation: f64,
}

/// Tests `Q_{X+Y} = Q_X + Q_Y` atomwise within `tol`.
pub fn quantile_additivity_check(
    mu: &DiscreteMeasure,
    x: &AlignedSample,
    y: &AlignedSample,
    tol: f64,
) -> Result<AdditivityCheck> {
    let sum = x.add(y)?;
    let qx = mu_quantile(mu, &x.empirical())?;
    let qy = mu_quantile(mu, &y.empirical())?;
    let qs = mu_quantile(mu, &sum.empirical())?;
    let max_deviation = (0..mu.len())
        .flat_map(|k| {
            let (s, a, b) = (qs.value(k), qx.value(k), qy.value(k));
            (0..s.len()).map(move |c| (s[c] - a[c] - b[c]).abs())
        })
        .fold(0.0, f64::max);
    Ok(AdditivityCheck {
        holds: max_deviation <= tol,
        max_deviation,
    })
}
