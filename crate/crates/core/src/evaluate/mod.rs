//! The quantile-weighted evaluation `gamma(X) = E[Q_X(U) . phi(U)]` and the
//! stochastic orders around it.

mod order;
mod scheme;
mod spread;

pub use order::{
    concave_order_check, ConcaveOrderCertificate, ConcaveOrderCheck, ConcaveOrderMethod, MEAN_TOL,
    RHO_BATTERY_CLOUDS, RHO_BATTERY_SEED,
};
pub use scheme::{Orientation, SchemeForm, WeightScheme};
pub use spread::{
    diversification_check, mps_generate, DiversificationCheck, DIVERSIFICATION_SLACK,
};

use crate::error::{Error, Result};
use crate::measure::{dot, DiscreteMeasure};
use crate::quantile::{mu_quantile, QuantileKind, QuantileMap};

/// `rho_mu(X)` and `u0 . E[X]` for affine schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub rho: f64,
    pub mean_term: f64,
}

#[derive(Debug, Clone)]
pub struct GammaResult {
    pub value: f64,
    pub quantile_map: QuantileMap,
    /// Present for risk-averse schemes: `value = -alpha * rho - mean_term`.
    pub decomposition: Option<Decomposition>,
}

/// Evaluates `gamma(X) = sum_k w_k Q_X(u_k) . phi(u_k)`.
pub fn gamma(ws: &WeightScheme, x: &DiscreteMeasure) -> Result<GammaResult> {
    let q = mu_quantile(ws.mu(), x)?;
    let mu = ws.mu();
    let value = (0..mu.len())
        .map(|k| mu.weight(k) * dot(q.value(k), ws.phi(k)))
        .sum();
    let decomposition = ws.risk_averse_parameters().map(|(_, u0)| Decomposition {
        rho: q.plan().value(),
        mean_term: dot(u0, &x.mean()),
    });
    Ok(GammaResult {
        value,
        quantile_map: q,
        decomposition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FosdVerdict {
    /// `Q_X >= Q_Y` at every reference atom, strictly somewhere.
    StrictlyDominates,
    /// `Q_X >= Q_Y` everywhere, equal up to tolerance.
    Dominates,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FosdCheck {
    pub verdict: FosdVerdict,
    /// Largest `Q_Y - Q_X` over atoms and coordinates.
    pub worst_shortfall: f64,
    /// Largest `Q_X - Q_Y` over atoms and coordinates.
    pub largest_excess: f64,
}

fn assignment_quantile(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> Result<QuantileMap> {
    let q = mu_quantile(mu, x)?;
    if q.kind() != QuantileKind::Assignment {
        let atom = (0..mu.len())
            .find(|&k| q.plan().row_support(k).len() > 1)
            .unwrap_or(0);
        return Err(Error::NonAssignment { atom });
    }
    Ok(q)
}

/// Does `x` first-order dominate `y` relative to `mu`?
pub fn fosd_check(
    mu: &DiscreteMeasure,
    x: &DiscreteMeasure,
    y: &DiscreteMeasure,
    tol: f64,
) -> Result<FosdCheck> {
    let qx = assignment_quantile(mu, x)?;
    let qy = assignment_quantile(mu, y)?;
    let mut worst_shortfall = f64::NEG_INFINITY;
    let mut largest_excess = f64::NEG_INFINITY;
    for k in 0..mu.len() {
        for (a, b) in qx.value(k).iter().zip(qy.value(k)) {
            worst_shortfall = worst_shortfall.max(b - a);
            largest_excess = largest_excess.max(a - b);
        }
    }
    let verdict = if worst_shortfall > tol {
        FosdVerdict::Incomparable
    } else if largest_excess > tol {
        FosdVerdict::StrictlyDominates
    } else {
        FosdVerdict::Dominates
    };
    Ok(FosdCheck {
        verdict,
        worst_shortfall,
        largest_excess,
    })
}
