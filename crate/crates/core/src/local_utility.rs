//! Local utility `u(x|P) = -V*_P(x)` built from the transport potential of
//! the maximal correlation problem between `mu` and `P`.

use crate::error::{Error, Result};
use crate::measure::{dot, DiscreteMeasure};
use crate::transport::max_correlation;

/// Where the additive constant of a local utility is fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum Anchor {
    /// The potential gauge `min_k psi_k = 0`, no further shift.
    Gauge,
    /// `u(x0|P) = 0`.
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalUtility {
    mu: DiscreteMeasure,
    psi: Vec<f64>,
    offset: f64,
    anchor: Anchor,
}

/// Discrete Legendre-Fenchel transform `max_k (u_k . x - psi_k)`.
pub fn legendre_conjugate(mu: &DiscreteMeasure, psi: &[f64], x: &[f64]) -> Result<f64> {
    if psi.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            found: psi.len(),
        });
    }
    if x.len() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: x.len(),
        });
    }
    if let Some(k) = psi.iter().position(|p| !p.is_finite()) {
        return Err(Error::NonFiniteValue {
            row: k,
            column: 0,
            value: psi[k],
        });
    }
    Ok(conjugate(mu, psi, x))
}

fn conjugate(mu: &DiscreteMeasure, psi: &[f64], x: &[f64]) -> f64 {
    mu.atoms()
        .zip(psi)
        .map(|(u, p)| dot(u, x) - p)
        .fold(f64::NEG_INFINITY, f64::max)
}

impl LocalUtility {
    /// Local utility at `p`, gauge-fixed by `min psi = 0`.
    pub fn from_distribution(mu: &DiscreteMeasure, p: &DiscreteMeasure) -> Result<Self> {
        let plan = max_correlation(mu, p)?;
        Ok(Self {
            mu: mu.clone(),
            psi: plan.potentials().psi.clone(),
            offset: 0.0,
            anchor: Anchor::Gauge,
        })
    }

    /// Same function shifted so that it vanishes at `x0`.
    pub fn anchored_at(&self, x0: &[f64]) -> Result<Self> {
        let c = legendre_conjugate(&self.mu, &self.psi, x0)?;
        Ok(Self {
            mu: self.mu.clone(),
            psi: self.psi.clone(),
            offset: -c,
            anchor: Anchor::Point(x0.to_vec()),
        })
    }

    pub fn mu(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn anchor(&self) -> &Anchor {
        &self.anchor
    }

    /// `V*_P(x) = max_k (u_k . x - psi_k)`.
    pub fn conjugate(&self, x: &[f64]) -> Result<f64> {
        legendre_conjugate(&self.mu, &self.psi, x)
    }

    /// `u(x|P)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.conjugate(x)? - self.offset)
    }
}

/// `-integral_{-inf}^x F(z) dz = -E[(x - X)^+]` for a univariate `p`.
pub fn univariate_local_utility_closed_form(p: &DiscreteMeasure, x: f64) -> Result<f64> {
    if p.dim() != 1 {
        return Err(Error::NotUnivariate { dim: p.dim() });
    }
    let integral: f64 = p
        .atoms()
        .zip(p.weights())
        .filter(|(a, _)| a[0] < x)
        .map(|(a, w)| w * (x - a[0]))
        .sum();
    Ok(-integral)
}
