//! Weightings `phi` of reference atoms.

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Sign convention of a scheme's weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Every component of `phi` is nonpositive.
    NonPositive,
    /// Weights read as prices or rank weights; no sign is imposed on `phi`
    /// beyond what the constructor documents.
    Economic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeForm {
    /// Arbitrary tabulated weights.
    General,
    /// `phi(u) = -(alpha u + u0)`.
    RiskAverse { alpha: f64, u0: Vec<f64> },
    /// Rank weights `phi(t_k) = f'(1 - t_k)` on the midpoint grid of `[0, 1]`.
    Univariate { risk_averse: bool },
}

/// A reference measure `mu` together with the weight `phi(u_k)` of each atom.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    mu: DiscreteMeasure,
    phi: Vec<f64>,
    form: SchemeForm,
    orientation: Orientation,
}

fn check_finite(values: &[f64], d: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFiniteValue {
            row: i / d,
            column: i % d,
            value: values[i],
        }),
        None => Ok(()),
    }
}

fn risk_averse_phi(mu: &DiscreteMeasure, alpha: f64, u0: &[f64]) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidScheme(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if u0.len() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: u0.len(),
        });
    }
    check_finite(u0, u0.len())?;
    Ok(mu
        .atoms()
        .flat_map(|u| u.iter().zip(u0).map(|(a, b)| -(alpha * a + b)))
        .collect())
}

impl WeightScheme {
    /// Tabulated weights, row-major `n x d`, all components `<= 0`.
    pub fn general(mu: DiscreteMeasure, phi: Vec<f64>) -> Result<Self> {
        let d = mu.dim();
        if phi.len() != mu.len() * d {
            return Err(Error::DimensionMismatch {
                expected: mu.len() * d,
                found: phi.len(),
            });
        }
        check_finite(&phi, d)?;
        if let Some(i) = phi.iter().position(|&v| v > 0.0) {
            return Err(Error::InvalidScheme(format!(
                "weight component {} of atom {} is positive ({})",
                i % d,
                i / d,
                phi[i]
            )));
        }
        Ok(Self {
            mu,
            phi,
            form: SchemeForm::General,
            orientation: Orientation::NonPositive,
        })
    }

    /// `phi(u) = -(alpha u + u0)` with `alpha > 0`; rejected unless `phi <= 0` on the atoms.
    pub fn risk_averse(mu: DiscreteMeasure, alpha: f64, u0: &[f64]) -> Result<Self> {
        let phi = risk_averse_phi(&mu, alpha, u0)?;
        let d = mu.dim();
        if let Some(i) = phi.iter().position(|&v| v > 0.0) {
            return Err(Error::InvalidScheme(format!(
                "alpha u + u0 is negative at atom {} (component {})",
                i / d,
                i % d
            )));
        }
        Ok(Self {
            mu,
            phi,
            form: SchemeForm::RiskAverse {
                alpha,
                u0: u0.to_vec(),
            },
            orientation: Orientation::NonPositive,
        })
    }

    /// Rank-dependent scheme from `f'` tabulated at `t_k = (k - 0.5) / n`.
    ///
    /// The reference measure is the equal-weight grid `{t_k}` and
    /// `phi(t_k) = f'(1 - t_k)`, so `gamma(X) = (1/n) sum_k phi(t_k) Q_X(t_k)`.
    /// The scheme is flagged risk averse when `phi` is nonincreasing in rank,
    /// i.e. when `f` is convex.
    pub fn univariate(f_prime: &[f64]) -> Result<Self> {
        let n = f_prime.len();
        let mu = DiscreteMeasure::uniform_grid(1, n)?;
        check_finite(f_prime, 1)?;
        if let Some(i) = f_prime.iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeWeightFunction {
                index: i,
                value: f_prime[i],
            });
        }
        let phi: Vec<f64> = f_prime.iter().rev().copied().collect();
        let risk_averse = phi.windows(2).all(|w| w[1] <= w[0]);
        Ok(Self {
            mu,
            phi,
            form: SchemeForm::Univariate { risk_averse },
            orientation: Orientation::Economic,
        })
    }

    /// Scheme built from a nonnegative state-price cloud `nu`: the reference
    /// measure is `-nu`, so that `gamma(X) = alpha * min_corr(nu, X) - u0 . E[X]`.
    pub fn state_price(nu: &DiscreteMeasure, alpha: f64, u0: &[f64]) -> Result<Self> {
        if let Some(i) = nu.coords().iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidScheme(format!(
                "state prices must be nonnegative; atom {} has {}",
                i / nu.dim(),
                nu.coords()[i]
            )));
        }
        let mu = nu.negated();
        let phi = risk_averse_phi(&mu, alpha, u0)?;
        Ok(Self {
            mu,
            phi,
            form: SchemeForm::RiskAverse {
                alpha,
                u0: u0.to_vec(),
            },
            orientation: Orientation::Economic,
        })
    }

    pub fn mu(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// `phi(u_k)`.
    pub fn phi(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.phi[k * d..(k + 1) * d]
    }

    pub fn phi_flat(&self) -> &[f64] {
        &self.phi
    }

    pub fn form(&self) -> &SchemeForm {
        &self.form
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// `(alpha, u0)` for affine schemes.
    pub fn risk_averse_parameters(&self) -> Option<(f64, &[f64])> {
        match &self.form {
            SchemeForm::RiskAverse { alpha, u0 } => Some((*alpha, u0)),
            _ => None,
        }
    }

    pub fn is_risk_averse(&self) -> bool {
        matches!(
            self.form,
            SchemeForm::RiskAverse { .. } | SchemeForm::Univariate { risk_averse: true }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_weights_reverse_the_table() {
        // f(t) = t^2, f'(t) = 2t at 1/6, 1/2, 5/6
        let ws = WeightScheme::univariate(&[1.0 / 3.0, 1.0, 5.0 / 3.0]).unwrap();
        assert_eq!(ws.phi_flat(), &[5.0 / 3.0, 1.0, 1.0 / 3.0]);
        assert_eq!(ws.form(), &SchemeForm::Univariate { risk_averse: true });
        assert_eq!(ws.mu().coords(), &[1.0 / 6.0, 0.5, 5.0 / 6.0]);

        let concave = WeightScheme::univariate(&[2.0, 1.0, 0.5]).unwrap();
        assert!(!concave.is_risk_averse());
        assert_eq!(
            WeightScheme::univariate(&[1.0, -0.1]),
            Err(Error::NegativeWeightFunction {
                index: 1,
                value: -0.1
            })
        );
    }

    #[test]
    fn risk_averse_sign_constraint() {
        let mu = DiscreteMeasure::from_samples(&[[0.1], [0.9]], None).unwrap();
        let ws = WeightScheme::risk_averse(mu.clone(), 2.0, &[0.0]).unwrap();
        assert_eq!(ws.phi_flat(), &[-0.2, -1.8]);
        assert!(matches!(
            WeightScheme::risk_averse(mu.clone(), 1.0, &[-0.5]),
            Err(Error::InvalidScheme(_))
        ));
        assert!(matches!(
            WeightScheme::risk_averse(mu.clone(), 0.0, &[0.0]),
            Err(Error::InvalidScheme(_))
        ));
        assert!(matches!(
            WeightScheme::risk_averse(mu, 1.0, &[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn general_requires_nonpositive_weights() {
        let mu = DiscreteMeasure::from_samples(&[[0.1, 0.2], [0.9, 0.3]], None).unwrap();
        assert!(WeightScheme::general(mu.clone(), vec![-1.0; 4]).is_ok());
        assert!(matches!(
            WeightScheme::general(mu.clone(), vec![-1.0, 0.5, -1.0, -1.0]),
            Err(Error::InvalidScheme(_))
        ));
        assert!(matches!(
            WeightScheme::general(mu, vec![-1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn state_price_negates_the_cloud() {
        let nu = DiscreteMeasure::from_samples(&[[0.2, 0.3], [0.9, 0.7]], None).unwrap();
        let ws = WeightScheme::state_price(&nu, 1.0, &[0.0, 0.0]).unwrap();
        assert_eq!(ws.mu(), &nu.negated());
        assert_eq!(ws.orientation(), Orientation::Economic);
        assert!(ws.phi_flat().iter().all(|&v| v >= 0.0));
        let bad = DiscreteMeasure::point_mass(&[-1.0, 0.0]).unwrap();
        assert!(matches!(
            WeightScheme::state_price(&bad, 1.0, &[0.0, 0.0]),
            Err(Error::InvalidScheme(_))
        ));
    }
}
