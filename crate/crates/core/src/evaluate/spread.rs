//! Mean-preserving spreads and the preference for diversification.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{gamma, SchemeForm, WeightScheme};
use crate::error::{Error, Result};
use crate::measure::AlignedSample;

/// Lowest accepted value of `gamma(mix) - (lambda gamma(x) + (1 - lambda) gamma(y))`.
pub const DIVERSIFICATION_SLACK: f64 = -1e-9;

/// Splits every row `x_k` into the two equally likely offspring
/// `x_k - delta_k` and `x_k + delta_k`, where `delta_k` has length
/// `noise_scale` and a uniformly random direction.
///
/// Output rows `2k` and `2k + 1` are the offspring of input row `k`.
pub fn mps_generate(x: &AlignedSample, noise_scale: f64, seed: u64) -> Result<AlignedSample> {
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise scale must be nonnegative, got {noise_scale}"
        )));
    }
    let d = x.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(2 * x.len() * d);
    let mut delta = vec![0.0; d];
    for row in x.rows() {
        loop {
            for v in delta.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let norm = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                delta.iter_mut().for_each(|v| *v *= noise_scale / norm);
                break;
            }
        }
        coords.extend(row.iter().zip(&delta).map(|(a, b)| a - b));
        coords.extend(row.iter().zip(&delta).map(|(a, b)| a + b));
    }
    AlignedSample::from_flat(d, coords)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversificationCheck {
    pub holds: bool,
    /// `(lambda, slack)` per grid point.
    pub slacks: Vec<(f64, f64)>,
}

impl DiversificationCheck {
    pub fn worst_slack(&self) -> f64 {
        self.slacks
            .iter()
            .map(|s| s.1)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Checks `gamma(lambda x + (1 - lambda) y) >= lambda gamma(x) + (1 - lambda) gamma(y)`
/// on every grid point, for a risk-averse scheme.
pub fn diversification_check(
    ws: &WeightScheme,
    x: &AlignedSample,
    y: &AlignedSample,
    grid: &[f64],
) -> Result<DiversificationCheck> {
    if !matches!(ws.form(), SchemeForm::RiskAverse { .. }) {
        return Err(Error::InvalidScheme(
            "diversification needs a risk-averse scheme".into(),
        ));
    }
    x.check_aligned(y)?;
    if let Some(&bad) = grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidParameter(format!(
            "mixing weight {bad} outside [0, 1]"
        )));
    }
    let gx = gamma(ws, &x.empirical())?.value;
    let gy = gamma(ws, &y.empirical())?.value;
    let mut slacks = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let mix = x.combine(lambda, y, 1.0 - lambda)?;
        let gm = gamma(ws, &mix.empirical())?.value;
        slacks.push((lambda, gm - (lambda * gx + (1.0 - lambda) * gy)));
    }
    let holds = slacks.iter().all(|&(_, s)| s >= DIVERSIFICATION_SLACK);
    Ok(DiversificationCheck { holds, slacks })
}
