//! mu-comonotonicity of aligned prospects, simultaneous rearrangement, and
//! the (weaker, non-transitive) c-comonotonicity of pairs.

use crate::error::{Error, Result};
use crate::measure::{dot, AlignedSample, DiscreteMeasure};
use crate::quantile::{mu_quantile, QuantileKind};
use crate::transport::max_correlation;

/// Default relative tolerance on the additivity gap.
pub const COMONOTONE_TOL: f64 = 1e-6;

/// Both sides of `rho(sum X_i) = sum rho(X_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComonotonicityCertificate {
    pub rho_of_sum: f64,
    pub sum_of_rhos: f64,
    /// `sum_of_rhos - rho_of_sum`, nonnegative up to round-off by subadditivity.
    pub gap: f64,
    pub comonotonic: bool,
}

fn rho(mu: &DiscreteMeasure, x: &AlignedSample) -> Result<f64> {
    Ok(max_correlation(mu, &x.empirical())?.value())
}

/// Decides whether an aligned family is mu-comonotonic, i.e. whether the
/// maximal correlation functional is additive across it.
pub fn is_mu_comonotonic(
    mu: &DiscreteMeasure,
    prospects: &[AlignedSample],
    tol: f64,
) -> Result<ComonotonicityCertificate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let total = AlignedSample::sum(prospects)?;
    let rho_of_sum = rho(mu, &total)?;
    let mut sum_of_rhos = 0.0;
    for x in prospects {
        sum_of_rhos += rho(mu, x)?;
    }
    let gap = sum_of_rhos - rho_of_sum;
    Ok(ComonotonicityCertificate {
        rho_of_sum,
        sum_of_rhos,
        gap,
        comonotonic: gap.abs() <= tol * (1.0 + sum_of_rhos.abs()),
    })
}

/// Rearranges every prospect along the reference atoms: row `k` of the
/// `i`-th output is `Q_{X_i}(u_k)`.
///
/// `mu` must be equal-weight with `n` atoms and every prospect weight a
/// multiple of `1/n`, so each output is a permutation of the prospect's
/// `n`-row expansion.
pub fn comonotonic_rearrangement(
    mu: &DiscreteMeasure,
    prospects: &[DiscreteMeasure],
) -> Result<Vec<AlignedSample>> {
    let n = mu.len();
    if !mu.is_equal_weight() {
        return Err(Error::CountMismatch(
            "reference measure must have equal weights".into(),
        ));
    }
    if prospects.is_empty() {
        return Err(Error::EmptyInput);
    }
    prospects
        .iter()
        .map(|x| {
            if x.dim() != mu.dim() {
                return Err(Error::DimensionMismatch {
                    expected: mu.dim(),
                    found: x.dim(),
                });
            }
            if x.lattice_count(n).map_or(true, |c| n % c != 0) {
                return Err(Error::CountMismatch(format!(
                    "prospect weights are not multiples of 1/{n}"
                )));
            }
            let q = mu_quantile(mu, x)?;
            if q.kind() != QuantileKind::Assignment {
                let atom = (0..n)
                    .find(|&k| q.plan().row_support(k).len() > 1)
                    .unwrap_or(0);
                return Err(Error::NonAssignment { atom });
            }
            AlignedSample::from_flat(mu.dim(), q.flat_values().to_vec())
        })
        .collect()
}

/// Checks that mu-comonotonicity passes from `(x, y)` and `(y, z)` to `(x, z)`.
///
/// Requires `y` to have pairwise distinct rows and both input pairs to be
/// mu-comonotonic; otherwise [`Error::PreconditionUnmet`].
pub fn transitivity_check(
    mu: &DiscreteMeasure,
    x: &AlignedSample,
    y: &AlignedSample,
    z: &AlignedSample,
    tol: f64,
) -> Result<ComonotonicityCertificate> {
    x.check_aligned(y)?;
    y.check_aligned(z)?;
    if !y.has_distinct_rows() {
        return Err(Error::PreconditionUnmet(
            "middle prospect has repeated realizations".into(),
        ));
    }
    if !is_mu_comonotonic(mu, &[x.clone(), y.clone()], tol)?.comonotonic {
        return Err(Error::PreconditionUnmet(
            "first pair is not mu-comonotonic".into(),
        ));
    }
    if !is_mu_comonotonic(mu, &[y.clone(), z.clone()], tol)?.comonotonic {
        return Err(Error::PreconditionUnmet(
            "second pair is not mu-comonotonic".into(),
        ));
    }
    is_mu_comonotonic(mu, &[x.clone(), z.clone()], tol)
}

/// Value of the given pairing against the optimal coupling of the marginals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CComonotonicity {
    /// `(1/n) sum_k x_k . y_k`.
    pub given: f64,
    pub optimal: f64,
    pub c_comonotonic: bool,
}

/// Whether the pairing `(x_k, y_k)` is an optimal quadratic coupling.
pub fn c_comonotonic_check(
    x: &AlignedSample,
    y: &AlignedSample,
    tol: f64,
) -> Result<CComonotonicity> {
    x.check_aligned(y)?;
    let n = x.len() as f64;
    let given = x
        .rows()
        .zip(y.rows())
        .map(|(a, b)| dot(a, b) / n)
        .sum::<f64>();
    let optimal = max_correlation(&x.empirical(), &y.empirical())?.value();
    Ok(CComonotonicity {
        given,
        optimal,
        c_comonotonic: optimal - given <= tol * (1.0 + optimal.abs()),
    })
}

/// Three aligned prospects in the plane where `(x, y)` and `(y, z)` are
/// c-comonotonic but `(x, z)` is not.
pub fn c_comonotonicity_counterexample() -> [AlignedSample; 3] {
    let make = |rows: [[f64; 2]; 3]| AlignedSample::from_rows(&rows).expect("fixture is valid");
    [
        make([[-1.0, -3.0], [-3.0, 2.0], [-1.0, 0.0]]),
        make([[-2.0, -1.0], [-1.0, 3.0], [3.0, 3.0]]),
        make([[-3.0, -1.0], [2.0, 2.0], [3.0, -3.0]]),
    ]
}
