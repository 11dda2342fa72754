//! Concave stochastic order `Y <=_cv X` between two prospects.
//!
//! Two deciders are offered. The doubly stochastic test expands both
//! prospects to a common number `N` of equally likely rows and solves the
//! linear feasibility problem `X = D Y` with `D` doubly stochastic. The rho
//! battery samples reference measures and looks for one with
//! `rho_mu(X) > rho_mu(Y)`; it can refute the relation but never prove it.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{AlignedSample, DiscreteMeasure};
use crate::transport::max_correlation;

/// Absolute tolerance on the mean gap (scaled by `1 + |mean|`).
pub const MEAN_TOL: f64 = 1e-9;
pub const RHO_BATTERY_CLOUDS: usize = 200;
pub const RHO_BATTERY_SEED: u64 = 0x5EED;

/// Largest common row count the doubly stochastic test will expand to.
const MAX_HARMONIZED: usize = 512;
/// Accepted residual of `X - D Y`, relative to `1 + max |y|`.
const CERTIFICATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcaveOrderMethod {
    DoublyStochastic,
    RhoBattery { clouds: usize, seed: u64, tol: f64 },
}

impl ConcaveOrderMethod {
    pub fn rho_battery() -> Self {
        Self::RhoBattery {
            clouds: RHO_BATTERY_CLOUDS,
            seed: RHO_BATTERY_SEED,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConcaveOrderCertificate {
    /// `x_rows = D * y_rows` on the harmonized `N`-row expansions.
    Matrix {
        size: usize,
        entries: Vec<f64>,
        x_rows: AlignedSample,
        y_rows: AlignedSample,
        residual: f64,
    },
    /// No doubly stochastic `D` reproduces `X`; `residual` is the best L1 fit found.
    Infeasible { size: usize, residual: f64 },
    /// A reference measure with `rho(X) > rho(Y) + tol`.
    Refuted {
        reference: DiscreteMeasure,
        rho_x: f64,
        rho_y: f64,
    },
    /// No refutation among the sampled references.
    NotRefuted { clouds: usize, worst_margin: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveOrderCheck {
    /// `Y <=_cv X` established (doubly stochastic) or not refuted (battery).
    pub holds: bool,
    pub certificate: ConcaveOrderCertificate,
}

fn check_means(x: &DiscreteMeasure, y: &DiscreteMeasure) -> Result<()> {
    let (mx, my) = (x.mean(), y.mean());
    let gap = mx
        .iter()
        .zip(&my)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = mx
        .iter()
        .chain(&my)
        .fold(1.0f64, |acc, v| acc.max(1.0 + v.abs()));
    if gap > MEAN_TOL * scale {
        return Err(Error::MeanMismatch { gap });
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest row count on which both measures are equal-weight samples.
pub(crate) fn harmonized_count(x: &DiscreteMeasure, y: &DiscreteMeasure) -> Result<usize> {
    let lx = x.lattice_count(MAX_HARMONIZED);
    let ly = y.lattice_count(MAX_HARMONIZED);
    match (lx, ly) {
        (Some(a), Some(b)) if a / gcd(a, b) * b <= MAX_HARMONIZED => Ok(a / gcd(a, b) * b),
        _ => Err(Error::CountMismatch(format!(
            "weights do not share a common denominator up to {MAX_HARMONIZED}"
        ))),
    }
}

/// Decides `Y <=_cv X`, i.e. `X` is less risky than `Y`.
pub fn concave_order_check(
    x: &DiscreteMeasure,
    y: &DiscreteMeasure,
    method: ConcaveOrderMethod,
) -> Result<ConcaveOrderCheck> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    check_means(x, y)?;
    match method {
        ConcaveOrderMethod::DoublyStochastic => doubly_stochastic(x, y),
        ConcaveOrderMethod::RhoBattery { clouds, seed, tol } => {
            rho_battery(x, y, clouds, seed, tol)
        }
    }
}

fn doubly_stochastic(x: &DiscreteMeasure, y: &DiscreteMeasure) -> Result<ConcaveOrderCheck> {
    let n = harmonized_count(x, y)?;
    let d = x.dim();
    let xs = x.expand_equal_weight(n)?;
    let ys = y.expand_equal_weight(n)?;

    // minimize sum of slacks s+ + s- subject to D 1 = 1, D^T 1 = 1,
    // D y_c + s+ - s- = x_c for every coordinate c
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let dvars: Vec<_> = (0..n * n)
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    for i in 0..n {
        let row: Vec<_> = (0..n).map(|j| (dvars[i * n + j], 1.0)).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, 1.0);
        let col: Vec<_> = (0..n).map(|j| (dvars[j * n + i], 1.0)).collect();
        lp.add_constraint(col.as_slice(), ComparisonOp::Eq, 1.0);
    }
    for i in 0..n {
        for c in 0..d {
            let plus = lp.add_var(1.0, (0.0, f64::INFINITY));
            let minus = lp.add_var(1.0, (0.0, f64::INFINITY));
            let mut expr: Vec<_> = (0..n).map(|j| (dvars[i * n + j], ys.row(j)[c])).collect();
            expr.push((plus, 1.0));
            expr.push((minus, -1.0));
            lp.add_constraint(expr.as_slice(), ComparisonOp::Eq, xs.row(i)[c]);
        }
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::SolverFailure(format!("doubly stochastic LP: {e}")))?;
    let entries: Vec<f64> = dvars.iter().map(|&v| solution[v].max(0.0)).collect();

    // verify the certificate independently of the solver's own bookkeeping
    let mut residual = 0.0f64;
    for i in 0..n {
        let rs: f64 = entries[i * n..(i + 1) * n].iter().sum();
        let cs: f64 = (0..n).map(|j| entries[j * n + i]).sum();
        residual = residual.max((rs - 1.0).abs()).max((cs - 1.0).abs());
        for c in 0..d {
            let fit: f64 = (0..n).map(|j| entries[i * n + j] * ys.row(j)[c]).sum();
            residual = residual.max((fit - xs.row(i)[c]).abs());
        }
    }
    let scale = ys
        .coords()
        .iter()
        .fold(1.0f64, |acc, v| acc.max(1.0 + v.abs()));
    if residual <= CERTIFICATE_TOL * scale {
        Ok(ConcaveOrderCheck {
            holds: true,
            certificate: ConcaveOrderCertificate::Matrix {
                size: n,
                entries,
                x_rows: xs,
                y_rows: ys,
                residual,
            },
        })
    } else {
        Ok(ConcaveOrderCheck {
            holds: false,
            certificate: ConcaveOrderCertificate::Infeasible {
                size: n,
                residual: solution.objective(),
            },
        })
    }
}

fn rho_battery(
    x: &DiscreteMeasure,
    y: &DiscreteMeasure,
    clouds: usize,
    seed: u64,
    tol: f64,
) -> Result<ConcaveOrderCheck> {
    if clouds == 0 {
        return Err(Error::InvalidParameter(
            "the battery needs at least one reference".into(),
        ));
    }
    let d = x.dim();
    let size = x.len().max(y.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_margin = f64::NEG_INFINITY;
    for _ in 0..clouds {
        let coords: Vec<f64> = (0..size * d).map(|_| rng.random::<f64>()).collect();
        let reference = DiscreteMeasure::from_flat(d, coords, None)?;
        let rho_x = max_correlation(&reference, x)?.value();
        let rho_y = max_correlation(&reference, y)?.value();
        let margin = rho_x - rho_y;
        if margin > tol {
            return Ok(ConcaveOrderCheck {
                holds: false,
                certificate: ConcaveOrderCertificate::Refuted {
                    reference,
                    rho_x,
                    rho_y,
                },
            });
        }
        worst_margin = worst_margin.max(margin);
    }
    Ok(ConcaveOrderCheck {
        holds: true,
        certificate: ConcaveOrderCertificate::NotRefuted {
            clouds,
            worst_margin,
        },
    })
}
