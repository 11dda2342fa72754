//! Dual theory of choice under multivariate risk on discrete distributions.
//!
//! Prospects and reference measures are [`DiscreteMeasure`]s. Maximal
//! correlation functionals and their optimal couplings live in
//! [`transport`]; quantiles, comonotonicity, the evaluation functional,
//! local utilities and inequality measurement are built on top of them.

pub mod comonotone;
pub mod error;
pub mod evaluate;
pub mod inequality;
pub mod local_utility;
pub mod measure;
pub mod quantile;
pub mod transport;

pub use error::{Error, Result};
pub use evaluate::{gamma, WeightScheme};
pub use measure::{dot, AlignedSample, Dimension, DiscreteMeasure};
pub use quantile::{mu_quantile, QuantileMap};
pub use transport::{
    max_correlation, min_correlation, sinkhorn_correlation, DualPotentials, TransportPlan,
};
