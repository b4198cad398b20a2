//! Quadratic Wasserstein distances between Gaussian samples and their
//! reference law.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the numerical kernels:
//!
//! * [`special`]: normal cdf, quantile, density-quantile `h`, tail
//!   expansions and the bivariate normal cdf / Gaussian copula.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration.
//! * [`wasserstein`]: exact `W₂²` between an empirical quantile function and
//!   a Gaussian one, the two-sample distance, and the tail/bulk decomposition.
//! * [`order_stats`]: moment formulas for upper order statistics and an exact
//!   Beta-representation sampler.
//! * [`integrals`]: singular integrals of `u(1-u)/h²` and `(u - C_ρ(u,u))/h²`.
//! * [`limit`]: coupled Brownian bridge simulation and the limiting
//!   functional of the two-sample statistic.
//! * [`rng`]: counter-based random streams keyed by seed, experiment and
//!   replication index.
//!
//! IO, the experiment runner and the command line live in the `w2lab` crate.
#![no_std]
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod integrals;
pub mod limit;
pub mod order_stats;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;
pub mod wasserstein;

pub use error::Error;
pub use special::{Correlation, UnitProb};
