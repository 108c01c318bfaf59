//! Thresholds and Poisson-approximation bounds for random families of k-subsets,
//! with a reproducible Monte Carlo simulator and brute-force oracles.
//!
//! The crate is split by role:
//!
//! * [`combinatorics`]: log-space binomials, hypergeometric and Poisson laws,
//!   total variation distance.
//! * [`thresholds`]: critical family sizes for pairwise r-overlaps and the
//!   Janson sandwich on `P(X_r = 0)`.
//! * [`stein_chen`]: Poisson parameters and total variation error bounds for
//!   the overlap counts, univariate and joint.
//! * [`sampler`]: bit-vector k-sets and seeded family generation under the
//!   independent-inclusion and fixed-size models.
//! * [`pair_stats`]: overlap counting, Monte Carlo experiments and exact
//!   enumeration oracles.
//! * [`cli`]: the `ekr` command-line front end.

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod pair_stats;
pub mod sampler;
pub mod stein_chen;
pub mod thresholds;

pub use error::{Error, Result};
