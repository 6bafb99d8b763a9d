//! Distributed mean-field variational inference for Bayesian PCA.
//!
//! A library plus CLI that learn a single consensus Bayesian PCA posterior
//! across a simulated multi-node network. Each node holds a block of data
//! columns and runs local mean-field coordinate ascent; equality of the
//! per-node posterior parameters is enforced through per-edge auxiliary
//! variables and dual ascent, with the quadratic ADMM penalty replaced by
//! Gaussian KL divergences (the Bregman divergence of the Gaussian
//! log-partition).
//!
//! Crate layout:
//!
//! - [`gauss`] — univariate Gaussian exponential-family math (conversions,
//!   log-partition, KL, Bregman divergence).
//! - [`network`] — topologies, connectivity, data partitioning.
//! - [`model`] — model configuration, factorized posterior, masks.
//! - [`central`] — centralized fit, the validation oracle.
//! - [`solver`] — the distributed consensus solver.
//! - [`missing`] — MAR/MNAR mask generation and reconstruction scoring.
//! - [`bench`] — experiment generators and metrics (rotating-cube SfM,
//!   online schedules, synthetic low-rank completion, track loading).
//! - [`io`] — CSV matrix/mask/trace serialization.

pub mod bench;
pub mod central;
pub mod elbo;
pub mod error;
pub mod gauss;
pub mod io;
pub mod missing;
pub mod model;
pub mod network;
pub mod site;
pub mod solver;
pub mod trace;
pub mod updates;

pub use error::{Error, Result};
