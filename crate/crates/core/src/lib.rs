//! Latent space network models for weighted (binomial count) networks.
//!
//! The crate covers the whole analysis pipeline for a network whose dyads carry
//! a count out of `T` trials together with dyadic covariates:
//!
//! - [`network`]: loading networks, node tables and pair matrices, and
//!   building the per-dyad covariate design.
//! - [`lsm`]: the binomial latent space model (likelihood, gradient, maximum
//!   likelihood fitting, MDS initialisation, Procrustes alignment, simulation).
//! - [`lpcm`]: the latent position cluster model (spherical mixture EM,
//!   two-stage fitting, Metropolis-within-Gibbs sampling, BIC, memberships).
//! - [`community`]: complete-linkage clustering and partition comparison.
//! - [`importance`]: OLS of latent distances on covariates with Pratt and LMG
//!   relative importance.
//! - [`eval`]: covariate scans, q-values, odds effects and posterior
//!   predictive goodness of fit.
//! - [`synth`]: synthetic dataset generator used by tests and the CLI.

pub mod community;
pub mod error;
pub mod eval;
pub mod importance;
pub mod lpcm;
pub mod lsm;
pub mod network;
pub mod rng;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
