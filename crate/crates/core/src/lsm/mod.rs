//! Binomial latent space model.
//!
//! Each dyad count `A_ij` is `Binomial(T, mu_ij)` with
//! `logit(mu_ij) = beta0 + x_ij . beta - |Z_i - Z_j|`.

mod fit;
mod likelihood;
mod mds;
mod optimize;
mod procrustes;
mod simulate;
mod state;

pub use fit::{fit_mle, fit_mle_from, FitReport, OptimizerConfig};
pub use likelihood::{
    edge_probability, linear_predictor, log_likelihood, log_likelihood_gradient,
    penalized_objective, Gradient,
};
pub use mds::{classical_mds, init_mds, top_eigenpairs};
pub use optimize::{maximize_bfgs, BfgsConfig, BfgsOutcome};
pub use procrustes::{procrustes_align, procrustes_fit, RigidMotion};
pub use simulate::{simulate_network, simulate_network_with};
pub use state::{LatentState, Positions};
