//! Latent position cluster model: a spherical Gaussian mixture on the latent
//! positions, fitted in two stages (MLE then EM) or by posterior sampling.

mod bic;
mod mcmc;
mod mixture;
mod mkl;
mod relabel;
mod select;
mod two_stage;

pub use bic::{bic, BicReport};
pub use mcmc::{
    mcmc_sample, mcmc_sample_from, relabel_samples, AcceptanceRates, ChainState, McmcConfig,
    McmcOutput, Priors, ResolvedPriors, Sample, Sampler,
};
pub use mkl::{fit_to_probabilities, posterior_mean_probabilities};
pub use mixture::{em_fit_mixture, kmeans_mixture, EmConfig, EmFit, MixtureParams};
pub use relabel::{
    agreement, best_permutation, map_partition, membership_probabilities, relabel_allocations,
};
pub use select::{select_g, select_g_from, GSelection};
pub use two_stage::{fit_two_stage_mle, TwoStageFit};
