//! Two-part information criterion for the latent position cluster model.

use serde::{Deserialize, Serialize};

use super::mixture::MixtureParams;
use crate::error::Result;
use crate::lsm::{log_likelihood, LatentState};
use crate::network::{DyadDesign, Network};

/// Logistic and mixture parts of the criterion, reported separately and
/// summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicReport {
    pub groups: usize,
    pub log_likelihood: f64,
    pub logistic_params: usize,
    pub n_dyads: usize,
    pub logistic: f64,
    pub mixture_log_likelihood: f64,
    pub mixture_params: usize,
    pub n_nodes: usize,
    pub mixture: f64,
    pub total: f64,
}

impl BicReport {
    /// `-2 ll + (1 + p) ln(dyads)` plus `-2 mixture_ll + k_G ln(n)`.
    pub fn from_parts(
        log_likelihood: f64,
        n_coefficients: usize,
        n_dyads: usize,
        mixture_log_likelihood: f64,
        groups: usize,
        dim: usize,
        n_nodes: usize,
    ) -> Self {
        let logistic_params = 1 + n_coefficients;
        let mixture_params = MixtureParams::n_free_params(groups, dim);
        let logistic = -2.0 * log_likelihood + logistic_params as f64 * (n_dyads as f64).ln();
        let mixture =
            -2.0 * mixture_log_likelihood + mixture_params as f64 * (n_nodes as f64).ln();
        Self {
            groups,
            log_likelihood,
            logistic_params,
            n_dyads,
            logistic,
            mixture_log_likelihood,
            mixture_params,
            n_nodes,
            mixture,
            total: logistic + mixture,
        }
    }
}

/// Criterion for a fitted (or plug-in) state and mixture.
pub fn bic(
    net: &Network,
    design: &DyadDesign,
    state: &LatentState,
    mixture: &MixtureParams,
) -> Result<BicReport> {
    let ll = log_likelihood(net, design, state)?;
    let mll = mixture.log_likelihood(&state.positions);
    Ok(BicReport::from_parts(
        ll,
        design.n_columns(),
        net.n_dyads(),
        mll,
        mixture.n_groups(),
        state.positions.dim(),
        net.n_nodes(),
    ))
}
