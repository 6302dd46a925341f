use serde::{Deserialize, Serialize};

use super::bic::{bic, BicReport};
use super::mixture::{em_fit_mixture, EmConfig, EmFit};
use crate::error::Result;
use crate::lsm::{fit_mle, FitReport, LatentState, OptimizerConfig};
use crate::network::{DyadDesign, Network};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageFit {
    pub state: LatentState,
    pub report: FitReport,
    pub mixture: EmFit,
    /// Hard partition from the mixture responsibilities.
    pub partition: Vec<usize>,
    pub bic: BicReport,
}

/// Maximum likelihood positions, then a mixture fitted to them by EM. The
/// second stage leaves the positions untouched.
pub fn fit_two_stage_mle(
    net: &Network,
    design: &DyadDesign,
    dim: usize,
    groups: usize,
    optimizer: &OptimizerConfig,
    em: &EmConfig,
) -> Result<TwoStageFit> {
    let (state, report) = fit_mle(net, design, dim, optimizer)?;
    let mixture = em_fit_mixture(&state.positions, groups, em)?;
    let partition = mixture.hard_assignments();
    let bic = bic(net, design, &state, &mixture.params)?;
    Ok(TwoStageFit {
        state,
        report,
        mixture,
        partition,
        bic,
    })
}
