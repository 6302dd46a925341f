use serde::{Deserialize, Serialize};

use super::bic::BicReport;
use super::mcmc::{mcmc_sample_from, McmcConfig, Priors};
use crate::error::{Error, Result};
use crate::lsm::{fit_mle, LatentState};
use crate::network::{DyadDesign, Network};
use crate::rng::substream_seed;
use crate::stats::std_dev;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GSelection {
    /// One report per candidate, in the order given.
    pub curve: Vec<BicReport>,
    pub chosen: usize,
    /// Standard deviation of the summed criterion across replicate seeds, per
    /// candidate; empty for a single replicate.
    pub spread: Vec<f64>,
}

/// Fits every candidate number of groups and picks the smallest summed
/// criterion; ties go to fewer groups.
pub fn select_g(
    net: &Network,
    design: &DyadDesign,
    dim: usize,
    candidates: &[usize],
    priors: &Priors,
    config: &McmcConfig,
) -> Result<GSelection> {
    let (init, _) = fit_mle(net, design, dim, &config.optimizer)?;
    select_g_from(net, design, &init, candidates, priors, config, 1)
}

/// As [`select_g`] from a given starting state. With `replicates > 1` each
/// candidate is also refitted under derived seeds and the spread of the
/// criterion reported; the curve itself always comes from `config.seed`.
pub fn select_g_from(
    net: &Network,
    design: &DyadDesign,
    init: &LatentState,
    candidates: &[usize],
    priors: &Priors,
    config: &McmcConfig,
    replicates: usize,
) -> Result<GSelection> {
    if candidates.is_empty() {
        return Err(Error::Config("empty range of group counts".into()));
    }
    let mut curve = Vec::with_capacity(candidates.len());
    let mut spread = Vec::new();
    for &g in candidates {
        let out = mcmc_sample_from(net, design, init, g, priors, config)?;
        if replicates > 1 {
            let mut totals = vec![out.bic.total];
            for r in 1..replicates {
                let cfg = McmcConfig {
                    seed: substream_seed(config.seed, &format!("replicate-{r}")),
                    ..*config
                };
                totals.push(mcmc_sample_from(net, design, init, g, priors, &cfg)?.bic.total);
            }
            spread.push(std_dev(&totals));
        }
        curve.push(out.bic);
    }
    let mut best = 0;
    for (k, r) in curve.iter().enumerate() {
        let b = &curve[best];
        if r.total < b.total || (r.total == b.total && r.groups < b.groups) {
            best = k;
        }
    }
    Ok(GSelection {
        chosen: curve[best].groups,
        curve,
        spread,
    })
}
