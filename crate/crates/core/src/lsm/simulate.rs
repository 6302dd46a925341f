use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use super::likelihood::linear_predictor;
use super::state::LatentState;
use crate::error::{Error, Result};
use crate::network::{pairs, DyadDesign, Network};
use crate::rng::{rng_from_seed, Rng};
use crate::stats::inv_logit;

/// Draws every dyad count independently from `Binomial(trials, mu_ij)`.
pub fn simulate_network(
    state: &LatentState,
    design: &DyadDesign,
    labels: &[String],
    trials: u32,
    seed: u64,
) -> Result<Network> {
    simulate_network_with(state, design, labels, trials, &mut rng_from_seed(seed))
}

pub fn simulate_network_with(
    state: &LatentState,
    design: &DyadDesign,
    labels: &[String],
    trials: u32,
    rng: &mut Rng,
) -> Result<Network> {
    let n = labels.len();
    state.check(n, design.n_columns())?;
    let counts = sample_pair_counts(state, design, trials, rng)?;
    Network::from_pair_counts(labels.to_vec(), trials, &counts)
}

pub(crate) fn sample_pair_counts(
    state: &LatentState,
    design: &DyadDesign,
    trials: u32,
    rng: &mut Rng,
) -> Result<Vec<u32>> {
    let z = &state.positions;
    pairs(z.n())
        .enumerate()
        .map(|(k, (i, j))| {
            let eta = linear_predictor(state.beta0, &state.beta, design.row(k), z.distance(i, j));
            if eta.is_nan() {
                return Err(Error::NonFinite("linear predictor".into()));
            }
            let mu = inv_logit(eta);
            Ok(draw_binomial(trials, mu, rng))
        })
        .collect()
}

#[inline]
fn draw_binomial(trials: u32, mu: f64, rng: &mut Rng) -> u32 {
    if trials <= 8 {
        (0..trials).map(|_| u32::from(rng.random::<f64>() < mu)).sum()
    } else {
        Binomial::new(u64::from(trials), mu)
            .expect("probability in [0, 1]")
            .sample(rng) as u32
    }
}
