//! Minimum Kullback-Leibler point estimate from posterior samples.

use super::mcmc::Sample;
use crate::error::Result;
use crate::lsm::{maximize_bfgs, BfgsConfig, LatentState};
use crate::network::{pairs, DyadDesign};
use crate::stats::{inv_logit, softplus};

/// Posterior mean success probability of every dyad, in pair order.
pub fn posterior_mean_probabilities(design: &DyadDesign, samples: &[Sample]) -> Vec<f64> {
    let n = design.n_nodes();
    let mut p = vec![0.0; design.n_pairs()];
    for s in samples {
        for (k, (i, j)) in pairs(n).enumerate() {
            let eta = s.beta0 + design.offset(k, &s.beta) - s.positions.distance(i, j);
            p[k] += inv_logit(eta);
        }
    }
    let m = samples.len() as f64;
    p.iter_mut().for_each(|x| *x /= m);
    p
}

/// The state whose dyad probabilities are closest, in summed Kullback-Leibler
/// divergence, to `targets`. Equivalent to a maximum likelihood fit to the
/// fractional counts `T p_ij`; `start` should already be near the answer.
pub fn fit_to_probabilities(
    design: &DyadDesign,
    targets: &[f64],
    start: &LatentState,
) -> Result<LatentState> {
    let n = design.n_nodes();
    let dim = start.positions.dim();
    let p = design.n_columns();
    let objective = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let s = LatentState::from_flat(x, n, dim, p);
        let mut grad = vec![0.0; x.len()];
        let mut value = 0.0;
        for (k, (i, j)) in pairs(n).enumerate() {
            let d = s.positions.distance(i, j);
            let eta = s.beta0 + design.offset(k, &s.beta) - d;
            value += targets[k] * eta - softplus(eta);
            let r = targets[k] - inv_logit(eta);
            grad[0] += r;
            for (g, xk) in grad[1..=p].iter_mut().zip(design.row(k)) {
                *g += r * xk;
            }
            if d > 0.0 {
                let base = 1 + p;
                for c in 0..dim {
                    let diff = s.positions.row(i)[c] - s.positions.row(j)[c];
                    grad[base + i * dim + c] -= r * diff / d;
                    grad[base + j * dim + c] += r * diff / d;
                }
            }
        }
        Ok((value, grad))
    };
    let out = maximize_bfgs(objective, start.to_flat(), &BfgsConfig::default())?;
    let mut state = LatentState::from_flat(&out.x, n, dim, p);
    state.positions.center();
    Ok(state)
}
