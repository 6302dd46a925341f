use serde::{Deserialize, Serialize};

use super::likelihood::penalized_objective;
use super::mds::init_mds;
use super::optimize::{maximize_bfgs, BfgsConfig};
use super::state::{LatentState, Positions};
use crate::error::{Error, Result};
use crate::network::{pairs, DyadDesign, Network};
use crate::stats::inv_logit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Largest absolute gradient component accepted as converged.
    pub gradient_tolerance: f64,
    /// Variance of the Gaussian shrinkage on each latent coordinate; `None`
    /// fits the plain likelihood.
    pub shrinkage_variance: Option<f64>,
    /// Relative objective gain below which ten consecutive steps count as
    /// convergence.
    pub value_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5_000,
            gradient_tolerance: 1e-5,
            shrinkage_variance: Some(100.0),
            value_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Unpenalized log-likelihood at the returned state.
    pub log_likelihood: f64,
    /// Objective actually maximized (log-likelihood plus shrinkage term).
    pub objective: f64,
    pub iterations: usize,
    /// Small gradient, or objective stagnation (see `stalled`).
    pub converged: bool,
    /// Stopped because the objective stopped improving. Typical when the
    /// maximum has coincident positions, where the likelihood has a kink.
    pub stalled: bool,
    pub gradient_norm: f64,
}

/// Maximum likelihood fit started from an MDS layout of the geodesic
/// distances.
pub fn fit_mle(
    net: &Network,
    design: &DyadDesign,
    dim: usize,
    config: &OptimizerConfig,
) -> Result<(LatentState, FitReport)> {
    if dim == 0 {
        return Err(Error::Config("latent dimension must be at least 1".into()));
    }
    let mut z = init_mds(net, dim);
    jitter(&mut z);
    let beta0 = match_density(net, &z);
    let init = LatentState::new(z, beta0, vec![0.0; design.n_columns()]);
    fit_mle_from(net, design, init, config)
}

/// Maximum likelihood fit from a given starting state. The returned positions
/// are centred at the origin.
pub fn fit_mle_from(
    net: &Network,
    design: &DyadDesign,
    init: LatentState,
    config: &OptimizerConfig,
) -> Result<(LatentState, FitReport)> {
    let n = net.n_nodes();
    let p = design.n_columns();
    init.check(n, p)?;
    let dim = init.positions.dim();
    let shrink = config.shrinkage_variance;
    if let Some(v) = shrink {
        if !(v > 0.0) {
            return Err(Error::Config("shrinkage variance must be positive".into()));
        }
    }
    let objective = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let s = LatentState::from_flat(x, n, dim, p);
        let (obj, _, g) = penalized_objective(net, design, &s, shrink)?;
        Ok((obj, g.to_flat()))
    };
    let bfgs = BfgsConfig {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        value_tolerance: config.value_tolerance,
        ..BfgsConfig::default()
    };
    let out = maximize_bfgs(objective, init.to_flat(), &bfgs)?;
    let mut state = LatentState::from_flat(&out.x, n, dim, p);
    state.positions.center();
    let (obj, ll, g) = penalized_objective(net, design, &state, shrink)?;
    let gradient_norm = g.to_flat().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    // Centring never lowers the objective; report the final state.
    let report = FitReport {
        log_likelihood: ll,
        objective: obj,
        iterations: out.iterations,
        converged: gradient_norm <= config.gradient_tolerance || out.stalled,
        stalled: out.stalled,
        gradient_norm,
    };
    Ok((state, report))
}

/// Deterministic perturbation of order 1e-6 so no two points coincide.
fn jitter(z: &mut Positions) {
    let dim = z.dim();
    for i in 0..z.n() {
        for (k, x) in z.row_mut(i).iter_mut().enumerate() {
            let t = ((i * dim + k + 1) as f64 * 12.9898).sin() * 43_758.545_3;
            *x += 1e-6 * (2.0 * t.fract().abs() - 1.0);
        }
    }
}

/// Intercept for which the expected number of successes matches the data,
/// given the distances of `z`.
fn match_density(net: &Network, z: &Positions) -> f64 {
    let n = net.n_nodes();
    let tf = f64::from(net.trials());
    let observed: f64 = net.pair_counts().iter().map(|&a| f64::from(a)).sum();
    let d: Vec<f64> = pairs(n).map(|(i, j)| z.distance(i, j)).collect();
    let m = d.len() as f64;
    // Keep away from the saturated limits.
    let target = (observed / tf).clamp(0.5, (m - 0.5).max(0.5));
    let (mut lo, mut hi) = (-50.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let expected: f64 = d.iter().map(|&x| inv_logit(mid - x)).sum();
        if expected < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
