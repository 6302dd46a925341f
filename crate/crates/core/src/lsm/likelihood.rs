use super::state::{LatentState, Positions};
use crate::error::{Error, Result};
use crate::network::{pairs, DyadDesign, Network};
use crate::stats::{inv_logit, ln_binomial, softplus};

/// `beta0 + x . beta - distance`.
#[inline]
pub fn linear_predictor(beta0: f64, beta: &[f64], x: &[f64], distance: f64) -> f64 {
    beta0 + x.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() - distance
}

/// Edge probability for one dyad.
pub fn edge_probability(state: &LatentState, x: &[f64], distance: f64) -> Result<f64> {
    if x.len() != state.beta.len() {
        return Err(Error::Dimension(format!(
            "covariate row of length {} for {} coefficients",
            x.len(),
            state.beta.len()
        )));
    }
    let eta = linear_predictor(state.beta0, &state.beta, x, distance);
    if !eta.is_finite() {
        return Err(Error::NonFinite(format!("linear predictor {eta}")));
    }
    Ok(inv_logit(eta))
}

fn check_dims(net: &Network, design: &DyadDesign, state: &LatentState) -> Result<()> {
    if design.n_nodes() != net.n_nodes() {
        return Err(Error::Dimension(format!(
            "design built for {} nodes, network has {}",
            design.n_nodes(),
            net.n_nodes()
        )));
    }
    state.check(net.n_nodes(), design.n_columns())
}

/// Binomial log-likelihood summed over dyads.
///
/// Each term is evaluated as `ln C(T, A) + A eta - T softplus(eta)`, which is
/// `A ln mu + (T - A) ln(1 - mu)` without forming `mu`.
pub fn log_likelihood(net: &Network, design: &DyadDesign, state: &LatentState) -> Result<f64> {
    check_dims(net, design, state)?;
    let t = net.trials();
    let tf = f64::from(t);
    let lnc: Vec<f64> = (0..=t).map(|a| ln_binomial(t, a)).collect();
    let n = net.n_nodes();
    let mut total = 0.0;
    for (k, (i, j)) in pairs(n).enumerate() {
        let a = net.count(i, j);
        let eta = state.beta0 + design.offset(k, &state.beta) - state.positions.distance(i, j);
        total += lnc[a as usize] + f64::from(a) * eta - tf * softplus(eta);
    }
    if total.is_nan() {
        return Err(Error::NonFinite("log-likelihood".into()));
    }
    Ok(total)
}

/// Gradient of the log-likelihood with respect to `(beta0, beta, Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub positions: Positions,
    /// Dyads whose latent points coincide; their distance term contributes a
    /// zero subgradient.
    pub coincident_pairs: usize,
}

impl Gradient {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.beta.len() + self.positions.as_slice().len());
        v.push(self.beta0);
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(self.positions.as_slice());
        v
    }
}

/// Analytic gradient. With the canonical logit link the score of each linear
/// predictor is `A - T mu`; positions pick up `-(Z_i - Z_j) / d_ij` from the
/// distance.
pub fn log_likelihood_gradient(
    net: &Network,
    design: &DyadDesign,
    state: &LatentState,
) -> Result<Gradient> {
    check_dims(net, design, state)?;
    let n = net.n_nodes();
    let dim = state.positions.dim();
    let tf = f64::from(net.trials());
    let mut g0 = 0.0;
    let mut gb = vec![0.0; state.beta.len()];
    let mut gz = Positions::zeros(n, dim);
    let mut coincident = 0;
    let z = &state.positions;
    for (k, (i, j)) in pairs(n).enumerate() {
        let d = z.distance(i, j);
        let x = design.row(k);
        let eta = state.beta0 + design.offset(k, &state.beta) - d;
        let r = f64::from(net.count(i, j)) - tf * inv_logit(eta);
        g0 += r;
        for (g, xk) in gb.iter_mut().zip(x) {
            *g += r * xk;
        }
        if d > 0.0 {
            let s = -r / d;
            for c in 0..dim {
                let diff = z.row(i)[c] - z.row(j)[c];
                gz.row_mut(i)[c] += s * diff;
                gz.row_mut(j)[c] -= s * diff;
            }
        } else {
            coincident += 1;
        }
    }
    Ok(Gradient {
        beta0: g0,
        beta: gb,
        positions: gz,
        coincident_pairs: coincident,
    })
}

/// Log-likelihood plus an isotropic Gaussian log-density (up to a constant)
/// on the positions, and its gradient. `None` disables the penalty.
pub fn penalized_objective(
    net: &Network,
    design: &DyadDesign,
    state: &LatentState,
    shrinkage_variance: Option<f64>,
) -> Result<(f64, f64, Gradient)> {
    let ll = log_likelihood(net, design, state)?;
    let mut grad = log_likelihood_gradient(net, design, state)?;
    let mut obj = ll;
    if let Some(v) = shrinkage_variance {
        let z = state.positions.as_slice();
        obj -= z.iter().map(|x| x * x).sum::<f64>() / (2.0 * v);
        for (g, x) in grad.positions.as_mut_slice().iter_mut().zip(z) {
            *g -= x / v;
        }
    }
    Ok((obj, ll, grad))
}
