//! Spherical Gaussian mixtures over latent positions and their EM fit.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsm::Positions;
use crate::rng::rng_from_seed;
use crate::stats::log_sum_exp;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Weights, means and spherical variances of a `G`-component mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
}

impl MixtureParams {
    pub fn n_groups(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.n_groups();
        if g == 0 || self.means.len() != g || self.variances.len() != g {
            return Err(Error::Dimension("inconsistent mixture component counts".into()));
        }
        let s: f64 = self.weights.iter().sum();
        if (s - 1.0).abs() > 1e-9 || self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Validation(format!("mixture weights sum to {s}")));
        }
        if self.variances.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Validation("mixture variances must be positive".into()));
        }
        Ok(())
    }

    /// Free parameters: `G - 1` weights, `G d` mean coordinates, `G` variances.
    pub fn n_free_params(groups: usize, dim: usize) -> usize {
        groups - 1 + groups * dim + groups
    }

    /// `ln lambda_g + ln N(z; mu_g, sigma_g^2 I)` for each component.
    pub fn component_log_densities(&self, z: &[f64], out: &mut [f64]) {
        let d = z.len() as f64;
        for (g, o) in out.iter_mut().enumerate() {
            let v = self.variances[g];
            let sq: f64 = z
                .iter()
                .zip(&self.means[g])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            *o = self.weights[g].ln() - 0.5 * d * (LN_2PI + v.ln()) - 0.5 * sq / v;
        }
    }

    pub fn log_likelihood(&self, z: &Positions) -> f64 {
        let mut buf = vec![0.0; self.n_groups()];
        (0..z.n())
            .map(|i| {
                self.component_log_densities(z.row(i), &mut buf);
                log_sum_exp(&buf)
            })
            .sum()
    }

    /// Posterior component probabilities for each point.
    pub fn responsibilities(&self, z: &Positions) -> Vec<Vec<f64>> {
        let mut buf = vec![0.0; self.n_groups()];
        (0..z.n())
            .map(|i| {
                self.component_log_densities(z.row(i), &mut buf);
                let l = log_sum_exp(&buf);
                buf.iter().map(|x| (x - l).exp()).collect()
            })
            .collect()
    }

    /// Component `g` of the result is component `order[g]` of `self`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            weights: order.iter().map(|&g| self.weights[g]).collect(),
            means: order.iter().map(|&g| self.means[g].clone()).collect(),
            variances: order.iter().map(|&g| self.variances[g]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Relative log-likelihood change at which EM stops.
    pub tolerance: f64,
    /// Smallest admissible component variance.
    pub variance_floor: f64,
    /// Restarts allowed, across all starts, after a component collapses.
    pub max_restarts: usize,
    /// Independent starts; the best final log-likelihood wins.
    pub starts: usize,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1_000,
            tolerance: 1e-10,
            variance_floor: 1e-8,
            max_restarts: 20,
            starts: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmFit {
    pub params: MixtureParams,
    pub responsibilities: Vec<Vec<f64>>,
    /// Log-likelihood before each M-step and at the final parameters.
    pub trace: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// A single-component fit whose variance had to be raised to the floor.
    pub variance_floored: bool,
    pub restarts: usize,
}

impl EmFit {
    /// Most probable component for each point (ties to the lower index).
    pub fn hard_assignments(&self) -> Vec<usize> {
        argmax_rows(&self.responsibilities)
    }
}

pub(crate) fn argmax_rows(rows: &[Vec<f64>]) -> Vec<usize> {
    rows.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (g, &p)| {
                    if p > best.1 {
                        (g, p)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

fn spread(z: &Positions) -> (Vec<f64>, f64) {
    let c = z.centroid();
    let ss: f64 = (0..z.n())
        .map(|i| {
            z.row(i)
                .iter()
                .zip(&c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum();
    (c, ss / (z.n() * z.dim()) as f64)
}

/// Fits a `groups`-component spherical Gaussian mixture to the rows of `z`.
///
/// A single component has a closed form; its variance is raised to the floor
/// (and flagged) for degenerate data. With more components, EM starts from
/// k-means++ seeded means; a component whose weight vanishes or whose
/// variance drops below the floor triggers a restart, and running out of
/// restarts is an error.
pub fn em_fit_mixture(z: &Positions, groups: usize, config: &EmConfig) -> Result<EmFit> {
    let n = z.n();
    if groups == 0 {
        return Err(Error::Config("need at least one mixture component".into()));
    }
    if n < groups {
        return Err(Error::Config(format!(
            "{n} points cannot support {groups} components"
        )));
    }
    if groups == 1 {
        let (mean, mut var) = spread(z);
        let floored = var < config.variance_floor;
        if floored {
            var = config.variance_floor;
        }
        let params = MixtureParams {
            weights: vec![1.0],
            means: vec![mean],
            variances: vec![var],
        };
        let ll = params.log_likelihood(z);
        return Ok(EmFit {
            params,
            responsibilities: vec![vec![1.0]; n],
            trace: vec![ll],
            log_likelihood: ll,
            iterations: 0,
            converged: true,
            variance_floored: floored,
            restarts: 0,
        });
    }

    let mut rng = rng_from_seed(config.seed);
    let mut restarts = 0;
    let mut best: Option<EmFit> = None;
    let mut done = 0;
    while done < config.starts.max(1) {
        let init = kmeans_pp_init(z, groups, &mut rng);
        match run_em(z, init, config) {
            Some(mut fit) => {
                done += 1;
                fit.restarts = restarts;
                if best
                    .as_ref()
                    .is_none_or(|b| fit.log_likelihood > b.log_likelihood)
                {
                    best = Some(fit);
                }
            }
            None => {
                restarts += 1;
                if restarts > config.max_restarts {
                    return Err(Error::VarianceCollapse { restarts: restarts - 1 });
                }
            }
        }
    }
    let mut fit = best.expect("at least one start");
    fit.restarts = restarts;
    Ok(fit)
}

fn kmeans_pp_init(z: &Positions, groups: usize, rng: &mut crate::rng::Rng) -> MixtureParams {
    let n = z.n();
    let mut centers: Vec<usize> = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(z.row(i), z.row(centers[0]))).collect();
    while centers.len() < groups {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut k = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    k = i;
                    break;
                }
                u -= w;
            }
            k
        } else {
            rng.random_range(0..n)
        };
        centers.push(pick);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(z.row(i), z.row(pick)));
        }
    }
    let (_, var) = spread(z);
    MixtureParams {
        weights: vec![1.0 / groups as f64; groups],
        means: centers.iter().map(|&c| z.row(c).to_vec()).collect(),
        variances: vec![var.max(f64::MIN_POSITIVE); groups],
    }
}

/// Hard k-means (Lloyd iterations from a k-means++ start) turned into a
/// mixture: cluster shares, centroids and one pooled spherical variance.
/// Used as a starting mixture when EM collapses.
pub fn kmeans_mixture(z: &Positions, groups: usize, seed: u64) -> Result<MixtureParams> {
    let n = z.n();
    let d = z.dim();
    if groups == 0 || n < groups {
        return Err(Error::Config(format!(
            "{n} points cannot support {groups} components"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut means = kmeans_pp_init(z, groups, &mut rng).means;
    let mut assign = vec![usize::MAX; n];
    for _ in 0..100 {
        let mut changed = false;
        for (i, a) in assign.iter_mut().enumerate() {
            let best = (0..groups)
                .min_by(|&x, &y| sq_dist(z.row(i), &means[x]).total_cmp(&sq_dist(z.row(i), &means[y])))
                .expect("at least one group");
            if *a != best {
                *a = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (g, m) in means.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assign[i] == g).collect();
            if members.is_empty() {
                continue;
            }
            for (k, v) in m.iter_mut().enumerate() {
                *v = members.iter().map(|&i| z.row(i)[k]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    let ss: f64 = (0..n).map(|i| sq_dist(z.row(i), &means[assign[i]])).sum();
    let pooled = (ss / (n * d) as f64).max(spread(z).1 * 1e-2).max(1e-8);
    let weights = (0..groups)
        .map(|g| (assign.iter().filter(|&&a| a == g).count() as f64).max(0.5) / n as f64)
        .collect::<Vec<_>>();
    let total: f64 = weights.iter().sum();
    Ok(MixtureParams {
        weights: weights.iter().map(|w| w / total).collect(),
        means,
        variances: vec![pooled; groups],
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One EM run; `None` when a component collapses.
fn run_em(z: &Positions, mut params: MixtureParams, config: &EmConfig) -> Option<EmFit> {
    let n = z.n();
    let d = z.dim();
    let g = params.n_groups();
    let mut trace = Vec::new();
    let mut resp = vec![vec![0.0; g]; n];
    let mut buf = vec![0.0; g];
    let mut converged = false;
    let mut iterations = 0;

    loop {
        // E-step
        let mut ll = 0.0;
        for (i, r) in resp.iter_mut().enumerate() {
            params.component_log_densities(z.row(i), &mut buf);
            let l = log_sum_exp(&buf);
            ll += l;
            for (rg, b) in r.iter_mut().zip(&buf) {
                *rg = (b - l).exp();
            }
        }
        if let Some(&prev) = trace.last() {
            if ll - prev <= config.tolerance * (1.0 + ll.abs()) {
                converged = true;
            }
        }
        trace.push(ll);
        if converged || iterations >= config.max_iterations {
            break;
        }
        // M-step
        for c in 0..g {
            let nk: f64 = resp.iter().map(|r| r[c]).sum();
            if nk < 1e-10 {
                return None;
            }
            let mut mean = vec![0.0; d];
            for (i, r) in resp.iter().enumerate() {
                for (m, x) in mean.iter_mut().zip(z.row(i)) {
                    *m += r[c] * x;
                }
            }
            mean.iter_mut().for_each(|m| *m /= nk);
            let ss: f64 = resp
                .iter()
                .enumerate()
                .map(|(i, r)| r[c] * sq_dist(z.row(i), &mean))
                .sum();
            let var = ss / (d as f64 * nk);
            if !(var >= config.variance_floor) {
                return None;
            }
            params.weights[c] = nk / n as f64;
            params.means[c] = mean;
            params.variances[c] = var;
        }
        iterations += 1;
    }
    let log_likelihood = *trace.last().expect("nonempty trace");
    Some(EmFit {
        params,
        responsibilities: resp,
        trace,
        log_likelihood,
        iterations,
        converged,
        variance_floored: false,
        restarts: 0,
    })
}
