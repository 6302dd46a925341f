//! Metropolis-within-Gibbs sampler for the latent position cluster model.

use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bic::BicReport;
use super::mixture::{argmax_rows, em_fit_mixture, kmeans_mixture, EmConfig, MixtureParams};
use super::mkl::{fit_to_probabilities, posterior_mean_probabilities};
use super::relabel::{map_partition, membership_probabilities, relabel_allocations};
use crate::error::{Error, Result};
use crate::lsm::{fit_mle, log_likelihood, procrustes_fit, LatentState, OptimizerConfig, Positions};
use crate::network::{pairs, DyadDesign, Network};
use crate::rng::{substream, substream_seed, Rng};
use crate::stats::{ln_binomial, log_sum_exp, softplus};

/// Prior hyperparameters. The mean prior variance is either given directly
/// or taken as `mean_variance_factor` times the per-coordinate variance of
/// the initial positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Priors {
    /// Normal(0, v) on the intercept and every coefficient.
    pub coefficient_variance: f64,
    pub mean_variance: Option<f64>,
    pub mean_variance_factor: f64,
    /// Inverse-gamma shape and scale for the component variances.
    pub variance_shape: f64,
    pub variance_scale: f64,
    /// Symmetric Dirichlet concentration on the weights.
    pub dirichlet: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self {
            coefficient_variance: 9.0,
            mean_variance: None,
            mean_variance_factor: 4.0,
            variance_shape: 2.0,
            variance_scale: 1.0,
            dirichlet: 1.0,
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.coefficient_variance,
            self.mean_variance.unwrap_or(1.0),
            self.mean_variance_factor,
            self.variance_shape,
            self.variance_scale,
            self.dirichlet,
        ];
        if all.iter().all(|&v| v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("prior hyperparameters must be positive".into()))
        }
    }

    fn resolve(&self, init: &Positions) -> ResolvedPriors {
        let mean_variance = self.mean_variance.unwrap_or_else(|| {
            let s = per_coordinate_variance(init);
            if s > 0.0 {
                self.mean_variance_factor * s
            } else {
                self.mean_variance_factor
            }
        });
        ResolvedPriors {
            coefficient_variance: self.coefficient_variance,
            mean_variance,
            variance_shape: self.variance_shape,
            variance_scale: self.variance_scale,
            dirichlet: self.dirichlet,
        }
    }
}

/// Hyperparameters with the mean prior variance fixed to a number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPriors {
    pub coefficient_variance: f64,
    pub mean_variance: f64,
    pub variance_shape: f64,
    pub variance_scale: f64,
    pub dirichlet: f64,
}

fn per_coordinate_variance(z: &Positions) -> f64 {
    let c = z.centroid();
    let ss: f64 = (0..z.n())
        .map(|i| z.row(i).iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    ss / (z.n() * z.dim()).max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub burn_in: usize,
    /// Run length after burn-in.
    pub iterations: usize,
    pub thin: usize,
    /// Initial standard deviation of the per-node random-walk proposal.
    pub position_step: f64,
    /// Initial multiplier on the coefficient proposal, whose shape is the
    /// inverse Fisher information at the starting state.
    pub coefficient_step: f64,
    /// Tune both step sizes during burn-in.
    pub adapt: bool,
    pub seed: u64,
    pub chains: usize,
    pub optimizer: OptimizerConfig,
    pub em: EmConfig,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self::fast(0)
    }
}

impl McmcConfig {
    /// Burn-in 10,000, run 1,000,000, every fiftieth kept.
    pub fn paper(seed: u64) -> Self {
        Self {
            burn_in: 10_000,
            iterations: 1_000_000,
            thin: 50,
            ..Self::fast(seed)
        }
    }

    /// Burn-in 10,000, run 40,000, every tenth kept.
    pub fn fast(seed: u64) -> Self {
        Self {
            burn_in: 10_000,
            iterations: 40_000,
            thin: 10,
            position_step: 0.5,
            coefficient_step: 1.0,
            adapt: true,
            seed,
            chains: 1,
            optimizer: OptimizerConfig::default(),
            em: EmConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::Config("thinning interval must be positive".into()));
        }
        if self.iterations % self.thin != 0 {
            return Err(Error::Config(format!(
                "thinning interval {} does not divide run length {}",
                self.thin, self.iterations
            )));
        }
        if self.chains == 0 {
            return Err(Error::Config("need at least one chain".into()));
        }
        if !(self.position_step > 0.0) || !(self.coefficient_step > 0.0) {
            return Err(Error::Config("proposal scales must be positive".into()));
        }
        Ok(())
    }

    /// Retained samples per chain.
    pub fn n_samples(&self) -> usize {
        if self.iterations == 0 {
            1
        } else {
            self.iterations / self.thin
        }
    }
}

/// Full sampler state for one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub positions: Positions,
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub mixture: MixtureParams,
    pub allocations: Vec<usize>,
}

/// One retained draw, with positions aligned to the reference configuration
/// and component means moved by the same rigid motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub positions: Positions,
    pub mixture: MixtureParams,
    pub allocations: Vec<usize>,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRates {
    pub positions: f64,
    pub coefficients: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcOutput {
    pub groups: usize,
    pub coefficient_names: Vec<String>,
    /// Relabeled samples, chains concatenated in order.
    pub samples: Vec<Sample>,
    /// `n x G` allocation frequencies.
    pub memberships: Vec<Vec<f64>>,
    pub map_partition: Vec<usize>,
    pub bic: BicReport,
    /// Post-burn-in rates averaged over chains.
    pub acceptance: AcceptanceRates,
    pub reference: Positions,
    pub posterior_mean: LatentState,
    /// Minimum Kullback-Leibler state: the configuration whose dyad
    /// probabilities best match the posterior mean probabilities. The
    /// criterion is evaluated here.
    pub plug_in: LatentState,
    pub priors: ResolvedPriors,
    /// Final (adapted) step sizes per chain.
    pub position_steps: Vec<f64>,
    pub coefficient_steps: Vec<f64>,
}

impl McmcOutput {
    /// Draws of `(beta0, beta...)`, one row per sample.
    pub fn coefficient_draws(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| std::iter::once(s.beta0).chain(s.beta.iter().copied()).collect())
            .collect()
    }

    /// Draws of coefficient `k` (not counting the intercept).
    pub fn beta_draws(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.beta[k]).collect()
    }

    /// Flat CSV of the thinned intercept and coefficient draws.
    pub fn coefficient_csv(&self) -> String {
        let mut out = String::from("sample,beta0");
        for name in &self.coefficient_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (s, row) in self.coefficient_draws().iter().enumerate() {
            out.push_str(&s.to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

#[inline]
fn dyad_term(a: f64, trials: f64, eta: f64) -> f64 {
    a * eta - trials * softplus(eta)
}

/// Single-chain transition kernels. Distances, covariate offsets and per-dyad
/// likelihood terms are cached as full `n x n` matrices and patched on
/// acceptance.
pub struct Sampler<'a> {
    n: usize,
    dim: usize,
    trials: f64,
    design: &'a DyadDesign,
    counts: Vec<f64>,
    offsets: Vec<f64>,
    dist: Vec<f64>,
    terms: Vec<f64>,
    ln_choose_total: f64,
    state: ChainState,
    priors: ResolvedPriors,
    /// Random-walk standard deviation for one node's position.
    pub position_step: f64,
    /// Multiplier on the Cholesky factor of the coefficient proposal.
    pub coefficient_step: f64,
    chol: Vec<f64>,
    scratch_dist: Vec<f64>,
    scratch_terms: Vec<f64>,
    scratch_pair: Vec<f64>,
    scratch_offsets: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(
        net: &Network,
        design: &'a DyadDesign,
        state: ChainState,
        priors: ResolvedPriors,
        position_step: f64,
        coefficient_step: f64,
    ) -> Result<Self> {
        let n = net.n_nodes();
        let p = design.n_columns();
        if design.n_nodes() != n {
            return Err(Error::Dimension("design and network disagree on node count".into()));
        }
        let latent = LatentState::new(state.positions.clone(), state.beta0, state.beta.clone());
        latent.check(n, p)?;
        if state.allocations.len() != n
            || state.allocations.iter().any(|&g| g >= state.mixture.n_groups())
        {
            return Err(Error::Dimension("allocations do not match the mixture".into()));
        }
        let dim = state.positions.dim();
        let t = net.trials();
        let trials = f64::from(t);
        let mut counts = vec![0.0; n * n];
        let mut offsets = vec![0.0; n * n];
        let mut dist = vec![0.0; n * n];
        let mut terms = vec![0.0; n * n];
        let mut ln_choose_total = 0.0;
        for (k, (i, j)) in pairs(n).enumerate() {
            let a = net.count(i, j);
            ln_choose_total += ln_binomial(t, a);
            let off = design.offset(k, &state.beta);
            let d = state.positions.distance(i, j);
            let term = dyad_term(f64::from(a), trials, state.beta0 + off - d);
            for (x, y) in [(i, j), (j, i)] {
                counts[x * n + y] = f64::from(a);
                offsets[x * n + y] = off;
                dist[x * n + y] = d;
                terms[x * n + y] = term;
            }
        }
        let chol = coefficient_proposal(design, &dist, n, &state, trials, priors.coefficient_variance);
        Ok(Self {
            n,
            dim,
            trials,
            design,
            counts,
            offsets,
            dist,
            terms,
            ln_choose_total,
            state,
            priors,
            position_step,
            coefficient_step,
            chol,
            scratch_dist: vec![0.0; n],
            scratch_terms: vec![0.0; n],
            scratch_pair: Vec::new(),
            scratch_offsets: Vec::new(),
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    /// Log-likelihood of the current state.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.n;
        let mut s = self.ln_choose_total;
        for i in 0..n {
            for j in i + 1..n {
                s += self.terms[i * n + j];
            }
        }
        s
    }

    /// Random-walk Metropolis move for node `i`'s position.
    pub fn update_position(&mut self, i: usize, rng: &mut Rng) -> bool {
        let n = self.n;
        let dim = self.dim;
        let mut prop = [0.0f64; 8];
        let mut prop_vec;
        let prop: &mut [f64] = if dim <= 8 {
            &mut prop[..dim]
        } else {
            prop_vec = vec![0.0; dim];
            &mut prop_vec
        };
        let old = self.state.positions.row(i);
        let g = self.state.allocations[i];
        let mu = &self.state.mixture.means[g];
        let s2 = self.state.mixture.variances[g];
        let mut sq_old = 0.0;
        let mut sq_new = 0.0;
        for k in 0..dim {
            let e: f64 = StandardNormal.sample(rng);
            prop[k] = old[k] + self.position_step * e;
            sq_old += (old[k] - mu[k]) * (old[k] - mu[k]);
            sq_new += (prop[k] - mu[k]) * (prop[k] - mu[k]);
        }
        let mut delta = -(sq_new - sq_old) / (2.0 * s2);
        let base = self.state.beta0;
        let row = i * n;
        for j in 0..n {
            if j == i {
                continue;
            }
            let zj = self.state.positions.row(j);
            let mut d2 = 0.0;
            for k in 0..dim {
                let t = prop[k] - zj[k];
                d2 += t * t;
            }
            let d = d2.sqrt();
            let term = dyad_term(self.counts[row + j], self.trials, base + self.offsets[row + j] - d);
            self.scratch_dist[j] = d;
            self.scratch_terms[j] = term;
            delta += term - self.terms[row + j];
        }
        let u: f64 = rng.random();
        if u.ln() < delta {
            self.state.positions.row_mut(i).copy_from_slice(prop);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let (d, t) = (self.scratch_dist[j], self.scratch_terms[j]);
                self.dist[row + j] = d;
                self.dist[j * n + i] = d;
                self.terms[row + j] = t;
                self.terms[j * n + i] = t;
            }
            true
        } else {
            false
        }
    }

    /// One sweep of node-wise position moves; returns the number accepted.
    pub fn update_positions(&mut self, rng: &mut Rng) -> usize {
        (0..self.n).filter(|&i| self.update_position(i, rng)).count()
    }

    /// Joint random-walk Metropolis move for the intercept and coefficients.
    pub fn update_coefficients(&mut self, rng: &mut Rng) -> bool {
        let k = self.state.beta.len() + 1;
        let eps: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let mut cur = Vec::with_capacity(k);
        cur.push(self.state.beta0);
        cur.extend_from_slice(&self.state.beta);
        let prop: Vec<f64> = (0..k)
            .map(|r| {
                cur[r]
                    + self.coefficient_step
                        * (0..=r).map(|c| self.chol[r * k + c] * eps[c]).sum::<f64>()
            })
            .collect();
        let cv = self.priors.coefficient_variance;
        let prior = |b: &[f64]| -b.iter().map(|x| x * x).sum::<f64>() / (2.0 * cv);
        let mut delta = prior(&prop) - prior(&cur);
        let n = self.n;
        let m = n * (n - 1) / 2;
        self.scratch_pair.resize(m, 0.0);
        self.scratch_offsets.resize(m, 0.0);
        let new_beta = &prop[1..];
        for (idx, (i, j)) in pairs(n).enumerate() {
            let off = if new_beta.is_empty() {
                0.0
            } else {
                self.design.offset(idx, new_beta)
            };
            let at = i * n + j;
            let term = dyad_term(self.counts[at], self.trials, prop[0] + off - self.dist[at]);
            self.scratch_offsets[idx] = off;
            self.scratch_pair[idx] = term;
            delta += term - self.terms[at];
        }
        let u: f64 = rng.random();
        if u.ln() < delta {
            self.state.beta0 = prop[0];
            self.state.beta.copy_from_slice(new_beta);
            for (idx, (i, j)) in pairs(n).enumerate() {
                let (off, t) = (self.scratch_offsets[idx], self.scratch_pair[idx]);
                self.offsets[i * n + j] = off;
                self.offsets[j * n + i] = off;
                self.terms[i * n + j] = t;
                self.terms[j * n + i] = t;
            }
            true
        } else {
            false
        }
    }

    /// Gibbs draw of every node's component.
    pub fn update_allocations(&mut self, rng: &mut Rng) {
        let g = self.state.mixture.n_groups();
        if g == 1 {
            return;
        }
        let mut lp = vec![0.0; g];
        for i in 0..self.n {
            self.state
                .mixture
                .component_log_densities(self.state.positions.row(i), &mut lp);
            let l = log_sum_exp(&lp);
            let mut u: f64 = rng.random();
            let mut pick = g - 1;
            for (c, x) in lp.iter().enumerate() {
                let p = (x - l).exp();
                if u < p {
                    pick = c;
                    break;
                }
                u -= p;
            }
            self.state.allocations[i] = pick;
        }
    }

    /// Conjugate Gibbs draws of weights, means and variances.
    pub fn update_mixture(&mut self, rng: &mut Rng) {
        let g = self.state.mixture.n_groups();
        let d = self.dim;
        let mut size = vec![0usize; g];
        let mut sums = vec![vec![0.0; d]; g];
        for i in 0..self.n {
            let c = self.state.allocations[i];
            size[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(self.state.positions.row(i)) {
                *s += x;
            }
        }
        let pr = self.priors;
        let draws: Vec<f64> = size
            .iter()
            .map(|&s| gamma(rng, pr.dirichlet + s as f64, 1.0))
            .collect();
        let total: f64 = draws.iter().sum();
        self.state.mixture.weights = draws.iter().map(|x| x / total).collect();
        for c in 0..g {
            let s2 = self.state.mixture.variances[c];
            let precision = size[c] as f64 / s2 + 1.0 / pr.mean_variance;
            let v = 1.0 / precision;
            for k in 0..d {
                let e: f64 = StandardNormal.sample(rng);
                self.state.mixture.means[c][k] = v * sums[c][k] / s2 + v.sqrt() * e;
            }
            let mu = &self.state.mixture.means[c];
            let ss: f64 = (0..self.n)
                .filter(|&i| self.state.allocations[i] == c)
                .map(|i| {
                    self.state
                        .positions
                        .row(i)
                        .iter()
                        .zip(mu)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .sum();
            let shape = pr.variance_shape + 0.5 * (size[c] * d) as f64;
            let rate = pr.variance_scale + 0.5 * ss;
            self.state.mixture.variances[c] = 1.0 / gamma(rng, shape, 1.0 / rate);
        }
    }

    /// One full iteration; returns `(positions accepted, coefficients accepted)`.
    pub fn sweep(&mut self, rng: &mut Rng) -> (usize, bool) {
        let z = self.update_positions(rng);
        let b = self.update_coefficients(rng);
        self.update_allocations(rng);
        self.update_mixture(rng);
        (z, b)
    }
}

fn gamma(rng: &mut Rng, shape: f64, scale: f64) -> f64 {
    Gamma::new(shape, scale)
        .expect("positive gamma parameters")
        .sample(rng)
        .max(f64::MIN_POSITIVE)
}

/// Lower Cholesky factor (row-major, `k x k`) of `(2.38^2 / k)` times the
/// inverse of the Fisher information plus prior precision.
fn coefficient_proposal(
    design: &DyadDesign,
    dist: &[f64],
    n: usize,
    state: &ChainState,
    trials: f64,
    prior_variance: f64,
) -> Vec<f64> {
    let k = state.beta.len() + 1;
    let mut info = nalgebra::DMatrix::<f64>::zeros(k, k);
    let mut x = vec![1.0; k];
    for (idx, (i, j)) in pairs(n).enumerate() {
        x[1..].copy_from_slice(design.row(idx));
        let eta = state.beta0 + design.offset(idx, &state.beta) - dist[i * n + j];
        let mu = crate::stats::inv_logit(eta);
        let w = trials * mu * (1.0 - mu);
        for r in 0..k {
            for c in 0..k {
                info[(r, c)] += w * x[r] * x[c];
            }
        }
    }
    for r in 0..k {
        info[(r, r)] += 1.0 / prior_variance;
    }
    let cov = info
        .try_inverse()
        .unwrap_or_else(|| nalgebra::DMatrix::identity(k, k) * prior_variance);
    let scaled = cov * (2.38 * 2.38 / k as f64);
    let l = nalgebra::Cholesky::new(scaled.clone())
        .map(|c| c.l())
        .unwrap_or_else(|| {
            nalgebra::DMatrix::from_fn(k, k, |r, c| if r == c { scaled[(r, r)].abs().sqrt() } else { 0.0 })
        });
    let mut out = vec![0.0; k * k];
    for r in 0..k {
        for c in 0..=r {
            out[r * k + c] = l[(r, c)];
        }
    }
    out
}

/// Posterior sampling started from a fresh maximum likelihood fit.
pub fn mcmc_sample(
    net: &Network,
    design: &DyadDesign,
    dim: usize,
    groups: usize,
    priors: &Priors,
    config: &McmcConfig,
) -> Result<McmcOutput> {
    config.validate()?;
    priors.validate()?;
    let (init, _) = fit_mle(net, design, dim, &config.optimizer)?;
    mcmc_sample_from(net, design, &init, groups, priors, config)
}

/// Posterior sampling started from `init`, whose positions also serve as the
/// Procrustes reference. The initial mixture is the EM fit to those positions.
pub fn mcmc_sample_from(
    net: &Network,
    design: &DyadDesign,
    init: &LatentState,
    groups: usize,
    priors: &Priors,
    config: &McmcConfig,
) -> Result<McmcOutput> {
    config.validate()?;
    priors.validate()?;
    init.check(net.n_nodes(), design.n_columns())?;
    let em = EmConfig {
        seed: substream_seed(config.seed, "em"),
        ..config.em
    };
    let (mixture, allocations) = match em_fit_mixture(&init.positions, groups, &em) {
        Ok(fit) => {
            let allocations = fit.hard_assignments();
            (fit.params, allocations)
        }
        Err(Error::VarianceCollapse { .. }) => {
            let params = kmeans_mixture(&init.positions, groups, em.seed)?;
            let allocations = argmax_rows(&params.responsibilities(&init.positions));
            (params, allocations)
        }
        Err(e) => return Err(e),
    };
    let start = ChainState {
        positions: init.positions.clone(),
        beta0: init.beta0,
        beta: init.beta.clone(),
        mixture,
        allocations,
    };
    let resolved = priors.resolve(&init.positions);
    let reference = init.positions.clone();

    let runs: Vec<Result<ChainRun>> = (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(config.seed, &format!("chain-{c}"));
            run_chain(net, design, start.clone(), resolved, config, &reference, &mut rng)
        })
        .collect();
    let runs: Vec<ChainRun> = runs.into_iter().collect::<Result<_>>()?;

    let mut samples: Vec<Sample> = Vec::new();
    let mut acc_z = 0.0;
    let mut acc_b = 0.0;
    let mut position_steps = Vec::new();
    let mut coefficient_steps = Vec::new();
    for r in runs {
        samples.extend(r.samples);
        acc_z += r.acceptance.positions;
        acc_b += r.acceptance.coefficients;
        position_steps.push(r.position_step);
        coefficient_steps.push(r.coefficient_step);
    }
    let chains = config.chains as f64;
    relabel_samples(&mut samples, groups);
    let allocs: Vec<Vec<usize>> = samples.iter().map(|s| s.allocations.clone()).collect();
    let memberships = membership_probabilities(&allocs, groups);
    let map = map_partition(&memberships);

    let posterior_mean = posterior_mean_state(&samples);
    let targets = posterior_mean_probabilities(design, &samples);
    let plug_in = fit_to_probabilities(design, &targets, &posterior_mean)?;
    let ll = log_likelihood(net, design, &plug_in)?;
    let refit = EmConfig {
        seed: substream_seed(config.seed, "bic-em"),
        ..config.em
    };
    let mixture_ll = match em_fit_mixture(&plug_in.positions, groups, &refit) {
        Ok(f) => f.log_likelihood,
        Err(_) => posterior_mean_mixture(&samples).log_likelihood(&plug_in.positions),
    };
    let bic = BicReport::from_parts(
        ll,
        design.n_columns(),
        net.n_dyads(),
        mixture_ll,
        groups,
        init.positions.dim(),
        net.n_nodes(),
    );

    Ok(McmcOutput {
        groups,
        coefficient_names: design.names().to_vec(),
        samples,
        memberships,
        map_partition: map,
        bic,
        acceptance: AcceptanceRates {
            positions: acc_z / chains,
            coefficients: acc_b / chains,
        },
        reference,
        posterior_mean,
        plug_in,
        priors: resolved,
        position_steps,
        coefficient_steps,
    })
}

/// Relabels allocations and mixture components of every sample against a
/// running reference partition.
pub fn relabel_samples(samples: &mut [Sample], groups: usize) {
    let allocs: Vec<Vec<usize>> = samples.iter().map(|s| s.allocations.clone()).collect();
    let perms = relabel_allocations(&allocs, groups);
    for (s, perm) in samples.iter_mut().zip(perms) {
        s.allocations.iter_mut().for_each(|g| *g = perm[*g]);
        let mut order = vec![0; groups];
        for (old, &new) in perm.iter().enumerate() {
            order[new] = old;
        }
        s.mixture = s.mixture.reordered(&order);
    }
}

fn posterior_mean_state(samples: &[Sample]) -> LatentState {
    let m = samples.len() as f64;
    let first = &samples[0];
    let mut z = Positions::zeros(first.positions.n(), first.positions.dim());
    let mut beta0 = 0.0;
    let mut beta = vec![0.0; first.beta.len()];
    for s in samples {
        for (a, b) in z.as_mut_slice().iter_mut().zip(s.positions.as_slice()) {
            *a += b / m;
        }
        beta0 += s.beta0 / m;
        for (a, b) in beta.iter_mut().zip(&s.beta) {
            *a += b / m;
        }
    }
    LatentState::new(z, beta0, beta)
}

fn posterior_mean_mixture(samples: &[Sample]) -> MixtureParams {
    let m = samples.len() as f64;
    let g = samples[0].mixture.n_groups();
    let d = samples[0].mixture.dim();
    let mut out = MixtureParams {
        weights: vec![0.0; g],
        means: vec![vec![0.0; d]; g],
        variances: vec![0.0; g],
    };
    for s in samples {
        for c in 0..g {
            out.weights[c] += s.mixture.weights[c] / m;
            out.variances[c] += s.mixture.variances[c] / m;
            for k in 0..d {
                out.means[c][k] += s.mixture.means[c][k] / m;
            }
        }
    }
    out
}

struct ChainRun {
    samples: Vec<Sample>,
    acceptance: AcceptanceRates,
    position_step: f64,
    coefficient_step: f64,
}

const ADAPT_BATCH: usize = 50;
const POSITION_TARGET: f64 = 0.3;
const COEFFICIENT_TARGET: f64 = 0.25;

fn run_chain(
    net: &Network,
    design: &DyadDesign,
    start: ChainState,
    priors: ResolvedPriors,
    config: &McmcConfig,
    reference: &Positions,
    rng: &mut Rng,
) -> Result<ChainRun> {
    let mut sampler = Sampler::new(
        net,
        design,
        start,
        priors,
        config.position_step,
        config.coefficient_step,
    )?;
    if config.iterations == 0 {
        let sample = retain(&sampler, reference)?;
        return Ok(ChainRun {
            samples: vec![sample],
            acceptance: AcceptanceRates {
                positions: 0.0,
                coefficients: 0.0,
            },
            position_step: sampler.position_step,
            coefficient_step: sampler.coefficient_step,
        });
    }
    let n = net.n_nodes();
    let (mut total_z, mut total_b) = (0usize, 0usize);
    let (mut batch_z, mut batch_b) = (0usize, 0usize);
    for t in 1..=config.burn_in {
        let (z, b) = sampler.sweep(rng);
        total_z += z;
        total_b += usize::from(b);
        batch_z += z;
        batch_b += usize::from(b);
        if config.adapt && t % ADAPT_BATCH == 0 {
            let rz = batch_z as f64 / (ADAPT_BATCH * n) as f64;
            let rb = batch_b as f64 / ADAPT_BATCH as f64;
            sampler.position_step *= (2.0 * (rz - POSITION_TARGET)).exp();
            sampler.coefficient_step *= (2.0 * (rb - COEFFICIENT_TARGET)).exp();
            batch_z = 0;
            batch_b = 0;
        }
    }
    if config.burn_in > 0 {
        if total_z == 0 && n > 1 {
            return Err(Error::ZeroAcceptance {
                block: "positions".into(),
            });
        }
        if total_b == 0 {
            return Err(Error::ZeroAcceptance {
                block: "coefficients".into(),
            });
        }
    }
    let mut samples = Vec::with_capacity(config.iterations / config.thin);
    let (mut acc_z, mut acc_b) = (0usize, 0usize);
    for t in 1..=config.iterations {
        let (z, b) = sampler.sweep(rng);
        acc_z += z;
        acc_b += usize::from(b);
        if t % config.thin == 0 {
            samples.push(retain(&sampler, reference)?);
        }
    }
    let iters = config.iterations as f64;
    Ok(ChainRun {
        samples,
        acceptance: AcceptanceRates {
            positions: acc_z as f64 / (iters * n as f64),
            coefficients: acc_b as f64 / iters,
        },
        position_step: sampler.position_step,
        coefficient_step: sampler.coefficient_step,
    })
}

fn retain(sampler: &Sampler<'_>, reference: &Positions) -> Result<Sample> {
    let st = sampler.state();
    let motion = procrustes_fit(&st.positions, reference)?;
    let mut mixture = st.mixture.clone();
    for m in &mut mixture.means {
        *m = motion.apply_point(m);
    }
    Ok(Sample {
        beta0: st.beta0,
        beta: st.beta.clone(),
        positions: motion.apply(&st.positions),
        mixture,
        allocations: st.allocations.clone(),
        log_likelihood: sampler.log_likelihood(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsm::simulate_network;

    fn small() -> (Network, DyadDesign, LatentState) {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let a = i as f64 * 0.52;
                let r = if i % 2 == 0 { 1.0 } else { 2.0 };
                vec![r * a.cos(), r * a.sin()]
            })
            .collect();
        let z = Positions::from_rows(&rows).unwrap();
        let truth = LatentState::new(z, 1.0, vec![]);
        let design = DyadDesign::empty(12);
        let labels: Vec<String> = (0..12).map(|i| format!("n{i}")).collect();
        let net = simulate_network(&truth, &design, &labels, 3, 5).unwrap();
        (net, design, truth)
    }

    fn quick(seed: u64) -> McmcConfig {
        McmcConfig {
            burn_in: 200,
            iterations: 300,
            thin: 3,
            ..McmcConfig::fast(seed)
        }
    }

    #[test]
    fn config_validation() {
        assert!(McmcConfig { thin: 7, ..McmcConfig::fast(0) }.validate().is_err());
        assert!(McmcConfig { thin: 0, ..McmcConfig::fast(0) }.validate().is_err());
        assert_eq!(McmcConfig::paper(0).n_samples(), 20_000);
        assert_eq!(McmcConfig::fast(0).n_samples(), 4_000);
        assert!(Priors { dirichlet: 0.0, ..Priors::default() }.validate().is_err());
    }

    #[test]
    fn sample_count_and_memberships() {
        let (net, design, _) = small();
        let out = mcmc_sample(&net, &design, 2, 2, &Priors::default(), &quick(1)).unwrap();
        assert_eq!(out.samples.len(), 100);
        for row in &out.memberships {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(out.acceptance.positions > 0.0 && out.acceptance.coefficients > 0.0);
    }

    #[test]
    fn aligned_samples_keep_distances() {
        let (net, design, _) = small();
        let cfg = quick(2);
        let init = fit_mle(&net, &design, 2, &cfg.optimizer).unwrap().0;
        let em = EmConfig {
            seed: substream_seed(cfg.seed, "em"),
            ..cfg.em
        };
        let fit = em_fit_mixture(&init.positions, 2, &em).unwrap();
        let start = ChainState {
            positions: init.positions.clone(),
            beta0: init.beta0,
            beta: vec![],
            allocations: fit.hard_assignments(),
            mixture: fit.params,
        };
        let pr = Priors::default().resolve(&init.positions);
        let mut s = Sampler::new(&net, &design, start, pr, 0.3, 1.0).unwrap();
        let mut rng = crate::rng::rng_from_seed(9);
        for _ in 0..50 {
            s.sweep(&mut rng);
            let raw = s.state().positions.pairwise_distances();
            let sample = retain(&s, &init.positions).unwrap();
            let aligned = sample.positions.pairwise_distances();
            for (a, b) in raw.iter().zip(&aligned) {
                assert!((a - b).abs() < 1e-12);
            }
            let ll = log_likelihood(
                &net,
                &design,
                &LatentState::new(s.state().positions.clone(), s.state().beta0, vec![]),
            )
            .unwrap();
            assert!((ll - s.log_likelihood()).abs() < 1e-9);
        }
    }

    #[test]
    fn run_length_zero_returns_initial_state() {
        let (net, design, _) = small();
        let cfg = McmcConfig {
            iterations: 0,
            ..quick(3)
        };
        let init = fit_mle(&net, &design, 2, &cfg.optimizer).unwrap().0;
        let out = mcmc_sample_from(&net, &design, &init, 2, &Priors::default(), &cfg).unwrap();
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.samples[0].beta0, init.beta0);
        for (a, b) in out.samples[0]
            .positions
            .as_slice()
            .iter()
            .zip(init.positions.as_slice())
        {
            assert!((a - b).abs() < 1e-12);
        }
        for (row, &g) in out.memberships.iter().zip(&out.samples[0].allocations) {
            assert_eq!(row[g], 1.0);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (net, design, _) = small();
        let a = mcmc_sample(&net, &design, 2, 2, &Priors::default(), &quick(4)).unwrap();
        let b = mcmc_sample(&net, &design, 2, 2, &Priors::default(), &quick(4)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = McmcConfig { chains: 2, ..quick(4) };
        let x = mcmc_sample(&net, &design, 2, 2, &Priors::default(), &c).unwrap();
        let y = mcmc_sample(&net, &design, 2, 2, &Priors::default(), &c).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.samples.len(), 200);
    }

    #[test]
    fn zero_acceptance_is_reported() {
        let (net, design, _) = small();
        let cfg = McmcConfig {
            position_step: 1e6,
            adapt: false,
            ..quick(5)
        };
        let err = mcmc_sample(&net, &design, 2, 1, &Priors::default(), &cfg).unwrap_err();
        assert!(matches!(err, Error::ZeroAcceptance { .. }));
    }
}
