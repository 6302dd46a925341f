//! Independent reference implementations shared by the integration tests and
//! the acceptance suite.

#![allow(dead_code)]

use lsnet::lsm::{log_likelihood, log_likelihood_gradient, LatentState, Positions};
use lsnet::network::{DyadDesign, Network};
use lsnet::rng::{rng_from_seed, Rng};
use rand::Rng as _;

pub struct Instance {
    pub net: Network,
    pub design: DyadDesign,
    pub state: LatentState,
    /// Covariate rows in pair order, as plain vectors.
    pub rows: Vec<Vec<f64>>,
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Random network, design and state with moderate linear predictors.
pub fn random_instance(seed: u64, n: usize) -> Instance {
    let mut rng = rng_from_seed(seed);
    let trials = 3;
    let dim = rng.random_range(1..=3);
    let p = rng.random_range(0..=2);
    let m = n * (n - 1) / 2;
    let counts: Vec<u32> = (0..m).map(|_| rng.random_range(0..=trials)).collect();
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..m).map(|_| rng.random_range(0.0..2.0)).collect())
        .collect();
    let names = (0..p).map(|k| format!("x{k}")).collect();
    let design = DyadDesign::from_columns(n, names, columns.clone()).unwrap();
    let z: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let state = LatentState::new(
        Positions::from_vec(n, dim, z).unwrap(),
        rng.random_range(-1.0..2.0),
        (0..p).map(|_| rng.random_range(-1.0..1.0)).collect(),
    );
    let net = Network::from_pair_counts(labels(n), trials, &counts).unwrap();
    let rows = (0..m).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    Instance {
        net,
        design,
        state,
        rows,
    }
}

fn ln_factorial(k: u32) -> f64 {
    (1..=k).map(|x| f64::from(x).ln()).sum()
}

/// Sum over dyads of `ln C(T, a) + a ln mu + (T - a) ln(1 - mu)` with `mu`
/// formed explicitly.
pub fn brute_log_likelihood(inst: &Instance, state: &LatentState) -> f64 {
    let n = inst.net.n_nodes();
    let t = inst.net.trials();
    let mut total = 0.0;
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let zi = state.positions.row(i);
            let zj = state.positions.row(j);
            let d = zi
                .iter()
                .zip(zj)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let xb: f64 = inst.rows[k].iter().zip(&state.beta).map(|(x, b)| x * b).sum();
            let mu = 1.0 / (1.0 + (-(state.beta0 + xb - d)).exp());
            let a = inst.net.count(i, j);
            let lnc = ln_factorial(t) - ln_factorial(a) - ln_factorial(t - a);
            total += lnc + f64::from(a) * mu.ln() + f64::from(t - a) * (1.0 - mu).ln();
            k += 1;
        }
    }
    total
}

/// Random orthogonal matrix (rows) from Gram-Schmidt on Gaussian vectors,
/// with a random reflection.
pub fn random_orthogonal(rng: &mut Rng, dim: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        for u in &q {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    if rng.random::<bool>() {
        for x in q[0].iter_mut() {
            *x = -*x;
        }
    }
    q
}

pub fn rigid_motion(z: &Positions, rot: &[Vec<f64>], shift: &[f64]) -> Positions {
    let rows: Vec<Vec<f64>> = (0..z.n())
        .map(|i| {
            rot.iter()
                .zip(shift)
                .map(|(r, s)| r.iter().zip(z.row(i)).map(|(a, b)| a * b).sum::<f64>() + s)
                .collect()
        })
        .collect();
    Positions::from_rows(&rows).unwrap()
}

/// Complete linkage recomputed from scratch at every step: the pair of
/// clusters with the smallest maximum member distance merges, ties to the
/// lowest smallest-members.
pub fn naive_complete_linkage(dist: &[f64], n: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut h = 0.0f64;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        h = h.max(dist[i * n + j]);
                    }
                }
                let key = (clusters[a][0].min(clusters[b][0]), clusters[a][0].max(clusters[b][0]));
                let better = match best {
                    None => true,
                    Some((bh, ba, bb)) => {
                        let bk = (clusters[ba][0].min(clusters[bb][0]), clusters[ba][0].max(clusters[bb][0]));
                        h < bh || (h == bh && key < bk)
                    }
                };
                if better {
                    best = Some((h, a, b));
                }
            }
        }
        let (h, a, b) = best.unwrap();
        let right = clusters.remove(b);
        let left = clusters[a].clone();
        let mut merged = left.clone();
        merged.extend(&right);
        merged.sort_unstable();
        clusters[a] = merged;
        clusters.sort_by_key(|c| c[0]);
        out.push((left, right, h));
    }
    out
}

/// Every permutation of `0..k`.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// R² of OLS with intercept on the given columns, via normal equations.
pub fn r_squared(y: &[f64], columns: &[&Vec<f64>]) -> f64 {
    let m = y.len();
    let ybar = y.iter().sum::<f64>() / m as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    if columns.is_empty() {
        return 0.0;
    }
    let k = columns.len() + 1;
    let x = |r: usize, c: usize| if c == 0 { 1.0 } else { columns[c - 1][r] };
    let xtx: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| (0..m).map(|r| x(r, a) * x(r, b)).sum()).collect())
        .collect();
    let xty: Vec<f64> = (0..k).map(|a| (0..m).map(|r| x(r, a) * y[r]).sum()).collect();
    let beta = solve(xtx, xty);
    let rss: f64 = (0..m)
        .map(|r| {
            let f: f64 = (0..k).map(|c| x(r, c) * beta[c]).sum();
            (y[r] - f) * (y[r] - f)
        })
        .sum();
    1.0 - rss / tss
}

/// LMG values by averaging sequential R² gains over all `p!` orderings.
pub fn lmg_by_permutations(y: &[f64], columns: &[Vec<f64>]) -> Vec<f64> {
    let p = columns.len();
    let perms = permutations(p);
    let mut out = vec![0.0; p];
    for perm in &perms {
        let mut included: Vec<&Vec<f64>> = Vec::new();
        let mut prev = 0.0;
        for &k in perm {
            included.push(&columns[k]);
            let r2 = r_squared(y, &included);
            out[k] += r2 - prev;
            prev = r2;
        }
    }
    out.iter().map(|v| v / perms.len() as f64).collect()
}

/// Best agreement over all relabelings of `current` against `reference`.
pub fn brute_force_agreement(current: &[usize], reference: &[usize], groups: usize) -> usize {
    permutations(groups)
        .iter()
        .map(|perm| {
            current
                .iter()
                .zip(reference)
                .filter(|(&c, &r)| perm[c] == r)
                .count()
        })
        .max()
        .unwrap()
}

/// Largest relative deviation between the analytic gradient and central
/// differences of the log-likelihood.
pub fn gradient_error(seed: u64) -> f64 {
    let inst = random_instance(seed, 6);
    let (n, dim, p) = (6, inst.state.positions.dim(), inst.state.beta.len());
    let analytic = log_likelihood_gradient(&inst.net, &inst.design, &inst.state)
        .unwrap()
        .to_flat();
    let x = inst.state.to_flat();
    let h = 1e-5;
    let f = |v: &[f64]| log_likelihood(&inst.net, &inst.design, &LatentState::from_flat(v, n, dim, p)).unwrap();
    let numeric: Vec<f64> = (0..x.len())
        .map(|k| {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[k] += h;
            dn[k] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect();
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    diff / norm.max(1.0)
}


pub fn random_problem(seed: u64, m: usize, p: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut rng = rng_from_seed(seed);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for k in 0..p {
        let col = (0..m)
            .map(|r| {
                let shared = if k > 0 { 0.5 * cols[0][r] } else { 0.0 };
                shared + rng.random_range(-1.0..1.0)
            })
            .collect();
        cols.push(col);
    }
    let y = (0..m)
        .map(|r| {
            cols.iter().enumerate().map(|(k, c)| (k as f64 - 1.0) * c[r]).sum::<f64>()
                + rng.random_range(-1.0..1.0)
        })
        .collect();
    (y, cols)
}

/// Walsh columns on 16 rows: mutually orthogonal and mean zero.
pub fn orthogonal_columns(p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|k| {
            (0..16)
                .map(|r: usize| if (r >> k) & 1 == 0 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect()
}


/// Outcome of the three-node discretized comparison: the largest
/// `|empirical - exact| / SE` over all bins.
#[derive(Debug)]
pub struct DeskCheck {
    pub worst: f64,
    pub bins: usize,
}

const DESK_COUNTS: [u32; 3] = [3, 1, 0];
const DESK_BETA0: f64 = 1.0;
const DESK_COEF_VAR: f64 = 9.0;

fn desk_log_posterior(z: [f64; 3], beta0: f64, with_intercept: bool) -> f64 {
    let mut lp = -(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / 2.0;
    if with_intercept {
        lp -= beta0 * beta0 / (2.0 * DESK_COEF_VAR);
    }
    let pairs = [(0, 1), (0, 2), (1, 2)];
    for ((i, j), &a) in pairs.iter().zip(&DESK_COUNTS) {
        let eta = beta0 - (z[*i] - z[*j]).abs();
        let ln_mu = -(1.0 + (-eta).exp()).ln();
        let ln_1mu = -(1.0 + eta.exp()).ln();
        lp += f64::from(a) * ln_mu + f64::from(3 - a) * ln_1mu;
    }
    lp
}

/// Bin of a value on `edges` (one extra bin on each side).
fn bin_of(x: f64, edges: &[f64]) -> usize {
    edges.iter().take_while(|&&e| x >= e).count()
}

/// Samples the posterior of a 3-node, one-dimensional network with a fixed
/// standard normal position prior and compares binned frequencies of `z_0`,
/// `|z_0 - z_1|` (and `beta0` when it is sampled) with midpoint-rule
/// quadrature of the exact density.
pub fn desk_scale_check(with_intercept: bool, seed: u64, sweeps: usize) -> DeskCheck {
    use lsnet::lpcm::{ChainState, MixtureParams, ResolvedPriors, Sampler};

    let z_edges: Vec<f64> = (-3..=3).map(|k| k as f64 * 0.8).collect();
    let (lo, hi, h) = if with_intercept { (-5.6, 5.6, 0.08) } else { (-6.0, 6.0, 0.04) };
    // Grid differences are multiples of `h`; distance edges sit halfway
    // between them.
    let d_edges: Vec<f64> = [0.4, 0.8, 1.2, 1.6, 2.4, 3.2]
        .iter()
        .map(|v: &f64| ((v / h - 0.5).round() + 0.5) * h)
        .collect();
    let b_edges = vec![-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
    let nz = z_edges.len() + 1;
    let nd = d_edges.len() + 1;
    let nb = if with_intercept { b_edges.len() + 1 } else { 0 };
    let n_bins = nz + nd + nb;

    // Exact bin probabilities.
    let grid: Vec<f64> = (0..((hi - lo) / h as f64).round() as usize)
        .map(|k| lo + (k as f64 + 0.5) * h)
        .collect();
    let bgrid: Vec<f64> = if with_intercept {
        (0..112).map(|k| -6.0 + (k as f64 + 0.5) * 0.125).collect()
    } else {
        vec![DESK_BETA0]
    };
    let mut mass = vec![0.0; n_bins];
    let mut total = 0.0;
    for &b in &bgrid {
        for &a in &grid {
            for &c in &grid {
                for &e in &grid {
                    let w = desk_log_posterior([a, c, e], b, with_intercept).exp();
                    total += w;
                    mass[bin_of(a, &z_edges)] += w;
                    mass[nz + bin_of((a - c).abs(), &d_edges)] += w;
                    if with_intercept {
                        mass[nz + nd + bin_of(b, &b_edges)] += w;
                    }
                }
            }
        }
    }
    let exact: Vec<f64> = mass.iter().map(|m| m / total).collect();

    let net = Network::from_pair_counts(labels(3), 3, &DESK_COUNTS).unwrap();
    let design = DyadDesign::empty(3);
    let state = ChainState {
        positions: Positions::from_rows(&[vec![0.3], vec![-0.2], vec![0.9]]).unwrap(),
        beta0: DESK_BETA0,
        beta: Vec::new(),
        mixture: MixtureParams {
            weights: vec![1.0],
            means: vec![vec![0.0]],
            variances: vec![1.0],
        },
        allocations: vec![0; 3],
    };
    let priors = ResolvedPriors {
        coefficient_variance: DESK_COEF_VAR,
        mean_variance: 1.0,
        variance_shape: 2.0,
        variance_scale: 1.0,
        dirichlet: 1.0,
    };
    let mut sampler = Sampler::new(&net, &design, state, priors, 1.2, 1.5).unwrap();
    let mut rng = rng_from_seed(seed);
    for _ in 0..5_000 {
        sampler.update_positions(&mut rng);
        if with_intercept {
            sampler.update_coefficients(&mut rng);
        }
    }
    let batch = 2_000;
    let n_batches = sweeps / batch;
    let mut batch_means = vec![vec![0.0; n_bins]; n_batches];
    for bm in batch_means.iter_mut() {
        for _ in 0..batch {
            sampler.update_positions(&mut rng);
            if with_intercept {
                sampler.update_coefficients(&mut rng);
            }
            let s = sampler.state();
            let z0 = s.positions.row(0)[0];
            let z1 = s.positions.row(1)[0];
            bm[bin_of(z0, &z_edges)] += 1.0;
            bm[nz + bin_of((z0 - z1).abs(), &d_edges)] += 1.0;
            if with_intercept {
                bm[nz + nd + bin_of(s.beta0, &b_edges)] += 1.0;
            }
        }
        bm.iter_mut().for_each(|v| *v /= batch as f64);
    }
    let mut worst = 0.0f64;
    for k in 0..n_bins {
        let means: Vec<f64> = batch_means.iter().map(|b| b[k]).collect();
        let m = means.iter().sum::<f64>() / n_batches as f64;
        let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n_batches - 1) as f64;
        let se = (var / n_batches as f64).sqrt().max(1e-12);
        worst = worst.max((m - exact[k]).abs() / se);
    }
    DeskCheck {
        worst,
        bins: n_bins,
    }
}

/// Points around `groups` centres on a circle of random radius.
pub fn clustered_points(seed: u64, n: usize, groups: usize, min_sep: f64) -> Positions {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rng_from_seed(seed);
    let sep: f64 = rng.random_range(min_sep..min_sep + 3.5);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let g = i % groups;
            let a = g as f64 * std::f64::consts::TAU / groups as f64;
            let e1: f64 = StandardNormal.sample(&mut rng);
            let e2: f64 = StandardNormal.sample(&mut rng);
            vec![sep * a.cos() + e1, sep * a.sin() + e2]
        })
        .collect();
    Positions::from_rows(&rows).unwrap()
}
