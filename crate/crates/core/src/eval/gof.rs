use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcm::Sample;
use crate::lsm::{simulate_network_with, LatentState};
use crate::network::{degree_sequence, geodesic_distance_matrix, DyadDesign, Network, UNREACHABLE};
use crate::rng::substream;
use crate::stats::{mean, quantile_sorted, std_dev};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GofConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Degree counts neighbours with at least one success; otherwise it sums
    /// the counts.
    pub binarize: bool,
}

impl Default for GofConfig {
    fn default() -> Self {
        Self {
            replicates: 100,
            seed: 0,
            binarize: true,
        }
    }
}

/// Pointwise 2.5/50/97.5% quantiles over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarBand {
    pub observed: f64,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
    pub mean: f64,
    pub sd: f64,
}

/// A distribution-valued statistic: observed frequencies, replicate bands
/// and an omnibus check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofStatistic {
    /// Bin labels: degree values, or geodesic lengths with `inf` last.
    pub bins: Vec<String>,
    pub observed: Vec<f64>,
    pub band: Band,
    /// Share of bins whose observed value lies inside its band.
    pub pointwise_coverage: f64,
    /// Standardized squared distance of the observed statistic from the
    /// replicate mean; `None` without replicates.
    pub discrepancy: Option<f64>,
    /// 95% quantile of the same distance across replicates.
    pub discrepancy_threshold: Option<f64>,
}

impl GofStatistic {
    /// Observed statistic no further out than 95% of replicates.
    pub fn inside(&self) -> Option<bool> {
        Some(self.discrepancy? <= self.discrepancy_threshold?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofSummary {
    pub replicates: usize,
    /// Number of nodes with each degree.
    pub degree: GofStatistic,
    /// Number of dyads at each geodesic distance.
    pub geodesic: GofStatistic,
    pub mean_degree: ScalarBand,
    pub unreachable_pairs: ScalarBand,
}

impl GofSummary {
    pub fn inside(&self) -> Option<bool> {
        Some(self.degree.inside()? && self.geodesic.inside()?)
    }
}

/// Variance floor in the omnibus distance, in squared count units.
const DISCREPANCY_FLOOR: f64 = 0.25;

fn degree_histogram(net: &Network, binarize: bool) -> Vec<f64> {
    let n = net.n_nodes();
    let len = if binarize {
        n.max(1)
    } else {
        net.trials() as usize * n.saturating_sub(1) + 1
    };
    let mut h = vec![0.0; len];
    for d in degree_sequence(net, binarize) {
        h[d as usize] += 1.0;
    }
    h
}

/// Dyads at geodesic distance 1..n-1, then unreachable dyads.
fn geodesic_histogram(net: &Network) -> Vec<f64> {
    let n = net.n_nodes();
    let hops = geodesic_distance_matrix(net);
    let mut h = vec![0.0; n.max(1)];
    for i in 0..n {
        for j in i + 1..n {
            let d = hops.get(i, j);
            if d == UNREACHABLE {
                h[n - 1] += 1.0;
            } else {
                h[d as usize - 1] += 1.0;
            }
        }
    }
    h
}

fn statistic(bins: Vec<String>, observed: Vec<f64>, reps: &[Vec<f64>]) -> GofStatistic {
    let k = observed.len();
    if reps.is_empty() {
        return GofStatistic {
            bins,
            observed,
            band: Band {
                lower: vec![],
                median: vec![],
                upper: vec![],
            },
            pointwise_coverage: f64::NAN,
            discrepancy: None,
            discrepancy_threshold: None,
        };
    }
    let mut band = Band {
        lower: Vec::with_capacity(k),
        median: Vec::with_capacity(k),
        upper: Vec::with_capacity(k),
    };
    let mut means = Vec::with_capacity(k);
    let mut vars = Vec::with_capacity(k);
    for b in 0..k {
        let mut col: Vec<f64> = reps.iter().map(|r| r[b]).collect();
        means.push(mean(&col));
        vars.push(if col.len() > 1 { std_dev(&col).powi(2) } else { 0.0 });
        col.sort_by(f64::total_cmp);
        band.lower.push(quantile_sorted(&col, 0.025));
        band.median.push(quantile_sorted(&col, 0.5));
        band.upper.push(quantile_sorted(&col, 0.975));
    }
    let inside = (0..k)
        .filter(|&b| band.lower[b] <= observed[b] && observed[b] <= band.upper[b])
        .count();
    let dist = |x: &[f64]| -> f64 {
        (0..k)
            .map(|b| (x[b] - means[b]).powi(2) / (vars[b] + DISCREPANCY_FLOOR))
            .sum()
    };
    let mut rep_d: Vec<f64> = reps.iter().map(|r| dist(r)).collect();
    rep_d.sort_by(f64::total_cmp);
    GofStatistic {
        bins,
        discrepancy: Some(dist(&observed)),
        discrepancy_threshold: Some(quantile_sorted(&rep_d, 0.95)),
        pointwise_coverage: inside as f64 / k.max(1) as f64,
        observed,
        band,
    }
}

fn scalar(observed: f64, reps: &[f64]) -> ScalarBand {
    if reps.is_empty() {
        return ScalarBand {
            observed,
            lower: f64::NAN,
            median: f64::NAN,
            upper: f64::NAN,
            mean: f64::NAN,
            sd: f64::NAN,
        };
    }
    let mut s = reps.to_vec();
    s.sort_by(f64::total_cmp);
    ScalarBand {
        observed,
        lower: quantile_sorted(&s, 0.025),
        median: quantile_sorted(&s, 0.5),
        upper: quantile_sorted(&s, 0.975),
        mean: mean(&s),
        sd: if s.len() > 1 { std_dev(&s) } else { 0.0 },
    }
}

/// Simulates `config.replicates` networks, each from a uniformly drawn
/// posterior sample, and compares degree and geodesic distributions with
/// the observed network.
pub fn gof_posterior_predictive(
    net: &Network,
    design: &DyadDesign,
    samples: &[Sample],
    config: &GofConfig,
) -> Result<GofSummary> {
    if samples.is_empty() {
        return Err(Error::Validation("goodness of fit needs at least one sample".into()));
    }
    let n = net.n_nodes();
    let labels = net.labels().to_vec();
    let reps: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(config.seed, &format!("gof-{r}"));
            let s = &samples[rng.random_range(0..samples.len())];
            let state = LatentState::new(s.positions.clone(), s.beta0, s.beta.clone());
            let sim = simulate_network_with(&state, design, &labels, net.trials(), &mut rng)?;
            Ok((degree_histogram(&sim, config.binarize), geodesic_histogram(&sim)))
        })
        .collect();
    let reps: Vec<(Vec<f64>, Vec<f64>)> = reps.into_iter().collect::<Result<_>>()?;
    let (deg_reps, geo_reps): (Vec<_>, Vec<_>) = reps.into_iter().unzip();

    let deg_obs = degree_histogram(net, config.binarize);
    let geo_obs = geodesic_histogram(net);
    let mean_deg = |h: &[f64]| -> f64 {
        h.iter().enumerate().map(|(d, c)| d as f64 * c).sum::<f64>() / n.max(1) as f64
    };
    let unreachable = |h: &[f64]| h.last().copied().unwrap_or(0.0);
    let mean_degree = scalar(
        mean_deg(&deg_obs),
        &deg_reps.iter().map(|h| mean_deg(h)).collect::<Vec<_>>(),
    );
    let unreachable_pairs = scalar(
        unreachable(&geo_obs),
        &geo_reps.iter().map(|h| unreachable(h)).collect::<Vec<_>>(),
    );
    let deg_bins = (0..deg_obs.len()).map(|d| d.to_string()).collect();
    let mut geo_bins: Vec<String> = (1..geo_obs.len()).map(|d| d.to_string()).collect();
    geo_bins.push("inf".into());
    Ok(GofSummary {
        replicates: config.replicates,
        degree: statistic(deg_bins, deg_obs, &deg_reps),
        geodesic: statistic(geo_bins, geo_obs, &geo_reps),
        mean_degree,
        unreachable_pairs,
    })
}
