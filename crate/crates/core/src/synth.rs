//! Synthetic networks with planted latent clusters and node covariates, for
//! recovery checks and demonstrations.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsm::{simulate_network_with, LatentState, Positions};
use crate::network::{build_dyad_design, DyadDesign, Network, NodeTable, PairMatrix, UnitScales};
use crate::rng::substream;

/// Name of the generated pair matrix of travel times.
pub const TRAVEL: &str = "travel";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_nodes: usize,
    pub groups: usize,
    pub dim: usize,
    /// Cluster centres sit evenly on a circle of this radius (first two axes).
    pub radius: f64,
    /// Standard deviation of positions around their centre.
    pub spread: f64,
    pub beta0: f64,
    pub trials: u32,
    /// Active covariates and their coefficients, on the loaded (scaled) units.
    pub coefficients: Vec<(String, f64)>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_nodes: 60,
            groups: 3,
            dim: 2,
            radius: 3.0,
            spread: 0.5,
            beta0: 2.0,
            trials: 3,
            coefficients: Vec::new(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub labels: Vec<String>,
    /// Node table as written to disk, raw units.
    pub nodes_csv: String,
    pub nodes: NodeTable,
    pub travel: PairMatrix,
    pub truth: LatentState,
    pub partition: Vec<usize>,
    /// Design over the active covariates only.
    pub design: DyadDesign,
    pub network: Network,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub labels: Vec<String>,
    pub positions: Positions,
    pub partition: Vec<usize>,
    pub beta0: f64,
    pub coefficients: Vec<(String, f64)>,
}

/// Builds a synthetic instance: node `i` belongs to cluster `i mod G`.
pub fn generate(config: &SynthConfig) -> Result<Synthetic> {
    let n = config.n_nodes;
    let g = config.groups;
    let d = config.dim;
    if n < 2 || g == 0 || d == 0 || config.trials == 0 {
        return Err(Error::Config(
            "synthetic network needs at least 2 nodes, 1 group, 1 dimension and 1 trial".into(),
        ));
    }
    let mut rng = substream(config.seed, "positions");
    let partition: Vec<usize> = (0..n).map(|i| i % g).collect();
    let mut rows = Vec::with_capacity(n);
    for &c in &partition {
        let angle = 2.0 * std::f64::consts::PI * c as f64 / g as f64;
        let mut row = vec![0.0; d];
        if g > 1 {
            row[0] = config.radius * angle.cos();
            if d > 1 {
                row[1] = config.radius * angle.sin();
            }
        }
        for x in &mut row {
            let e: f64 = StandardNormal.sample(&mut rng);
            *x += config.spread * e;
        }
        rows.push(row);
    }
    let positions = Positions::from_rows(&rows)?;
    let labels: Vec<String> = (0..n).map(|i| format!("s{:03}", i + 1)).collect();

    // Node covariates in raw units; location loosely follows the latent map.
    let mut rng = substream(config.seed, "covariates");
    let mut csv = String::from("label,fees,founded,sixth_form_boys,pct_boarders,school_type,lat,lon\n");
    let mut coords = Vec::with_capacity(n);
    for (i, label) in labels.iter().enumerate() {
        let z = positions.row(i);
        let e: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let fees = (20_000.0 + 6_000.0 * e[0]).max(2_000.0).round();
        let founded = rng.random_range(1500..1950);
        let boys = (120.0 + 40.0 * e[1]).max(10.0).round();
        let boarders: f64 = rng.random();
        let kind = if rng.random::<bool>() { "boarding" } else { "day" };
        let lat = 53.0 + 0.4 * z[0] + 0.3 * e[2];
        let lon = -2.0 + 0.4 * z.get(1).copied().unwrap_or(0.0) + 0.3 * e[3];
        coords.push((lat, lon));
        writeln!(
            csv,
            "{label},{fees},{founded},{boys},{boarders:.4},{kind},{lat:.5},{lon:.5}"
        )
        .expect("string write");
    }
    let nodes = NodeTable::from_reader(csv.as_bytes(), &UnitScales::default())?;

    // Travel time in hours at 60 km/h over an equirectangular projection.
    let mut travel = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (la, lo) = coords[i];
            let (lb, lob) = coords[j];
            let mean_lat = (0.5 * (la + lb)).to_radians();
            let dx = (lob - lo).to_radians() * mean_lat.cos();
            let dy = (lb - la).to_radians();
            let km = 6371.0 * (dx * dx + dy * dy).sqrt();
            let hours = (km / 60.0 * 1e4).round() / 1e4;
            travel[i * n + j] = hours;
            travel[j * n + i] = hours;
        }
    }
    let travel = PairMatrix::new(TRAVEL, labels.clone(), travel)?;

    let names: Vec<String> = config.coefficients.iter().map(|(k, _)| k.clone()).collect();
    let design = build_dyad_design(&labels, &nodes, std::slice::from_ref(&travel), &names)?;
    let beta: Vec<f64> = config.coefficients.iter().map(|(_, b)| *b).collect();
    let truth = LatentState::new(positions, config.beta0, beta);
    let mut rng = substream(config.seed, "network");
    let network = simulate_network_with(&truth, &design, &labels, config.trials, &mut rng)?;
    Ok(Synthetic {
        labels,
        nodes_csv: csv,
        nodes,
        travel,
        truth,
        partition,
        design,
        network,
    })
}

impl Synthetic {
    pub fn truth_record(&self, config: &SynthConfig) -> Truth {
        Truth {
            labels: self.labels.clone(),
            positions: self.truth.positions.clone(),
            partition: self.partition.clone(),
            beta0: self.truth.beta0,
            coefficients: config.coefficients.clone(),
        }
    }

    /// Writes `nodes.csv`, `edges.csv`, `travel.csv` and `truth.json`.
    pub fn write_to_dir(&self, dir: &Path, config: &SynthConfig) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: &str| -> Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(p, e))
        };
        write("nodes.csv", &self.nodes_csv)?;
        write("edges.csv", &edges_csv(&self.network))?;
        write("travel.csv", &pair_matrix_csv(&self.travel))?;
        let truth = serde_json::to_string_pretty(&self.truth_record(config))?;
        write("truth.json", &(truth + "\n"))
    }
}

/// `src,dst,count` rows for every dyad with a positive count.
pub fn edges_csv(net: &Network) -> String {
    let mut out = String::from("src,dst,count\n");
    let n = net.n_nodes();
    for i in 0..n {
        for j in i + 1..n {
            let c = net.count(i, j);
            if c > 0 {
                writeln!(out, "{},{},{c}", net.labels()[i], net.labels()[j]).expect("string write");
            }
        }
    }
    out
}

/// `src,dst,value` rows for every unordered pair.
pub fn pair_matrix_csv(m: &PairMatrix) -> String {
    let mut out = String::from("src,dst,value\n");
    let n = m.labels.len();
    for i in 0..n {
        for j in i + 1..n {
            writeln!(out, "{},{},{}", m.labels[i], m.labels[j], m.get(i, j)).expect("string write");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{load_network, load_pair_matrix, EdgeOptions};

    #[test]
    fn files_round_trip() {
        let cfg = SynthConfig {
            n_nodes: 12,
            coefficients: vec![("fees".into(), -0.5)],
            seed: 4,
            ..SynthConfig::default()
        };
        let s = generate(&cfg).unwrap();
        let net = load_network(
            edges_csv(&s.network).as_bytes(),
            &s.labels,
            3,
            EdgeOptions::default(),
        )
        .unwrap();
        assert_eq!(net, s.network);
        let t = load_pair_matrix(pair_matrix_csv(&s.travel).as_bytes(), TRAVEL, &s.labels).unwrap();
        assert_eq!(t, s.travel);
        assert_eq!(s.design.names(), ["fees".to_string()]);
        assert!(s.nodes.column("school_type").is_some());
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::default();
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.network, b.network);
        assert_eq!(a.nodes_csv, b.nodes_csv);
    }
}
