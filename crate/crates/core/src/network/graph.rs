use std::collections::{HashMap, HashSet, VecDeque};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected network whose dyads carry a count in `0..=trials`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    labels: Vec<String>,
    trials: u32,
    /// Full symmetric `n * n` matrix, row-major.
    counts: Vec<u32>,
}

impl Network {
    /// Network with no edges.
    pub fn empty(labels: Vec<String>, trials: u32) -> Result<Self> {
        let n = labels.len();
        Self::from_counts(labels, trials, vec![0; n * n])
    }

    /// Builds a network from a full row-major count matrix, validating
    /// symmetry, the zero diagonal, the `trials` bound and label uniqueness.
    pub fn from_counts(labels: Vec<String>, trials: u32, counts: Vec<u32>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Validation("network needs at least one node".into()));
        }
        if trials == 0 {
            return Err(Error::Validation("trial count must be positive".into()));
        }
        if counts.len() != n * n {
            return Err(Error::Dimension(format!(
                "count matrix has {} entries, expected {}",
                counts.len(),
                n * n
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Validation(format!("duplicate node label `{l}`")));
            }
        }
        for i in 0..n {
            if counts[i * n + i] != 0 {
                return Err(Error::Validation(format!("self-loop at `{}`", labels[i])));
            }
            for j in (i + 1)..n {
                let a = counts[i * n + j];
                if a != counts[j * n + i] {
                    return Err(Error::Validation(format!(
                        "counts not symmetric at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
                if a > trials {
                    return Err(Error::Validation(format!(
                        "count {a} between `{}` and `{}` exceeds {trials} trials",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            trials,
            counts,
        })
    }

    /// Builds from the per-pair counts in canonical order.
    pub fn from_pair_counts(labels: Vec<String>, trials: u32, pair_counts: &[u32]) -> Result<Self> {
        let n = labels.len();
        if pair_counts.len() != super::n_pairs(n) {
            return Err(Error::Dimension(format!(
                "{} pair counts for {n} nodes",
                pair_counts.len()
            )));
        }
        let mut counts = vec![0; n * n];
        for ((i, j), &a) in super::pairs(n).zip(pair_counts) {
            counts[i * n + j] = a;
            counts[j * n + i] = a;
        }
        Self::from_counts(labels, trials, counts)
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_dyads(&self) -> usize {
        super::n_pairs(self.n_nodes())
    }

    pub fn trials(&self) -> u32 {
        self.trials
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.n_nodes() + j]
    }

    /// Full row-major count matrix.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Counts in canonical pair order.
    pub fn pair_counts(&self) -> Vec<u32> {
        super::pairs(self.n_nodes())
            .map(|(i, j)| self.count(i, j))
            .collect()
    }

    /// Same network with nodes reordered: node `k` of the result is node
    /// `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_nodes();
        let labels = order.iter().map(|&k| self.labels[k].clone()).collect();
        let mut counts = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                counts[a * n + b] = self.count(order[a], order[b]);
            }
        }
        Self::from_counts(labels, self.trials, counts)
    }
}

/// How edge rows are turned into dyad counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeOptions {
    /// Clamp duplicated fixtures: at most one per season in per-season files,
    /// and at most `trials` in count files.
    pub clamp: bool,
}

impl Default for EdgeOptions {
    fn default() -> Self {
        Self { clamp: true }
    }
}

/// Reads an edge table with header `src,dst,count` or `src,dst,season`.
///
/// In count form repeated rows for one pair add up. In season form each row is
/// one fixture in the named season and the dyad count is the number of seasons
/// with a fixture (or the number of rows when clamping is disabled). Pairs not
/// listed get a zero count.
pub fn load_network<R: Read>(
    reader: R,
    labels: &[String],
    trials: u32,
    options: EdgeOptions,
) -> Result<Network> {
    let n = labels.len();
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (src_col, dst_col) = match (col("src"), col("dst")) {
        (Some(s), Some(d)) => (s, d),
        _ => {
            return Err(Error::Load {
                row: 0,
                message: "edge header must contain `src` and `dst`".into(),
            })
        }
    };
    let count_col = col("count");
    let season_col = col("season");
    if count_col.is_none() && season_col.is_none() {
        return Err(Error::Load {
            row: 0,
            message: "edge header must contain `count` or `season`".into(),
        });
    }

    let mut totals = vec![0u64; n * n];
    let mut seasons: HashSet<(usize, usize, String)> = HashSet::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 1;
        let record = record?;
        let lookup = |c: usize| -> Result<usize> {
            let label = record.get(c).unwrap_or("");
            index.get(label).copied().ok_or_else(|| Error::UnknownLabel {
                row,
                label: label.to_string(),
            })
        };
        let i = lookup(src_col)?;
        let j = lookup(dst_col)?;
        if i == j {
            return Err(Error::Load {
                row,
                message: format!("self-loop on `{}`", labels[i]),
            });
        }
        let (a, b) = (i.min(j), i.max(j));
        let increment = if let Some(c) = count_col {
            let raw = record.get(c).unwrap_or("");
            let v: i64 = raw.parse().map_err(|_| Error::Load {
                row,
                message: format!("count `{raw}` is not an integer"),
            })?;
            if v < 0 {
                return Err(Error::Load {
                    row,
                    message: format!("negative count {v}"),
                });
            }
            v as u64
        } else {
            let season = record.get(season_col.unwrap()).unwrap_or("").to_string();
            if options.clamp && !seasons.insert((a, b, season)) {
                0
            } else {
                1
            }
        };
        totals[a * n + b] += increment;
    }

    let mut counts = vec![0u32; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut a = totals[i * n + j];
            if a > u64::from(trials) {
                if options.clamp {
                    a = u64::from(trials);
                } else {
                    return Err(Error::Validation(format!(
                        "count {a} between `{}` and `{}` exceeds {trials} trials",
                        labels[i], labels[j]
                    )));
                }
            }
            counts[i * n + j] = a as u32;
            counts[j * n + i] = a as u32;
        }
    }
    Network::from_counts(labels.to_vec(), trials, counts)
}

pub fn load_network_path(
    path: &Path,
    labels: &[String],
    trials: u32,
    options: EdgeOptions,
) -> Result<Network> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_network(file, labels, trials, options)
}

/// Per-node degree. Binarized degree counts neighbours with a nonzero count;
/// otherwise counts are summed.
pub fn degree_sequence(net: &Network, binarize: bool) -> Vec<u32> {
    let n = net.n_nodes();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let a = net.count(i, j);
                    if binarize {
                        u32::from(a > 0)
                    } else {
                        a
                    }
                })
                .sum()
        })
        .collect()
}

/// Hop count between unreachable nodes.
pub const UNREACHABLE: u32 = u32::MAX;

/// All-pairs shortest path hop counts, row-major `n * n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopMatrix {
    pub n: usize,
    pub hops: Vec<u32>,
}

impl HopMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.hops[i * self.n + j]
    }

    /// Largest finite off-diagonal hop count (0 when there is none).
    pub fn max_finite(&self) -> u32 {
        self.hops
            .iter()
            .copied()
            .filter(|&h| h != UNREACHABLE)
            .max()
            .unwrap_or(0)
    }
}

/// Breadth-first search from every node over dyads with a nonzero count.
pub fn geodesic_distance_matrix(net: &Network) -> HopMatrix {
    let n = net.n_nodes();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| net.count(i, j) > 0).collect())
        .collect();
    geodesics_from_adjacency(&adjacency)
}

pub(crate) fn geodesics_from_adjacency(adjacency: &[Vec<usize>]) -> HopMatrix {
    let n = adjacency.len();
    let mut hops = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        let row = &mut hops[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for &v in &adjacency[u] {
                if row[v] == UNREACHABLE {
                    row[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    HopMatrix { n, hops }
}
