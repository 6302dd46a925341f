use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::partition::Partition;
use crate::error::{Error, Result};

/// One agglomeration step. Leaves are numbered `0..n`; the cluster formed by
/// merge `k` is numbered `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

fn validate(dist: &[f64], n: usize) -> Result<()> {
    if dist.len() != n * n {
        return Err(Error::Dimension(format!(
            "{} distances for {n} points",
            dist.len()
        )));
    }
    for i in 0..n {
        if dist[i * n + i] != 0.0 {
            return Err(Error::Validation(format!("nonzero self-distance at {i}")));
        }
        for j in (i + 1)..n {
            let (a, b) = (dist[i * n + j], dist[j * n + i]);
            if !a.is_finite() || a < 0.0 {
                return Err(Error::Validation(format!("invalid distance {a} at ({i}, {j})")));
            }
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::Validation(format!(
                    "distance matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Agglomerative clustering with complete linkage on an `n x n` distance
/// matrix (row-major).
///
/// Ties are broken towards the pair of clusters with the lowest indices,
/// where a cluster's index is its smallest member.
pub fn hclust_complete(dist: &[f64], n: usize) -> Result<Dendrogram> {
    validate(dist, n)?;
    let mut d = dist.to_vec();
    let mut active = vec![true; n];
    let mut id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in (a + 1)..n {
                if active[b] && d[a * n + b] < best.2 {
                    best = (a, b, d[a * n + b]);
                }
            }
        }
        let (a, b, h) = best;
        merges.push(Merge {
            left: id[a],
            right: id[b],
            height: h,
            size: size[a] + size[b],
        });
        for k in 0..n {
            if active[k] && k != a && k != b {
                let m = d[a * n + k].max(d[b * n + k]);
                d[a * n + k] = m;
                d[k * n + a] = m;
            }
        }
        active[b] = false;
        size[a] += size[b];
        id[a] = n + step;
    }
    Ok(Dendrogram {
        n_leaves: n,
        merges,
    })
}

fn partition_after(dend: &Dendrogram, steps: usize) -> Partition {
    let n = dend.n_leaves;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    // representative leaf of each cluster id
    let mut rep: Vec<usize> = (0..n).collect();
    for m in dend.merges.iter().take(steps) {
        let (ra, rb) = (find(&mut parent, rep[m.left]), find(&mut parent, rep[m.right]));
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        parent[hi] = lo;
        rep.push(lo);
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Partition::compact(&roots)
}

/// Partition with `groups` clusters, obtained by stopping the agglomeration
/// once that many remain. Groups are numbered by their smallest member.
pub fn cut_dendrogram(dend: &Dendrogram, groups: usize) -> Result<Partition> {
    let n = dend.n_leaves;
    if groups == 0 || groups > n {
        return Err(Error::Config(format!(
            "cannot cut {n} leaves into {groups} groups"
        )));
    }
    Ok(partition_after(dend, n - groups))
}

/// Partition formed by every merge at or below `height`.
pub fn cut_dendrogram_at_height(dend: &Dendrogram, height: f64) -> Partition {
    let steps = dend.merges.iter().take_while(|m| m.height <= height).count();
    partition_after(dend, steps)
}

impl Dendrogram {
    /// Nested tree; leaves carry their label.
    pub fn to_json_tree(&self, labels: &[String]) -> Value {
        let n = self.n_leaves;
        fn node(d: &Dendrogram, id: usize, labels: &[String]) -> Value {
            let n = d.n_leaves;
            if id < n {
                json!({ "leaf": id, "label": labels.get(id).cloned().unwrap_or_default() })
            } else {
                let m = &d.merges[id - n];
                json!({
                    "height": m.height,
                    "size": m.size,
                    "children": [node(d, m.left, labels), node(d, m.right, labels)],
                })
            }
        }
        match n {
            0 => Value::Null,
            1 => node(self, 0, labels),
            _ => node(self, 2 * n - 2, labels),
        }
    }

    /// `left,right,height,size` merge table.
    pub fn merge_table_csv(&self) -> String {
        let mut s = String::from("left,right,height,size\n");
        for m in &self.merges {
            s.push_str(&format!("{},{},{},{}\n", m.left, m.right, m.height, m.size));
        }
        s
    }
}
