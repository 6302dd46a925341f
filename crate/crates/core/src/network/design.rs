use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::nodes::{ColumnKind, NodeTable};
use super::{n_pairs, pair_index, pairs};
use crate::error::{Error, Result};

/// Named symmetric matrix of nonnegative pair values with a zero diagonal,
/// such as travel times in hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMatrix {
    pub name: String,
    pub labels: Vec<String>,
    /// Row-major `n * n`.
    pub values: Vec<f64>,
}

impl PairMatrix {
    pub fn new(name: impl Into<String>, labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::Dimension(format!(
                "pair matrix `{name}` has {} entries for {n} nodes",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Validation(format!(
                    "pair matrix `{name}` has nonzero diagonal at `{}`",
                    labels[i]
                )));
            }
            for j in (i + 1)..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Validation(format!(
                        "pair matrix `{name}`: invalid value {v} for ({}, {})",
                        labels[i], labels[j]
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::Validation(format!(
                        "pair matrix `{name}` is not symmetric at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Self {
            name,
            labels,
            values,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.labels.len() + j]
    }
}

/// Reads `src,dst,value` rows into a pair matrix. Every unordered pair must
/// appear; a pair listed in both directions must carry the same value.
pub fn load_pair_matrix<R: Read>(reader: R, name: &str, labels: &[String]) -> Result<PairMatrix> {
    let n = labels.len();
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |h: &str| headers.iter().position(|x| x.eq_ignore_ascii_case(h));
    let (s, d, v) = match (col("src"), col("dst"), col("value")) {
        (Some(s), Some(d), Some(v)) => (s, d, v),
        _ => {
            return Err(Error::Load {
                row: 0,
                message: "pair header must contain `src`, `dst` and `value`".into(),
            })
        }
    };
    let mut values = vec![f64::NAN; n * n];
    for i in 0..n {
        values[i * n + i] = 0.0;
    }
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec?;
        let lookup = |c: usize| -> Result<usize> {
            let l = rec.get(c).unwrap_or("");
            index.get(l).copied().ok_or_else(|| Error::UnknownLabel {
                row,
                label: l.to_string(),
            })
        };
        let i = lookup(s)?;
        let j = lookup(d)?;
        let raw = rec.get(v).unwrap_or("");
        let x: f64 = raw.parse().map_err(|_| Error::Load {
            row,
            message: format!("value `{raw}` is not a number"),
        })?;
        if i == j {
            if x != 0.0 {
                return Err(Error::Load {
                    row,
                    message: "nonzero self pair".into(),
                });
            }
            continue;
        }
        let prev = values[i * n + j];
        if !prev.is_nan() && prev != x {
            return Err(Error::Load {
                row,
                message: format!("conflicting values {prev} and {x} for one pair"),
            });
        }
        values[i * n + j] = x;
        values[j * n + i] = x;
    }
    if let Some((i, j)) = pairs(n).find(|&(i, j)| values[i * n + j].is_nan()) {
        return Err(Error::Validation(format!(
            "pair matrix `{name}` has no value for ({}, {})",
            labels[i], labels[j]
        )));
    }
    PairMatrix::new(name, labels.to_vec(), values)
}

impl PairMatrix {
    pub fn from_path(path: &Path, name: &str, labels: &[String]) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        load_pair_matrix(file, name, labels)
    }
}

/// Covariate vectors for every unordered pair, in canonical pair order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadDesign {
    n_nodes: usize,
    names: Vec<String>,
    binary: Vec<bool>,
    /// `n_pairs * p`, row-major.
    rows: Vec<f64>,
}

impl DyadDesign {
    /// Design with no columns.
    pub fn empty(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            names: Vec::new(),
            binary: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Builds from per-column vectors in canonical pair order.
    pub fn from_columns(n_nodes: usize, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Dimension("one name per column required".into()));
        }
        let m = n_pairs(n_nodes);
        let p = columns.len();
        let mut rows = vec![0.0; m * p];
        let mut binary = Vec::with_capacity(p);
        for (k, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(Error::Dimension(format!(
                    "column `{}` has {} rows, expected {m}",
                    names[k],
                    col.len()
                )));
            }
            if let Some(v) = col.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::Validation(format!(
                    "column `{}` has invalid entry {v}",
                    names[k]
                )));
            }
            binary.push(col.iter().all(|&v| v == 0.0 || v == 1.0));
            for (r, &v) in col.iter().enumerate() {
                rows[r * p + k] = v;
            }
        }
        Ok(Self {
            n_nodes,
            names,
            binary,
            rows,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_pairs(&self) -> usize {
        n_pairs(self.n_nodes)
    }

    pub fn n_columns(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    #[inline]
    pub fn row(&self, pair: usize) -> &[f64] {
        let p = self.n_columns();
        &self.rows[pair * p..(pair + 1) * p]
    }

    /// Row for pair `(i, j)` in either order.
    pub fn row_for(&self, i: usize, j: usize) -> &[f64] {
        let (a, b) = (i.min(j), i.max(j));
        self.row(pair_index(self.n_nodes, a, b))
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_pairs()).map(|r| self.row(r)[k]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Sub-design with the named columns, in the order given.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::Config(format!("design has no column `{n}`")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n_nodes: self.n_nodes,
            names: names.to_vec(),
            binary: idx.iter().map(|&k| self.binary[k]).collect(),
            rows: (0..self.n_pairs())
                .flat_map(|r| idx.iter().map(move |&k| (r, k)))
                .map(|(r, k)| self.row(r)[k])
                .collect(),
        })
    }

    /// Same design with nodes reordered: node `a` of the result is node
    /// `order[a]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.n_nodes;
        let mut rows = Vec::with_capacity(self.rows.len());
        for (a, b) in pairs(n) {
            rows.extend_from_slice(self.row_for(order[a], order[b]));
        }
        Self {
            n_nodes: n,
            names: self.names.clone(),
            binary: self.binary.clone(),
            rows,
        }
    }

    /// Dot product of the covariate row of `pair` with `beta`.
    #[inline]
    pub fn offset(&self, pair: usize, beta: &[f64]) -> f64 {
        self.row(pair).iter().zip(beta).map(|(x, b)| x * b).sum()
    }
}

/// Builds the dyadic design for the nodes in `labels` order.
///
/// Each selected name is looked up first among the node table columns and
/// then among the pair matrices. Continuous and proportion columns become the
/// absolute difference of node values, binary columns 0 for the same level
/// and 1 otherwise, and pair matrices are copied.
pub fn build_dyad_design(
    labels: &[String],
    nodes: &NodeTable,
    pair_matrices: &[PairMatrix],
    selected: &[String],
) -> Result<DyadDesign> {
    let n = labels.len();
    let node_rows: Vec<usize> = labels
        .iter()
        .map(|l| {
            nodes.row_of(l).ok_or_else(|| Error::MissingCovariate {
                node: l.clone(),
                column: "label".into(),
            })
        })
        .collect::<Result<_>>()?;

    let mut columns = Vec::with_capacity(selected.len());
    for name in selected {
        if let Some(col) = nodes.column(name) {
            let vals: Vec<f64> = node_rows
                .iter()
                .zip(labels)
                .map(|(&r, l)| {
                    col.values[r].ok_or_else(|| Error::MissingCovariate {
                        node: l.clone(),
                        column: name.clone(),
                    })
                })
                .collect::<Result<_>>()?;
            let column = pairs(n)
                .map(|(i, j)| match col.kind {
                    ColumnKind::Binary => f64::from(u8::from(vals[i] != vals[j])),
                    ColumnKind::Continuous | ColumnKind::Proportion => (vals[i] - vals[j]).abs(),
                })
                .collect();
            columns.push(column);
        } else if let Some(pm) = pair_matrices.iter().find(|m| &m.name == name) {
            let idx: Vec<usize> = labels
                .iter()
                .map(|l| {
                    pm.labels
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| Error::MissingCovariate {
                            node: l.clone(),
                            column: name.clone(),
                        })
                })
                .collect::<Result<_>>()?;
            columns.push(pairs(n).map(|(i, j)| pm.get(idx[i], idx[j])).collect());
        } else {
            return Err(Error::Config(format!("unknown covariate `{name}`")));
        }
    }
    DyadDesign::from_columns(n, selected.to_vec(), columns)
}
