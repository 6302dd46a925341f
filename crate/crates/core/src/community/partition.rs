use serde::{Deserialize, Serialize};

use super::assignment::max_weight_assignment;
use crate::error::{Error, Result};

/// Assignment of nodes to groups `0..n_groups`, every group nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    n_groups: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let n_groups = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; n_groups];
        labels.iter().for_each(|&l| seen[l] = true);
        if let Some(g) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("group {} is empty", g + 1)));
        }
        Ok(Self { labels, n_groups })
    }

    /// Renumbers arbitrary labels as `0, 1, ...` in order of first appearance.
    pub fn compact<T: PartialEq + Copy>(raw: &[T]) -> Self {
        let mut seen: Vec<T> = Vec::new();
        let labels = raw
            .iter()
            .map(|x| match seen.iter().position(|s| s == x) {
                Some(p) => p,
                None => {
                    seen.push(*x);
                    seen.len() - 1
                }
            })
            .collect();
        Self {
            labels,
            n_groups: seen.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_groups];
        self.labels.iter().for_each(|&l| s[l] += 1);
        s
    }

    /// True when every group of `self` lies inside a single group of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let mut parent = vec![None; self.n_groups];
        for (&f, &c) in self.labels.iter().zip(&coarser.labels) {
            match parent[f] {
                None => parent[f] = Some(c),
                Some(p) if p != c => return false,
                _ => {}
            }
        }
        true
    }
}

/// Relabelled partition produced by [`match_labels`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMatch {
    /// New label of each node. Labels of the previous partition are reused
    /// where matched; extra groups get labels from `previous.n_groups()` up.
    pub labels: Vec<usize>,
    /// New label for each group of the current partition.
    pub mapping: Vec<usize>,
    /// Nodes keeping their previous label.
    pub agreement: usize,
}

fn overlap(a: &Partition, b: &Partition) -> Vec<f64> {
    let mut m = vec![0.0; a.n_groups * b.n_groups];
    for (&x, &y) in a.labels.iter().zip(&b.labels) {
        m[x * b.n_groups + y] += 1.0;
    }
    m
}

/// Relabels `current` to maximise the number of nodes whose label equals
/// their label in `previous`, by exact assignment on the group overlap
/// matrix.
pub fn match_labels(previous: &Partition, current: &Partition) -> Result<LabelMatch> {
    if previous.n_nodes() != current.n_nodes() {
        return Err(Error::Dimension(format!(
            "partitions of {} and {} nodes",
            previous.n_nodes(),
            current.n_nodes()
        )));
    }
    let w = overlap(current, previous);
    let assigned = max_weight_assignment(&w, current.n_groups, previous.n_groups);
    let mut next = previous.n_groups;
    let mapping: Vec<usize> = assigned
        .iter()
        .map(|a| match a {
            Some(c) => *c,
            None => {
                next += 1;
                next - 1
            }
        })
        .collect();
    let labels: Vec<usize> = current.labels.iter().map(|&l| mapping[l]).collect();
    let agreement = labels
        .iter()
        .zip(&previous.labels)
        .filter(|(a, b)| a == b)
        .count();
    Ok(LabelMatch {
        labels,
        mapping,
        agreement,
    })
}

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Rand index, or the Hubert-Arabie adjusted Rand index when `adjusted`.
///
/// When the adjusted index is undefined (both partitions all singletons or
/// both a single group) it is 1 for identical partitions.
pub fn rand_index(a: &Partition, b: &Partition, adjusted: bool) -> Result<f64> {
    let n = a.n_nodes();
    if n != b.n_nodes() {
        return Err(Error::Dimension("partitions differ in size".into()));
    }
    if n < 2 {
        return Ok(1.0);
    }
    let table = overlap(a, b);
    let sum_cells: f64 = table.iter().map(|&x| choose2(x)).sum();
    let sum_a: f64 = a.group_sizes().iter().map(|&x| choose2(x as f64)).sum();
    let sum_b: f64 = b.group_sizes().iter().map(|&x| choose2(x as f64)).sum();
    let total = choose2(n as f64);
    if !adjusted {
        // agreements = pairs together in both + pairs apart in both
        return Ok((total + 2.0 * sum_cells - sum_a - sum_b) / total);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if (max - expected).abs() < 1e-12 {
        return Ok(if (sum_cells - expected).abs() < 1e-12 { 1.0 } else { 0.0 });
    }
    Ok((sum_cells - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Partition {
        Partition::compact(v)
    }

    #[test]
    fn new_rejects_gaps() {
        assert!(Partition::new(vec![0, 2, 2]).is_err());
        assert!(Partition::new(vec![1, 0, 1]).is_ok());
    }

    #[test]
    fn identical_partitions() {
        let a = p(&[0, 0, 1, 1, 2]);
        let m = match_labels(&a, &a).unwrap();
        assert_eq!(m.labels, a.labels());
        assert_eq!(m.agreement, 5);
        assert_eq!(rand_index(&a, &a, true).unwrap(), 1.0);
        assert_eq!(rand_index(&a, &a, false).unwrap(), 1.0);
    }

    #[test]
    fn permuted_labels_fully_agree() {
        let a = Partition::new(vec![0, 0, 1, 1, 2, 2]).unwrap();
        let b = Partition::new(vec![2, 2, 0, 0, 1, 1]).unwrap();
        let m = match_labels(&a, &b).unwrap();
        assert_eq!(m.agreement, 6);
        assert_eq!(m.labels, a.labels());
        assert!((rand_index(&a, &b, true).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extra_groups_get_fresh_labels() {
        let prev = Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let cur = Partition::new(vec![2, 2, 0, 1, 1, 1]).unwrap();
        let m = match_labels(&prev, &cur).unwrap();
        assert_eq!(m.labels, vec![0, 0, 2, 1, 1, 1]);
        assert_eq!(m.agreement, 5);
    }

    #[test]
    fn singletons_versus_one_group() {
        let a = p(&[0, 1, 2, 3, 4]);
        let b = p(&[0, 0, 0, 0, 0]);
        assert_eq!(rand_index(&a, &b, true).unwrap(), 0.0);
        assert_eq!(rand_index(&a, &b, false).unwrap(), 0.0);
    }

    #[test]
    fn refinement() {
        let fine = p(&[0, 0, 1, 2, 2]);
        let coarse = p(&[0, 0, 1, 1, 1]);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }
}
