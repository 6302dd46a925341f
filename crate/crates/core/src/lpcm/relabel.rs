//! Label switching: consistent component labels across posterior samples.

use crate::community::max_weight_assignment;

/// For each allocation vector, the permutation `perm[old] = new` that
/// maximizes agreement with a running reference partition.
///
/// The reference starts as the first sample and afterwards holds, for each
/// node, the most frequent relabeled allocation so far (ties to the lower
/// label). Each step is an exact assignment over the `G x G` overlap matrix.
pub fn relabel_allocations(allocations: &[Vec<usize>], groups: usize) -> Vec<Vec<usize>> {
    let Some(first) = allocations.first() else {
        return Vec::new();
    };
    let n = first.len();
    let mut counts = vec![0usize; n * groups];
    let mut reference = first.clone();
    let mut perms = Vec::with_capacity(allocations.len());
    for alloc in allocations {
        let perm = best_permutation(alloc, &reference, groups);
        for (i, &a) in alloc.iter().enumerate() {
            counts[i * groups + perm[a]] += 1;
        }
        for (i, r) in reference.iter_mut().enumerate() {
            let row = &counts[i * groups..(i + 1) * groups];
            let mut best = 0;
            for g in 1..groups {
                if row[g] > row[best] {
                    best = g;
                }
            }
            *r = best;
        }
        perms.push(perm);
    }
    perms
}

/// Permutation of `current`'s labels agreeing with `reference` on the most
/// nodes.
pub fn best_permutation(current: &[usize], reference: &[usize], groups: usize) -> Vec<usize> {
    let mut overlap = vec![0.0; groups * groups];
    for (&c, &r) in current.iter().zip(reference) {
        overlap[c * groups + r] += 1.0;
    }
    max_weight_assignment(&overlap, groups, groups)
        .into_iter()
        .map(|m| m.expect("square assignment is complete"))
        .collect()
}

/// Agreement count of `current` relabeled by `perm` with `reference`.
pub fn agreement(current: &[usize], perm: &[usize], reference: &[usize]) -> usize {
    current
        .iter()
        .zip(reference)
        .filter(|(&c, &r)| perm[c] == r)
        .count()
}

/// Row-normalized allocation frequencies (`n x G`).
pub fn membership_probabilities(allocations: &[Vec<usize>], groups: usize) -> Vec<Vec<f64>> {
    let Some(first) = allocations.first() else {
        return Vec::new();
    };
    let mut out = vec![vec![0.0; groups]; first.len()];
    for alloc in allocations {
        for (row, &g) in out.iter_mut().zip(alloc) {
            row[g] += 1.0;
        }
    }
    let m = allocations.len() as f64;
    for row in &mut out {
        row.iter_mut().for_each(|x| *x /= m);
    }
    out
}

/// Most probable group per node (ties to the lower label).
pub fn map_partition(memberships: &[Vec<f64>]) -> Vec<usize> {
    super::mixture::argmax_rows(memberships)
}
