mod common;

use common::naive_complete_linkage;
use lsnet::community::{cut_dendrogram, hclust_complete, rand_index, Dendrogram, Partition};
use lsnet::rng::rng_from_seed;
use proptest::prelude::*;
use rand::Rng as _;

fn random_distances(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
        }
    }
    d
}

/// Sorted leaves under every cluster id of a dendrogram.
fn members(dend: &Dendrogram) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..dend.n_leaves).map(|i| vec![i]).collect();
    for m in &dend.merges {
        let mut v = out[m.left].clone();
        v.extend(&out[m.right]);
        v.sort_unstable();
        out.push(v);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn merges_match_exhaustive_reference(seed in any::<u64>()) {
        let n = 7;
        let d = random_distances(seed, n);
        let dend = hclust_complete(&d, n).unwrap();
        let sets = members(&dend);
        let reference = naive_complete_linkage(&d, n);
        prop_assert_eq!(dend.merges.len(), reference.len());
        for (m, (l, r, h)) in dend.merges.iter().zip(&reference) {
            let mut got = [sets[m.left].clone(), sets[m.right].clone()];
            got.sort();
            let mut want = [l.clone(), r.clone()];
            want.sort();
            prop_assert_eq!(got, want);
            prop_assert_eq!(m.height, *h);
        }
    }

    #[test]
    fn finer_cuts_refine_coarser_ones(seed in any::<u64>(), n in 2usize..12) {
        let d = random_distances(seed, n);
        let dend = hclust_complete(&d, n).unwrap();
        let cuts: Vec<Partition> = (1..=n).map(|g| cut_dendrogram(&dend, g).unwrap()).collect();
        for (g, c) in cuts.iter().enumerate() {
            prop_assert_eq!(c.n_groups(), g + 1);
        }
        for w in cuts.windows(2) {
            prop_assert!(w[1].refines(&w[0]));
        }
    }

    #[test]
    fn heights_never_decrease(seed in any::<u64>()) {
        let d = random_distances(seed, 9);
        let dend = hclust_complete(&d, 9).unwrap();
        for w in dend.merges.windows(2) {
            prop_assert!(w[1].height >= w[0].height);
        }
    }

    #[test]
    fn rand_index_ignores_label_names(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let a: Vec<usize> = (0..15).map(|_| rng.random_range(0..3)).collect();
        let b: Vec<usize> = a.iter().map(|&x| (x + 1) % 3).collect();
        let pa = Partition::compact(&a);
        let pb = Partition::compact(&b);
        prop_assert!((rand_index(&pa, &pb, true).unwrap() - 1.0).abs() < 1e-12);
    }
}
