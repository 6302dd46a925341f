mod common;

use common::{lmg_by_permutations, orthogonal_columns, r_squared, random_problem};
use lsnet::importance::{lmg_shares_columns, lmg_values_columns, ols_fit_columns, pratt_shares};
use lsnet::rng::rng_from_seed;
use proptest::prelude::*;
use rand::Rng as _;

fn names(p: usize) -> Vec<String> {
    (0..p).map(|k| format!("x{k}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lmg_equals_permutation_average(seed in any::<u64>(), p in 1usize..=5) {
        let (y, cols) = random_problem(seed, 40, p);
        let fast = lmg_values_columns(&y, &names(p), &cols).unwrap();
        let slow = lmg_by_permutations(&y, &cols);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn decompositions_sum_to_r_squared(seed in any::<u64>(), p in 1usize..=6) {
        let (y, cols) = random_problem(seed, 50, p);
        let fit = ols_fit_columns(&y, &names(p), &cols).unwrap();
        let refs: Vec<&Vec<f64>> = cols.iter().collect();
        prop_assert!((fit.r_squared - r_squared(&y, &refs)).abs() < 1e-9);
        let pratt_values: f64 = fit.standardized.iter().zip(&fit.correlations).map(|(b, r)| b * r).sum();
        prop_assert!((pratt_values - fit.r_squared).abs() < 1e-9);
        let lmg = lmg_values_columns(&y, &names(p), &cols).unwrap();
        prop_assert!(lmg.iter().all(|&v| v >= -1e-12));
        prop_assert!((lmg.iter().sum::<f64>() - fit.r_squared).abs() < 1e-9);
        let shares = pratt_shares(&fit).unwrap();
        prop_assert!((shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let lmg_shares = lmg_shares_columns(&y, &names(p), &cols).unwrap();
        prop_assert!((lmg_shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn shares_ignore_column_scale(seed in any::<u64>(), p in 1usize..=4, scale in 0.01f64..100.0) {
        let (y, cols) = random_problem(seed, 30, p);
        let mut scaled = cols.clone();
        for v in scaled[0].iter_mut() {
            *v *= scale;
        }
        let a = pratt_shares(&ols_fit_columns(&y, &names(p), &cols).unwrap()).unwrap();
        let b = pratt_shares(&ols_fit_columns(&y, &names(p), &scaled).unwrap()).unwrap();
        let c = lmg_shares_columns(&y, &names(p), &cols).unwrap();
        let d = lmg_shares_columns(&y, &names(p), &scaled).unwrap();
        for k in 0..p {
            prop_assert!((a[k] - b[k]).abs() < 1e-9);
            prop_assert!((c[k] - d[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn orthogonal_designs_agree(seed in any::<u64>(), p in 1usize..=4) {
        let cols = orthogonal_columns(p);
        let mut rng = rng_from_seed(seed);
        let y: Vec<f64> = (0..16).map(|r| cols.iter().map(|c| c[r]).sum::<f64>() + rng.random_range(-1.0..1.0)).collect();
        let pratt = pratt_shares(&ols_fit_columns(&y, &names(p), &cols).unwrap()).unwrap();
        let lmg = lmg_shares_columns(&y, &names(p), &cols).unwrap();
        for (a, b) in pratt.iter().zip(&lmg) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
