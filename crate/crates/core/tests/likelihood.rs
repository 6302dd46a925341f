mod common;

use common::{brute_log_likelihood, gradient_error, random_instance, random_orthogonal, rigid_motion};
use lsnet::lsm::log_likelihood;
use lsnet::rng::rng_from_seed;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng as _;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_per_dyad_sum(seed in any::<u64>()) {
        let inst = random_instance(seed, 6);
        let fast = log_likelihood(&inst.net, &inst.design, &inst.state).unwrap();
        let slow = brute_log_likelihood(&inst, &inst.state);
        prop_assert!((fast - slow).abs() < 1e-10, "{fast} vs {slow}");
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        prop_assert!(gradient_error(seed) < 1e-5);
    }

    #[test]
    fn invariant_under_rigid_motions(seed in any::<u64>()) {
        let inst = random_instance(seed, 6);
        let mut rng = rng_from_seed(seed ^ 0x5eed);
        let dim = inst.state.positions.dim();
        let rot = random_orthogonal(&mut rng, dim);
        let shift: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut moved = inst.state.clone();
        moved.positions = rigid_motion(&inst.state.positions, &rot, &shift);
        let a = log_likelihood(&inst.net, &inst.design, &inst.state).unwrap();
        let b = log_likelihood(&inst.net, &inst.design, &moved).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn equivariant_under_node_relabeling(seed in any::<u64>()) {
        let inst = random_instance(seed, 7);
        let mut order: Vec<usize> = (0..7).collect();
        order.shuffle(&mut rng_from_seed(seed));
        let net = inst.net.permuted(&order).unwrap();
        let design = inst.design.permuted(&order);
        let mut state = inst.state.clone();
        state.positions = inst.state.positions.permuted(&order);
        let a = log_likelihood(&inst.net, &inst.design, &inst.state).unwrap();
        let b = log_likelihood(&net, &design, &state).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }
}
