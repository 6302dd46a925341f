mod common;

use common::desk_scale_check;

#[test]
fn position_kernel_matches_exact_posterior() {
    let check = desk_scale_check(false, 17, 400_000);
    assert!(check.worst < 3.0, "{check:?}");
}

#[test]
fn joint_kernels_match_exact_posterior() {
    let check = desk_scale_check(true, 29, 400_000);
    assert!(check.worst < 3.0, "{check:?}");
}
