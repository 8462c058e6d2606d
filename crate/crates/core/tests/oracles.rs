//! Public-API checks of the exact oracles and engines against values
//! computed independently and frozen here.

use doubling_tree::chains::{SizeChainState, SkeletonState};
use doubling_tree::exact::enumerate::size_marginal;
use doubling_tree::exact::{
    enumerate_exact, exact_moments, exact_size_distribution, fixed_point_check, inf_tree_exact_mean,
    inf_tree_lower_bound, m_k, q, OracleCaps,
};
use doubling_tree::rng::replicate_stream;
use doubling_tree::tree::grow;
use num_bigint::BigInt;

#[test]
fn size_law_at_three_steps() {
    let d = exact_size_distribution(3, &OracleCaps::default()).unwrap();
    let want = [(4, q(1, 2)), (7, q(2, 7)), (8, q(1, 6)), (14, q(1, 21))];
    assert_eq!(d.len(), want.len());
    for (b, p) in want {
        assert_eq!(d.get(&b), p);
    }
    assert_eq!(d.mean(), q(6, 1));
}

#[test]
fn size_support_growth() {
    let want = [1, 1, 2, 4, 8, 16, 31, 58, 104, 179, 301, 499, 820];
    for (n, &len) in want.iter().enumerate() {
        let d = exact_size_distribution(n as u64, &OracleCaps::default()).unwrap();
        assert_eq!(d.len(), len, "n = {n}");
        assert!(d.is_normalized());
    }
}

#[test]
fn support_cap_is_an_error() {
    let caps = OracleCaps { support: 100, ..OracleCaps::default() };
    let e = exact_size_distribution(12, &caps).unwrap_err();
    assert_eq!(e.what, "support");
}

#[test]
fn enumeration_agrees_with_size_chain() {
    for n in 0..=5 {
        let tree = size_marginal(&enumerate_exact(n).unwrap());
        let chain = exact_size_distribution(n, &OracleCaps::default()).unwrap();
        assert_eq!(tree, chain, "n = {n}");
    }
}

#[test]
fn first_two_moments_are_polynomial() {
    for n in [1u64, 7, 40, 60] {
        let m = exact_moments(n, 2);
        let n = BigInt::from(n);
        assert_eq!(m[0], &n * 2);
        assert_eq!(m[1], &n * &n * 5 - &n);
    }
}

#[test]
fn moment_limits() {
    assert_eq!(m_k(1), q(2, 1));
    assert_eq!(m_k(2), q(5, 1));
    assert_eq!(m_k(3), q(50, 3));
    assert_eq!(m_k(4), q(475, 6));
}

#[test]
fn double_everywhere_values() {
    assert_eq!(inf_tree_exact_mean(2).unwrap(), q(17, 3));
    assert!((inf_tree_lower_bound(11) - 9.396165).abs() < 1e-6);
}

#[test]
fn explicit_tree_and_size_chain_have_the_same_mean() {
    let n = 200;
    let reps = 4000;
    let mut tree_sum = 0.0;
    let mut chain_sum = 0.0;
    for i in 0..reps {
        let t = grow(n, &mut replicate_stream(1, i)).unwrap();
        t.check_invariants().unwrap();
        tree_sum += t.size_b() as f64;
        let mut c = SizeChainState::new();
        c.run(n, &mut replicate_stream(2, i));
        chain_sum += c.b as f64;
    }
    // sd of B_n is about n, so the mean has standard error about n / sqrt(reps).
    let se = n as f64 / (reps as f64).sqrt();
    assert!((tree_sum / reps as f64 - 2.0 * n as f64).abs() < 5.0 * se);
    assert!((chain_sum / reps as f64 - 2.0 * n as f64).abs() < 5.0 * se);
}

#[test]
fn skeleton_stays_inside_sandwich() {
    for i in 0..50 {
        let mut s = SkeletonState::new();
        let mut rng = replicate_stream(3, i);
        for _ in 0..400 {
            s.step(&mut rng);
            assert!(s.sandwich_holds(1e-9));
        }
    }
}

#[test]
fn fixed_point_is_stable() {
    for m in 2..=6 {
        let r = fixed_point_check(m, 200, &mut replicate_stream(4, m as u64));
        assert!(r.av_is_zero && r.v_is_distribution);
        assert_eq!(r.violations, 0);
    }
}
