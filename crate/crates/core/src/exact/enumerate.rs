//! Brute-force expansion over every choice sequence of the explicit tree.

use num_bigint::BigInt;

use super::chains::{DegreeKey, TaggedKey};
use super::dist::{Rational, RationalDist};
use crate::error::CapExceeded;
use crate::tree::{InfTreeState, TreeState, TreeSummary};

pub const ENUMERATION_N_CAP: u64 = 5;
pub const INF_ENUMERATION_N_CAP: u64 = 6;

fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn expand(tree: TreeState, weight: Rational, left: u64, out: &mut RationalDist<TreeSummary>) {
    if left == 0 {
        out.add(tree.summarize(), weight);
        return;
    }
    let size = tree.node_count() as u64;
    let w = weight * ratio(1, size);
    for v in 0..size as u32 {
        let mut t = tree.clone();
        t.apply_choice(v).expect("enumeration stays far below the node cap");
        expand(t, w.clone(), left - 1, out);
    }
}

/// Law of the summary of `τ_n`, from every sequence of uniform picks.
pub fn enumerate_exact(n: u64) -> Result<RationalDist<TreeSummary>, CapExceeded> {
    enumerate_with_cap(n, ENUMERATION_N_CAP)
}

pub fn enumerate_with_cap(n: u64, cap: u64) -> Result<RationalDist<TreeSummary>, CapExceeded> {
    if n > cap {
        return Err(CapExceeded::steps(n, cap));
    }
    let mut out = RationalDist::new();
    expand(TreeState::new(), Rational::from_integer(1.into()), n, &mut out);
    Ok(out)
}

pub fn size_marginal(d: &RationalDist<TreeSummary>) -> RationalDist<u64> {
    d.map(|s| s.size_b)
}

pub fn degree_marginal(d: &RationalDist<TreeSummary>) -> RationalDist<DegreeKey> {
    d.map(|s| DegreeKey { counts: s.degree_hist.clone(), root_degree: s.root_degree })
}

pub fn profile_marginal(d: &RationalDist<TreeSummary>) -> RationalDist<Vec<u64>> {
    d.map(|s| s.height_hist.clone())
}

/// Joint law of the height profile and the heights of `k` independent
/// uniform nodes of `τ_n`.
pub fn tagged_marginal(d: &RationalDist<TreeSummary>, k: usize) -> RationalDist<TaggedKey> {
    let mut out = RationalDist::new();
    for (s, w) in d.iter() {
        let hist = &s.height_hist;
        let total = s.size_b + 1;
        let levels = hist.len();
        let mut idx = vec![0usize; k];
        loop {
            let p = idx.iter().fold(w.clone(), |acc, &h| acc * ratio(hist[h], total));
            let heights = idx.iter().map(|&h| h as u32).collect();
            out.add(TaggedKey { hist: hist.clone(), heights }, p);
            // Odometer over height vectors.
            let mut j = 0;
            while j < k {
                idx[j] += 1;
                if idx[j] < levels {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
        }
    }
    out
}

fn expand_inf(tree: InfTreeState, weight: Rational, left: u64, out: &mut RationalDist<u64>) {
    if left == 0 {
        out.add(tree.size() as u64, weight);
        return;
    }
    let size = tree.size() as u64;
    let w = weight * ratio(1, size);
    for v in 0..size as u32 {
        let mut t = tree.clone();
        t.apply_choice(v).expect("enumeration stays far below the node cap");
        expand_inf(t, w.clone(), left - 1, out);
    }
}

/// Exact law of `|τ_n^∞|`.
pub fn inf_tree_size_distribution(n: u64) -> Result<RationalDist<u64>, CapExceeded> {
    if n > INF_ENUMERATION_N_CAP {
        return Err(CapExceeded::steps(n, INF_ENUMERATION_N_CAP));
    }
    let mut out = RationalDist::new();
    expand_inf(InfTreeState::new(), Rational::from_integer(1.into()), n, &mut out);
    Ok(out)
}

/// `E[|τ_n^∞|]`.
pub fn inf_tree_exact_mean(n: u64) -> Result<Rational, CapExceeded> {
    Ok(inf_tree_size_distribution(n)?.mean())
}

/// `(n-1)/2 · log2((n-1)/e)`, taken as 0 at `n = 1`.
pub fn inf_tree_lower_bound(n: u64) -> f64 {
    assert!(n >= 1);
    if n == 1 {
        return 0.0;
    }
    let m = (n - 1) as f64;
    m / 2.0 * (m / std::f64::consts::E).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::dist::q;

    #[test]
    fn n0_and_n2() {
        let d0 = enumerate_exact(0).unwrap();
        assert_eq!(d0.len(), 1);
        assert_eq!(size_marginal(&d0), RationalDist::point(0));
        let d2 = size_marginal(&enumerate_exact(2).unwrap());
        assert_eq!((d2.get(&6), d2.get(&3)), (q(1, 3), q(2, 3)));
        assert!(enumerate_exact(6).is_err());
    }

    #[test]
    fn kappa_at_two() {
        let d = enumerate_exact(2).unwrap().map(|s| s.kappa);
        assert_eq!((d.get(&1), d.get(&2)), (q(2, 3), q(1, 3)));
    }

    #[test]
    fn inf_tree_small() {
        assert_eq!(inf_tree_exact_mean(1).unwrap(), q(3, 1));
        assert_eq!(inf_tree_exact_mean(2).unwrap(), q(17, 3));
        assert_eq!(inf_tree_lower_bound(1), 0.0);
        assert!((inf_tree_lower_bound(11) - 9.396_165_27).abs() < 1e-7);
        assert!((inf_tree_lower_bound(1001) - 4_261.544_622).abs() < 1e-5);
    }

    #[test]
    fn third_step_mean() {
        // From the size-7 and size-5 trees, growth is 2 plus the mean strict subtree size.
        let d = inf_tree_size_distribution(3).unwrap();
        assert!(d.is_normalized());
        assert_eq!(d.mean(), q(313, 35));
    }
}
