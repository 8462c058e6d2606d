//! Forward dynamic programming over the transition kernels of the
//! statistic chains.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::dist::{Rational, RationalDist};
use crate::chains::TaggedRule;
use crate::error::CapExceeded;

pub const DEFAULT_SIZE_N_CAP: u64 = 60;
pub const DEFAULT_SUPPORT_CAP: usize = 50_000;
pub const DEFAULT_DEGREE_N_CAP: u64 = 10;
pub const DEFAULT_PROFILE_N_CAP: u64 = 10;
pub const DEFAULT_TAGGED_N_CAP: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCaps {
    pub size_n: u64,
    pub support: usize,
    pub degree_n: u64,
    pub profile_n: u64,
    pub tagged_n: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            size_n: DEFAULT_SIZE_N_CAP,
            support: DEFAULT_SUPPORT_CAP,
            degree_n: DEFAULT_DEGREE_N_CAP,
            profile_n: DEFAULT_PROFILE_N_CAP,
            tagged_n: DEFAULT_TAGGED_N_CAP,
        }
    }
}

/// Degree counts (trailing zeros trimmed) and the root's degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DegreeKey {
    pub counts: Vec<u64>,
    pub root_degree: u64,
}

/// Height profile and the heights of the tags.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaggedKey {
    pub hist: Vec<u64>,
    pub heights: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "chain")]
pub enum ExactChain {
    Size,
    Degree,
    Profile,
    Tagged { k: usize, rule: TaggedRule },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StatKey {
    Size(u64),
    Degree(DegreeKey),
    Profile(Vec<u64>),
    Tagged(TaggedKey),
}

impl StatKey {
    pub fn label(&self) -> String {
        fn list<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
        }
        match self {
            StatKey::Size(b) => b.to_string(),
            StatKey::Degree(d) => format!("[{}];root={}", list(&d.counts), d.root_degree),
            StatKey::Profile(h) => format!("[{}]", list(h)),
            StatKey::Tagged(t) => format!("[{}];tags=[{}]", list(&t.hist), list(&t.heights)),
        }
    }
}

fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

fn bumped(v: &[u64], i: usize, delta: i64) -> Vec<u64> {
    let mut out = v.to_vec();
    if out.len() <= i {
        out.resize(i + 1, 0);
    }
    out[i] = out[i].checked_add_signed(delta).expect("count underflow");
    out
}

/// One step of the chain with transition rows `kernel`.
pub fn push_forward<K: Ord + Clone>(
    dist: &RationalDist<K>,
    mut kernel: impl FnMut(&K) -> Vec<(K, Rational)>,
) -> RationalDist<K> {
    let mut next = RationalDist::new();
    for (state, w) in dist.iter() {
        for (to, p) in kernel(state) {
            next.add(to, p * w);
        }
    }
    next
}

/// Run `n` steps of a kernel from `init`.
pub fn evolve<K, F>(n: u64, init: K, support_cap: usize, mut kernel: F) -> Result<RationalDist<K>, CapExceeded>
where
    K: Ord + Clone,
    F: FnMut(&K) -> Vec<(K, Rational)>,
{
    let mut dist = RationalDist::point(init);
    for _ in 0..n {
        dist = push_forward(&dist, &mut kernel);
        if dist.len() > support_cap {
            return Err(CapExceeded::support(dist.len(), support_cap));
        }
    }
    Ok(dist)
}

pub fn size_kernel(&b: &u64) -> Vec<(u64, Rational)> {
    let mut out = vec![(2 * b + 2, ratio(1, b + 1))];
    if b > 0 {
        out.push((b + 1, ratio(b, b + 1)));
    }
    out
}

/// Calls `visit(j, law of B_j)` for `j = 0..=n`, stopping early with the
/// error once the support outgrows the cap.
pub fn size_distribution_path(
    n: u64,
    caps: &OracleCaps,
    mut visit: impl FnMut(u64, &RationalDist<u64>),
) -> Result<(), CapExceeded> {
    if n > caps.size_n {
        return Err(CapExceeded::steps(n, caps.size_n));
    }
    let mut dist = RationalDist::point(0u64);
    visit(0, &dist);
    for j in 1..=n {
        dist = push_forward(&dist, size_kernel);
        if dist.len() > caps.support {
            return Err(CapExceeded::support(dist.len(), caps.support));
        }
        visit(j, &dist);
    }
    Ok(())
}

/// Law of `B_n`.
pub fn exact_size_distribution(n: u64, caps: &OracleCaps) -> Result<RationalDist<u64>, CapExceeded> {
    if n > caps.size_n {
        return Err(CapExceeded::steps(n, caps.size_n));
    }
    evolve(n, 0u64, caps.support, size_kernel)
}

pub fn degree_kernel(s: &DegreeKey) -> Vec<(DegreeKey, Rational)> {
    let b: u64 = s.counts.iter().sum::<u64>() - 1;
    let mut doubled: Vec<u64> = s.counts.iter().map(|c| 2 * c).collect();
    doubled = bumped(&doubled, 2, 1);
    let mut out = vec![(DegreeKey { counts: doubled, root_degree: 2 }, ratio(1, b + 1))];
    for (i, &c) in s.counts.iter().enumerate() {
        let w = c - u64::from(i as u64 == s.root_degree);
        if w == 0 {
            continue;
        }
        let counts = bumped(&bumped(&bumped(&s.counts, i, -1), i + 1, 1), 0, 1);
        out.push((DegreeKey { counts: trim(counts), root_degree: s.root_degree }, ratio(w, b + 1)));
    }
    out
}

pub fn profile_kernel(h: &[u64]) -> Vec<(Vec<u64>, Rational)> {
    let b: u64 = h.iter().sum::<u64>() - 1;
    let mut doubled = vec![1];
    doubled.extend(h.iter().map(|x| 2 * x));
    let mut out = vec![(doubled, ratio(1, b + 1))];
    for (k, &c) in h.iter().enumerate().skip(1) {
        if c > 0 {
            out.push((bumped(h, k + 1, 1), ratio(c, b + 1)));
        }
    }
    out
}

pub fn tagged_kernel(s: &TaggedKey, rule: TaggedRule) -> Vec<(TaggedKey, Rational)> {
    let k = s.heights.len();
    let b: u64 = s.hist.iter().sum::<u64>() - 1;
    let mut out = Vec::new();
    // Doubling: each tag resets with probability 1/(2b+3).
    let mut doubled = vec![1];
    doubled.extend(s.hist.iter().map(|x| 2 * x));
    for mask in 0..1u32 << k {
        let mut p = ratio(1, b + 1);
        let heights = (0..k)
            .map(|j| {
                if mask >> j & 1 == 1 {
                    p *= ratio(1, 2 * b + 3);
                    0
                } else {
                    p *= ratio(2 * b + 2, 2 * b + 3);
                    s.heights[j] + 1
                }
            })
            .collect();
        out.push((TaggedKey { hist: doubled.clone(), heights }, p));
    }
    if b == 0 {
        return out;
    }
    let nonroot = |out: &mut Vec<(TaggedKey, Rational)>, p: &Rational, heights: &dyn Fn(u32) -> Vec<u32>| {
        for (h, &c) in s.hist.iter().enumerate().skip(1) {
            if c > 0 {
                let key = TaggedKey { hist: bumped(&s.hist, h + 1, 1), heights: heights(h as u32) };
                out.push((key, p * ratio(c, b)));
            }
        }
    };
    for mask in 0..1u32 << k {
        let mut p = ratio(b, b + 1);
        for j in 0..k {
            p *= if mask >> j & 1 == 1 { ratio(1, b + 2) } else { ratio(b + 1, b + 2) };
        }
        if mask == 0 {
            nonroot(&mut out, &p, &|_| s.heights.clone());
            continue;
        }
        let moved = |parent: u32| -> Vec<u32> {
            (0..k).map(|j| if mask >> j & 1 == 1 { parent + 1 } else { s.heights[j] }).collect()
        };
        let lead = mask.trailing_zeros() as usize;
        let parent = s.heights[lead];
        if parent == 0 && rule == TaggedRule::Exact {
            nonroot(&mut out, &p, &moved);
        } else {
            let key = TaggedKey { hist: bumped(&s.hist, parent as usize + 1, 1), heights: moved(parent) };
            out.push((key, p));
        }
    }
    out
}

pub fn exact_statistic_distribution(
    n: u64,
    chain: ExactChain,
    caps: &OracleCaps,
) -> Result<RationalDist<StatKey>, CapExceeded> {
    let limit = |cap: u64| if n > cap { Err(CapExceeded::steps(n, cap)) } else { Ok(()) };
    match chain {
        ExactChain::Size => Ok(exact_size_distribution(n, caps)?.map(|&b| StatKey::Size(b))),
        ExactChain::Degree => {
            limit(caps.degree_n)?;
            let init = DegreeKey { counts: vec![1], root_degree: 0 };
            Ok(evolve(n, init, caps.support, degree_kernel)?.map(|d| StatKey::Degree(d.clone())))
        }
        ExactChain::Profile => {
            limit(caps.profile_n)?;
            Ok(evolve(n, vec![1u64], caps.support, |h| profile_kernel(h))?.map(|h| StatKey::Profile(h.clone())))
        }
        ExactChain::Tagged { k, rule } => {
            limit(caps.tagged_n)?;
            Ok(tagged_distribution(n, k, rule, caps)?.map(|t| StatKey::Tagged(t.clone())))
        }
    }
}

pub fn tagged_distribution(
    n: u64,
    k: usize,
    rule: TaggedRule,
    caps: &OracleCaps,
) -> Result<RationalDist<TaggedKey>, CapExceeded> {
    let init = TaggedKey { hist: vec![1], heights: vec![0; k] };
    evolve(n, init, caps.support, |s| tagged_kernel(s, rule))
}

/// Mean of `B_n` computed from its exact law.
pub fn size_mean_from_distribution(n: u64, caps: &OracleCaps) -> Result<Rational, CapExceeded> {
    Ok(exact_size_distribution(n, caps)?.mean())
}

/// Whether the kernel row of every state in `dist` sums to one.
pub fn kernel_rows_sum_to_one<K: Ord + Clone>(
    dist: &RationalDist<K>,
    mut kernel: impl FnMut(&K) -> Vec<(K, Rational)>,
) -> bool {
    dist.iter().all(|(s, _)| kernel(s).into_iter().fold(Rational::from_integer(0.into()), |a, (_, p)| a + p).is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::dist::q;

    fn caps() -> OracleCaps {
        OracleCaps::default()
    }

    #[test]
    fn size_small_n() {
        assert_eq!(exact_size_distribution(1, &caps()).unwrap(), RationalDist::point(2));
        let d2 = exact_size_distribution(2, &caps()).unwrap();
        assert_eq!(d2.to_json().to_string(), r#"{"3":"2/3","6":"1/3"}"#);
        assert_eq!(d2.mean(), q(4, 1));
    }

    #[test]
    fn size_support_counts() {
        let c = caps();
        assert_eq!(exact_size_distribution(5, &c).unwrap().len(), 16);
        assert_eq!(exact_size_distribution(10, &c).unwrap().len(), 301);
    }

    #[test]
    fn support_cap_is_enforced() {
        let c = OracleCaps { support: 100, ..caps() };
        let e = exact_size_distribution(10, &c).unwrap_err();
        assert_eq!(e.what, "support");
        assert!(exact_size_distribution(61, &caps()).is_err());
    }

    #[test]
    fn degree_and_profile_at_two() {
        let d = exact_statistic_distribution(2, ExactChain::Degree, &caps()).unwrap();
        let a = StatKey::Degree(DegreeKey { counts: vec![4, 0, 3], root_degree: 2 });
        let b = StatKey::Degree(DegreeKey { counts: vec![2, 1, 1], root_degree: 2 });
        assert_eq!((d.get(&a), d.get(&b), d.len()), (q(1, 3), q(2, 3), 2));
        let p = exact_statistic_distribution(2, ExactChain::Profile, &caps()).unwrap();
        assert_eq!(p.get(&StatKey::Profile(vec![1, 2, 4])), q(1, 3));
        assert_eq!(p.get(&StatKey::Profile(vec![1, 2, 1])), q(2, 3));
    }

    #[test]
    fn tagged_at_one() {
        let t = tagged_distribution(1, 1, TaggedRule::Exact, &caps()).unwrap();
        let h = t.map(|s| s.heights[0]);
        assert_eq!((h.get(&0), h.get(&1)), (q(1, 3), q(2, 3)));
    }

    #[test]
    fn literal_rule_misses_at_two() {
        let c = caps();
        let lit = tagged_distribution(2, 1, TaggedRule::Literal, &c).unwrap().map(|s| s.heights[0]);
        let ex = tagged_distribution(2, 1, TaggedRule::Exact, &c).unwrap().map(|s| s.heights[0]);
        assert_eq!(lit.get(&2), q(19, 63));
        assert_eq!(ex.get(&2), q(5, 14));
    }

    #[test]
    fn kernels_are_stochastic() {
        let c = caps();
        let d = evolve(4, DegreeKey { counts: vec![1], root_degree: 0 }, c.support, degree_kernel).unwrap();
        assert!(d.is_normalized() && kernel_rows_sum_to_one(&d, degree_kernel));
        let t = tagged_distribution(3, 3, TaggedRule::Exact, &c).unwrap();
        assert!(t.is_normalized() && kernel_rows_sum_to_one(&t, |s| tagged_kernel(s, TaggedRule::Exact)));
    }
}
