//! Explicit enumeration against the chain DPs.

use serde::Serialize;

use super::chains::{
    degree_kernel, evolve, exact_size_distribution, profile_kernel, tagged_distribution, DegreeKey, OracleCaps,
};
use super::enumerate::{degree_marginal, enumerate_exact, profile_marginal, size_marginal, tagged_marginal};
use crate::chains::TaggedRule;
use crate::error::CapExceeded;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub chain: String,
    pub n: u64,
    pub support: usize,
    pub equal: bool,
}

/// Exact equality of every chain's law with the enumerated one, for
/// `n <= n_max` (size, degree, profile, one and two tags) and
/// `n <= k3_n_max` for three tags.
pub fn oracle_equivalence(n_max: u64, k3_n_max: u64, caps: &OracleCaps) -> Result<Vec<Equivalence>, CapExceeded> {
    let mut out = Vec::new();
    let mut push = |chain: &str, n: u64, support: usize, equal: bool| {
        out.push(Equivalence { chain: chain.into(), n, support, equal })
    };
    for n in 0..=n_max.max(k3_n_max) {
        let trees = enumerate_exact(n)?;
        if n <= n_max {
            let size = exact_size_distribution(n, caps)?;
            push("size", n, size.len(), size == size_marginal(&trees) && size.is_normalized());
            let init = DegreeKey { counts: vec![1], root_degree: 0 };
            let degree = evolve(n, init, caps.support, degree_kernel)?;
            push("degree", n, degree.len(), degree == degree_marginal(&trees) && degree.is_normalized());
            let profile = evolve(n, vec![1u64], caps.support, |h| profile_kernel(h))?;
            push("profile", n, profile.len(), profile == profile_marginal(&trees) && profile.is_normalized());
        }
        for k in 1..=3usize {
            if (k < 3 && n > n_max) || (k == 3 && n > k3_n_max) {
                continue;
            }
            let tagged = tagged_distribution(n, k, TaggedRule::Exact, caps)?;
            let label = format!("tagged k={k}");
            push(&label, n, tagged.len(), tagged == tagged_marginal(&trees, k) && tagged.is_normalized());
        }
    }
    Ok(out)
}
