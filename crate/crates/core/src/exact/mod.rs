//! Exact rational oracles.

pub mod chains;
pub mod dist;
pub mod enumerate;
pub mod equivalence;
pub mod fixed_point;
pub mod moments;

pub use chains::{
    exact_size_distribution, exact_statistic_distribution, tagged_distribution, DegreeKey, ExactChain, OracleCaps,
    StatKey, TaggedKey,
};
pub use dist::{parse_rational, q, rational_string, Rational, RationalDist};
pub use enumerate::{enumerate_exact, inf_tree_exact_mean, inf_tree_lower_bound};
pub use equivalence::{oracle_equivalence, Equivalence};
pub use fixed_point::{fixed_point_check, DegreeFixedPoint, FixedPointReport};
pub use moments::{exact_moment, exact_moments, float_moment, float_moments, m_k, m_k_closed};
