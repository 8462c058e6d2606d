//! Random recursive trees with doubling at the root.
//!
//! At each step a uniform node of the current tree is chosen. If it is the
//! root, the tree is replaced by a new root whose two subtrees are copies
//! of the old tree; otherwise the chosen node gets a new rightmost child.
//!
//! The crate has an explicit arena simulator ([`tree`]), sufficient
//! statistic chains and the doubling skeleton ([`chains`]), exact rational
//! oracles ([`exact`]), and the statistical checks built on them
//! ([`stats`], [`verify`]).

pub mod chains;
pub mod error;
pub mod exact;
pub mod fenwick;
pub mod rng;
pub mod stats;
pub mod tree;
pub mod verify;
