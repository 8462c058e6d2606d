//! Sufficient-statistic engines.
//!
//! Each chain evolves only the statistic it is named after, with the same
//! law as that statistic under explicit growth of the tree.

pub mod ct;
pub mod degree;
pub mod profile;
pub mod rrt;
pub mod size;
pub mod skeleton;
pub mod tagged;

pub use ct::{CtConfig, CtProcess, CtState};
pub use degree::DegreeChainState;
pub use profile::ProfileChainState;
pub use rrt::rrt_height;
pub use size::SizeChainState;
pub use skeleton::{kappa_of_n, SkeletonState};
pub use tagged::{TaggedHeightsState, TaggedRule};
