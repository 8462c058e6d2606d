//! Verification procedures, each producing a [`TestReport`].

pub mod procedures;
pub mod report;
pub mod thresholds;

pub use procedures::*;
pub use report::{Check, Comparison, ReportMeta, TestReport};
pub use thresholds::{Thresholds, THRESHOLDS_VERSION};
