use thiserror::Error;

/// A configured resource limit would be exceeded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{what} limit exceeded: needed {needed}, cap {cap}")]
pub struct CapExceeded {
    pub what: &'static str,
    pub needed: u64,
    pub cap: u64,
}

impl CapExceeded {
    pub fn nodes(needed: usize, cap: usize) -> Self {
        CapExceeded { what: "node", needed: needed as u64, cap: cap as u64 }
    }

    pub fn steps(needed: u64, cap: u64) -> Self {
        CapExceeded { what: "step", needed, cap }
    }

    pub fn support(needed: usize, cap: usize) -> Self {
        CapExceeded { what: "support", needed: needed as u64, cap: cap as u64 }
    }
}
