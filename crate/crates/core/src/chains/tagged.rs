//! Coupled tagged-node heights.
//!
//! Each of `k` tags follows a node that is, at every time, distributed as a
//! uniform node of the current tree, and the `k` tags are conditionally
//! independent given the tree. On a doubling step tag `j` resets to the new
//! root when `K_j ~ Bern(1/(2B+3))` fires and otherwise moves one level
//! down. On a non-doubling step tag `j` moves to the new node when
//! `L_j ~ Bern(1/(B+2))` fires; the new node hangs below the node carried
//! by the lowest-indexed flagged tag.
//!
//! Under [`TaggedRule::Literal`] that parent is used even when it is the
//! root, which the growth rule forbids; the law then drifts from the true
//! one from `n = 2` on. [`TaggedRule::Exact`] draws a fresh uniform
//! non-root parent in that case, which needs the height profile, so the
//! state carries a [`ProfileChainState`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::profile::ProfileChainState;
use crate::rng::one_in;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaggedRule {
    #[default]
    Exact,
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedHeightsState {
    heights: Vec<u32>,
    profile: ProfileChainState,
    rule: TaggedRule,
    reset_counts: Vec<u64>,
    jump_counts: Vec<u64>,
    last_reset: Vec<u64>,
    root_escapes: u64,
}

impl TaggedHeightsState {
    pub fn new(k: usize, rule: TaggedRule) -> Self {
        assert!(k >= 1, "at least one tag");
        TaggedHeightsState {
            heights: vec![0; k],
            profile: ProfileChainState::new(),
            rule,
            reset_counts: vec![0; k],
            jump_counts: vec![0; k],
            last_reset: vec![0; k],
            root_escapes: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.heights.len()
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    pub fn b(&self) -> u64 {
        self.profile.b()
    }

    pub fn n(&self) -> u64 {
        self.profile.n()
    }

    pub fn rule(&self) -> TaggedRule {
        self.rule
    }

    /// Height profile of the underlying tree. Under the literal rule it
    /// may record root children created by non-doubling steps.
    pub fn profile(&self) -> &ProfileChainState {
        &self.profile
    }

    pub fn reset_counts(&self) -> &[u64] {
        &self.reset_counts
    }

    pub fn jump_counts(&self) -> &[u64] {
        &self.jump_counts
    }

    /// Step of each tag's most recent reset (0 if never reset).
    pub fn last_reset(&self) -> &[u64] {
        &self.last_reset
    }

    /// Non-doubling steps whose lead tag sat at the root.
    pub fn root_escapes(&self) -> u64 {
        self.root_escapes
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let b = self.b();
        let doubled = one_in(rng, b + 1);
        let n_next = self.n() + 1;
        if doubled {
            for j in 0..self.k() {
                if one_in(rng, 2 * b + 3) {
                    self.heights[j] = 0;
                    self.reset_counts[j] += 1;
                    self.last_reset[j] = n_next;
                } else {
                    self.heights[j] += 1;
                }
            }
            self.profile.apply_doubling();
            return true;
        }
        let flags: Vec<bool> = (0..self.k()).map(|_| one_in(rng, b + 2)).collect();
        let Some(lead) = flags.iter().position(|&f| f) else {
            let h = self.profile.sample_nonroot_height(rng);
            self.profile.attach_below(h);
            return false;
        };
        let parent = match (self.heights[lead], self.rule) {
            (0, TaggedRule::Exact) => {
                self.root_escapes += 1;
                self.profile.sample_nonroot_height(rng)
            }
            (h, _) => h,
        };
        self.profile.attach_below(parent);
        for (j, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
            self.heights[j] = parent + 1;
            if j != lead {
                self.jump_counts[j] += 1;
            }
        }
        false
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.heights.iter().any(|&h| u64::from(h) > self.n()) {
            return Err("tag deeper than n".into());
        }
        if self.rule == TaggedRule::Exact {
            let hist = self.profile.hist();
            if self.heights.iter().any(|&h| hist.get(h as usize).copied().unwrap_or(0) == 0) {
                return Err("tag at an empty height".into());
            }
            self.profile.check()?;
        }
        Ok(())
    }
}

/// Heights of `k` tags after `n` steps.
pub fn sample_tagged<R: Rng + ?Sized>(n: u64, k: usize, rule: TaggedRule, rng: &mut R) -> Vec<u32> {
    let mut s = TaggedHeightsState::new(k, rule);
    s.run(n, rng);
    s.heights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn first_step_resets_one_third_of_the_time() {
        let mut rng = stream(4);
        let trials = 60_000;
        let zeros = (0..trials).filter(|_| sample_tagged(1, 1, TaggedRule::Exact, &mut rng)[0] == 0).count();
        let p = zeros as f64 / trials as f64;
        assert!((p - 1.0 / 3.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn flagged_tags_share_the_new_node() {
        let mut rng = stream(8);
        for _ in 0..2000 {
            let mut s = TaggedHeightsState::new(2, TaggedRule::Exact);
            s.run(6, &mut rng);
            let before = s.heights().to_vec();
            let jumps_before: u64 = s.jump_counts().iter().sum();
            let doubled = s.step(&mut rng);
            let after = s.heights();
            if !doubled && s.jump_counts().iter().sum::<u64>() > jumps_before {
                assert_eq!(after[0], after[1]);
            }
            for (a, b) in before.iter().zip(after) {
                assert!(*b == *a || *b == a + 1 || *b == 0 || after.contains(b));
            }
            s.check().unwrap();
        }
    }

    #[test]
    fn heights_stay_on_occupied_levels() {
        let mut rng = stream(21);
        let mut s = TaggedHeightsState::new(3, TaggedRule::Exact);
        for _ in 0..20_000 {
            s.step(&mut rng);
        }
        s.check().unwrap();
        assert!(s.last_reset().iter().all(|&r| r <= s.n()));
    }
}
