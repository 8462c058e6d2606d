use rand::Rng;

use crate::fenwick::WeightedIndex;
use crate::rng::one_in;

/// Height histogram of the tree. `hist[0] = 1` is the root, which is never
/// the parent of a non-doubling step, so the sampler carries weight 0 there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileChainState {
    hist: Vec<u64>,
    b: u64,
    n: u64,
    sampler: WeightedIndex,
}

impl Default for ProfileChainState {
    fn default() -> Self {
        Self::new()
    }
}

impl ProfileChainState {
    pub fn new() -> Self {
        ProfileChainState { hist: vec![1], b: 0, n: 0, sampler: WeightedIndex::from_weights(&[0]) }
    }

    pub fn from_hist(hist: Vec<u64>, n: u64) -> Self {
        assert_eq!(hist.first(), Some(&1), "exactly one node at height 0");
        let b = hist.iter().sum::<u64>() - 1;
        let mut w = hist.clone();
        w[0] = 0;
        ProfileChainState { sampler: WeightedIndex::from_weights(&w), hist, b, n }
    }

    pub fn hist(&self) -> &[u64] {
        &self.hist
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Tree height `H_n`.
    pub fn height(&self) -> u32 {
        (self.hist.len() - 1) as u32
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let doubled = one_in(rng, self.b + 1);
        if doubled {
            self.apply_doubling();
        } else {
            let k = self.sample_nonroot_height(rng);
            self.attach_below(k);
        }
        doubled
    }

    /// `h'(0) = 1`, `h'(j + 1) = 2 h(j)`.
    pub fn apply_doubling(&mut self) {
        let mut next = Vec::with_capacity(self.hist.len() + 1);
        next.push(1);
        next.extend(self.hist.iter().map(|&h| 2 * h));
        self.hist = next;
        let mut w = self.hist.clone();
        w[0] = 0;
        self.sampler.rebuild(&w);
        self.b = 2 * self.b + 2;
        self.n += 1;
    }

    /// Height of a uniform non-root node.
    pub fn sample_nonroot_height<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.sampler.sample(rng) as u32
    }

    /// A new leaf is attached to some node at height `k`.
    pub fn attach_below(&mut self, k: u32) {
        let k = k as usize;
        assert!(self.hist.get(k).copied().unwrap_or(0) > 0, "no node at height {k}");
        if self.hist.len() <= k + 1 {
            self.hist.push(0);
        }
        self.hist[k + 1] += 1;
        self.sampler.add(k + 1, 1);
        self.b += 1;
        self.n += 1;
    }

    pub fn check(&self) -> Result<(), String> {
        if self.hist[0] != 1 || self.hist.iter().sum::<u64>() != self.b + 1 {
            return Err("histogram does not match B".into());
        }
        if *self.hist.last().unwrap() == 0 || self.height() as u64 > self.n {
            return Err("bad top bucket".into());
        }
        Ok(())
    }
}

/// `H_n` from the profile engine.
pub fn sample_height<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u32 {
    let mut p = ProfileChainState::new();
    for _ in 0..n {
        p.step(rng);
    }
    p.height()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn doubling_shift() {
        let mut p = ProfileChainState::from_hist(vec![1, 2], 1);
        p.apply_doubling();
        assert_eq!(p.hist(), &[1, 2, 4]);
        assert_eq!(p.b(), 6);
    }

    #[test]
    fn non_doubling_picks_height_one() {
        let mut rng = stream(2);
        for _ in 0..50 {
            let mut p = ProfileChainState::from_hist(vec![1, 2], 1);
            assert_eq!(p.sample_nonroot_height(&mut rng), 1);
            p.attach_below(1);
            assert_eq!(p.hist(), &[1, 2, 1]);
        }
    }

    #[test]
    fn long_run_stays_consistent() {
        let mut rng = stream(3);
        let mut p = ProfileChainState::new();
        for _ in 0..50_000 {
            p.step(&mut rng);
        }
        p.check().unwrap();
        assert!(p.height() >= 1);
    }
}
