//! Binary indexed weight structure over small integer supports.
//!
//! Used to draw a height or degree class with probability proportional to
//! its count. Supports grow at the right end; a full rebuild is linear in
//! the support length.

use rand::Rng;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightedIndex {
    /// 1-based Fenwick array; `tree[0]` is unused. Length is a power of two plus one.
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
}

impl WeightedIndex {
    pub fn from_weights(weights: &[u64]) -> Self {
        let mut w = Self::default();
        w.rebuild(weights);
        w
    }

    /// Replace every weight. O(len).
    pub fn rebuild(&mut self, weights: &[u64]) {
        let cap = weights.len().max(1).next_power_of_two();
        self.weights.clear();
        self.weights.extend_from_slice(weights);
        self.tree.clear();
        self.tree.resize(cap + 1, 0);
        self.total = 0;
        for (i, &w) in weights.iter().enumerate() {
            self.tree[i + 1] = w;
            self.total += w;
        }
        for i in 1..=cap {
            let j = i + (i & i.wrapping_neg());
            if j <= cap {
                self.tree[j] += self.tree[i];
            }
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn weight(&self, index: usize) -> u64 {
        self.weights.get(index).copied().unwrap_or(0)
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    fn capacity(&self) -> usize {
        self.tree.len() - 1
    }

    /// Add `delta` to the weight at `index`, growing the support if needed.
    pub fn add(&mut self, index: usize, delta: i64) {
        if index >= self.weights.len() {
            if index >= self.capacity() {
                let mut w = std::mem::take(&mut self.weights);
                w.resize(index + 1, 0);
                self.rebuild(&w);
            } else {
                self.weights.resize(index + 1, 0);
            }
        }
        let w = &mut self.weights[index];
        *w = w.checked_add_signed(delta).expect("weight would become negative");
        self.total = self.total.checked_add_signed(delta).expect("total underflow");
        let mut i = index + 1;
        let cap = self.capacity();
        while i <= cap {
            self.tree[i] = self.tree[i].wrapping_add_signed(delta);
            i += i & i.wrapping_neg();
        }
    }

    /// Index `i` such that `prefix(i) <= target < prefix(i + 1)`.
    pub fn find(&self, mut target: u64) -> usize {
        debug_assert!(target < self.total);
        let cap = self.capacity();
        let mut pos = 0usize;
        let mut step = cap;
        while step > 0 {
            let next = pos + step;
            if next <= cap && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }

    /// Draw an index with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        assert!(self.total > 0, "sampling from an empty weight table");
        self.find(rng.random_range(0..self.total))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn find_walks_prefix_sums() {
        let w = WeightedIndex::from_weights(&[0, 2, 0, 3, 1]);
        let picks: Vec<usize> = (0..6).map(|t| w.find(t)).collect();
        assert_eq!(picks, vec![1, 1, 3, 3, 3, 4]);
    }

    #[test]
    fn add_grows_support() {
        let mut w = WeightedIndex::from_weights(&[1]);
        w.add(5, 4);
        assert_eq!(w.len(), 6);
        assert_eq!(w.total(), 5);
        assert_eq!(w.find(0), 0);
        assert_eq!(w.find(1), 5);
        w.add(0, -1);
        assert_eq!(w.find(0), 5);
    }

    proptest! {
        #[test]
        fn find_matches_linear_scan(
            weights in proptest::collection::vec(0u64..20, 1..40),
            updates in proptest::collection::vec((0usize..50, 0i64..7), 0..20),
        ) {
            let mut w = WeightedIndex::from_weights(&weights);
            let mut plain = weights.clone();
            for (i, d) in updates {
                w.add(i, d);
                if i >= plain.len() { plain.resize(i + 1, 0); }
                plain[i] += d as u64;
            }
            let total: u64 = plain.iter().sum();
            prop_assert_eq!(w.total(), total);
            for t in 0..total {
                let mut acc = 0;
                let expect = plain.iter().position(|&x| { acc += x; acc > t }).unwrap();
                prop_assert_eq!(w.find(t), expect);
            }
        }
    }
}
