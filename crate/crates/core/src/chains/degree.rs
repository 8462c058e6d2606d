use rand::Rng;

use crate::fenwick::WeightedIndex;
use crate::rng::one_in;

/// Degree counts `U_i(n)` with the root's class tracked separately so that
/// non-doubling steps can sample a uniform non-root node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeChainState {
    counts: Vec<u64>,
    root_degree: u64,
    b: u64,
    n: u64,
    /// Weight of class `i` is `counts[i] - [i == root_degree]`.
    sampler: WeightedIndex,
}

impl Default for DegreeChainState {
    fn default() -> Self {
        Self::new()
    }
}

impl DegreeChainState {
    pub fn new() -> Self {
        DegreeChainState { counts: vec![1], root_degree: 0, b: 0, n: 0, sampler: WeightedIndex::from_weights(&[0]) }
    }

    /// State from explicit counts (trailing zeros allowed).
    pub fn from_counts(counts: Vec<u64>, root_degree: u64, n: u64) -> Self {
        let b = counts.iter().sum::<u64>() - 1;
        let mut weights = counts.clone();
        weights[root_degree as usize] -= 1;
        let mut s = DegreeChainState { counts, root_degree, b, n, sampler: WeightedIndex::from_weights(&weights) };
        s.trim();
        s
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn root_degree(&self) -> u64 {
        self.root_degree
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn trim(&mut self) {
        while self.counts.len() > 1 && *self.counts.last().unwrap() == 0 {
            self.counts.pop();
        }
    }

    fn bump(&mut self, i: usize, delta: i64) {
        if self.counts.len() <= i {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] = self.counts[i].checked_add_signed(delta).expect("negative count");
    }

    /// One step. Returns whether it doubled.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let doubled = one_in(rng, self.b + 1);
        if doubled {
            self.apply_doubling();
        } else {
            let i = self.sampler.sample(rng);
            self.apply_growth(i);
        }
        doubled
    }

    pub fn apply_doubling(&mut self) {
        for c in &mut self.counts {
            *c *= 2;
        }
        // Non-root weights are exactly the doubled old counts.
        self.sampler.rebuild(&self.counts);
        self.bump(2, 1);
        self.root_degree = 2;
        self.b = 2 * self.b + 2;
        self.n += 1;
    }

    /// A non-root node of degree `i` receives a child.
    pub fn apply_growth(&mut self, i: usize) {
        assert!(self.nonroot_weight(i) > 0, "no non-root node of degree {i}");
        self.bump(i, -1);
        self.bump(i + 1, 1);
        self.bump(0, 1);
        self.sampler.add(i, -1);
        self.sampler.add(i + 1, 1);
        self.sampler.add(0, 1);
        self.b += 1;
        self.n += 1;
        self.trim();
    }

    /// Number of non-root nodes with `i` children.
    pub fn nonroot_weight(&self, i: usize) -> u64 {
        self.sampler.weight(i)
    }

    /// `(X_0, ..., X_m)`: classes below `m` kept, the rest pooled into `X_m`.
    pub fn truncated(&self, m: usize) -> Vec<u64> {
        let mut x: Vec<u64> = (0..m).map(|i| self.counts.get(i).copied().unwrap_or(0)).collect();
        x.push(self.counts.iter().skip(m).sum());
        x
    }

    /// `U_i / (B + 1)` for every degree class.
    pub fn proportions(&self) -> Vec<f64> {
        let total = (self.b + 1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn check(&self) -> Result<(), String> {
        let nodes: u64 = self.counts.iter().sum();
        let edges: u64 = self.counts.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();
        if nodes != self.b + 1 || edges != self.b {
            return Err(format!("counts sum {nodes}, edges {edges}, B {}", self.b));
        }
        if self.counts.get(self.root_degree as usize).copied().unwrap_or(0) == 0 {
            return Err("root degree class is empty".into());
        }
        Ok(())
    }
}
