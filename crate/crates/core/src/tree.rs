//! Explicit reference trees.
//!
//! [`TreeState`] grows the doubling-at-root tree node by node; [`InfTreeState`]
//! grows the double-everywhere variant. Both are arenas indexed by `u32`, with
//! children kept as singly linked sibling lists so new children are appended
//! on the right in O(1).

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CapExceeded;

pub const DEFAULT_NODE_CAP: usize = 100_000_000;

const NONE: u32 = u32::MAX;

/// Trees up to this size are fully re-validated after every debug-build mutation.
const FULL_CHECK_LIMIT: usize = 4096;

/// Which branch of the growth rule a step took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub doubled: bool,
    pub chosen_depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Arena {
    parent: Vec<u32>,
    first_child: Vec<u32>,
    last_child: Vec<u32>,
    next_sibling: Vec<u32>,
    depth: Vec<u32>,
}

impl Arena {
    fn singleton() -> Self {
        Arena {
            parent: vec![NONE],
            first_child: vec![NONE],
            last_child: vec![NONE],
            next_sibling: vec![NONE],
            depth: vec![0],
        }
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    fn push_child(&mut self, parent: u32) -> u32 {
        let id = self.len() as u32;
        self.parent.push(parent);
        self.first_child.push(NONE);
        self.last_child.push(NONE);
        self.next_sibling.push(NONE);
        self.depth.push(self.depth[parent as usize] + 1);
        let p = parent as usize;
        if self.last_child[p] == NONE {
            self.first_child[p] = id;
        } else {
            self.next_sibling[self.last_child[p] as usize] = id;
        }
        self.last_child[p] = id;
        id
    }

    fn children(&self, node: u32) -> Children<'_> {
        Children { next: &self.next_sibling, cur: self.first_child[node as usize] }
    }

    /// Copy the subtree rooted at `src` under `dst_parent` (appended as its
    /// last child). Preorder copy, children order preserved. Returns the new root.
    fn copy_subtree(&mut self, src: u32, dst_parent: u32) -> u32 {
        let new_root = self.push_child(dst_parent);
        let mut stack = vec![(src, new_root)];
        while let Some((from, to)) = stack.pop() {
            let mut c = self.first_child[from as usize];
            while c != NONE {
                let nc = self.push_child(to);
                stack.push((c, nc));
                c = self.next_sibling[c as usize];
            }
        }
        new_root
    }

    fn check(&self, root: u32) -> Result<(), String> {
        let n = self.len();
        let mut roots = 0;
        for v in 0..n {
            let p = self.parent[v];
            if p == NONE {
                roots += 1;
                if v as u32 != root || self.depth[v] != 0 {
                    return Err(format!("unexpected parentless node {v}"));
                }
            } else if self.depth[v] != self.depth[p as usize] + 1 {
                return Err(format!("depth mismatch at node {v}"));
            }
        }
        if roots != 1 {
            return Err(format!("{roots} roots"));
        }
        let mut seen = 0usize;
        for v in 0..n as u32 {
            for c in self.children(v) {
                if self.parent[c as usize] != v {
                    return Err(format!("child {c} of {v} has parent {}", self.parent[c as usize]));
                }
                seen += 1;
            }
        }
        if seen != n - 1 {
            return Err(format!("{seen} child links for {n} nodes"));
        }
        Ok(())
    }
}

pub struct Children<'a> {
    next: &'a [u32],
    cur: u32,
}

impl Iterator for Children<'_> {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        if self.cur == NONE {
            return None;
        }
        let c = self.cur;
        self.cur = self.next[c as usize];
        Some(c)
    }
}

/// The doubling-at-root tree `τ_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeState {
    arena: Arena,
    root: u32,
    step_count: u64,
    kappa: u64,
    node_cap: usize,
}

impl Default for TreeState {
    fn default() -> Self {
        Self::new()
    }
}

impl TreeState {
    /// `τ_0`: a lone root.
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_NODE_CAP)
    }

    pub fn with_cap(node_cap: usize) -> Self {
        TreeState { arena: Arena::singleton(), root: 0, step_count: 0, kappa: 0, node_cap }
    }

    pub fn node_count(&self) -> usize {
        self.arena.len()
    }

    /// `B_n`, the number of non-root nodes.
    pub fn size_b(&self) -> u64 {
        self.arena.len() as u64 - 1
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Number of doubling events so far.
    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn depth(&self, node: u32) -> u32 {
        self.arena.depth[node as usize]
    }

    pub fn parent(&self, node: u32) -> Option<u32> {
        match self.arena.parent[node as usize] {
            NONE => None,
            p => Some(p),
        }
    }

    pub fn children(&self, node: u32) -> Children<'_> {
        self.arena.children(node)
    }

    /// One growth step with a uniformly chosen node.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<StepOutcome, CapExceeded> {
        let chosen = rng.random_range(0..self.arena.len()) as u32;
        self.apply_choice(chosen)
    }

    /// Apply the growth rule with `chosen` as the selected node.
    pub fn apply_choice(&mut self, chosen: u32) -> Result<StepOutcome, CapExceeded> {
        let chosen_depth = self.depth(chosen);
        let doubled = chosen == self.root;
        if doubled {
            self.double()?;
        } else {
            if self.arena.len() + 1 > self.node_cap {
                return Err(CapExceeded::nodes(self.arena.len() + 1, self.node_cap));
            }
            let new = self.arena.push_child(chosen);
            debug_assert_eq!(self.arena.depth[new as usize], chosen_depth + 1);
        }
        self.step_count += 1;
        Ok(StepOutcome { doubled, chosen_depth })
    }

    /// New root with two copies of the current tree as its subtrees.
    fn double(&mut self) -> Result<(), CapExceeded> {
        let n = self.arena.len();
        let new_len = 2 * n + 1;
        if new_len > self.node_cap {
            return Err(CapExceeded::nodes(new_len, self.node_cap));
        }
        // Old node i becomes 1 + i (first copy) and 1 + n + i (second copy).
        let shift = |x: u32, off: u32| if x == NONE { NONE } else { x + off };
        let old = std::mem::replace(&mut self.arena, Arena::singleton());
        let a = &mut self.arena;
        for v in [&mut a.parent, &mut a.first_child, &mut a.last_child, &mut a.next_sibling, &mut a.depth] {
            v.reserve(new_len - 1);
        }
        for off in [1u32, 1 + n as u32] {
            for i in 0..n {
                let p = old.parent[i];
                a.parent.push(if p == NONE { 0 } else { p + off });
                a.first_child.push(shift(old.first_child[i], off));
                a.last_child.push(shift(old.last_child[i], off));
                a.next_sibling.push(shift(old.next_sibling[i], off));
                a.depth.push(old.depth[i] + 1);
            }
        }
        let first = 1 + self.root;
        let second = first + n as u32;
        a.first_child[0] = first;
        a.last_child[0] = second;
        a.next_sibling[first as usize] = second;
        self.root = 0;
        self.kappa += 1;
        debug_assert!(new_len > FULL_CHECK_LIMIT || self.arena.check(self.root).is_ok());
        Ok(())
    }

    /// Full structural check (O(size)).
    pub fn check_invariants(&self) -> Result<(), String> {
        self.arena.check(self.root)
    }

    pub fn summarize(&self) -> TreeSummary {
        let a = &self.arena;
        let mut degree_hist = Vec::new();
        let mut height_hist = Vec::new();
        for v in 0..a.len() as u32 {
            let d = a.children(v).count();
            bump(&mut degree_hist, d);
            bump(&mut height_hist, a.depth[v as usize] as usize);
        }
        TreeSummary {
            size_b: self.size_b(),
            root_degree: a.children(self.root).count() as u64,
            height: (height_hist.len() - 1) as u32,
            degree_hist,
            height_hist,
            kappa: self.kappa,
        }
    }

    /// Depths of `k` independent uniform nodes.
    pub fn sample_node_heights<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<u32> {
        (0..k).map(|_| self.arena.depth[rng.random_range(0..self.arena.len())]).collect()
    }
}

fn bump(hist: &mut Vec<u64>, i: usize) {
    if hist.len() <= i {
        hist.resize(i + 1, 0);
    }
    hist[i] += 1;
}

/// Grow `τ_n` from `τ_0`.
pub fn grow<R: Rng + ?Sized>(n: u64, rng: &mut R) -> Result<TreeState, CapExceeded> {
    grow_with_cap(n, DEFAULT_NODE_CAP, rng)
}

pub fn grow_with_cap<R: Rng + ?Sized>(n: u64, cap: usize, rng: &mut R) -> Result<TreeState, CapExceeded> {
    let mut t = TreeState::with_cap(cap);
    for _ in 0..n {
        t.step(rng)?;
    }
    Ok(t)
}

/// Exact statistics of an explicit tree. Histograms are indexed by degree or
/// height and carry no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeSummary {
    pub size_b: u64,
    pub degree_hist: Vec<u64>,
    pub root_degree: u64,
    pub height_hist: Vec<u64>,
    pub height: u32,
    pub kappa: u64,
}

impl TreeSummary {
    pub fn degree_map(&self) -> BTreeMap<u64, u64> {
        self.degree_hist.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i as u64, c)).collect()
    }

    pub fn check(&self) -> Result<(), String> {
        let nodes: u64 = self.degree_hist.iter().sum();
        let edges: u64 = self.degree_hist.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();
        if nodes != self.size_b + 1 || edges != self.size_b {
            return Err(format!("degree sums {nodes}/{edges} vs B={}", self.size_b));
        }
        if self.height_hist.first() != Some(&1) || self.height_hist.iter().sum::<u64>() != self.size_b + 1 {
            return Err("height histogram inconsistent".into());
        }
        if self.height as usize + 1 != self.height_hist.len() {
            return Err("height is not the top bucket".into());
        }
        Ok(())
    }
}

/// The double-everywhere tree `τ_n^∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfTreeState {
    arena: Arena,
    root: u32,
    /// Strict descendant counts `s_n(u)`.
    subtree_size: Vec<u64>,
    step_count: u64,
    node_cap: usize,
}

impl Default for InfTreeState {
    fn default() -> Self {
        Self::new()
    }
}

impl InfTreeState {
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_NODE_CAP)
    }

    pub fn with_cap(node_cap: usize) -> Self {
        InfTreeState { arena: Arena::singleton(), root: 0, subtree_size: vec![0], step_count: 0, node_cap }
    }

    /// `|τ_n^∞|`.
    pub fn size(&self) -> usize {
        self.arena.len()
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn subtree_size(&self, node: u32) -> u64 {
        self.subtree_size[node as usize]
    }

    pub fn depth(&self, node: u32) -> u32 {
        self.arena.depth[node as usize]
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<u64, CapExceeded> {
        let u = rng.random_range(0..self.arena.len()) as u32;
        self.apply_choice(u)
    }

    /// Replace the subtree at `u` by a new node carrying two copies of it.
    /// Returns the size increase `s(u) + 2`.
    pub fn apply_choice(&mut self, u: u32) -> Result<u64, CapExceeded> {
        let s = self.subtree_size[u as usize];
        let growth = s + 2;
        let new_len = self.arena.len() + growth as usize;
        if new_len > self.node_cap {
            return Err(CapExceeded::nodes(new_len, self.node_cap));
        }
        let a = &mut self.arena;
        let parent = a.parent[u as usize];
        // New internal node w takes u's place among its siblings.
        let w = a.len() as u32;
        a.parent.push(parent);
        a.first_child.push(u);
        a.last_child.push(u);
        a.next_sibling.push(a.next_sibling[u as usize]);
        a.depth.push(a.depth[u as usize]);
        if parent == NONE {
            self.root = w;
        } else {
            let p = parent as usize;
            if a.first_child[p] == u {
                a.first_child[p] = w;
            } else {
                let mut c = a.first_child[p];
                while a.next_sibling[c as usize] != u {
                    c = a.next_sibling[c as usize];
                }
                a.next_sibling[c as usize] = w;
            }
            if a.last_child[p] == u {
                a.last_child[p] = w;
            }
        }
        a.parent[u as usize] = w;
        a.next_sibling[u as usize] = NONE;
        // Push u's subtree one level down.
        let mut stack = vec![u];
        while let Some(v) = stack.pop() {
            a.depth[v as usize] += 1;
            stack.extend(a.children(v));
        }
        let before = a.len();
        a.copy_subtree(u, w);
        self.subtree_size.push(2 * (s + 1));
        // Copied nodes mirror the original subtree's sizes (preorder copy).
        let mut order = Vec::with_capacity((s + 1) as usize);
        let mut stack = vec![u];
        while let Some(v) = stack.pop() {
            order.push(v);
            let kids: Vec<u32> = a.children(v).collect();
            stack.extend(kids.into_iter().rev());
        }
        let copied = preorder_stack_order(a, before as u32);
        debug_assert_eq!(order.len(), copied.len());
        self.subtree_size.resize(a.len(), 0);
        for (src, dst) in order.iter().zip(&copied) {
            self.subtree_size[*dst as usize] = self.subtree_size[*src as usize];
        }
        let mut anc = parent;
        while anc != NONE {
            self.subtree_size[anc as usize] += growth;
            anc = a.parent[anc as usize];
        }
        self.step_count += 1;
        debug_assert!(self.size() > FULL_CHECK_LIMIT || self.check_invariants().is_ok());
        Ok(growth)
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        self.arena.check(self.root)?;
        // s(u) = 1-weighted count of strict descendants, via children.
        for v in (0..self.arena.len() as u32).rev() {
            let expect: u64 = self.arena.children(v).map(|c| 1 + self.subtree_size[c as usize]).sum();
            if expect != self.subtree_size[v as usize] {
                return Err(format!("subtree size mismatch at {v}"));
            }
        }
        Ok(())
    }

    /// `Σ_u s(u)`, which equals `Σ_v depth(v)`.
    pub fn total_subtree_size(&self) -> u64 {
        self.subtree_size.iter().sum()
    }

    pub fn total_depth(&self) -> u64 {
        self.arena.depth.iter().map(|&d| d as u64).sum()
    }

    fn is_binary(&self) -> bool {
        (0..self.arena.len() as u32).all(|v| {
            let c = self.arena.children(v).count();
            c == 0 || c == 2
        })
    }

    /// Every node has zero or two children.
    pub fn check_binary(&self) -> bool {
        self.is_binary()
    }
}

/// Nodes of the copy rooted at `root`, in the order `copy_subtree` created
/// them matched against a preorder walk of the source.
fn preorder_stack_order(a: &Arena, root: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        out.push(v);
        let kids: Vec<u32> = a.children(v).collect();
        stack.extend(kids.into_iter().rev());
    }
    out
}

/// Grow `τ_n^∞`.
pub fn grow_inf<R: Rng + ?Sized>(n: u64, cap: usize, rng: &mut R) -> Result<InfTreeState, CapExceeded> {
    let mut t = InfTreeState::with_cap(cap);
    for _ in 0..n {
        t.step(rng)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn tau1() -> TreeState {
        let mut t = TreeState::new();
        t.apply_choice(0).unwrap();
        t
    }

    #[test]
    fn first_step_always_doubles() {
        for seed in 0..20 {
            let t = grow(1, &mut stream(seed)).unwrap();
            assert_eq!(t.size_b(), 2);
            assert_eq!(t.kappa(), 1);
        }
        let s = tau1().summarize();
        assert_eq!(s.degree_hist, vec![2, 0, 1]);
        assert_eq!(s.height_hist, vec![1, 2]);
        assert_eq!(s.height, 1);
    }

    #[test]
    fn grow_zero_is_lone_root() {
        let t = grow(0, &mut stream(0)).unwrap();
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.summarize().height, 0);
    }

    #[test]
    fn doubling_root_of_tau1() {
        let mut t = tau1();
        let out = t.apply_choice(t.root()).unwrap();
        assert!(out.doubled);
        let s = t.summarize();
        assert_eq!(s.size_b, 6);
        assert_eq!(s.height_hist, vec![1, 2, 4]);
        t.check_invariants().unwrap();
    }

    #[test]
    fn leaf_choice_in_tau1() {
        let mut t = tau1();
        let leaf = t.children(t.root()).next().unwrap();
        let out = t.apply_choice(leaf).unwrap();
        assert_eq!(out, StepOutcome { doubled: false, chosen_depth: 1 });
        let s = t.summarize();
        assert_eq!(s.size_b, 3);
        assert_eq!(s.degree_map(), BTreeMap::from([(0, 2), (1, 1), (2, 1)]));
    }

    #[test]
    fn double_double() {
        let mut t = TreeState::new();
        t.apply_choice(0).unwrap();
        t.apply_choice(t.root()).unwrap();
        t.apply_choice(t.root()).unwrap();
        let s = t.summarize();
        assert_eq!(s.size_b, 14);
        assert_eq!(s.height_hist, vec![1, 2, 4, 8]);
    }

    #[test]
    fn children_keep_insertion_order_through_doubling() {
        let mut t = tau1();
        let leaves: Vec<u32> = t.children(t.root()).collect();
        t.apply_choice(leaves[1]).unwrap();
        t.apply_choice(leaves[1]).unwrap();
        t.apply_choice(t.root()).unwrap();
        // Leftmost child of the root is the copy of the previous root.
        let left = t.children(t.root()).next().unwrap();
        let grand: Vec<usize> = t.children(left).map(|c| t.children(c).count()).collect();
        assert_eq!(grand, vec![0, 2]);
    }

    #[test]
    fn summary_identities_on_random_trees() {
        let mut rng = stream(5);
        for n in 0..60 {
            let t = grow(n, &mut rng).unwrap();
            t.check_invariants().unwrap();
            let s = t.summarize();
            s.check().unwrap();
            assert!(s.size_b >= n);
        }
    }

    #[test]
    fn step_maps_summary_like_the_chains() {
        let mut rng = stream(9);
        let mut t = grow(12, &mut rng).unwrap();
        for _ in 0..40 {
            let before = t.summarize();
            let out = t.step(&mut rng).unwrap();
            let after = t.summarize();
            if out.doubled {
                assert_eq!(after.size_b, 2 * before.size_b + 2);
                let mut shifted = vec![1];
                shifted.extend(before.height_hist.iter().map(|h| 2 * h));
                assert_eq!(after.height_hist, shifted);
                assert_eq!(after.height, before.height + 1);
                for i in 0..after.degree_hist.len() {
                    let b = before.degree_hist.get(i).copied().unwrap_or(0);
                    assert_eq!(after.degree_hist[i], 2 * b + u64::from(i == 2));
                }
            } else {
                assert_eq!(after.size_b, before.size_b + 1);
                let k = out.chosen_depth as usize + 1;
                assert_eq!(
                    after.height_hist.get(k).copied().unwrap_or(0),
                    before.height_hist.get(k).copied().unwrap_or(0) + 1
                );
            }
        }
    }

    #[test]
    fn node_cap_is_enforced() {
        let mut t = TreeState::with_cap(5);
        t.apply_choice(0).unwrap();
        assert!(t.apply_choice(t.root()).is_err());
    }

    #[test]
    fn sampled_heights_of_tau1() {
        let t = tau1();
        let mut rng = stream(3);
        let n = 30_000;
        let zeros = t.sample_node_heights(n, &mut rng).iter().filter(|&&h| h == 0).count();
        let p = zeros as f64 / n as f64;
        assert!((p - 1.0 / 3.0).abs() < 0.015, "{p}");
        assert_eq!(TreeState::new().sample_node_heights(4, &mut rng), vec![0; 4]);
    }

    #[test]
    fn inf_tree_first_steps() {
        let mut t = InfTreeState::new();
        assert_eq!(t.apply_choice(0).unwrap(), 2);
        assert_eq!(t.size(), 3);
        let leaf = (0..3).find(|&v| t.subtree_size(v) == 0).unwrap();
        let mut a = t.clone();
        a.apply_choice(leaf).unwrap();
        assert_eq!(a.size(), 5);
        let root = (0..3).find(|&v| t.subtree_size(v) == 2).unwrap();
        t.apply_choice(root).unwrap();
        assert_eq!(t.size(), 7);
        assert!(t.check_binary());
    }

    #[test]
    fn inf_tree_identities() {
        let mut rng = stream(21);
        let mut t = InfTreeState::new();
        for n in 1..=40u32 {
            let before = t.size();
            let g = t.step(&mut rng).unwrap();
            assert!(g >= 2);
            assert_eq!(t.size(), before + g as usize);
            // Each step at most doubles and adds one node.
            assert!((t.size() as u64) < (1u64 << (n + 1)));
            assert_eq!(t.total_subtree_size(), t.total_depth());
            assert!(t.check_binary());
        }
        t.check_invariants().unwrap();
    }
}
