use rand::Rng;

/// Height of an `n`-node random recursive tree: node `i` attaches to a
/// uniform earlier node.
pub fn rrt_height<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u32 {
    assert!(n >= 1, "a tree has at least one node");
    let mut depth: Vec<u32> = Vec::with_capacity(n as usize);
    depth.push(0);
    let mut height = 0;
    for i in 1..n as usize {
        let d = depth[rng.random_range(0..i)] + 1;
        height = height.max(d);
        depth.push(d);
    }
    height
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn small_trees() {
        let mut rng = stream(0);
        assert_eq!(rrt_height(1, &mut rng), 0);
        assert_eq!(rrt_height(2, &mut rng), 1);
        let h3 = rrt_height(3, &mut rng);
        assert!(h3 == 1 || h3 == 2);
    }

    #[test]
    fn mean_height_of_three() {
        // Third node picks the root or node 1 with equal chance.
        let mut rng = stream(1);
        let m: f64 = (0..40_000).map(|_| rrt_height(3, &mut rng) as f64).sum::<f64>() / 40_000.0;
        assert!((m - 1.5).abs() < 0.01, "{m}");
    }
}
