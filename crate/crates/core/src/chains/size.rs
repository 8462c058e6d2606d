use rand::Rng;

use crate::rng::one_in;

/// Non-root node count `B_n`, optionally logging the doubling times.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SizeChainState {
    pub n: u64,
    pub b: u64,
    /// Steps `s` (1-based, so `s` is the time right after the doubling) at
    /// which a doubling happened.
    pub doubling_log: Option<Vec<u64>>,
}

impl SizeChainState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_log() -> Self {
        SizeChainState { doubling_log: Some(Vec::new()), ..Self::default() }
    }

    /// `B -> 2B + 2` with probability `1/(B+1)`, else `B -> B + 1`.
    /// Returns whether the step doubled.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let doubled = one_in(rng, self.b + 1);
        self.b = if doubled {
            self.b.checked_mul(2).and_then(|x| x.checked_add(2)).expect("B overflowed u64")
        } else {
            self.b + 1
        };
        self.n += 1;
        if doubled {
            if let Some(log) = self.doubling_log.as_mut() {
                log.push(self.n);
            }
        }
        doubled
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) -> u64 {
        let mut doublings = 0;
        for _ in 0..steps {
            doublings += u64::from(self.step(rng));
        }
        doublings
    }

    /// `κ(m)` for `m <= n`, read from the log.
    pub fn kappa_at(&self, m: u64) -> Option<u64> {
        let log = self.doubling_log.as_ref()?;
        (m <= self.n).then(|| log.partition_point(|&s| s <= m) as u64)
    }
}

/// `(B_n, κ(n))` from one trajectory.
pub fn sample_size_and_kappa<R: Rng + ?Sized>(n: u64, rng: &mut R) -> (u64, u64) {
    let mut s = SizeChainState::new();
    let k = s.run(n, rng);
    (s.b, k)
}

/// `Σ_{i<n} 1/(B_i + 1)` along one trajectory, together with `κ(n)`.
pub fn reciprocal_sum<R: Rng + ?Sized>(n: u64, rng: &mut R) -> (f64, u64) {
    let mut s = SizeChainState::new();
    let mut acc = 0.0;
    let mut k = 0;
    for _ in 0..n {
        acc += 1.0 / (s.b + 1) as f64;
        k += u64::from(s.step(rng));
    }
    (acc, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn first_step_is_forced() {
        let mut s = SizeChainState::with_log();
        assert!(s.step(&mut stream(0)));
        assert_eq!(s.b, 2);
        assert_eq!(s.kappa_at(1), Some(1));
        assert_eq!(s.kappa_at(0), Some(0));
    }

    #[test]
    fn second_step_law() {
        let mut rng = stream(4);
        let reps = 60_000;
        let mut six = 0;
        for _ in 0..reps {
            let mut s = SizeChainState { n: 1, b: 2, doubling_log: None };
            s.step(&mut rng);
            assert!(s.b == 6 || s.b == 3);
            six += usize::from(s.b == 6);
        }
        let p = six as f64 / reps as f64;
        assert!((p - 1.0 / 3.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn b_dominates_n_and_is_even_after_doubling() {
        let mut rng = stream(8);
        let mut s = SizeChainState::new();
        for _ in 0..5000 {
            if s.step(&mut rng) {
                assert_eq!(s.b % 2, 0);
            }
            assert!(s.b >= s.n);
        }
    }

    #[test]
    fn reciprocal_sum_starts_at_one() {
        let (acc, k) = reciprocal_sum(1, &mut stream(1));
        assert_eq!(acc, 1.0);
        assert_eq!(k, 1);
    }
}
