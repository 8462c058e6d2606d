//! The linear drift `F(x) = Ax` of the truncated degree proportions and
//! its fixed point `v = (1/2, 1/4, ..., 2^{-m}, 2^{-m})`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use super::dist::{rational_string, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeFixedPoint {
    pub m: usize,
    pub a: Vec<Vec<i64>>,
    pub v: Vec<Rational>,
}

impl DegreeFixedPoint {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2);
        DegreeFixedPoint { m, a: drift_matrix(m), v: fixed_point(m) }
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.a
            .iter()
            .map(|row| {
                row.iter().zip(x).fold(Rational::zero(), |acc, (&a, xi)| acc + xi * Rational::from_integer(a.into()))
            })
            .collect()
    }

    pub fn v_is_kernel(&self) -> bool {
        self.apply(&self.v).iter().all(Zero::is_zero)
    }

    pub fn v_is_distribution(&self) -> bool {
        self.v.iter().all(|x| *x > Rational::zero()) && self.v.iter().sum::<Rational>().is_one()
    }

    /// `⟨x, Ax⟩` over the integers.
    pub fn quadratic_form(&self, x: &[i128]) -> i128 {
        self.a
            .iter()
            .zip(x)
            .map(|(row, &xi)| xi * row.iter().zip(x).map(|(&a, &xj)| a as i128 * xj).sum::<i128>())
            .sum()
    }
}

/// `(m+1) × (m+1)`: row 0 is `(-1, 1, ..., 1)`, row `i < m` has `1` at
/// `i-1` and `-2` at `i`, row `m` has `1` at `m-1` and `-1` at `m`.
pub fn drift_matrix(m: usize) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0i64; m + 1]; m + 1];
    a[0].iter_mut().for_each(|x| *x = 1);
    a[0][0] = -1;
    for (i, row) in a.iter_mut().enumerate().skip(1) {
        row[i - 1] = 1;
        row[i] = if i < m { -2 } else { -1 };
    }
    a
}

pub fn fixed_point(m: usize) -> Vec<Rational> {
    let pow = |e: usize| Rational::new(BigInt::one(), BigInt::one() << e);
    (0..=m).map(|i| if i < m { pow(i + 1) } else { pow(m) }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub m: usize,
    pub v: Vec<String>,
    pub av_is_zero: bool,
    pub v_is_distribution: bool,
    pub trials: u64,
    /// Vectors found with `⟨x, Ax⟩ > 0`.
    pub violations: u64,
    /// Largest value of `⟨x, Ax⟩` seen, as `"num/den"`.
    pub max_form: String,
}

impl FixedPointReport {
    pub fn passed(&self) -> bool {
        self.av_is_zero && self.v_is_distribution && self.violations == 0
    }
}

/// A zero-sum rational vector with small numerators and denominators,
/// returned as a common denominator and integer numerators.
pub fn random_zero_sum<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (i128, Vec<i128>) {
    let fracs: Vec<(i128, i128)> = (0..len - 1).map(|_| (rng.random_range(-9..=9), rng.random_range(1..=6))).collect();
    let den = fracs.iter().fold(1i128, |l, &(_, d)| l.lcm(&d));
    let mut nums: Vec<i128> = fracs.iter().map(|&(n, d)| n * (den / d)).collect();
    let last = -nums.iter().sum::<i128>();
    // Put the balancing entry at a random position.
    nums.insert(rng.random_range(0..len), last);
    (den, nums)
}

pub fn fixed_point_check<R: Rng + ?Sized>(m: usize, trials: u64, rng: &mut R) -> FixedPointReport {
    let fp = DegreeFixedPoint::new(m);
    let mut violations = 0;
    let mut max_form: Option<Rational> = None;
    for t in 0..=trials {
        // Trial 0 is the zero vector.
        let (den, x) = if t == 0 { (1, vec![0; m + 1]) } else { random_zero_sum(m + 1, rng) };
        let form = fp.quadratic_form(&x);
        if form > 0 {
            violations += 1;
        }
        let value = Rational::new(form.into(), (den * den).into());
        if max_form.as_ref().is_none_or(|mx| value > *mx) {
            max_form = Some(value);
        }
    }
    FixedPointReport {
        m,
        v: fp.v.iter().map(rational_string).collect(),
        av_is_zero: fp.v_is_kernel(),
        v_is_distribution: fp.v_is_distribution(),
        trials,
        violations,
        max_form: rational_string(&max_form.unwrap()),
    }
}
