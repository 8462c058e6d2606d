//! The doubling-time skeleton `(k, s_k, C_k)`.
//!
//! `s_k` is the step of the `k`-th doubling and `C_k = B_{s_k}`. Given
//! `C_k`, the wait until the next doubling satisfies
//! `P(Δs > j) = C/(C + j)`, so `Δs = ⌈U C / (1 - U)⌉` for uniform `U`, and
//! after it `C_{k+1} = 2(C_k + Δs)`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use std::f64::consts::LN_2;
use thiserror::Error;

use crate::rng::open_dyadic;

pub const DEFAULT_LOG_SWITCH: u64 = 300;
pub const SANDWICH_RTOL: f64 = 1e-6;

/// `Δs = ⌈u C / (2^64 - u)⌉` for the dyadic draw `U = u / 2^64`.
pub fn exact_increment(c: &BigUint, u: u64) -> BigUint {
    let denom = u.wrapping_neg();
    debug_assert!(u != 0 && denom != 0);
    let num = c * u;
    let d = BigUint::from(denom);
    let (q, r) = (&num / &d, &num % &d);
    if r == BigUint::ZERO {
        q
    } else {
        q + 1u32
    }
}

/// Natural log of a big integer, accurate to f64 precision.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits in f64").ln()
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_u64().expect("64 bits");
        (top as f64).ln() + shift as f64 * LN_2
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - U)` for `U = u / 2^64`, computed without cancellation.
fn ln_one_minus(u: u64) -> f64 {
    (u.wrapping_neg() as f64).ln() - 64.0 * LN_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonState {
    k: u64,
    s: BigUint,
    c: BigUint,
    log_mode: bool,
    log_s: f64,
    log_c: f64,
    /// `-Σ_{i=2}^k ln(1 - U_i)`.
    neg_log_prod: f64,
    log_switch: u64,
}

impl Default for SkeletonState {
    fn default() -> Self {
        Self::new()
    }
}

impl SkeletonState {
    /// `k = 1`, `s_1 = 1`, `C_1 = 2`.
    pub fn new() -> Self {
        Self::with_log_switch(DEFAULT_LOG_SWITCH)
    }

    /// Stay exact while `k < log_switch`; `u64::MAX` never switches.
    pub fn with_log_switch(log_switch: u64) -> Self {
        SkeletonState {
            k: 1,
            s: BigUint::one(),
            c: BigUint::from(2u32),
            log_mode: false,
            log_s: 0.0,
            log_c: LN_2,
            neg_log_prod: 0.0,
            log_switch,
        }
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn log_mode(&self) -> bool {
        self.log_mode
    }

    /// Exact `s_k`, `None` once in log mode.
    pub fn s(&self) -> Option<&BigUint> {
        (!self.log_mode).then_some(&self.s)
    }

    pub fn c(&self) -> Option<&BigUint> {
        (!self.log_mode).then_some(&self.c)
    }

    pub fn log_s(&self) -> f64 {
        if self.log_mode {
            self.log_s
        } else {
            ln_big(&self.s)
        }
    }

    pub fn log_c(&self) -> f64 {
        if self.log_mode {
            self.log_c
        } else {
            ln_big(&self.c)
        }
    }

    /// Lower end of the sandwich, `k ln 2 - Σ_{i=2}^k ln(1 - U_i)`.
    pub fn sandwich_floor(&self) -> f64 {
        self.k as f64 * LN_2 + self.neg_log_prod
    }

    /// `floor <= ln C_k <= floor + ln 2`, to relative tolerance `rtol`.
    pub fn sandwich_holds(&self, rtol: f64) -> bool {
        let lo = self.sandwich_floor();
        let hi = lo + LN_2;
        let lc = self.log_c();
        let slack = rtol * hi.abs();
        lc >= lo - slack && lc <= hi + slack
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let u = open_dyadic(rng);
        self.apply(u);
    }

    /// Advance with the raw dyadic draw `u`, `U = u / 2^64`.
    pub fn apply(&mut self, u: u64) {
        let l1u = ln_one_minus(u);
        if !self.log_mode && self.k >= self.log_switch {
            self.log_s = ln_big(&self.s);
            self.log_c = ln_big(&self.c);
            self.log_mode = true;
            self.s = BigUint::ZERO;
            self.c = BigUint::ZERO;
        }
        if self.log_mode {
            let log_u = (u as f64).ln() - 64.0 * LN_2;
            // ln(C/(1-U) + θ) with the ceiling's fractional part θ taken as 1/2.
            let log_ds = log_add_exp(log_u + self.log_c - l1u, -LN_2);
            let log_sum = self.log_c - l1u + (0.5 * (l1u - self.log_c).exp()).ln_1p();
            self.log_s = log_add_exp(self.log_s, log_ds);
            self.log_c = LN_2 + log_sum;
        } else {
            let ds = exact_increment(&self.c, u);
            self.s += &ds;
            self.c = (&self.c + ds) << 1u32;
        }
        self.neg_log_prod -= l1u;
        self.k += 1;
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("skeleton trajectory ends at s = {last} which does not exceed n = {n}")]
pub struct TrajectoryTooShort {
    pub n: u64,
    pub last: String,
}

/// `κ(n) = max{k : s_k <= n}` from the doubling times `s_1 < s_2 < ...`.
pub fn kappa_of_n(s: &[BigUint], n: u64) -> Result<u64, TrajectoryTooShort> {
    let nb = BigUint::from(n);
    match s.last() {
        Some(last) if *last > nb => Ok(s.partition_point(|x| *x <= nb) as u64),
        last => Err(TrajectoryTooShort { n, last: last.map_or_else(|| "none".into(), |x| x.to_string()) }),
    }
}

/// Doubling times `s_1, ..., s_K` with `s_K > n`.
pub fn trajectory_past<R: Rng + ?Sized>(n: u64, rng: &mut R) -> Vec<BigUint> {
    let mut st = SkeletonState::with_log_switch(u64::MAX);
    let mut out = vec![st.s.clone()];
    let nb = BigUint::from(n);
    while st.s <= nb {
        st.step(rng);
        out.push(st.s.clone());
    }
    out
}

/// `κ(n)` sampled through the skeleton.
pub fn sample_kappa<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut st = SkeletonState::with_log_switch(u64::MAX);
    let nb = BigUint::from(n);
    while st.s <= nb {
        st.step(rng);
    }
    st.k - 1
}

/// `(ln s_k, ln C_k)` after `k` skeleton steps (log mode past the default switch).
pub fn sample_logs<R: Rng + ?Sized>(k: u64, rng: &mut R) -> (f64, f64) {
    let mut st = SkeletonState::new();
    while st.k < k {
        st.step(rng);
    }
    (st.log_s(), st.log_c())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn starts_at_one_two() {
        let s = SkeletonState::new();
        assert_eq!((s.k(), s.s().unwrap(), s.c().unwrap()), (1, &BigUint::from(1u32), &BigUint::from(2u32)));
        assert_eq!(s.log_c(), LN_2);
    }

    #[test]
    fn increment_is_exact_ceiling() {
        let half = 1u64 << 63;
        // U = 1/2: Δs = C exactly.
        assert_eq!(exact_increment(&BigUint::from(7u32), half), BigUint::from(7u32));
        // U = 1/4: Δs = ⌈C/3⌉.
        assert_eq!(exact_increment(&BigUint::from(7u32), 1 << 62), BigUint::from(3u32));
        assert_eq!(exact_increment(&BigUint::from(6u32), 1 << 62), BigUint::from(2u32));
        // Smallest draw still gives Δs = 1.
        assert_eq!(exact_increment(&BigUint::from(2u32), 1), BigUint::from(1u32));
    }

    #[test]
    fn one_exact_step() {
        let mut s = SkeletonState::new();
        s.apply(1 << 63);
        assert_eq!(s.s().unwrap(), &BigUint::from(3u32));
        assert_eq!(s.c().unwrap(), &BigUint::from(8u32));
        assert!(s.sandwich_holds(1e-12));
    }

    #[test]
    fn sandwich_on_long_runs() {
        let mut rng = stream(5);
        for _ in 0..20 {
            let mut s = SkeletonState::new();
            for _ in 0..600 {
                s.step(&mut rng);
                assert!(s.sandwich_holds(SANDWICH_RTOL), "k = {}", s.k());
            }
            assert!(s.log_mode());
        }
    }

    #[test]
    fn log_mode_tracks_exact_mode() {
        for seed in 0..10 {
            let mut a = SkeletonState::with_log_switch(u64::MAX);
            let mut b = SkeletonState::with_log_switch(40);
            let mut rng = stream(seed);
            for _ in 0..200 {
                let u = open_dyadic(&mut rng);
                a.apply(u);
                b.apply(u);
            }
            assert!((a.log_c() - b.log_c()).abs() < 1e-9 * a.log_c());
            assert!((a.log_s() - b.log_s()).abs() < 1e-9 * a.log_s());
        }
    }

    #[test]
    fn kappa_lookup() {
        let s: Vec<BigUint> = [1u32, 3, 9, 30].iter().map(|&x| BigUint::from(x)).collect();
        assert_eq!(kappa_of_n(&s, 0), Ok(0));
        assert_eq!(kappa_of_n(&s, 1), Ok(1));
        assert_eq!(kappa_of_n(&s, 8), Ok(2));
        assert_eq!(kappa_of_n(&s, 9), Ok(3));
        assert!(kappa_of_n(&s, 30).is_err());
        assert!(kappa_of_n(&[], 0).is_err());
    }

    #[test]
    fn sampled_kappa_agrees_with_trajectory() {
        let mut a = stream(9);
        let mut b = stream(9);
        for n in [1, 2, 10, 1000] {
            let t = trajectory_past(n, &mut a);
            assert_eq!(kappa_of_n(&t, n).unwrap(), sample_kappa(n, &mut b));
        }
    }
}
