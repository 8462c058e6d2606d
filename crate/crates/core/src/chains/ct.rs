//! Continuous-time embedding.
//!
//! Every node carries a rate-1 clock. A ring at the root doubles the tree
//! (node count `N -> 2N + 1`), any other ring adds a child. The Yule
//! process `Y` is kept alongside: at each doubling it is run from `N` until
//! it hits `2N + 1`, which takes `Δℓ = Σ_{j=N}^{2N} E_j / j` with
//! `E_j ~ Exp(1)`, and the warp `ℓ` accumulates these fill-in times so
//! that `Y(t + ℓ_{D(t)}) = N(t)`.
//!
//! Small trees are simulated ring by ring. Once `N` exceeds
//! `event_limit` the engine switches to bulk mode: the root clock gives
//! the gap to the next doubling, the non-root nodes grow as a Yule process
//! over that gap (negative binomial, exact for small means and normal
//! otherwise), and fill-in times use their normal approximation. The
//! leftmost-copy subtree `𝔖` is tracked only in ring-by-ring mode.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;

use super::skeleton::ln_big;
use crate::rng::{exp1, std_normal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtConfig {
    pub event_limit: u64,
    /// Largest expected number of births in a gap simulated one by one.
    pub exact_growth_limit: f64,
}

impl Default for CtConfig {
    fn default() -> Self {
        CtConfig { event_limit: 1 << 17, exact_growth_limit: 1e4 }
    }
}

/// Snapshot of the process.
#[derive(Debug, Clone, PartialEq)]
pub struct CtState {
    pub t: f64,
    pub n: BigUint,
    pub d: u64,
    pub ell: f64,
    pub y: BigUint,
    pub s_size: u64,
    pub s_height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtEvent {
    Growth,
    Doubling,
    /// Time limit reached before the next ring.
    Stopped,
}

#[derive(Debug, Clone)]
pub struct CtProcess {
    config: CtConfig,
    t: f64,
    small: Option<(u64, u64)>,
    n: BigUint,
    y: BigUint,
    d: u64,
    ell: f64,
    s_depths: Vec<u32>,
    s_height: u32,
    s_frozen_at: Option<f64>,
    delta_ell: Vec<f64>,
    checks: u64,
    violations: u64,
}

impl Default for CtProcess {
    fn default() -> Self {
        Self::new(CtConfig::default())
    }
}

/// `x * f` for `f >= 0`, using the exact binary expansion of `f`.
fn mul_f64(x: &BigUint, f: f64) -> BigUint {
    assert!(f >= 0.0 && f.is_finite());
    if f == 0.0 {
        return BigUint::ZERO;
    }
    let bits = f.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1 << 52), raw_exp - 1075) };
    let p = x * mant;
    if exp >= 0 {
        p << exp as u64
    } else {
        p >> (-exp) as u64
    }
}

impl CtProcess {
    pub fn new(config: CtConfig) -> Self {
        CtProcess {
            config,
            t: 0.0,
            small: Some((1, 1)),
            n: BigUint::from(1u32),
            y: BigUint::from(1u32),
            d: 0,
            ell: 0.0,
            s_depths: vec![0],
            s_height: 0,
            s_frozen_at: None,
            delta_ell: Vec::new(),
            checks: 0,
            violations: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn doublings(&self) -> u64 {
        self.d
    }

    pub fn n(&self) -> BigUint {
        match self.small {
            Some((n, _)) => BigUint::from(n),
            None => self.n.clone(),
        }
    }

    pub fn ln_n(&self) -> f64 {
        match self.small {
            Some((n, _)) => (n as f64).ln(),
            None => ln_big(&self.n),
        }
    }

    pub fn state(&self) -> CtState {
        let y = match self.small {
            Some((_, y)) => BigUint::from(y),
            None => self.y.clone(),
        };
        CtState {
            t: self.t,
            n: self.n(),
            d: self.d,
            ell: self.ell,
            y,
            s_size: self.s_depths.len() as u64,
            s_height: self.s_height,
        }
    }

    /// Fill-in times `Δℓ_1, Δℓ_2, ...`.
    pub fn delta_ell(&self) -> &[f64] {
        &self.delta_ell
    }

    pub fn coupling_checks(&self) -> u64 {
        self.checks
    }

    pub fn coupling_violations(&self) -> u64 {
        self.violations
    }

    /// Time at which `𝔖` stopped being tracked, if it has.
    pub fn subtree_frozen_at(&self) -> Option<f64> {
        self.s_frozen_at
    }

    /// `D(t) + 𝔥(t)`: a lower bound on the height of the tree.
    pub fn height_lower_bound(&self) -> u64 {
        self.d + u64::from(self.s_height)
    }

    fn check(&mut self) {
        self.checks += 1;
        let ok = match self.small {
            Some((n, y)) => n == y,
            None => self.n == self.y,
        };
        if !ok {
            self.violations += 1;
        }
    }

    /// One ring, one bulk gap, or a stop at `t_end`.
    pub fn advance<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R) -> CtEvent {
        match self.small {
            Some((n, _)) if n <= self.config.event_limit => self.ring(t_end, rng),
            Some((n, y)) => {
                self.n = BigUint::from(n);
                self.y = BigUint::from(y);
                self.small = None;
                self.s_frozen_at = Some(self.t);
                self.bulk(t_end, rng)
            }
            None => self.bulk(t_end, rng),
        }
    }

    fn ring<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R) -> CtEvent {
        let (mut n, mut y) = self.small.expect("ring-by-ring mode");
        let hold = exp1(rng) / n as f64;
        if self.t + hold > t_end {
            self.t = t_end;
            return CtEvent::Stopped;
        }
        self.t += hold;
        let who = rng.random_range(0..n);
        let event = if who == 0 {
            let mut dl = 0.0;
            for j in n..=2 * n {
                dl += exp1(rng) / j as f64;
                y += 1;
            }
            n = 2 * n + 1;
            self.d += 1;
            self.ell += dl;
            self.delta_ell.push(dl);
            CtEvent::Doubling
        } else {
            // After the first doubling 𝔖 occupies non-root slots 1..=|𝔖|.
            let s = self.s_depths.len() as u64;
            if self.d > 0 && who <= s {
                let d = self.s_depths[(who - 1) as usize] + 1;
                self.s_height = self.s_height.max(d);
                self.s_depths.push(d);
            }
            n += 1;
            y += 1;
            CtEvent::Growth
        };
        self.small = Some((n, y));
        self.check();
        event
    }

    /// Yule growth of `b` individuals over time `g`, as extra births.
    fn yule_births<R: Rng + ?Sized>(&self, b: &BigUint, g: f64, rng: &mut R) -> BigUint {
        let ln_b = ln_big(b);
        let growth = g.exp_m1();
        let ln_mean = ln_b + growth.ln();
        if ln_mean <= self.config.exact_growth_limit.ln() {
            let bf = b.to_f64().expect("small population");
            let mut clock = 0.0;
            let mut births = 0u64;
            loop {
                clock += exp1(rng) / (bf + births as f64);
                if clock > g {
                    break;
                }
                births += 1;
            }
            BigUint::from(births)
        } else {
            // NegBin(b, e^{-g}) - b has mean b(e^g - 1) and variance b(e^g - 1)e^g.
            let rel_sd = (g.exp() / growth).sqrt() * (-0.5 * ln_mean + 0.5 * growth.ln()).exp();
            let f = growth * (1.0 + rel_sd * std_normal(rng)).max(0.0);
            mul_f64(b, f)
        }
    }

    fn bulk<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R) -> CtEvent {
        let g = exp1(rng);
        let run = g.min(t_end - self.t);
        let b = &self.n - 1u32;
        let extra = self.yule_births(&b, run, rng);
        self.n += &extra;
        self.y += &extra;
        self.check();
        if self.t + g > t_end {
            self.t = t_end;
            return CtEvent::Stopped;
        }
        self.t += g;
        let ln_n = ln_big(&self.n);
        let inv_n = (-ln_n).exp();
        // H_{2N} - H_{N-1} and Σ_{j=N}^{2N} j^{-2} to second order in 1/N.
        let mean = std::f64::consts::LN_2 + 0.75 * inv_n - 0.5 * inv_n * inv_n;
        let var = 0.5 * inv_n + 0.375 * inv_n * inv_n;
        let dl = mean + var.sqrt() * std_normal(rng);
        self.y += &self.n + 1u32;
        self.n = (&self.n << 1u32) + 1u32;
        self.d += 1;
        self.ell += dl;
        self.delta_ell.push(dl);
        self.check();
        CtEvent::Doubling
    }

    pub fn run_until_time<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R) {
        while self.advance(t_end, rng) != CtEvent::Stopped {}
    }

    pub fn run_until_doublings<R: Rng + ?Sized>(&mut self, d: u64, rng: &mut R) {
        while self.d < d {
            self.advance(f64::INFINITY, rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn first_ring_doubles() {
        let mut rng = stream(1);
        let mut p = CtProcess::default();
        assert_eq!(p.advance(f64::INFINITY, &mut rng), CtEvent::Doubling);
        let s = p.state();
        assert_eq!((s.n.clone(), s.d, s.y.clone()), (BigUint::from(3u32), 1, BigUint::from(3u32)));
        assert_eq!(s.s_size, 1);
    }

    #[test]
    fn mul_f64_matches_integers() {
        let x = BigUint::from(1_000_000u32);
        assert_eq!(mul_f64(&x, 0.5), BigUint::from(500_000u32));
        assert_eq!(mul_f64(&x, 3.0), BigUint::from(3_000_000u32));
        assert_eq!(mul_f64(&x, 0.0), BigUint::ZERO);
    }

    #[test]
    fn coupling_holds_through_bulk_mode() {
        let mut rng = stream(3);
        let mut p = CtProcess::new(CtConfig { event_limit: 2000, ..CtConfig::default() });
        p.run_until_doublings(60, &mut rng);
        assert!(p.subtree_frozen_at().is_some());
        assert_eq!(p.coupling_violations(), 0);
        assert!(p.coupling_checks() > 60);
        assert_eq!(p.delta_ell().len(), 60);
        let s = p.state();
        assert_eq!(s.n, s.y);
    }

    #[test]
    fn stops_at_time_limit() {
        let mut rng = stream(4);
        let mut p = CtProcess::default();
        p.run_until_time(3.0, &mut rng);
        assert_eq!(p.t(), 3.0);
        assert!(p.height_lower_bound() >= p.doublings());
    }

    #[test]
    fn early_fill_in_has_exact_mean() {
        // First doubling from N = 1: Δℓ = E_1 + E_2 / 2, mean 3/2.
        let mut rng = stream(6);
        let reps = 40_000;
        let mut acc = 0.0;
        for _ in 0..reps {
            let mut p = CtProcess::default();
            p.advance(f64::INFINITY, &mut rng);
            acc += p.delta_ell()[0];
        }
        assert!((acc / reps as f64 - 1.5).abs() < 0.03);
    }
}
