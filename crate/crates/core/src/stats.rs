//! Goodness-of-fit tests and interval estimates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use thiserror::Error;

pub const KS_MIN_SAMPLES: usize = 20;
const KOLMOGOROV_TERMS: u32 = 100;
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Asymptotic `P(D_n > d)` with Stephens' small-sample correction.
pub fn kolmogorov_pvalue(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=KOLMOGOROV_TERMS {
        let jf = f64::from(j);
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against a continuous cdf.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult, StatsError> {
    let n = samples.len();
    if n < KS_MIN_SAMPLES {
        return Err(StatsError::TooFewSamples { needed: KS_MIN_SAMPLES, got: n });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    Ok(KsResult { n, statistic: d, p_value: kolmogorov_pvalue(d, nf) })
}

/// KS distance for an integer-valued statistic standardized as
/// `(x - center) / scale`, comparing the empirical cdf at each lattice
/// point `r` with the continuity-corrected `Φ((r + 1/2 - center) / scale)`.
pub fn ks_lattice(samples: &[i64], center: f64, scale: f64, cdf: impl Fn(f64) -> f64) -> Result<KsResult, StatsError> {
    let n = samples.len();
    if n < KS_MIN_SAMPLES {
        return Err(StatsError::TooFewSamples { needed: KS_MIN_SAMPLES, got: n });
    }
    let counts = tally(samples.iter().copied());
    let (lo, hi) = (*counts.keys().next().unwrap(), *counts.keys().last().unwrap());
    let nf = n as f64;
    let mut below = 0u64;
    let mut d: f64 = 0.0;
    for r in lo - 1..=hi {
        below += counts.get(&r).copied().unwrap_or(0);
        let f = cdf((r as f64 + 0.5 - center) / scale);
        d = d.max((below as f64 / nf - f).abs());
    }
    // Mass of the reference beyond the top point.
    d = d.max(1.0 - cdf((hi as f64 + 0.5 - center) / scale));
    Ok(KsResult { n, statistic: d, p_value: kolmogorov_pvalue(d, nf) })
}

/// Two-sample KS test (asymptotic p-value, effective size `nm/(n+m)`).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, StatsError> {
    for s in [a, b] {
        if s.len() < KS_MIN_SAMPLES {
            return Err(StatsError::TooFewSamples { needed: KS_MIN_SAMPLES, got: s.len() });
        }
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    Ok(KsResult { n: xa.len() + xb.len(), statistic: d, p_value: kolmogorov_pvalue(d, n_eff) })
}

pub fn tally<T: Ord>(xs: impl IntoIterator<Item = T>) -> BTreeMap<T, u64> {
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
    pub bins: usize,
}

fn chi_square_sf(stat: f64, df: u64) -> Result<f64, StatsError> {
    if df == 0 {
        return Err(StatsError::Degenerate("a single pooled bin"));
    }
    let dist = ChiSquared::new(df as f64).map_err(|_| StatsError::Degenerate("bad degrees of freedom"))?;
    Ok(dist.sf(stat))
}

/// Merge consecutive bins until each pooled bin reaches `min_weight`; a
/// light final bin is folded into its predecessor.
fn pool(weights: &[f64], min_weight: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        current.push(i);
        acc += w;
        if acc >= min_weight {
            groups.push(std::mem::take(&mut current));
            acc = 0.0;
        }
    }
    if !current.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(current),
            None => groups.push(current),
        }
    }
    groups
}

/// Pearson goodness of fit of integer observations against exact
/// probabilities on ordered states. Observations outside `expected` are
/// an immediate failure (p = 0).
pub fn chi_square_gof(
    observed: &BTreeMap<u64, u64>,
    expected: &BTreeMap<u64, f64>,
) -> Result<ChiSquareResult, StatsError> {
    let n: u64 = observed.values().sum();
    if n == 0 {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    if observed.keys().any(|k| !expected.contains_key(k)) {
        return Ok(ChiSquareResult { statistic: f64::INFINITY, df: 0, p_value: 0.0, bins: 0 });
    }
    let keys: Vec<u64> = expected.keys().copied().collect();
    let exp: Vec<f64> = keys.iter().map(|k| expected[k] * n as f64).collect();
    let groups = pool(&exp, MIN_EXPECTED);
    let mut stat = 0.0;
    for g in &groups {
        let e: f64 = g.iter().map(|&i| exp[i]).sum();
        let o: u64 = g.iter().map(|&i| observed.get(&keys[i]).copied().unwrap_or(0)).sum();
        stat += (o as f64 - e).powi(2) / e;
    }
    let df = groups.len() as u64 - 1;
    Ok(ChiSquareResult { statistic: stat, df, p_value: chi_square_sf(stat, df)?, bins: groups.len() })
}

/// Two-sample chi-square homogeneity test on integer samples, pooling
/// adjacent values until each pooled bin has expected count >= 5 in both samples.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    let ta = tally(a.iter().copied());
    let tb = tally(b.iter().copied());
    let keys: Vec<u64> =
        ta.keys().chain(tb.keys()).copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let combined: Vec<f64> =
        keys.iter().map(|k| (ta.get(k).copied().unwrap_or(0) + tb.get(k).copied().unwrap_or(0)) as f64).collect();
    // Expected count in the smaller sample is combined * min(na, nb) / total.
    let groups = pool(&combined, MIN_EXPECTED * total / na.min(nb));
    let mut stat = 0.0;
    for g in &groups {
        let c: f64 = g.iter().map(|&i| combined[i]).sum();
        let oa: u64 = g.iter().map(|&i| ta.get(&keys[i]).copied().unwrap_or(0)).sum();
        let ob: u64 = g.iter().map(|&i| tb.get(&keys[i]).copied().unwrap_or(0)).sum();
        let (ea, eb) = (c * na / total, c * nb / total);
        stat += (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb;
    }
    let df = groups.len() as u64 - 1;
    Ok(ChiSquareResult { statistic: stat, df, p_value: chi_square_sf(stat, df)?, bins: groups.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// Half-width of the 95% normal interval.
    pub half_width: f64,
}

impl MeanEstimate {
    pub fn covers(&self, x: f64) -> bool {
        (self.mean - x).abs() <= self.half_width
    }

    pub fn rel_error(&self, target: f64) -> f64 {
        (self.mean - target).abs() / target.abs()
    }
}

pub const Z95: f64 = 1.959_963_984_540_054;

pub fn mean_ci(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0) } else { 0.0 };
    let sd = var.sqrt();
    MeanEstimate { n, mean, sd, half_width: Z95 * sd / nf.sqrt() }
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    mean_ci(xs).sd
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Pearson correlation with a 95% Fisher-z interval.
pub fn correlation_ci(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    let n = x.len();
    if n != y.len() || n < 4 {
        return Err(StatsError::TooFewSamples { needed: 4, got: n.min(y.len()) });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Degenerate("zero variance"));
    }
    let r = sxy / (sxx * syy).sqrt();
    let z = r.clamp(-0.999_999_999, 0.999_999_999).atanh();
    let se = 1.0 / (n as f64 - 3.0).sqrt();
    Ok(Correlation { r, lo: (z - Z95 * se).tanh(), hi: (z + Z95 * se).tanh() })
}
