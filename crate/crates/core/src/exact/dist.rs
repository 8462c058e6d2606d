use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Rational = BigRational;

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `"num/den"`, always with an explicit denominator.
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().ok()?;
    let d: BigInt = d.trim().parse().ok()?;
    (!d.is_zero()).then(|| Rational::new(n, d))
}

/// Exact finite distribution over states `K`, kept in canonical key order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalDist<K: Ord> {
    support: BTreeMap<K, Rational>,
}

impl<K: Ord> Default for RationalDist<K> {
    fn default() -> Self {
        RationalDist { support: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> RationalDist<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(k: K) -> Self {
        let mut d = Self::new();
        d.add(k, Rational::one());
        d
    }

    /// Accumulate mass on `k`. Zero mass is dropped.
    pub fn add(&mut self, k: K, w: Rational) {
        if w.is_zero() {
            return;
        }
        let slot = self.support.entry(k).or_insert_with(Rational::zero);
        *slot += w;
    }

    pub fn get(&self, k: &K) -> Rational {
        self.support.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.support.iter()
    }

    pub fn total(&self) -> Rational {
        balanced_sum(self.support.values().cloned().collect())
    }

    /// Weights strictly positive and summing to exactly one.
    pub fn is_normalized(&self) -> bool {
        self.support.values().all(|w| *w > Rational::zero()) && self.total().is_one()
    }

    /// Push-forward through `f`.
    pub fn map<J: Ord + Clone>(&self, mut f: impl FnMut(&K) -> J) -> RationalDist<J> {
        let mut out = RationalDist::new();
        for (k, w) in &self.support {
            out.add(f(k), w.clone());
        }
        out
    }

    pub fn expectation(&self, mut f: impl FnMut(&K) -> Rational) -> Rational {
        balanced_sum(self.support.iter().map(|(k, w)| f(k) * w).collect())
    }

    /// JSON object from state labels to `"num/den"` strings.
    pub fn to_json_with(&self, mut label: impl FnMut(&K) -> String) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> =
            self.support.iter().map(|(k, w)| (label(k), serde_json::Value::String(rational_string(w)))).collect();
        serde_json::Value::Object(map)
    }
}

/// Pairwise summation, so that operands of similar size meet and the
/// running denominator does not grow at every term.
pub fn balanced_sum(mut terms: Vec<Rational>) -> Rational {
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a + b,
                None => a,
            });
        }
        terms = next;
    }
    terms.pop().unwrap_or_else(Rational::zero)
}

impl RationalDist<u64> {
    pub fn to_json(&self) -> serde_json::Value {
        self.to_json_with(|k| k.to_string())
    }

    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        let mut d = Self::new();
        for (k, w) in v.as_object()? {
            d.add(k.parse().ok()?, parse_rational(w.as_str()?)?);
        }
        Some(d)
    }

    pub fn mean(&self) -> Rational {
        self.expectation(|&k| Rational::from_integer(k.into()))
    }
}

impl<K: Ord + Clone> FromIterator<(K, Rational)> for RationalDist<K> {
    fn from_iter<I: IntoIterator<Item = (K, Rational)>>(iter: I) -> Self {
        let mut d = Self::new();
        for (k, w) in iter {
            d.add(k, w);
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let d: RationalDist<u64> = [(6, q(1, 3)), (3, q(2, 3))].into_iter().collect();
        let j = d.to_json();
        assert_eq!(j.to_string(), r#"{"3":"2/3","6":"1/3"}"#);
        assert_eq!(RationalDist::from_json(&j), Some(d));
    }

    #[test]
    fn normalization_and_marginals() {
        let d: RationalDist<(u8, u8)> = [((0, 1), q(1, 4)), ((1, 1), q(1, 4)), ((0, 2), q(1, 2))].into_iter().collect();
        assert!(d.is_normalized());
        let m = d.map(|k| k.0);
        assert_eq!(m.get(&0), q(3, 4));
        assert_eq!(m.len(), 2);
        assert!(!RationalDist::<u8>::new().is_normalized());
    }

    #[test]
    fn parse_accepts_integers() {
        assert_eq!(parse_rational("2"), Some(q(2, 1)));
        assert_eq!(parse_rational("4/6"), Some(q(2, 3)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
