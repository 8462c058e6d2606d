//! Moments of `B_n`.
//!
//! Given `B_n = b`, `E[B_{n+1}^k | b] = (b+1)^{k-1}(b + 2^k)`, so
//! `E[B_{n+1}^k] = E[B_n^k] + Σ_{ℓ=1}^{k-1} c_{k,ℓ} E[B_n^ℓ] + 2^k` with
//! `c_{k,ℓ} = binom(k-1, ℓ-1) + 2^k binom(k-1, ℓ)`. All moments are integers.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::{One, Pow, ToPrimitive, Zero};

use super::dist::Rational;

/// `m_k = Π_{i=1}^k (1 - 1/i + 2^i/i)`.
pub fn m_k(k: u32) -> Rational {
    assert!(k >= 1);
    (1..=k).fold(Rational::one(), |acc, i| {
        let i_big = BigInt::from(i);
        let two_i = BigInt::from(2u32).pow(i);
        acc * Rational::new(i_big.clone() - 1u32 + two_i, i_big)
    })
}

/// `(2^{k(k+1)/2} / k!) Π_{i=1}^k (1 + (i-1)/2^i)`, equal to [`m_k`].
pub fn m_k_closed(k: u32) -> Rational {
    closed_with_exponent(k, k * (k + 1) / 2)
}

/// The same closed form with prefactor `2^{k(k-1)/2}`, which is off from
/// [`m_k`] by a factor `2^k`.
pub fn m_k_closed_halved(k: u32) -> Rational {
    closed_with_exponent(k, k * (k - 1) / 2)
}

fn closed_with_exponent(k: u32, e: u32) -> Rational {
    let two = BigInt::from(2u32);
    let fact = (1..=k).fold(BigInt::one(), |a, i| a * i);
    let prod = (1..=k).fold(Rational::one(), |acc, i| {
        let p = two.clone().pow(i);
        acc * Rational::new(p.clone() + (i - 1), p)
    });
    Rational::new(two.pow(e), fact) * prod
}

fn coefficients(k_max: u32) -> Vec<Vec<BigInt>> {
    // c[k][ℓ] for 1 <= ℓ < k <= k_max.
    (0..=k_max)
        .map(|k| {
            (0..k)
                .map(|l| {
                    if k < 2 || l == 0 {
                        return BigInt::zero();
                    }
                    let a: BigUint = binomial(BigUint::from(k - 1), BigUint::from(l - 1));
                    let b: BigUint = binomial(BigUint::from(k - 1), BigUint::from(l));
                    BigInt::from(a) + BigInt::from(b) * BigInt::from(2u32).pow(k)
                })
                .collect()
        })
        .collect()
}

/// `[E[B_n^1], ..., E[B_n^{k_max}]]` exactly.
pub fn exact_moments(n: u64, k_max: u32) -> Vec<BigInt> {
    let mut last = Vec::new();
    exact_moment_path(n, k_max, |_, m| last = m.to_vec());
    last
}

/// Calls `visit(j, [E[B_j^1], ..., E[B_j^{k_max}]])` for `j = 0..=n`.
pub fn exact_moment_path(n: u64, k_max: u32, mut visit: impl FnMut(u64, &[BigInt])) {
    let c = coefficients(k_max);
    let pow2: Vec<BigInt> = (0..=k_max).map(|k| BigInt::from(2u32).pow(k)).collect();
    // mom[k] = E[B^k], mom[0] unused.
    let mut mom = vec![BigInt::zero(); k_max as usize + 1];
    visit(0, &mom[1..]);
    for j in 1..=n {
        for k in (1..=k_max as usize).rev() {
            let mut next = &mom[k] + &pow2[k];
            for l in 1..k {
                next += &c[k][l] * &mom[l];
            }
            mom[k] = next;
        }
        visit(j, &mom[1..]);
    }
}

/// `E[B_n^k]` as an exact rational (always an integer).
pub fn exact_moment(n: u64, k: u32) -> Rational {
    assert!(k >= 1);
    Rational::from_integer(exact_moments(n, k).pop().unwrap())
}

/// Same recursion in floating point.
pub fn float_moments(n: u64, k_max: u32) -> Vec<f64> {
    let mut last = Vec::new();
    float_moment_path(n, k_max, |j, m| {
        if j == n {
            last = m.to_vec();
        }
    });
    last
}

pub fn float_moment_path(n: u64, k_max: u32, mut visit: impl FnMut(u64, &[f64])) {
    let c: Vec<Vec<f64>> =
        coefficients(k_max).iter().map(|row| row.iter().map(|x| x.to_f64().unwrap()).collect()).collect();
    let mut mom = vec![0.0f64; k_max as usize + 1];
    visit(0, &mom[1..]);
    for j in 1..=n {
        for k in (1..=k_max as usize).rev() {
            let mut next = mom[k] + 2f64.powi(k as i32);
            for l in 1..k {
                next += c[k][l] * mom[l];
            }
            mom[k] = next;
        }
        visit(j, &mom[1..]);
    }
}

pub fn float_moment(n: u64, k: u32) -> f64 {
    assert!(k >= 1);
    *float_moments(n, k).last().unwrap()
}
