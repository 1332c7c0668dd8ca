//! Integer helpers: trial division, 2-adic splitting and small modular inverses.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime divisors in increasing order.
pub fn prime_factors_u64(n: u64) -> Vec<u64> {
    factor_u64(n).into_iter().map(|(p, _)| p).collect()
}

pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Factorization by trial division. Only intended for desk-scale inputs.
pub fn factor_big(n: &BigUint) -> Vec<(BigUint, u32)> {
    if let Some(small) = n.to_u64() {
        return factor_u64(small)
            .into_iter()
            .map(|(p, e)| (BigUint::from(p), e))
            .collect();
    }
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut d = BigUint::from(2u32);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            let mut e = 0;
            while (&n % &d).is_zero() {
                n /= &d;
                e += 1;
            }
            out.push((d.clone(), e));
        }
        d += 1u32;
    }
    if n > BigUint::one() {
        out.push((n, 1));
    }
    out
}

/// Merges factorizations of the factors of a product.
pub fn merge_factorizations(parts: &[Vec<(BigUint, u32)>]) -> Vec<(BigUint, u32)> {
    let mut merged: std::collections::BTreeMap<BigUint, u32> = Default::default();
    for part in parts {
        for (p, e) in part {
            *merged.entry(p.clone()).or_default() += e;
        }
    }
    merged.into_iter().collect()
}

/// Writes `n = 2^e · u` with `u` odd. `n` must be nonzero.
pub fn split_two_power(n: &BigUint) -> (u32, BigUint) {
    assert!(!n.is_zero());
    let e = n.trailing_zeros().unwrap_or(0);
    (e as u32, n >> e)
}

pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let (a, p) = (a as i128, p as i128);
    let g = a.extended_gcd(&p);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(p) as u64)
}

/// Natural-log `ln ln q` for an integer `q ≥ 3`, computed from its bit length
/// so that it works for `q` beyond `f64` range.
pub fn ln_ln(q: &BigUint) -> f64 {
    ln_big(q).ln()
}

pub fn ln_big(q: &BigUint) -> f64 {
    let bits = q.bits();
    if bits <= 1000 {
        q.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 64;
        let top = (q >> shift).to_f64().unwrap();
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_factors() {
        let primes: Vec<u64> = (0..30).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(factor_u64(720), vec![(2, 4), (3, 2), (5, 1)]);
        assert_eq!(factor_u64(1), vec![]);
        let big = BigUint::from(720u32);
        assert_eq!(factor_big(&big).len(), 3);
    }

    #[test]
    fn two_power_split() {
        assert_eq!(
            split_two_power(&BigUint::from(720u32)),
            (4, BigUint::from(45u32))
        );
        assert_eq!(
            split_two_power(&BigUint::from(120u32)),
            (3, BigUint::from(15u32))
        );
        assert_eq!(
            split_two_power(&BigUint::from(7u32)),
            (0, BigUint::from(7u32))
        );
    }

    #[test]
    fn small_inverses() {
        assert_eq!(inv_mod(3, 5), Some(2));
        assert_eq!(inv_mod(0, 5), None);
        for a in 1..13 {
            assert_eq!(a * inv_mod(a, 13).unwrap() % 13, 1);
        }
    }
}
