//! Dense polynomials over Z/pZ, coefficient lists with the constant term first.
//!
//! Only what the field layer needs: remainder, products modulo a monic
//! polynomial, gcd, extended Euclid and the Rabin irreducibility criterion.

use crate::arith::{inv_mod, prime_factors_u64};

pub(crate) type Poly = Vec<u32>;

pub(crate) fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

/// Degree of a trimmed polynomial; `None` for the zero polynomial.
pub(crate) fn degree(f: &[u32]) -> Option<usize> {
    f.iter().rposition(|&c| c != 0)
}

pub(crate) fn sub(f: &[u32], g: &[u32], p: u32) -> Poly {
    let n = f.len().max(g.len());
    let out = (0..n)
        .map(|i| {
            let a = f.get(i).copied().unwrap_or(0) as u64;
            let b = g.get(i).copied().unwrap_or(0) as u64;
            ((a + p as u64 - b) % p as u64) as u32
        })
        .collect();
    trim(out)
}

pub(crate) fn mul(f: &[u32], g: &[u32], p: u32) -> Poly {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let p = p as u64;
    let mut out = vec![0u64; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = (out[i + j] + a as u64 * b as u64) % p;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

/// Quotient and remainder of `f` by a nonzero `g`.
pub(crate) fn div_rem(f: &[u32], g: &[u32], p: u32) -> (Poly, Poly) {
    let dg = degree(g).expect("division by the zero polynomial");
    let mut r: Vec<u64> = f.iter().map(|&c| c as u64).collect();
    let p64 = p as u64;
    let lead_inv = inv_mod(g[dg] as u64, p64).expect("leading coefficient invertible");
    let df = match degree(f) {
        Some(d) if d >= dg => d,
        _ => return (Vec::new(), trim(f.to_vec())),
    };
    let mut q = vec![0u32; df - dg + 1];
    for i in (dg..=df).rev() {
        let c = r[i] % p64;
        if c == 0 {
            continue;
        }
        let factor = c * lead_inv % p64;
        q[i - dg] = factor as u32;
        for (j, &gj) in g[..=dg].iter().enumerate() {
            let idx = i - dg + j;
            r[idx] = (r[idx] + factor * (p64 - gj as u64)) % p64;
        }
    }
    let rem = trim(r.into_iter().take(dg).map(|c| (c % p64) as u32).collect());
    (trim(q), rem)
}

pub(crate) fn rem(f: &[u32], g: &[u32], p: u32) -> Poly {
    div_rem(f, g, p).1
}

pub(crate) fn mul_mod(f: &[u32], g: &[u32], m: &[u32], p: u32) -> Poly {
    rem(&mul(f, g, p), m, p)
}

/// `f^(p^times)` modulo `m`, by repeated p-th powering.
pub(crate) fn frobenius_mod(f: &[u32], times: usize, m: &[u32], p: u32) -> Poly {
    let mut cur = rem(f, m, p);
    for _ in 0..times {
        cur = pow_u64_mod(&cur, p as u64, m, p);
    }
    cur
}

pub(crate) fn pow_u64_mod(f: &[u32], mut e: u64, m: &[u32], p: u32) -> Poly {
    let mut base = rem(f, m, p);
    let mut acc: Poly = rem(&[1], m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &base, m, p);
        }
        e >>= 1;
        if e > 0 {
            base = mul_mod(&base, &base, m, p);
        }
    }
    acc
}

/// Monic gcd.
pub(crate) fn gcd(f: &[u32], g: &[u32], p: u32) -> Poly {
    let mut a = trim(f.to_vec());
    let mut b = trim(g.to_vec());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    make_monic(a, p)
}

fn make_monic(f: Poly, p: u32) -> Poly {
    match degree(&f) {
        None => f,
        Some(d) => {
            let inv = inv_mod(f[d] as u64, p as u64).expect("nonzero lead");
            f.into_iter()
                .map(|c| (c as u64 * inv % p as u64) as u32)
                .collect()
        }
    }
}

/// Returns `s` with `s * f ≡ 1 (mod m)`, or `None` when `gcd(f, m) ≠ 1`.
pub(crate) fn inverse_mod(f: &[u32], m: &[u32], p: u32) -> Option<Poly> {
    // Invariant: r0 ≡ s0 * f, r1 ≡ s1 * f (mod m).
    let mut r0 = trim(m.to_vec());
    let mut r1 = rem(f, m, p);
    let mut s0: Poly = Vec::new();
    let mut s1: Poly = vec![1];
    while !r1.is_empty() {
        let (q, r) = div_rem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = inv_mod(r0[0] as u64, p as u64)? as u64;
    let s: Poly = s0
        .into_iter()
        .map(|x| (x as u64 * c % p as u64) as u32)
        .collect();
    Some(rem(&s, m, p))
}

/// Rabin's test: `x^(p^k) ≡ x (mod f)` and `gcd(x^(p^(k/l)) - x, f) = 1`
/// for every prime `l | k`. `f` must be monic of degree `k ≥ 1`.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let f = trim(f.to_vec());
    let k = match degree(&f) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    let x: Poly = vec![0, 1];
    let x_mod = rem(&x, &f, p);
    if frobenius_mod(&x, k, &f, p) != x_mod {
        return false;
    }
    prime_factors_u64(k as u64).into_iter().all(|l| {
        let h = frobenius_mod(&x, k / l as usize, &f, p);
        let g = gcd(&sub(&h, &x, p), &f, p);
        degree(&g) == Some(0)
    })
}
