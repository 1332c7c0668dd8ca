//! Exact arithmetic in GF(p^k), elements stored as reduced polynomial
//! residues modulo a monic irreducible polynomial of degree `k`.
//!
//! Coefficient lists are constant-term first and always have length `k`, so
//! two elements are equal exactly when their coefficient lists are equal.

mod poly;

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::arith::{inv_mod, is_prime_u64};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("random search exhausted its retry budget")]
    RetryBudgetExhausted,
    #[error("modulus is not a monic irreducible polynomial of degree {0}")]
    InvalidModulus(usize),
    #[error("coefficient list {0:?} is not a reduced element of this field")]
    NotAnElement(Vec<u32>),
}

pub(crate) type Coeffs = SmallVec<[u32; 16]>;

/// An element of GF(p^k). Only meaningful together with its [`FieldCtx`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(pub(crate) Coeffs);

impl FieldElem {
    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl Serialize for FieldElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        Ok(FieldElem(v.into_iter().collect()))
    }
}

/// The field GF(p^k) = Z_p\[x\]/(f).
#[derive(Clone, PartialEq, Eq)]
pub struct FieldCtx {
    p: u32,
    k: usize,
    /// Monic, length k+1, constant term first.
    modulus: Vec<u32>,
    q: BigUint,
    lazy_reduce: bool,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}) mod {:?}", self.p, self.k, self.modulus)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldCtxRepr {
    p: u32,
    k: usize,
    modulus: Vec<u32>,
}

impl Serialize for FieldCtx {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FieldCtxRepr {
            p: self.p,
            k: self.k,
            modulus: self.modulus.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldCtx {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = FieldCtxRepr::deserialize(d)?;
        if r.modulus.len() != r.k + 1 {
            return Err(serde::de::Error::custom("modulus length must be k + 1"));
        }
        FieldCtx::with_modulus(r.p, r.modulus).map_err(serde::de::Error::custom)
    }
}

fn check_prime(p: u32) -> Result<(), FieldError> {
    if p.is_multiple_of(2) || !is_prime_u64(p as u64) {
        return Err(FieldError::NotPrime(p as u64));
    }
    Ok(())
}

pub fn irreducible_test(f: &[u32], p: u32) -> bool {
    poly::is_irreducible(f, p)
}

impl FieldCtx {
    /// Builds GF(p^k) with a random monic irreducible modulus drawn from a
    /// stream seeded by `seed`. For `k = 1` the modulus is `x` and elements
    /// are plain residues.
    pub fn new(p: u32, k: usize, seed: u64) -> Result<Self, FieldError> {
        check_prime(p)?;
        if k == 0 {
            return Err(FieldError::InvalidDegree(k));
        }
        if k == 1 {
            return Self::with_modulus(p, vec![0, 1]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut f: Vec<u32> = (0..k).map(|_| rng.gen_range(0..p)).collect();
            f.push(1);
            if f[0] != 0 && poly::is_irreducible(&f, p) {
                return Self::with_modulus(p, f);
            }
        }
    }

    /// Uses a caller-supplied modulus (constant term first, monic).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self, FieldError> {
        check_prime(p)?;
        let k = modulus.len().saturating_sub(1);
        if k == 0 {
            return Err(FieldError::InvalidDegree(0));
        }
        if modulus[k] != 1 || modulus.iter().any(|&c| c >= p) || !poly::is_irreducible(&modulus, p)
        {
            return Err(FieldError::InvalidModulus(k));
        }
        let q = BigUint::from(p).pow(k as u32);
        let lazy_reduce = (p as u128) * (p as u128) * (2 * k as u128 + 2) < (1u128 << 63);
        Ok(FieldCtx {
            p,
            k,
            modulus,
            q,
            lazy_reduce,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(SmallVec::from_elem(0, self.k))
    }

    pub fn one(&self) -> FieldElem {
        self.from_u32(1)
    }

    pub fn from_u32(&self, c: u32) -> FieldElem {
        let mut e = self.zero();
        e.0[0] = c % self.p;
        e
    }

    /// The class of `x`, a generator of the field over Z_p.
    /// Equals the constant 0 when `k = 1`.
    pub fn primitive_x(&self) -> FieldElem {
        let mut e = self.zero();
        if self.k > 1 {
            e.0[1] = 1;
        }
        e
    }

    /// `x^j` reduced; `j < k` gives the standard basis.
    pub fn basis(&self, j: usize) -> FieldElem {
        if self.k == 1 {
            return self.one();
        }
        let x = self.primitive_x();
        self.pow_u64(&x, j as u64)
    }

    pub fn elem(&self, coeffs: &[u32]) -> Result<FieldElem, FieldError> {
        if coeffs.len() != self.k || coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::NotAnElement(coeffs.to_vec()));
        }
        Ok(FieldElem(coeffs.iter().copied().collect()))
    }

    pub fn is_valid(&self, a: &FieldElem) -> bool {
        a.0.len() == self.k && a.0.iter().all(|&c| c < self.p)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem((0..self.k).map(|_| rng.gen_range(0..self.p)).collect())
    }

    /// All q elements in a fixed order. Desk scale only.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        let q = self.q_usize().expect("field too large to enumerate");
        (0..q).map(move |mut n| {
            FieldElem(
                (0..self.k)
                    .map(|_| {
                        let c = (n % self.p as usize) as u32;
                        n /= self.p as usize;
                        c
                    })
                    .collect(),
            )
        })
    }

    pub fn q_usize(&self) -> Option<usize> {
        u64::try_from(&self.q)
            .ok()
            .and_then(|v| usize::try_from(v).ok())
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let p = self.p;
        FieldElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| {
                    let s = x as u64 + y as u64;
                    if s >= p as u64 {
                        (s - p as u64) as u32
                    } else {
                        s as u32
                    }
                })
                .collect(),
        )
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem(
            a.0.iter()
                .map(|&x| if x == 0 { 0 } else { self.p - x })
                .collect(),
        )
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let k = self.k;
        let p = self.p as u64;
        if k == 1 {
            return FieldElem(SmallVec::from_elem(
                (a.0[0] as u64 * b.0[0] as u64 % p) as u32,
                1,
            ));
        }
        let mut prod: SmallVec<[u64; 32]> = SmallVec::from_elem(0, 2 * k - 1);
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                let t = prod[i + j] + x as u64 * y as u64;
                prod[i + j] = if self.lazy_reduce { t } else { t % p };
            }
        }
        // Fold the high part down using x^k = -(m_0 + ... + m_{k-1} x^{k-1}).
        for i in (k..2 * k - 1).rev() {
            let c = prod[i] % p;
            if c == 0 {
                continue;
            }
            for j in 0..k {
                let m = self.modulus[j] as u64;
                if m != 0 {
                    let t = prod[i - k + j] + c * (p - m);
                    prod[i - k + j] = if self.lazy_reduce { t } else { t % p };
                }
            }
        }
        FieldElem(prod[..k].iter().map(|&c| (c % p) as u32).collect())
    }

    pub fn square(&self, a: &FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    /// Inverse by the extended Euclidean algorithm on polynomials.
    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.k == 1 {
            let v = inv_mod(a.0[0] as u64, self.p as u64).ok_or(FieldError::DivisionByZero)?;
            return Ok(self.from_u32(v as u32));
        }
        let s = poly::inverse_mod(&poly::trim(a.0.to_vec()), &self.modulus, self.p)
            .ok_or(FieldError::DivisionByZero)?;
        let mut out = self.zero();
        for (i, c) in s.into_iter().enumerate() {
            out.0[i] = c;
        }
        Ok(out)
    }

    pub fn pow(&self, a: &FieldElem, n: &BigUint) -> FieldElem {
        let mut acc = self.one();
        let bits = n.bits();
        for i in (0..bits).rev() {
            acc = self.square(&acc);
            if n.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    pub fn pow_u64(&self, a: &FieldElem, n: u64) -> FieldElem {
        self.pow(a, &BigUint::from(n))
    }

    pub fn is_one(&self, a: &FieldElem) -> bool {
        a.0[0] == 1 && a.0[1..].iter().all(|&c| c == 0)
    }

    pub fn is_square(&self, a: &FieldElem) -> bool {
        if a.is_zero() {
            return true;
        }
        let half = (&self.q - BigUint::one()) >> 1;
        self.is_one(&self.pow(a, &half))
    }

    /// A non-square, found by random sampling. Each draw succeeds with
    /// probability about 1/2; the budget only guards against a broken RNG.
    pub fn find_nonsquare<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FieldElem, FieldError> {
        for _ in 0..256 {
            let z = self.random(rng);
            if !z.is_zero() && !self.is_square(&z) {
                return Ok(z);
            }
        }
        Err(FieldError::RetryBudgetExhausted)
    }
}
