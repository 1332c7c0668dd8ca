//! The black-box oracle over the matrix backend: random elements by product
//! replacement (BB1), counted products, inverses and comparisons (BB2, BB3),
//! and powering by the global exponent E = q(q²−1) (BB4).

use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::split_two_power;
use crate::ff::{FieldCtx, FieldError};
use crate::matgrp::{Flavor, Mat2, MatError, MatGroup};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub mul: u64,
    pub inv: u64,
    pub eq: u64,
    pub rand: u64,
}

impl OpCounters {
    pub fn since(&self, earlier: &OpCounters) -> OpCounters {
        OpCounters {
            mul: self.mul - earlier.mul,
            inv: self.inv - earlier.inv,
            eq: self.eq - earlier.eq,
            rand: self.rand - earlier.rand,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == OpCounters::default()
    }
}

/// Product replacement parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrConfig {
    pub slots: usize,
    pub burn_in: usize,
}

impl Default for PrConfig {
    fn default() -> Self {
        PrConfig {
            slots: 10,
            burn_in: 200,
        }
    }
}

pub struct BlackBox {
    group: MatGroup,
    generators: Vec<Mat2>,
    exponent: BigUint,
    odd_part: BigUint,
    two_valuation: u32,
    half_odd_plus_one: BigUint,
    exponent_factors: Option<Vec<(BigUint, u32)>>,
    slots: Vec<Mat2>,
    accumulator: Mat2,
    rng: ChaCha8Rng,
    counters: OpCounters,
    seed: u64,
}

impl BlackBox {
    pub fn new(flavor: Flavor, p: u32, k: usize, seed: u64) -> Result<Self, FieldError> {
        Self::with_config(flavor, p, k, seed, PrConfig::default())
    }

    pub fn with_config(
        flavor: Flavor,
        p: u32,
        k: usize,
        seed: u64,
        config: PrConfig,
    ) -> Result<Self, FieldError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = FieldCtx::new(p, k, rng.next_u64())?;
        let group = MatGroup::new(Arc::new(ctx), flavor);
        let generators = group.standard_generators(&mut rng).map_err(|e| match e {
            MatError::Field(f) => f,
            _ => FieldError::RetryBudgetExhausted,
        })?;
        Ok(Self::from_parts(group, generators, rng, config, seed))
    }

    /// A black box over an explicit generating set.
    pub fn from_generators(group: MatGroup, generators: Vec<Mat2>, seed: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_parts(group, generators, rng, PrConfig::default(), seed)
    }

    fn from_parts(
        group: MatGroup,
        generators: Vec<Mat2>,
        rng: ChaCha8Rng,
        config: PrConfig,
        seed: u64,
    ) -> Self {
        let exponent = group.exponent();
        let (two_valuation, odd_part) = split_two_power(&exponent);
        let half_odd_plus_one = (&odd_part + 1u32) >> 1;
        let n = config.slots.max(generators.len()).max(2);
        let slots = (0..n)
            .map(|i| generators[i % generators.len()].clone())
            .collect();
        let accumulator = group.identity();
        let mut bb = BlackBox {
            group,
            generators,
            exponent,
            odd_part,
            two_valuation,
            half_odd_plus_one,
            exponent_factors: None,
            slots,
            accumulator,
            rng,
            counters: OpCounters::default(),
            seed,
        };
        for _ in 0..config.burn_in {
            bb.replacement_step();
        }
        bb
    }

    pub fn group(&self) -> &MatGroup {
        &self.group
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.group.ctx()
    }

    pub fn flavor(&self) -> Flavor {
        self.group.flavor()
    }

    pub fn generators(&self) -> &[Mat2] {
        &self.generators
    }

    pub fn exponent(&self) -> &BigUint {
        &self.exponent
    }

    pub fn odd_part(&self) -> &BigUint {
        &self.odd_part
    }

    pub fn two_valuation(&self) -> u32 {
        self.two_valuation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counters(&self) -> OpCounters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = OpCounters::default();
    }

    pub fn identity(&self) -> Mat2 {
        self.group.identity()
    }

    fn replacement_step(&mut self) {
        let n = self.slots.len();
        let i = self.rng.gen_range(0..n);
        let mut j = self.rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let other = if self.rng.gen_bool(0.5) {
            self.slots[j].clone()
        } else {
            self.group
                .inv(&self.slots[j])
                .expect("slots stay invertible")
        };
        self.slots[i] = if self.rng.gen_bool(0.5) {
            self.group.mul(&self.slots[i], &other)
        } else {
            self.group.mul(&other, &self.slots[i])
        };
        self.accumulator = self.group.mul(&self.accumulator, &self.slots[i]);
    }

    /// BB1: one product-replacement step followed by the accumulator
    /// ("rattle") multiplication.
    pub fn random(&mut self) -> Mat2 {
        self.replacement_step();
        self.counters.rand += 1;
        self.accumulator.clone()
    }

    pub fn mul(&mut self, x: &Mat2, y: &Mat2) -> Mat2 {
        self.counters.mul += 1;
        self.group.mul(x, y)
    }

    pub fn inv(&mut self, x: &Mat2) -> Mat2 {
        self.counters.inv += 1;
        self.group.inv(x).expect("group strings are invertible")
    }

    pub fn eq(&mut self, x: &Mat2, y: &Mat2) -> bool {
        self.counters.eq += 1;
        self.group.eq(x, y)
    }

    pub fn is_identity(&mut self, x: &Mat2) -> bool {
        self.counters.eq += 1;
        self.group.is_identity(x)
    }

    /// Equality modulo the centre ±I; the same as [`Self::eq`] unless the
    /// flavor is SL2.
    pub fn eq_mod_center(&mut self, x: &Mat2, y: &Mat2) -> bool {
        self.counters.eq += 1;
        self.group.eq_mod_center(x, y)
    }

    pub fn is_central(&mut self, x: &Mat2) -> bool {
        self.counters.eq += 1;
        self.group.is_central(x)
    }

    /// `g⁻¹ x g`.
    pub fn conj(&mut self, x: &Mat2, g: &Mat2) -> Mat2 {
        let gi = self.inv(g);
        let t = self.mul(&gi, x);
        self.mul(&t, g)
    }

    /// Square-and-multiply, right to left: ⌊log₂ n⌋ squarings and
    /// popcount(n) accumulator products.
    pub fn pow(&mut self, x: &Mat2, n: &BigUint) -> Mat2 {
        let bits = n.bits();
        let mut acc = self.identity();
        let mut base = x.clone();
        for i in 0..bits {
            if n.bit(i) {
                acc = self.mul(&acc, &base);
            }
            if i + 1 < bits {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn pow_u64(&mut self, x: &Mat2, n: u64) -> Mat2 {
        self.pow(x, &BigUint::from(n))
    }

    /// For `h` of odd order returns `n = h^((u+1)/2)` with `u` the odd part
    /// of E, so that `n ∈ ⟨h⟩` and `n² = h`; returns `None` when `h` has
    /// even order. (`n² = h·h^u`, so the test `n² = h` is the test `h^u = 1`.)
    pub fn odd_order_sqrt(&mut self, h: &Mat2) -> Option<Mat2> {
        let e = self.half_odd_plus_one.clone();
        let n = self.pow(h, &e);
        let n2 = self.mul(&n, &n);
        self.eq(&n2, h).then_some(n)
    }

    /// [`Self::odd_order_sqrt`] in G/Z(G): succeeds when `h` has odd order
    /// modulo ±I, with `n² ≡ h` up to sign.
    pub fn odd_order_sqrt_mod_center(&mut self, h: &Mat2) -> Option<Mat2> {
        let e = self.half_odd_plus_one.clone();
        let n = self.pow(h, &e);
        let n2 = self.mul(&n, &n);
        self.eq_mod_center(&n2, h).then_some(n)
    }

    /// Exact order via the factored exponent. Verification only: uses
    /// trial division on E and does not touch the counters.
    pub fn element_order(&mut self, x: &Mat2) -> Result<BigUint, MatError> {
        let factors = self
            .exponent_factors
            .get_or_insert_with(|| self.group.exponent_factors());
        self.group.element_order(x, factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, ToPrimitive};
    use std::collections::{HashMap, HashSet};

    fn enumerate(bb: &BlackBox) -> HashSet<Mat2> {
        let g = bb.group().clone();
        let id = g.canonicalize(&g.identity()).unwrap();
        let mut seen = HashSet::from([id.clone()]);
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            for s in bb.generators() {
                let y = g.canonicalize(&g.mul(&x, s)).unwrap();
                if seen.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        seen
    }

    #[test]
    fn exponent_split() {
        let bb = BlackBox::new(Flavor::Pgl2, 3, 2, 7).unwrap();
        assert_eq!(bb.exponent(), &BigUint::from(720u32));
        assert_eq!(bb.odd_part(), &BigUint::from(45u32));
        assert_eq!(bb.two_valuation(), 4);
        let bb = BlackBox::new(Flavor::Pgl2, 5, 1, 1).unwrap();
        assert_eq!(
            (bb.odd_part().to_u32().unwrap(), bb.two_valuation()),
            (15, 3)
        );
        for (flavor, p, k) in [(Flavor::Sl2, 7, 3), (Flavor::Psl2, 11, 2)] {
            let bb = BlackBox::new(flavor, p, k, 0).unwrap();
            assert_eq!(bb.odd_part() << bb.two_valuation(), *bb.exponent());
            assert!(bb.odd_part().bit(0));
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let mut a = BlackBox::new(Flavor::Psl2, 7, 2, 42).unwrap();
        let mut b = BlackBox::new(Flavor::Psl2, 7, 2, 42).unwrap();
        for _ in 0..50 {
            assert_eq!(a.random(), b.random());
        }
    }

    #[test]
    fn draws_stay_in_group_and_look_uniform() {
        let mut bb = BlackBox::new(Flavor::Pgl2, 5, 1, 9).unwrap();
        let elements = enumerate(&bb);
        assert_eq!(elements.len(), 120);
        let n = 10_000;
        let mut freq: HashMap<Mat2, usize> = HashMap::new();
        for _ in 0..n {
            let x = bb.random();
            let c = bb.group().canonicalize(&x).unwrap();
            assert!(elements.contains(&c));
            *freq.entry(c).or_default() += 1;
        }
        assert_eq!(bb.counters().rand, n as u64);
        let p = 1.0 / 120.0;
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for x in &elements {
            let c = *freq.get(x).unwrap_or(&0) as f64;
            assert!((c - mean).abs() <= 5.0 * sigma, "count {c} vs mean {mean}");
        }
    }

    #[test]
    fn even_order_fraction_psl2_9() {
        let mut bb = BlackBox::new(Flavor::Psl2, 3, 2, 5).unwrap();
        let n = 10_000;
        let mut even = 0;
        for _ in 0..n {
            let x = bb.random();
            if bb.element_order(&x).unwrap().bit(0) {
                continue;
            }
            even += 1;
        }
        let frac = even as f64 / n as f64;
        assert!(
            frac >= 0.25 - 3.0 * (0.25 * 0.75 / n as f64).sqrt(),
            "{frac}"
        );
    }

    #[test]
    fn counters_are_exact() {
        let mut bb = BlackBox::new(Flavor::Pgl2, 3, 2, 1).unwrap();
        let x = bb.random();
        bb.reset_counters();
        let mut y = x.clone();
        for _ in 0..17 {
            y = bb.mul(&y, &x);
        }
        assert_eq!(bb.counters().mul, 17);
        assert!(bb.eq(&x, &x));
        assert_eq!(bb.counters().eq, 1);
        let xi = bb.inv(&x);
        let xii = bb.inv(&xi);
        assert!(bb.eq(&xii, &x));
        assert_eq!(bb.counters().inv, 2);
    }

    #[test]
    fn pow_cost_and_values() {
        let mut bb = BlackBox::new(Flavor::Pgl2, 3, 2, 2).unwrap();
        let x = bb.random();
        let id = bb.pow_u64(&x, 0);
        assert!(bb.group().is_identity(&id));
        for n in [1u64, 2, 5, 45, 720, 1023] {
            bb.reset_counters();
            let y = bb.pow_u64(&x, n);
            let expected = (63 - n.leading_zeros()) as u64 + n.count_ones() as u64;
            assert_eq!(bb.counters().mul, expected);
            let mut z = bb.identity();
            for _ in 0..n {
                z = bb.group().mul(&z, &x);
            }
            assert!(bb.group().eq(&y, &z));
        }
        let e = bb.exponent().clone();
        for _ in 0..100 {
            let x = bb.random();
            let y = bb.pow(&x, &e);
            assert!(bb.is_identity(&y));
        }
    }

    #[test]
    fn square_of_order_four_is_involution() {
        let mut bb = BlackBox::new(Flavor::Pgl2, 5, 1, 2).unwrap();
        let g = bb.group().from_rows([[2, 0], [0, 1]]).unwrap();
        let g2 = bb.pow_u64(&g, 2);
        assert_eq!(bb.element_order(&g2).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn odd_order_sqrt_matches_parity_on_pgl2_5() {
        let mut bb = BlackBox::new(Flavor::Pgl2, 5, 1, 3).unwrap();
        let id = bb.identity();
        let n = bb.odd_order_sqrt(&id).unwrap();
        assert!(bb.group().is_identity(&n));
        for x in enumerate(&bb) {
            let order = bb.element_order(&x).unwrap();
            match bb.odd_order_sqrt(&x) {
                None => assert!(!order.bit(0)),
                Some(n) => {
                    assert!(order.bit(0));
                    let n2 = bb.group().mul(&n, &n);
                    assert!(bb.group().eq(&n2, &x));
                }
            }
        }
    }

    #[test]
    fn odd_order_sqrt_on_random_pgl2_9() {
        let mut bb = BlackBox::new(Flavor::Pgl2, 3, 2, 4).unwrap();
        let mut hits = 0;
        while hits < 100 {
            let h = bb.random();
            if !bb.element_order(&h).unwrap().bit(0) {
                assert!(bb.odd_order_sqrt(&h).is_none());
                continue;
            }
            hits += 1;
            let n = bb.odd_order_sqrt(&h).expect("odd order");
            let n2 = bb.group().mul(&n, &n);
            assert!(bb.group().eq(&n2, &h));
        }
        assert!(bb.element_order(&bb.identity()).unwrap().is_one());
    }
}
