//! Involutions of the right type, centralizer sampling and torus generators.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{RecogError, Recognizer, RightInvolution, TypeTag};
use crate::arith::prime_factors_u64;
use crate::matgrp::{Flavor, Mat2};

/// Which branch of the centralizer construction produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `c = i⁻¹·i^g` had odd order; the sample `g·n⁻¹` is uniform in C(i).
    Odd,
    /// `c` had even order; the sample is the involution of ⟨c⟩, which
    /// commutes with `i` but is not uniformly distributed.
    Even,
}

/// `q ≡ 1 (mod 4)` selects `+1`, otherwise `-1`; `q − ε` is divisible by 4.
pub(crate) fn right_sign(q: &BigUint) -> i8 {
    if (q % 4u32).is_one() {
        1
    } else {
        -1
    }
}

pub(crate) fn q_minus_sign(q: &BigUint) -> BigUint {
    if right_sign(q) == 1 {
        q - 1u32
    } else {
        q + 1u32
    }
}

impl Recognizer<'_> {
    /// Last element of `y, y², y⁴, …` that is not trivial (modulo the centre
    /// when `mod_center`). `y` itself must be nontrivial.
    fn last_nontrivial(&mut self, mut y: Mat2, mod_center: bool) -> Mat2 {
        loop {
            let z = self.bb.mul(&y, &y);
            let trivial = if mod_center {
                self.bb.is_central(&z)
            } else {
                self.bb.is_identity(&z)
            };
            if trivial {
                return y;
            }
            y = z;
        }
    }

    /// An involution (for SL2 a pseudo-involution, squaring to −I) taken
    /// from the 2-part of a random element.
    pub fn make_involution(&mut self) -> Result<Mat2, RecogError> {
        let u = self.bb.odd_part().clone();
        for _ in 0..self.config.retry_budget {
            let g = self.bb.random();
            let y = self.bb.pow(&g, &u);
            if self.bb.is_central(&y) {
                self.retries += 1;
                continue;
            }
            return Ok(self.last_nontrivial(y, true));
        }
        Err(RecogError::RetryBudgetExhausted("make_involution"))
    }

    /// One draw of Bray's construction for the centralizer of `i`. For SL2
    /// everything is taken modulo ±I, so samples lie in the preimage of the
    /// PSL2 centralizer.
    pub fn centralizer_sample(&mut self, i: &Mat2) -> (Mat2, Parity) {
        let g = self.bb.random();
        let ii = self.bb.inv(i);
        let ig = self.bb.conj(i, &g);
        let c = self.bb.mul(&ii, &ig);
        match self.bb.odd_order_sqrt_mod_center(&c) {
            Some(n) => {
                let ni = self.bb.inv(&n);
                (self.bb.mul(&g, &ni), Parity::Odd)
            }
            None => {
                let u = self.bb.odd_part().clone();
                let y = self.bb.pow(&c, &u);
                (self.last_nontrivial(y, false), Parity::Even)
            }
        }
    }

    fn odd_centralizer_sample(&mut self, i: &Mat2) -> Option<Mat2> {
        match self.centralizer_sample(i) {
            (z, Parity::Odd) => Some(z),
            (_, Parity::Even) => {
                self.retries += 1;
                None
            }
        }
    }

    /// Decides the class of an involution from certificates in its
    /// centralizer: an element `g` with `g² ≠ 1` and `g^(q+1) ≠ 1` proves `+`,
    /// one with `g^(q−1) ≠ 1` proves `−`.
    pub fn involution_type(&mut self, i: &Mat2, q: &BigUint) -> Result<TypeTag, RecogError> {
        match self.bb.flavor() {
            Flavor::Psl2 => return Ok(TypeTag::Unique),
            Flavor::Sl2 => return Ok(TypeTag::Pseudo),
            Flavor::Pgl2 => {}
        }
        let (qp, qm) = (q + 1u32, q - 1u32);
        for _ in 0..self.config.type_samples {
            let Some(g) = self.odd_centralizer_sample(i) else {
                continue;
            };
            let g2 = self.bb.mul(&g, &g);
            if self.bb.is_identity(&g2) {
                continue;
            }
            let a = self.bb.pow(&g, &qp);
            if !self.bb.is_identity(&a) {
                return Ok(TypeTag::Plus);
            }
            let b = self.bb.pow(&g, &qm);
            if !self.bb.is_identity(&b) {
                return Ok(TypeTag::Minus);
            }
        }
        Err(RecogError::Undecided)
    }

    /// An involution whose centralizer torus has order divisible by 4
    /// (PGL2, SL2) or equal to (q−ε)/2 (PSL2).
    pub fn right_type_involution(&mut self, q: &BigUint) -> Result<RightInvolution, RecogError> {
        let flavor = self.bb.flavor();
        let wanted = if right_sign(q) == 1 {
            TypeTag::Plus
        } else {
            TypeTag::Minus
        };
        let full = q_minus_sign(q);
        let torus_order = match flavor {
            Flavor::Psl2 => full >> 1,
            _ => full,
        };
        for _ in 0..self.config.retry_budget {
            let i = self.make_involution()?;
            let tag = match self.involution_type(&i, q) {
                Ok(tag) => tag,
                Err(RecogError::Undecided) => {
                    self.retries += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if flavor == Flavor::Pgl2 && tag != wanted {
                self.retries += 1;
                continue;
            }
            return Ok(RightInvolution {
                i,
                tag,
                torus_order,
            });
        }
        Err(RecogError::RetryBudgetExhausted("right_type_involution"))
    }

    /// An element `t` of the torus T ≤ C(i) with `t² ≠ 1`, `t^(|T|/2) ≠ 1`
    /// and, for each `d` in `required_orders`, `t^(|T|/d)` of exact order `d`.
    pub fn torus_generator(
        &mut self,
        inv: &RightInvolution,
        required_orders: &[u64],
    ) -> Result<Mat2, RecogError> {
        let order = &inv.torus_order;
        for &d in required_orders {
            if !(order % d).is_zero() {
                return Err(RecogError::DivisorUnavailable {
                    d: BigUint::from(d),
                    torus_order: order.clone(),
                });
            }
        }
        if order <= &BigUint::from(2u32) {
            // T = ⟨i⟩ (PSL2(q) with q = 5 or q = 3).
            return Ok(inv.i.clone());
        }
        let half = order >> 1;
        let mut primes: Vec<u64> = required_orders
            .iter()
            .flat_map(|&d| prime_factors_u64(d))
            .collect();
        primes.sort_unstable();
        primes.dedup();
        'draw: for _ in 0..self.config.retry_budget {
            let Some(t) = self.odd_centralizer_sample(&inv.i) else {
                continue;
            };
            let ti = self.bb.mul(&t, &inv.i);
            let it = self.bb.mul(&inv.i, &t);
            let t2 = self.bb.mul(&t, &t);
            if !self.bb.eq(&ti, &it) || self.bb.is_identity(&t2) {
                self.retries += 1;
                continue;
            }
            let tt = self.bb.pow(&t, order);
            let th = self.bb.pow(&t, &half);
            if !self.bb.is_identity(&tt) || self.bb.is_identity(&th) {
                self.retries += 1;
                continue;
            }
            for &rho in &primes {
                let y = self.bb.pow(&t, &(order / rho));
                if self.bb.is_identity(&y) {
                    self.retries += 1;
                    continue 'draw;
                }
            }
            return Ok(t);
        }
        Err(RecogError::RetryBudgetExhausted("torus_generator"))
    }

    /// An involution `j ∈ C(i)` inverting the torus generated by `t`, of the
    /// same type as `i`; ⟨i, j⟩ is then a Klein four-group (PGL2, PSL2) or a
    /// quaternion group (SL2).
    pub fn inverting_involution(
        &mut self,
        inv: &RightInvolution,
        t: &Mat2,
        q: &BigUint,
    ) -> Result<Mat2, RecogError> {
        let t_inv = self.bb.inv(t);
        for _ in 0..self.config.retry_budget {
            let Some(w) = self.odd_centralizer_sample(&inv.i) else {
                continue;
            };
            let w2 = self.bb.mul(&w, &w);
            if !self.bb.is_central(&w2)
                || self.bb.is_central(&w)
                || self.bb.eq_mod_center(&w, &inv.i)
            {
                self.retries += 1;
                continue;
            }
            let tw = self.bb.conj(t, &w);
            if !self.bb.eq_mod_center(&tw, &t_inv) {
                self.retries += 1;
                continue;
            }
            if self.bb.flavor() == Flavor::Pgl2 {
                match self.involution_type(&w, q) {
                    Ok(tag) if tag == inv.tag => {}
                    _ => {
                        self.retries += 1;
                        continue;
                    }
                }
            }
            return Ok(w);
        }
        Err(RecogError::RetryBudgetExhausted("inverting_involution"))
    }
}
