//! The order-3 element normalizing V = ⟨i, j⟩, built from two applications
//! of the dihedral trick.

use super::involution::q_minus_sign;
use super::{Order3Witness, RecogError, Recognizer};
use crate::arith::split_two_power;
use crate::matgrp::Mat2;

/// Why a single draw of `g` did not yield an order-3 element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order3Failure {
    H1Even,
    H2Even,
    /// Both square roots existed but `x` failed the relation check.
    Degenerate,
}

impl Recognizer<'_> {
    /// One attempt with a caller-supplied `g`. Equalities are taken modulo
    /// the centre, which only matters for SL2.
    pub fn order3_attempt(
        &mut self,
        i: &Mat2,
        j: &Mat2,
        g: &Mat2,
    ) -> Result<Order3Witness, Order3Failure> {
        let bb = &mut *self.bb;
        let k = bb.mul(i, j);
        let jg = bb.conj(j, g);
        let h1 = bb.mul(i, &jg);
        let n1 = bb
            .odd_order_sqrt_mod_center(&h1)
            .ok_or(Order3Failure::H1Even)?;
        let n1i = bb.inv(&n1);
        let y = bb.mul(g, &n1i);
        let s = bb.conj(&k, &y);
        let h2 = bb.mul(j, &s);
        let n2 = bb
            .odd_order_sqrt_mod_center(&h2)
            .ok_or(Order3Failure::H2Even)?;
        let n2i = bb.inv(&n2);
        let x = bb.mul(&y, &n2i);

        let x3 = bb.pow_u64(&x, 3);
        let ok = bb.is_central(&x3) && !bb.is_central(&x) && {
            let kx = bb.conj(&k, &x);
            let jx = bb.conj(j, &x);
            let ix = bb.conj(i, &x);
            bb.eq_mod_center(&kx, j) && bb.eq_mod_center(&jx, i) && bb.eq_mod_center(&ix, &k)
        };
        if !ok {
            return Err(Order3Failure::Degenerate);
        }
        Ok(Order3Witness {
            g: g.clone(),
            h1,
            n1,
            h2,
            n2,
            x,
        })
    }

    /// Draws `g` until [`Self::order3_attempt`] succeeds.
    ///
    /// `h2` lies in the torus T, and is of odd order only for about
    /// 2/|T|₂ of the draws with `h1` odd, so the budget is scaled by |T|₂/4.
    pub fn order3_element(&mut self, i: &Mat2, j: &Mat2) -> Result<Order3Witness, RecogError> {
        let q = self.bb.ctx().q().clone();
        let (e2, _) = split_two_power(&q_minus_sign(&q));
        let budget = self.config.retry_budget << e2.saturating_sub(2);
        for _ in 0..budget {
            let g = self.bb.random();
            match self.order3_attempt(i, j, &g) {
                Ok(w) => return Ok(w),
                Err(_) => self.retries += 1,
            }
        }
        Err(RecogError::RetryBudgetExhausted("order3_element"))
    }
}
