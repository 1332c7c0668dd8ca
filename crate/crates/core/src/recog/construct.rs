//! Assembly of the (i, j, x, s[, r], T) tuples and the generated subgroups.

use num_bigint::BigUint;
use num_traits::{Pow, ToPrimitive, Zero};

use super::involution::q_minus_sign;
use super::{
    ConstructionResult, Order3Witness, RecogError, Recognizer, RightInvolution, Target, Tuple,
};
use crate::arith::prime_factors_u64;
use crate::matgrp::{Flavor, Mat2};

/// Order `d` of the torus element `r` generating a subfield subgroup over
/// GF(p^a) together with the order-3 element.
///
/// PGL2 and SL2 use whichever of p^a ± 1 is divisible by 4; PSL2 uses
/// whichever of (p^a ± 1)/2 is even, except that for p^a = 5 it takes 4
/// whenever the torus allows it (the order-4 element of the exceptional
/// case).
pub fn subfield_torus_divisor(
    p: u32,
    a: usize,
    torus_order: &BigUint,
    flavor: Flavor,
) -> Result<BigUint, RecogError> {
    let pa = BigUint::from(p).pow(a as u32);
    let minus = &pa - 1u32;
    let plus = &pa + 1u32;
    let d = match flavor {
        Flavor::Pgl2 | Flavor::Sl2 => {
            if (&minus % 4u32).is_zero() {
                minus
            } else {
                plus
            }
        }
        Flavor::Psl2 => {
            let four = BigUint::from(4u32);
            if pa == BigUint::from(5u32) && (torus_order % &four).is_zero() {
                four
            } else if (&minus % 4u32).is_zero() {
                minus >> 1
            } else {
                plus >> 1
            }
        }
    };
    if !(torus_order % &d).is_zero() {
        return Err(RecogError::DivisorUnavailable {
            d,
            torus_order: torus_order.clone(),
        });
    }
    Ok(d)
}

fn q_mod_8_is_pm1(q: &BigUint) -> bool {
    let r = (q % 8u32).to_u32().unwrap();
    r == 1 || r == 7
}

/// Pieces produced by steps 2 and 3, shared by all constructions.
struct Core {
    inv: RightInvolution,
    t: Mat2,
    j: Mat2,
    k: Mat2,
    witness: Order3Witness,
}

impl Recognizer<'_> {
    fn core(&mut self, q: &BigUint, required_orders: &[u64]) -> Result<Core, RecogError> {
        let before = self.bb.counters();
        let inv = self.right_type_involution(q);
        self.record_stage("involution", before);
        let inv = inv?;

        let before = self.bb.counters();
        let tj = self
            .torus_generator(&inv, required_orders)
            .and_then(|t| self.inverting_involution(&inv, &t, q).map(|j| (t, j)));
        self.record_stage("torus", before);
        let (t, j) = tj?;

        let before = self.bb.counters();
        let witness = self.order3_element(&inv.i, &j);
        self.record_stage("order3", before);
        let witness = witness?;
        let k = self.bb.mul(&inv.i, &j);
        Ok(Core {
            inv,
            t,
            j,
            k,
            witness,
        })
    }

    /// `y = t^(|T|/d)` with its exact order checked to be `d`.
    fn torus_power(&mut self, core: &Core, d: u64) -> Option<Mat2> {
        let e = &core.inv.torus_order / d;
        let y = self.bb.pow(&core.t, &e);
        let yd = self.bb.pow_u64(&y, d);
        if !self.bb.is_identity(&yd) {
            return None;
        }
        for rho in prime_factors_u64(d) {
            let z = self.bb.pow_u64(&y, d / rho);
            if self.bb.is_identity(&z) {
                return None;
            }
        }
        Some(y)
    }

    /// Relations every tuple must satisfy before it is handed out: V = ⟨i, j⟩
    /// is a four-group (quaternion for SL2) and x permutes i → k → j → i.
    fn check_core(&mut self, core: &Core) -> bool {
        let bb = &mut *self.bb;
        let (i, j, k) = (&core.inv.i, &core.j, &core.k);
        let x = &core.witness.x;
        let ii = bb.mul(i, i);
        let jj = bb.mul(j, j);
        let ij = bb.mul(i, j);
        let ji = bb.mul(j, i);
        let x3 = bb.pow_u64(x, 3);
        let (ix, jx, kx) = (bb.conj(i, x), bb.conj(j, x), bb.conj(k, x));
        let gen_ok = bb.is_central(&ii)
            && bb.is_central(&jj)
            && !bb.is_central(i)
            && !bb.is_central(j)
            && !bb.eq_mod_center(i, j)
            && bb.eq_mod_center(&ij, &ji)
            && bb.is_central(&x3)
            && !bb.is_central(x)
            && bb.eq_mod_center(&ix, k)
            && bb.eq_mod_center(&jx, i)
            && bb.eq_mod_center(&kx, j);
        if !gen_ok {
            return false;
        }
        if bb.flavor() == Flavor::Sl2 {
            // Pseudo-involutions: i² = j² = −I exactly.
            !bb.is_identity(&ii) && !bb.is_identity(&jj)
        } else {
            true
        }
    }

    /// `s` of order 4 (order 8 for SL2) in T, with `s²` a generator of ⟨i⟩
    /// modulo the centre and `j^s = k`.
    fn make_s(&mut self, core: &Core, order: u64) -> Option<Mat2> {
        let s = self.torus_power(core, order)?;
        let bb = &mut *self.bb;
        let s_sq = bb.pow_u64(&s, order / 2);
        let js = bb.conj(&core.j, &s);
        let swaps = if order == 4 {
            bb.eq_mod_center(&js, &core.k)
        } else {
            // s² = ±i for order 8, and s swaps j and k only through s².
            let s2 = bb.mul(&s, &s);
            bb.eq_mod_center(&s2, &core.inv.i)
        };
        let sq_ok = if order == 4 {
            bb.eq_mod_center(&s_sq, &core.inv.i)
        } else {
            bb.is_central(&s_sq) && !bb.is_identity(&s_sq)
        };
        (swaps && sq_ok).then_some(s)
    }

    fn finish(
        &mut self,
        core: Core,
        s: Option<Mat2>,
        r: Option<Mat2>,
        generators: Vec<Mat2>,
        target: Target,
        a: Option<usize>,
    ) -> ConstructionResult {
        let ctx = self.bb.ctx();
        ConstructionResult {
            flavor: self.bb.flavor(),
            p: ctx.p(),
            k: ctx.k(),
            a,
            modulus: ctx.modulus().to_vec(),
            target,
            generators,
            tuple: Tuple {
                i: core.inv.i,
                j: core.j,
                k: core.k,
                x: core.witness.x.clone(),
                s,
                t: core.t,
                r,
            },
            witness: core.witness,
            torus_order: core.inv.torus_order,
            counters: self.bb.counters(),
            stages: self.stages.clone(),
            seed: self.bb.seed(),
            retries: self.retries,
        }
    }

    fn field_q(&self, p: u32, k: usize) -> BigUint {
        BigUint::from(p).pow(k as u32)
    }

    /// Sym4 = ⟨s, x⟩ in PGL2(q), and in PSL2(q) for q ≡ ±1 mod 8; Alt4 =
    /// ⟨i, j, x⟩ in PSL2(q) for q ≡ ±3 mod 8.
    pub fn construct_sym4(&mut self, p: u32, k: usize) -> Result<ConstructionResult, RecogError> {
        let flavor = self.bb.flavor();
        if flavor == Flavor::Sl2 {
            return Err(RecogError::UnsupportedFlavor(flavor));
        }
        let q = self.field_q(p, k);
        let with_s = flavor == Flavor::Pgl2 || q_mod_8_is_pm1(&q);
        let required: &[u64] = if with_s { &[4] } else { &[] };
        for _ in 0..self.config.retry_budget {
            let core = self.core(&q, required)?;
            let before = self.bb.counters();
            let assembled = if !self.check_core(&core) {
                None
            } else if with_s {
                self.make_s(&core, 4).map(|s| {
                    let gens = vec![s.clone(), core.witness.x.clone()];
                    (Some(s), gens, Target::Sym4)
                })
            } else {
                let gens = vec![core.inv.i.clone(), core.j.clone(), core.witness.x.clone()];
                Some((None, gens, Target::Alt4))
            };
            self.record_stage("assemble", before);
            match assembled {
                Some((s, gens, target)) => {
                    return Ok(self.finish(core, s, None, gens, target, None))
                }
                None => self.retries += 1,
            }
        }
        Err(RecogError::RetryBudgetExhausted("construct_sym4"))
    }

    /// The normalizer of the quaternion group V = ⟨i, j⟩ in SL2(q):
    /// ⟨i, j, x⟩ ≅ SL2(3) for q ≡ ±3 mod 8 and ⟨i, j, s, x⟩ of order 48 with
    /// |s| = 8 for q ≡ ±1 mod 8.
    pub fn construct_sl2_normalizer(
        &mut self,
        p: u32,
        k: usize,
    ) -> Result<ConstructionResult, RecogError> {
        let flavor = self.bb.flavor();
        if flavor != Flavor::Sl2 {
            return Err(RecogError::UnsupportedFlavor(flavor));
        }
        let q = self.field_q(p, k);
        let with_s = q_mod_8_is_pm1(&q);
        let required: &[u64] = if with_s { &[8] } else { &[] };
        for _ in 0..self.config.retry_budget {
            let core = self.core(&q, required)?;
            let before = self.bb.counters();
            let assembled = if !self.check_core(&core) {
                None
            } else if with_s {
                self.make_s(&core, 8).map(|s| {
                    let gens = vec![
                        core.inv.i.clone(),
                        core.j.clone(),
                        s.clone(),
                        core.witness.x.clone(),
                    ];
                    (Some(s), gens, Target::Normalizer48)
                })
            } else {
                let gens = vec![core.inv.i.clone(), core.j.clone(), core.witness.x.clone()];
                Some((None, gens, Target::Sl2Normalizer24))
            };
            self.record_stage("assemble", before);
            match assembled {
                Some((s, gens, target)) => {
                    return Ok(self.finish(core, s, None, gens, target, None))
                }
                None => self.retries += 1,
            }
        }
        Err(RecogError::RetryBudgetExhausted("construct_sl2_normalizer"))
    }

    /// ⟨r, x⟩ with `r = t^(|T|/d)`, a subfield subgroup over GF(p^a) outside
    /// the small exceptional cases.
    pub fn construct_subfield(
        &mut self,
        p: u32,
        k: usize,
        a: usize,
    ) -> Result<ConstructionResult, RecogError> {
        if a == 0 || !k.is_multiple_of(a) {
            return Err(RecogError::InvalidSubfieldDegree { a, k });
        }
        let flavor = self.bb.flavor();
        let q = self.field_q(p, k);
        let torus_order = match flavor {
            Flavor::Psl2 => q_minus_sign(&q) >> 1,
            _ => q_minus_sign(&q),
        };
        let d_big = subfield_torus_divisor(p, a, &torus_order, flavor)?;
        let d = d_big.to_u64().expect("desk-scale torus divisor");
        let s_order = match flavor {
            Flavor::Pgl2 => Some(4),
            Flavor::Psl2 => q_mod_8_is_pm1(&q).then_some(4),
            Flavor::Sl2 => q_mod_8_is_pm1(&q).then_some(8),
        };
        let target = subfield_target(flavor, p, a, d);
        let mut required = vec![d];
        required.extend(s_order);
        for _ in 0..self.config.retry_budget {
            let core = self.core(&q, &required)?;
            let before = self.bb.counters();
            let assembled = if !self.check_core(&core) {
                None
            } else {
                let s = match s_order {
                    Some(o) => self.make_s(&core, o).map(Some),
                    None => Some(None),
                };
                let r = self.torus_power(&core, d);
                match (s, r) {
                    (Some(s), Some(r)) => {
                        let ri = self.bb.mul(&r, &core.inv.i);
                        let ir = self.bb.mul(&core.inv.i, &r);
                        self.bb.eq(&ri, &ir).then_some((s, r))
                    }
                    _ => None,
                }
            };
            self.record_stage("assemble", before);
            match assembled {
                Some((s, r)) => {
                    let gens = vec![r.clone(), core.witness.x.clone()];
                    return Ok(self.finish(core, s, Some(r), gens, target, Some(a)));
                }
                None => self.retries += 1,
            }
        }
        Err(RecogError::RetryBudgetExhausted("construct_subfield"))
    }
}

/// Expected isomorphism type of ⟨r, x⟩.
fn subfield_target(flavor: Flavor, p: u32, a: usize, d: u64) -> Target {
    let generic = Target::Subfield {
        flavor,
        p,
        a: a as u32,
    };
    if a != 1 {
        return generic;
    }
    match (flavor, p) {
        (Flavor::Pgl2, 5) => Target::Sym4,
        (Flavor::Psl2, 7) => Target::Sym4,
        (Flavor::Psl2, 5) if d == 4 => Target::Sym4,
        (Flavor::Psl2, 5) => Target::Alt4,
        (Flavor::Sl2, 5) => Target::Sl2Normalizer24,
        (Flavor::Sl2, 7) => Target::Normalizer48,
        _ => generic,
    }
}
