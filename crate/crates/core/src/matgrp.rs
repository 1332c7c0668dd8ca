//! 2×2 matrices over GF(p^k) as strings encrypting elements of SL2, PSL2 or
//! PGL2(q). Matrices are never normalized by the group operations; the
//! quotient by the centre lives entirely in [`MatGroup::eq`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factor_big, merge_factorizations};
use crate::ff::{FieldCtx, FieldElem, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix does not have determinant 1")]
    DeterminantNotOne,
    #[error("matrix entries do not belong to this field context")]
    ContextMismatch,
    #[error("x^E is not the identity: the global exponent is violated")]
    ExponentViolated,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Sl2,
    Psl2,
    Pgl2,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Sl2 => "SL2",
            Flavor::Psl2 => "PSL2",
            Flavor::Pgl2 => "PGL2",
        }
    }

    /// |G(q)| for this flavor.
    pub fn group_order(self, q: &BigUint) -> BigUint {
        let full = q * (q * q - 1u32);
        match self {
            Flavor::Psl2 => full >> 1,
            _ => full,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Sl2 => "sl2",
            Flavor::Psl2 => "psl2",
            Flavor::Pgl2 => "pgl2",
        })
    }
}

impl FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sl2" => Ok(Flavor::Sl2),
            "psl2" => Ok(Flavor::Psl2),
            "pgl2" => Ok(Flavor::Pgl2),
            other => Err(format!(
                "unknown flavor '{other}' (expected pgl2, psl2 or sl2)"
            )),
        }
    }
}

/// Entries `[a, b, c, d]` of `[[a, b], [c, d]]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat2(pub(crate) [FieldElem; 4]);

impl Mat2 {
    pub fn entries(&self) -> &[FieldElem; 4] {
        &self.0
    }

    pub fn from_entries(e: [FieldElem; 4]) -> Self {
        Mat2(e)
    }

    /// Flattened coefficients, used as a hash key for canonical forms.
    pub fn key(&self) -> Vec<u32> {
        self.0
            .iter()
            .flat_map(|e| e.coeffs().iter().copied())
            .collect()
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:?}, {:?}], [{:?}, {:?}]]",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}

#[derive(Serialize, Deserialize)]
struct MatRepr {
    rows: [[FieldElem; 2]; 2],
}

impl Serialize for Mat2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let [a, b, c, d] = self.0.clone();
        MatRepr {
            rows: [[a, b], [c, d]],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let MatRepr {
            rows: [[a, b], [c, d]],
        } = MatRepr::deserialize(d)?;
        Ok(Mat2([a, b, c, d]))
    }
}

/// E = q(q²−1), a global exponent for all three flavors.
pub fn exponent_for(_flavor: Flavor, p: u32, k: usize) -> BigUint {
    let q = BigUint::from(p).pow(k as u32);
    &q * (&q * &q - 1u32)
}

/// A concrete matrix group: field context plus flavor.
#[derive(Clone, Debug)]
pub struct MatGroup {
    ctx: Arc<FieldCtx>,
    flavor: Flavor,
}

impl MatGroup {
    pub fn new(ctx: Arc<FieldCtx>, flavor: Flavor) -> Self {
        MatGroup { ctx, flavor }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn ctx_arc(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn identity(&self) -> Mat2 {
        let (z, o) = (self.ctx.zero(), self.ctx.one());
        Mat2([o.clone(), z.clone(), z, o])
    }

    pub fn scalar(&self, c: &FieldElem) -> Mat2 {
        let z = self.ctx.zero();
        Mat2([c.clone(), z.clone(), z, c.clone()])
    }

    pub fn from_rows(&self, rows: [[u32; 2]; 2]) -> Result<Mat2, MatError> {
        let f = &self.ctx;
        let m = Mat2([
            f.from_u32(rows[0][0]),
            f.from_u32(rows[0][1]),
            f.from_u32(rows[1][0]),
            f.from_u32(rows[1][1]),
        ]);
        self.validate(&m)?;
        Ok(m)
    }

    /// Checks that `x` is a legal string for this group.
    pub fn validate(&self, x: &Mat2) -> Result<(), MatError> {
        if !x.0.iter().all(|e| self.ctx.is_valid(e)) {
            return Err(MatError::ContextMismatch);
        }
        let det = self.det(x);
        if det.is_zero() {
            return Err(MatError::SingularMatrix);
        }
        if self.flavor != Flavor::Pgl2 && !self.ctx.is_one(&det) {
            return Err(MatError::DeterminantNotOne);
        }
        Ok(())
    }

    pub fn det(&self, x: &Mat2) -> FieldElem {
        let f = &self.ctx;
        let [a, b, c, d] = &x.0;
        f.sub(&f.mul(a, d), &f.mul(b, c))
    }

    pub fn mul(&self, x: &Mat2, y: &Mat2) -> Mat2 {
        let f = &self.ctx;
        let [a, b, c, d] = &x.0;
        let [e, g, h, k] = &y.0;
        Mat2([
            f.add(&f.mul(a, e), &f.mul(b, h)),
            f.add(&f.mul(a, g), &f.mul(b, k)),
            f.add(&f.mul(c, e), &f.mul(d, h)),
            f.add(&f.mul(c, g), &f.mul(d, k)),
        ])
    }

    /// Adjugate divided by the determinant.
    pub fn inv(&self, x: &Mat2) -> Result<Mat2, MatError> {
        let f = &self.ctx;
        let [a, b, c, d] = &x.0;
        let adj = [d.clone(), f.neg(b), f.neg(c), a.clone()];
        let det = self.det(x);
        if det.is_zero() {
            return Err(MatError::SingularMatrix);
        }
        if f.is_one(&det) {
            return Ok(Mat2(adj));
        }
        let di = f.inv(&det)?;
        Ok(Mat2(adj.map(|e| f.mul(&e, &di))))
    }

    pub fn neg(&self, x: &Mat2) -> Mat2 {
        Mat2(x.0.clone().map(|e| self.ctx.neg(&e)))
    }

    pub fn scale(&self, x: &Mat2, c: &FieldElem) -> Mat2 {
        Mat2(x.0.clone().map(|e| self.ctx.mul(&e, c)))
    }

    fn first_nonzero(x: &Mat2) -> usize {
        x.0.iter().position(|e| !e.is_zero()).expect("zero matrix")
    }

    /// The representative used for equality: SL2 strings are literal, PGL2
    /// strings are scaled so the first nonzero entry (scan order a, b, c, d)
    /// is 1, and PSL2 strings pick whichever of ±M has the lexicographically
    /// smaller first nonzero entry (constant coefficient most significant).
    pub fn canonicalize(&self, x: &Mat2) -> Result<Mat2, MatError> {
        if self.det(x).is_zero() {
            return Err(MatError::SingularMatrix);
        }
        Ok(match self.flavor {
            Flavor::Sl2 => x.clone(),
            Flavor::Pgl2 => {
                let lead = &x.0[Self::first_nonzero(x)];
                let li = self.ctx.inv(lead)?;
                self.scale(x, &li)
            }
            Flavor::Psl2 => {
                let i = Self::first_nonzero(x);
                let neg = self.ctx.neg(&x.0[i]);
                if neg.coeffs() < x.0[i].coeffs() {
                    self.neg(x)
                } else {
                    x.clone()
                }
            }
        })
    }

    /// BB3 equality. Agrees with comparing canonical forms but avoids
    /// field inversions.
    pub fn eq(&self, x: &Mat2, y: &Mat2) -> bool {
        match self.flavor {
            Flavor::Sl2 => x == y,
            Flavor::Psl2 => x == y || self.is_neg_of(x, y),
            Flavor::Pgl2 => self.proportional(x, y),
        }
    }

    fn is_neg_of(&self, x: &Mat2, y: &Mat2) -> bool {
        x.0.iter()
            .zip(&y.0)
            .all(|(a, b)| self.ctx.add(a, b).is_zero())
    }

    fn proportional(&self, x: &Mat2, y: &Mat2) -> bool {
        let i = Self::first_nonzero(x);
        if y.0[..i].iter().any(|e| !e.is_zero()) || y.0[i].is_zero() {
            return false;
        }
        let f = &self.ctx;
        (i + 1..4).all(|j| f.mul(&x.0[i], &y.0[j]) == f.mul(&y.0[i], &x.0[j]))
    }

    /// Equality modulo ±I (the centre of SL2); coincides with [`Self::eq`]
    /// for PSL2 and PGL2.
    pub fn eq_mod_center(&self, x: &Mat2, y: &Mat2) -> bool {
        match self.flavor {
            Flavor::Sl2 => x == y || self.is_neg_of(x, y),
            _ => self.eq(x, y),
        }
    }

    pub fn is_identity(&self, x: &Mat2) -> bool {
        self.eq(x, &self.identity())
    }

    pub fn is_central(&self, x: &Mat2) -> bool {
        self.eq_mod_center(x, &self.identity())
    }

    pub fn pow(&self, x: &Mat2, n: &BigUint) -> Mat2 {
        let mut acc = self.identity();
        for i in (0..n.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if n.bit(i) {
                acc = self.mul(&acc, x);
            }
        }
        acc
    }

    /// Generators: the upper transvections `[[1, x^j], [0, 1]]` for
    /// `j < k` together with `[[1, 0], [1, 1]]`, plus `diag(ν, 1)` for a
    /// non-square ν in the PGL2 case. For `k = 1` this is the classical pair
    /// of transvections.
    pub fn standard_generators<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Mat2>, MatError> {
        let f = &self.ctx;
        let (z, o) = (f.zero(), f.one());
        let mut gens = vec![
            Mat2([o.clone(), o.clone(), z.clone(), o.clone()]),
            Mat2([o.clone(), z.clone(), o.clone(), o.clone()]),
        ];
        for j in 1..f.k() {
            gens.push(Mat2([o.clone(), f.basis(j), z.clone(), o.clone()]));
        }
        if self.flavor == Flavor::Pgl2 {
            let nu = f.find_nonsquare(rng)?;
            gens.push(Mat2([nu, z.clone(), z, o]));
        }
        Ok(gens)
    }

    pub fn exponent(&self) -> BigUint {
        exponent_for(self.flavor, self.ctx.p(), self.ctx.k())
    }

    /// Prime factorization of [`Self::exponent`], from `p^k`, `q−1`, `q+1`.
    pub fn exponent_factors(&self) -> Vec<(BigUint, u32)> {
        let q = self.ctx.q();
        merge_factorizations(&[
            vec![(BigUint::from(self.ctx.p()), self.ctx.k() as u32)],
            factor_big(&(q - 1u32)),
            factor_big(&(q + 1u32)),
        ])
    }

    /// Exact order of `x` given a factored global exponent.
    pub fn element_order(&self, x: &Mat2, factors: &[(BigUint, u32)]) -> Result<BigUint, MatError> {
        let mut n: BigUint = factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
        if !self.is_identity(&self.pow(x, &n)) {
            return Err(MatError::ExponentViolated);
        }
        for (p, e) in factors {
            for _ in 0..*e {
                let m = &n / p;
                if self.is_identity(&self.pow(x, &m)) {
                    n = m;
                } else {
                    break;
                }
            }
        }
        Ok(n)
    }
}
