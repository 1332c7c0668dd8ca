//! Brute-force oracles: subgroup closure, element-order fingerprints and
//! fingerprints of the groups the constructions are expected to produce.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{FieldCtx, FieldError};
use crate::matgrp::{Flavor, Mat2, MatError, MatGroup};
use crate::recog::{ConstructionResult, Target};

pub const DEFAULT_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("closure exceeded the cap of {0} elements")]
    Overflow(usize),
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Subgroup order together with how many elements have each order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFingerprint {
    pub order: u64,
    pub histogram: BTreeMap<u64, u64>,
}

impl GroupFingerprint {
    fn from_orders(orders: impl IntoIterator<Item = u64>) -> Self {
        let mut histogram = BTreeMap::new();
        let mut order = 0;
        for o in orders {
            *histogram.entry(o).or_insert(0) += 1;
            order += 1;
        }
        GroupFingerprint { order, histogram }
    }
}

/// Breadth-first closure of `gens` under right multiplication, as canonical
/// representatives.
pub fn closure_enumerate(
    group: &MatGroup,
    gens: &[Mat2],
    cap: usize,
) -> Result<Vec<Mat2>, VerifyError> {
    for g in gens {
        group.validate(g)?;
    }
    let id = group.canonicalize(&group.identity())?;
    let mut seen: HashSet<Vec<u32>> = HashSet::from([id.key()]);
    let mut elems = vec![id];
    let mut next = 0;
    while next < elems.len() {
        let x = elems[next].clone();
        next += 1;
        for g in gens {
            let y = group.canonicalize(&group.mul(&x, g))?;
            if seen.insert(y.key()) {
                if elems.len() >= cap {
                    return Err(VerifyError::Overflow(cap));
                }
                elems.push(y);
            }
        }
    }
    Ok(elems)
}

/// Order and order histogram of an enumerated subgroup.
pub fn fingerprint(group: &MatGroup, elements: &[Mat2]) -> Result<GroupFingerprint, VerifyError> {
    let factors = group.exponent_factors();
    let orders = elements
        .iter()
        .map(|x| {
            let o = group.element_order(x, &factors)?;
            Ok(o.to_u64().expect("element order fits in u64"))
        })
        .collect::<Result<Vec<_>, MatError>>()?;
    Ok(GroupFingerprint::from_orders(orders))
}

pub fn assert_type(observed: &GroupFingerprint, expected: &GroupFingerprint) -> bool {
    observed == expected
}

fn perm_closure(gens: &[[u8; 4]]) -> GroupFingerprint {
    let compose =
        |a: &[u8; 4], b: &[u8; 4]| -> [u8; 4] { std::array::from_fn(|i| b[a[i] as usize]) };
    let id = [0, 1, 2, 3];
    let mut seen = HashSet::from([id]);
    let mut stack = vec![id];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = compose(&x, g);
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    GroupFingerprint::from_orders(seen.iter().map(|x| {
        let mut y = *x;
        let mut n = 1;
        while y != id {
            y = compose(&y, x);
            n += 1;
        }
        n
    }))
}

fn matrix_reference(
    flavor: Flavor,
    p: u32,
    a: usize,
    gens: Option<&[[[u32; 2]; 2]]>,
    cap: usize,
) -> Result<GroupFingerprint, VerifyError> {
    let ctx = Arc::new(FieldCtx::new(p, a, 0)?);
    let group = MatGroup::new(ctx, flavor);
    let gens = match gens {
        Some(rows) => rows
            .iter()
            .map(|r| group.from_rows(*r))
            .collect::<Result<Vec<_>, _>>()?,
        None => group.standard_generators(&mut ChaCha8Rng::seed_from_u64(0))?,
    };
    let elems = closure_enumerate(&group, &gens, cap)?;
    fingerprint(&group, &elems)
}

/// Fingerprint of `target`, built independently of the black box: Sym4 and
/// Alt4 as permutations of four points, the quaternion normalizers as
/// explicit matrices over GF(3) and GF(7), subfield groups from standard
/// generators over a fresh GF(p^a).
pub fn reference_fingerprint(target: &Target, cap: usize) -> Result<GroupFingerprint, VerifyError> {
    match *target {
        Target::Sym4 => Ok(perm_closure(&[[1, 0, 2, 3], [1, 2, 3, 0]])),
        Target::Alt4 => Ok(perm_closure(&[[1, 2, 0, 3], [1, 0, 3, 2]])),
        Target::Sl2Normalizer24 => matrix_reference(Flavor::Sl2, 3, 1, None, cap),
        // (1+i)/√2 and (1+i+j+k)/2 in the quaternions over GF(7), with
        // i = [[0,1],[-1,0]], j = [[2,3],[3,-2]] and √2 = 3.
        Target::Normalizer48 => matrix_reference(
            Flavor::Sl2,
            7,
            1,
            Some(&[[[5, 5], [2, 5]], [[3, 1], [0, 5]]]),
            cap,
        ),
        Target::Subfield { flavor, p, a } => matrix_reference(flavor, p, a as usize, None, cap),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Verified(GroupFingerprint),
    Mismatch {
        observed: Option<GroupFingerprint>,
        expected: GroupFingerprint,
    },
    /// Expected order above the cap; nothing was enumerated.
    Skipped,
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified(_))
    }
}

/// Re-enumerates the stored generators of `result` and compares with the
/// reference fingerprint of its target. Invalid generators count as a
/// mismatch.
pub fn verify_result(result: &ConstructionResult, cap: usize) -> Result<Verdict, VerifyError> {
    if result.target.order() > BigUint::from(cap) {
        return Ok(Verdict::Skipped);
    }
    let expected = reference_fingerprint(&result.target, cap)?;
    let observed = (|| {
        let ctx = FieldCtx::with_modulus(result.p, result.modulus.clone()).ok()?;
        let group = MatGroup::new(Arc::new(ctx), result.flavor);
        let elems = closure_enumerate(&group, &result.generators, expected.order as usize).ok()?;
        fingerprint(&group, &elems).ok()
    })();
    Ok(match observed {
        Some(fp) if assert_type(&fp, &expected) => Verdict::Verified(fp),
        observed => Verdict::Mismatch { observed, expected },
    })
}
