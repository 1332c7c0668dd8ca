//! Las Vegas construction of Sym4 / Alt4 / quaternion normalizers and
//! subfield subgroups inside a black box encrypting (P)SL2(q) or PGL2(q).
//!
//! Every public construction re-checks the defining relations of its output
//! before returning; a failed check is retried, never returned.

mod construct;
mod field_size;
mod involution;
mod order3;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blackbox::{BlackBox, OpCounters};
use crate::matgrp::{Flavor, Mat2};

pub use construct::subfield_torus_divisor;
pub use field_size::default_sample_budget;
pub use involution::Parity;
pub use order3::Order3Failure;

pub const DEFAULT_RETRY_BUDGET: usize = 256;
pub const DEFAULT_TYPE_SAMPLES: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecogError {
    #[error("retry budget exhausted in stage '{0}'")]
    RetryBudgetExhausted(&'static str),
    #[error("involution type undecided after the sample budget")]
    Undecided,
    #[error("{0} is not supported by this construction")]
    UnsupportedFlavor(Flavor),
    #[error("no torus element of order {d} exists in a torus of order {torus_order}")]
    DivisorUnavailable { d: BigUint, torus_order: BigUint },
    #[error("subfield degree {a} does not divide {k}")]
    InvalidSubfieldDegree { a: usize, k: usize },
    #[error("no field degree up to {0} is consistent with the sample")]
    ExceedsKMax(usize),
    #[error("sample budget {given} is below the required {required}")]
    SampleBudgetTooSmall { given: usize, required: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecogConfig {
    /// Draws allowed per sampling loop before giving up.
    pub retry_budget: usize,
    /// Centralizer samples used to decide an involution's type.
    pub type_samples: usize,
}

impl Default for RecogConfig {
    fn default() -> Self {
        RecogConfig {
            retry_budget: DEFAULT_RETRY_BUDGET,
            type_samples: DEFAULT_TYPE_SAMPLES,
        }
    }
}

/// Conjugacy class label of an involution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeTag {
    /// Centralizer of order 2(q−1) in PGL2.
    Plus,
    /// Centralizer of order 2(q+1) in PGL2.
    Minus,
    /// PSL2 has a single class of involutions.
    Unique,
    /// SL2 pseudo-involution, squaring to −I.
    Pseudo,
}

#[derive(Debug, Clone)]
pub struct RightInvolution {
    pub i: Mat2,
    pub tag: TypeTag,
    /// Order of the cyclic torus T in the centralizer of `i`.
    pub torus_order: BigUint,
}

/// Transcript of the order-3 element construction: `h1 = i·j^g`,
/// `n1² = h1`, `h2 = j·k^(g·n1⁻¹)`, `n2² = h2`, `x = g·n1⁻¹·n2⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order3Witness {
    pub g: Mat2,
    pub h1: Mat2,
    pub n1: Mat2,
    pub h2: Mat2,
    pub n2: Mat2,
    pub x: Mat2,
}

/// Isomorphism type a construction is expected to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Sym4,
    Alt4,
    /// SL2(3), the normalizer of Q8 in SL2(q) for q ≡ ±3 mod 8.
    Sl2Normalizer24,
    /// The binary octahedral group, normalizer of Q8 for q ≡ ±1 mod 8.
    Normalizer48,
    Subfield {
        flavor: Flavor,
        p: u32,
        a: u32,
    },
}

impl Target {
    pub fn order(&self) -> BigUint {
        match *self {
            Target::Sym4 | Target::Sl2Normalizer24 => BigUint::from(24u32),
            Target::Alt4 => BigUint::from(12u32),
            Target::Normalizer48 => BigUint::from(48u32),
            Target::Subfield { flavor, p, a } => {
                flavor.group_order(&num_traits::Pow::pow(BigUint::from(p), a))
            }
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Sym4 => f.write_str("Sym4"),
            Target::Alt4 => f.write_str("Alt4"),
            Target::Sl2Normalizer24 => f.write_str("SL2(3)-normalizer(order24)"),
            Target::Normalizer48 => f.write_str("normalizer(order48)"),
            Target::Subfield { flavor, p, a } => write!(f, "{}({}^{})", flavor.name(), p, a),
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Sym4" => return Ok(Target::Sym4),
            "Alt4" => return Ok(Target::Alt4),
            "SL2(3)-normalizer(order24)" => return Ok(Target::Sl2Normalizer24),
            "normalizer(order48)" => return Ok(Target::Normalizer48),
            _ => {}
        }
        let bad = || format!("unknown target '{s}'");
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let flavor: Flavor = name.parse().map_err(|_| bad())?;
        let inner = rest.strip_suffix(')').ok_or_else(bad)?;
        let (p, a) = inner.split_once('^').ok_or_else(bad)?;
        Ok(Target::Subfield {
            flavor,
            p: p.parse().map_err(|_| bad())?,
            a: a.parse().map_err(|_| bad())?,
        })
    }
}

impl Serialize for Target {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// The elements of the (i, j, x, s[, r], T) tuple; `t` generates T.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tuple {
    pub i: Mat2,
    pub j: Mat2,
    /// `i·j`.
    pub k: Mat2,
    pub x: Mat2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Mat2>,
    pub t: Mat2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Mat2>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounters {
    pub stage: String,
    pub counters: OpCounters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub flavor: Flavor,
    pub p: u32,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    /// Field modulus, constant term first; needed to read the matrices back.
    pub modulus: Vec<u32>,
    pub target: Target,
    pub generators: Vec<Mat2>,
    pub tuple: Tuple,
    pub witness: Order3Witness,
    #[serde(with = "crate::serde_big")]
    pub torus_order: BigUint,
    pub counters: OpCounters,
    pub stages: Vec<StageCounters>,
    pub seed: u64,
    pub retries: u64,
}

/// Runs the algorithms against one black box, tracking retries and
/// per-stage operation counts.
pub struct Recognizer<'a> {
    bb: &'a mut BlackBox,
    config: RecogConfig,
    retries: u64,
    stages: Vec<StageCounters>,
}

impl<'a> Recognizer<'a> {
    pub fn new(bb: &'a mut BlackBox) -> Self {
        Self::with_config(bb, RecogConfig::default())
    }

    pub fn with_config(bb: &'a mut BlackBox, config: RecogConfig) -> Self {
        Recognizer {
            bb,
            config,
            retries: 0,
            stages: Vec::new(),
        }
    }

    pub fn bb(&mut self) -> &mut BlackBox {
        self.bb
    }

    pub fn retries(&self) -> u64 {
        self.retries
    }

    pub fn stages(&self) -> &[StageCounters] {
        &self.stages
    }

    fn record_stage(&mut self, stage: &str, before: OpCounters) {
        let delta = self.bb.counters().since(&before);
        match self.stages.iter_mut().find(|s| s.stage == stage) {
            Some(s) => {
                s.counters.mul += delta.mul;
                s.counters.inv += delta.inv;
                s.counters.eq += delta.eq;
                s.counters.rand += delta.rand;
            }
            None => self.stages.push(StageCounters {
                stage: stage.to_string(),
                counters: delta,
            }),
        }
    }
}

#[cfg(test)]
mod tests;
