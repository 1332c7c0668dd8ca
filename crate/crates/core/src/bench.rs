//! Seeded trial runs recording operation counts per stage.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blackbox::{BlackBox, OpCounters};
use crate::ff::FieldError;
use crate::matgrp::Flavor;
use crate::recog::{
    default_sample_budget, ConstructionResult, RecogConfig, RecogError, Recognizer,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Medians {
    pub rand: u64,
    pub mul: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub k: usize,
    pub trials: usize,
    pub failures: usize,
    pub total: Medians,
    pub stages: BTreeMap<String, Medians>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrialError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Recog(#[from] RecogError),
    #[error("field size recovered as {found}, expected {expected}")]
    WrongFieldSize { found: usize, expected: usize },
}

/// One trial: field size with `k_max = k`, then the Sym4 (or SL2
/// normalizer) construction on the same black box.
pub fn run_trial(
    flavor: Flavor,
    p: u32,
    k: usize,
    seed: u64,
    config: RecogConfig,
) -> Result<(ConstructionResult, OpCounters), TrialError> {
    let mut bb = BlackBox::new(flavor, p, k, seed)?;
    let mut rec = Recognizer::with_config(&mut bb, config);
    let found = rec.find_field_size(p, k, default_sample_budget(p, k))?;
    if found != k {
        return Err(TrialError::WrongFieldSize { found, expected: k });
    }
    let res = match flavor {
        Flavor::Sl2 => rec.construct_sl2_normalizer(p, k)?,
        _ => rec.construct_sym4(p, k)?,
    };
    let total = bb.counters();
    Ok((res, total))
}

fn median(mut v: Vec<u64>) -> u64 {
    if v.is_empty() {
        return 0;
    }
    v.sort_unstable();
    v[v.len() / 2]
}

/// Runs `trials` independent trials per `k` in parallel with seeds
/// `seed + trial`.
pub fn bench(
    flavor: Flavor,
    p: u32,
    k_list: &[usize],
    trials: usize,
    seed: u64,
    config: RecogConfig,
) -> Vec<BenchRow> {
    k_list
        .iter()
        .map(|&k| {
            let runs: Vec<_> = (0..trials as u64)
                .into_par_iter()
                .map(|t| run_trial(flavor, p, k, seed.wrapping_add(t), config))
                .collect();
            let ok: Vec<_> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
            let mut per_stage: BTreeMap<String, (Vec<u64>, Vec<u64>)> = BTreeMap::new();
            for (res, _) in &ok {
                for s in &res.stages {
                    let e = per_stage.entry(s.stage.clone()).or_default();
                    e.0.push(s.counters.rand);
                    e.1.push(s.counters.mul);
                }
            }
            BenchRow {
                k,
                trials,
                failures: trials - ok.len(),
                total: Medians {
                    rand: median(ok.iter().map(|(_, c)| c.rand).collect()),
                    mul: median(ok.iter().map(|(_, c)| c.mul).collect()),
                },
                stages: per_stage
                    .into_iter()
                    .map(|(name, (r, m))| {
                        (
                            name,
                            Medians {
                                rand: median(r),
                                mul: median(m),
                            },
                        )
                    })
                    .collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians_and_shape() {
        assert_eq!(median(vec![5, 1, 3]), 3);
        assert_eq!(median(vec![]), 0);
        let rows = bench(Flavor::Pgl2, 3, &[2, 3], 4, 1, RecogConfig::default());
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert_eq!(r.failures, 0);
            assert!(r.total.rand > 0 && r.total.mul > 0);
            for stage in ["field_size", "involution", "torus", "order3", "assemble"] {
                assert!(r.stages.contains_key(stage), "{stage}");
            }
        }
        assert_eq!(
            rows,
            bench(Flavor::Pgl2, 3, &[2, 3], 4, 1, RecogConfig::default())
        );
    }
}
