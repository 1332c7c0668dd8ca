//! Recovering k in q = p^k from p and a sample of random elements.

use num_bigint::BigUint;
use num_traits::Pow;

use super::{RecogError, Recognizer};
use crate::arith::ln_ln;

/// `16·⌈ln ln p^k_max + 1⌉` random elements.
pub fn default_sample_budget(p: u32, k_max: usize) -> usize {
    let q: BigUint = BigUint::from(p).pow(k_max as u32);
    16 * (ln_ln(&q) + 1.0).ceil().max(1.0) as usize
}

impl Recognizer<'_> {
    /// Smallest `ℓ ≤ k_max` such that every sampled `g` satisfies
    /// `g^(p(p^(2ℓ)−1)) = 1`.
    ///
    /// With ℓ = k the exponent is p(q²−1), killing every element. For ℓ < k
    /// an element of order q−1 or q+1 survives (including ℓ = k/2, since
    /// q+1 does not divide p(q−1)), so once the sample contains both kinds
    /// the minimum is exactly k.
    pub fn find_field_size(
        &mut self,
        p: u32,
        k_max: usize,
        sample_budget: usize,
    ) -> Result<usize, RecogError> {
        let required = default_sample_budget(p, k_max);
        if sample_budget < required {
            return Err(RecogError::SampleBudgetTooSmall {
                given: sample_budget,
                required,
            });
        }
        let before = self.bb.counters();
        let sample: Vec<_> = (0..sample_budget).map(|_| self.bb.random()).collect();
        let pb = BigUint::from(p);
        let mut found = None;
        for l in 1..=k_max {
            let e = &pb * (pb.clone().pow(2 * l as u32) - 1u32);
            let all = sample.iter().all(|g| {
                let y = self.bb.pow(g, &e);
                self.bb.is_identity(&y)
            });
            if all {
                found = Some(l);
                break;
            }
        }
        self.record_stage("field_size", before);
        found.ok_or(RecogError::ExceedsKMax(k_max))
    }
}
