//! Stage 1 tiers: exact two-sided binomial test of P̂ against parity.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::ledger::ConditionStats;

pub const MIN_STRATIFY_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    FemaleLeaning,
    Mixed,
    MaleLeaning,
}

impl Tier {
    pub fn abbrev(self) -> &'static str {
        match self {
            Tier::FemaleLeaning => "F-ln.",
            Tier::Mixed => "Mix.",
            Tier::MaleLeaning => "M-ln.",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierAssignment {
    pub descriptor: String,
    pub tier: Tier,
    pub p_hat: f64,
    pub n: usize,
    pub p_value: f64,
}

/// Exact two-sided p-value of `k` successes in `n` trials under p = 1/2.
/// The null is symmetric, so the p-value is twice the smaller tail and
/// depends only on `min(k, n − k)`.
pub fn binomial_two_sided_p(k: u64, n: u64) -> f64 {
    assert!(k <= n, "k must not exceed n");
    let m = k.min(n - k);
    if 2 * m == n {
        return 1.0;
    }
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let tail: f64 = (0..=m)
        .map(|i| (ln_binomial(n, i) - ln_half_n).exp())
        .sum();
    (2.0 * tail).min(1.0)
}

/// Assigns each descriptor a tier at level `alpha`.
pub fn stratify<'a>(
    stats: impl IntoIterator<Item = (&'a str, &'a ConditionStats)>,
    alpha: f64,
) -> Result<Vec<TierAssignment>> {
    stats
        .into_iter()
        .map(|(descriptor, s)| {
            if s.n < MIN_STRATIFY_SAMPLES {
                return Err(Error::InsufficientSamples {
                    condition_id: s.condition_id.clone(),
                    n: s.n,
                    required: MIN_STRATIFY_SAMPLES,
                });
            }
            let k = (s.p_hat * s.n as f64).round() as u64;
            let p_value = binomial_two_sided_p(k, s.n as u64);
            let tier = if p_value >= alpha || 2 * k == s.n as u64 {
                Tier::Mixed
            } else if 2 * k > s.n as u64 {
                Tier::FemaleLeaning
            } else {
                Tier::MaleLeaning
            };
            Ok(TierAssignment {
                descriptor: descriptor.to_string(),
                tier,
                p_hat: s.p_hat,
                n: s.n,
                p_value,
            })
        })
        .collect()
}
