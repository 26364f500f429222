//! Permutation test for interaction terms.
//!
//! The per-utterance outcomes of every condition in the contrast are pooled,
//! shuffled, and dealt back out with each condition keeping its sample count.
//! The term is recomputed from the clamped logits of each reassignment. The
//! two-sided p-value is `(#{|I_perm| ≥ |I_obs|} + 1) / (iterations + 1)`, with
//! ties counted as extreme.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{corrected_logit, Ledger, StatsOptions};

use super::{Contrast, InteractionSpec};

pub const MIN_ITERATIONS: usize = 1_000;

/// Relative slack under which |I_perm| and |I_obs| are treated as tied, so
/// summation-order noise on identical data is not counted as non-extreme.
const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationOutcome {
    pub observed: f64,
    pub p_value: f64,
    pub iterations: usize,
}

pub fn permutation_test(
    ledger: &Ledger,
    spec: &InteractionSpec,
    opts: &StatsOptions,
    iterations: usize,
    seed: u64,
) -> Result<PermutationOutcome> {
    permutation_test_contrast(ledger, &spec.contrast(), opts, iterations, seed)
}

pub fn permutation_test_contrast(
    ledger: &Ledger,
    contrast: &Contrast,
    opts: &StatsOptions,
    iterations: usize,
    seed: u64,
) -> Result<PermutationOutcome> {
    if iterations < MIN_ITERATIONS {
        return Err(Error::TooFewIterations {
            requested: iterations,
            minimum: MIN_ITERATIONS,
        });
    }

    let mut pool = Vec::new();
    let mut groups = Vec::with_capacity(contrast.terms.len());
    for (id, coefficient) in &contrast.terms {
        let outcomes = ledger.outcomes(id, opts.outcome)?;
        groups.push((outcomes.len(), *coefficient));
        pool.extend(outcomes);
    }

    let statistic = |values: &[f64]| -> Result<f64> {
        let mut offset = 0;
        let mut total = 0.0;
        for &(n, coefficient) in &groups {
            let successes: f64 = values[offset..offset + n].iter().sum();
            total += coefficient * corrected_logit(successes, n, opts.continuity)?;
            offset += n;
        }
        Ok(total)
    };

    let observed = statistic(&pool)?;
    let threshold = observed.abs() * (1.0 - TIE_TOLERANCE) - TIE_TOLERANCE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..iterations {
        pool.shuffle(&mut rng);
        if statistic(&pool)?.abs() >= threshold {
            extreme += 1;
        }
    }
    Ok(PermutationOutcome {
        observed,
        p_value: (extreme + 1) as f64 / (iterations + 1) as f64,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{GenderLabel, Outcome, UtteranceRecord};

    fn group(cond: &str, females: usize, n: usize) -> Vec<UtteranceRecord> {
        (0..n)
            .map(|i| UtteranceRecord {
                condition_id: cond.into(),
                sample_index: i as u64,
                template_id: "t".into(),
                transcript_id: "c".into(),
                outcome: Outcome::Label(if i < females {
                    GenderLabel::Female
                } else {
                    GenderLabel::Male
                }),
            })
            .collect()
    }

    fn pair_spec() -> InteractionSpec {
        InteractionSpec {
            order: super::super::Order::Pairwise,
            composite: "bi".into(),
            descriptors: vec!["a".into(), "b".into()],
            univariates: vec!["ua".into(), "ub".into()],
            pairs: vec![],
        }
    }

    fn ledger(bi: usize, ua: usize, ub: usize) -> Ledger {
        let mut recs = group("bi", bi, 100);
        recs.extend(group("ua", ua, 100));
        recs.extend(group("ub", ub, 100));
        Ledger::ingest(recs).unwrap()
    }

    #[test]
    fn permutation_invariant_data_gives_one() {
        let l = ledger(100, 100, 100);
        let out = permutation_test(&l, &pair_spec(), &StatsOptions::default(), 1000, 1).unwrap();
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn strong_interaction_hits_floor() {
        // unis at parity, composite at 95%: I ≈ 2.94
        let l = ledger(95, 50, 50);
        let out = permutation_test(&l, &pair_spec(), &StatsOptions::default(), 2000, 3).unwrap();
        assert!(out.p_value < 0.01, "{}", out.p_value);
        assert!(out.p_value >= 1.0 / 2001.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let l = ledger(60, 45, 52);
        let opts = StatsOptions::default();
        let a = permutation_test(&l, &pair_spec(), &opts, 1000, 9).unwrap();
        let b = permutation_test(&l, &pair_spec(), &opts, 1000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.p_value > 0.0 && a.p_value <= 1.0);
    }

    #[test]
    fn rejects_short_runs_and_unknown_conditions() {
        let l = ledger(60, 45, 52);
        let opts = StatsOptions::default();
        let err = permutation_test(&l, &pair_spec(), &opts, 999, 0).unwrap_err();
        assert_eq!(err.kind(), "TooFewIterations");
        let mut spec = pair_spec();
        spec.univariates[1] = "missing".into();
        let err = permutation_test(&l, &spec, &opts, 1000, 0).unwrap_err();
        assert_eq!(err.kind(), "UnknownCondition");
    }
}
