//! Per-utterance classification outcomes and the per-condition statistics
//! derived from them.

pub mod oracle;
pub mod wire;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use oracle::{logistic, simulate, InjectedInteraction, NoiseMode, OracleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenderLabel {
    Female,
    Male,
}

/// What the classifier reported for one utterance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Probability(f64),
    Label(GenderLabel),
}

impl Outcome {
    /// Female probability; labels map to 1 and 0.
    pub fn female_prob(self) -> f64 {
        match self {
            Outcome::Probability(p) => p,
            Outcome::Label(GenderLabel::Female) => 1.0,
            Outcome::Label(GenderLabel::Male) => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceRecord {
    pub condition_id: String,
    pub sample_index: u64,
    pub template_id: String,
    pub transcript_id: String,
    pub outcome: Outcome,
}

impl UtteranceRecord {
    fn validate(&self, line: usize) -> Result<()> {
        let p = self.outcome.female_prob();
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::SchemaViolation {
                line,
                reason: format!("female_prob {p} outside [0, 1]"),
            });
        }
        if self.condition_id.is_empty() {
            return Err(Error::SchemaViolation {
                line,
                reason: "empty condition_id".into(),
            });
        }
        Ok(())
    }
}

/// How a record's value becomes the per-sample outcome averaged into P̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeMode {
    /// Hard gender decision: probabilities at or above 0.5 count as Female.
    #[default]
    Hard,
    /// Average the raw probabilities.
    Soft,
}

impl OutcomeMode {
    pub fn apply(self, female_prob: f64) -> f64 {
        match self {
            OutcomeMode::Soft => female_prob,
            OutcomeMode::Hard => {
                if female_prob >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContinuityPolicy {
    /// Clamp P̂ to [1/(2n), 1 − 1/(2n)] before taking log-odds.
    #[default]
    Clamp,
    /// Raw log-odds; saturated conditions are an error.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StatsOptions {
    pub outcome: OutcomeMode,
    pub continuity: ContinuityPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStats {
    pub condition_id: String,
    pub n: usize,
    pub p_hat: f64,
    pub logit: f64,
}

/// Log-odds of `successes` out of `n`. Under [`ContinuityPolicy::Clamp`] the
/// count is clamped to [1/2, n − 1/2], so swapping successes and failures
/// negates the result exactly.
pub fn corrected_logit(successes: f64, n: usize, policy: ContinuityPolicy) -> Result<f64> {
    let n = n as f64;
    match policy {
        ContinuityPolicy::Clamp => {
            let k = successes.clamp(0.5, n - 0.5);
            Ok(k.ln() - (n - k).ln())
        }
        ContinuityPolicy::None => {
            if successes <= 0.0 || successes >= n {
                return Err(Error::SaturatedProbability {
                    p_hat: successes / n,
                });
            }
            Ok(successes.ln() - (n - successes).ln())
        }
    }
}

/// Records grouped by condition. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger {
    conditions: BTreeMap<String, Vec<(u64, f64)>>,
}

impl Ledger {
    /// Groups records by condition, rejecting invalid values and duplicate
    /// `(condition_id, sample_index)` pairs. Samples are kept in index order.
    pub fn ingest(records: impl IntoIterator<Item = UtteranceRecord>) -> Result<Self> {
        let mut builder = LedgerBuilder::default();
        for (i, r) in records.into_iter().enumerate() {
            builder.push(r, i + 1)?;
        }
        Ok(builder.finish())
    }

    pub fn contains(&self, condition_id: &str) -> bool {
        self.conditions.contains_key(condition_id)
    }

    pub fn condition_ids(&self) -> impl Iterator<Item = &str> {
        self.conditions.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn n(&self, condition_id: &str) -> Option<usize> {
        self.conditions.get(condition_id).map(Vec::len)
    }

    /// Per-sample outcomes under `mode`, in sample-index order.
    pub fn outcomes(&self, condition_id: &str, mode: OutcomeMode) -> Result<Vec<f64>> {
        let samples = self
            .conditions
            .get(condition_id)
            .ok_or_else(|| Error::UnknownCondition(condition_id.to_string()))?;
        Ok(samples.iter().map(|&(_, v)| mode.apply(v)).collect())
    }

    pub fn condition_stats(&self, condition_id: &str, opts: &StatsOptions) -> Result<ConditionStats> {
        let outcomes = self.outcomes(condition_id, opts.outcome)?;
        let n = outcomes.len();
        let successes: f64 = outcomes.iter().sum();
        Ok(ConditionStats {
            condition_id: condition_id.to_string(),
            n,
            p_hat: successes / n as f64,
            logit: corrected_logit(successes, n, opts.continuity)?,
        })
    }

    /// Merges another ledger; overlapping samples are duplicates.
    pub fn merge(mut self, other: Ledger) -> Result<Self> {
        for (id, samples) in other.conditions {
            match self.conditions.entry(id) {
                Entry::Vacant(v) => {
                    v.insert(samples);
                }
                Entry::Occupied(mut o) => {
                    let existing = o.get_mut();
                    for (idx, v) in samples {
                        if existing.iter().any(|&(i, _)| i == idx) {
                            return Err(Error::DuplicateSample {
                                condition_id: o.key().clone(),
                                sample_index: idx,
                            });
                        }
                        existing.push((idx, v));
                    }
                    existing.sort_by_key(|&(i, _)| i);
                }
            }
        }
        Ok(self)
    }
}

#[derive(Default)]
pub(crate) struct LedgerBuilder {
    conditions: BTreeMap<String, BTreeMap<u64, f64>>,
}

impl LedgerBuilder {
    pub(crate) fn push(&mut self, record: UtteranceRecord, line: usize) -> Result<()> {
        record.validate(line)?;
        let samples = self.conditions.entry(record.condition_id.clone()).or_default();
        if samples
            .insert(record.sample_index, record.outcome.female_prob())
            .is_some()
        {
            return Err(Error::DuplicateSample {
                condition_id: record.condition_id,
                sample_index: record.sample_index,
            });
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Ledger {
        Ledger {
            conditions: self
                .conditions
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
        }
    }
}
