//! Synthetic classifier oracle with known log-odds structure.
//!
//! The true log-odds of a job are `base + Σ cue weights + Σ injected terms`,
//! where an injected term applies when all of its descriptors are populated.
//! With no injected terms the oracle is exactly additive, which is the null
//! the interaction engine tests against.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::prompt_space::InstructionJob;
use crate::seed::derive_seed;

use super::{GenderLabel, Outcome, UtteranceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// Emit σ(ℓ) as the female probability.
    #[default]
    Deterministic,
    /// Draw a Female/Male label with probability σ(ℓ).
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectedInteraction {
    pub descriptors: Vec<String>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default)]
    pub base_logit: f64,
    /// Additive log-odds per descriptor id; missing ids weigh 0.
    #[serde(default)]
    pub cue_weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub injected: Vec<InjectedInteraction>,
    #[serde(default)]
    pub noise: NoiseMode,
    #[serde(default)]
    pub seed: u64,
    /// Repeated draws per job; record `sample_index` becomes
    /// `job.sample_index * samples_per_job + replicate`.
    #[serde(default = "one")]
    pub samples_per_job: u32,
}

fn one() -> u32 {
    1
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            base_logit: 0.0,
            cue_weights: BTreeMap::new(),
            injected: Vec::new(),
            noise: NoiseMode::Deterministic,
            seed: 0,
            samples_per_job: 1,
        }
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl OracleSpec {
    pub fn weight(mut self, id: &str, w: f64) -> Self {
        self.cue_weights.insert(id.to_string(), w);
        self
    }

    pub fn inject(mut self, ids: &[&str], value: f64) -> Self {
        self.injected.push(InjectedInteraction {
            descriptors: ids.iter().map(|s| s.to_string()).collect(),
            value,
        });
        self
    }

    /// Closed-form log-odds for a set of populated descriptor ids.
    pub fn true_logit<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> f64 {
        let populated: BTreeSet<&str> = ids.into_iter().collect();
        let additive: f64 = populated
            .iter()
            .map(|id| self.cue_weights.get(*id).copied().unwrap_or(0.0))
            .sum();
        let injected: f64 = self
            .injected
            .iter()
            .filter(|t| t.descriptors.iter().all(|d| populated.contains(d.as_str())))
            .map(|t| t.value)
            .sum();
        self.base_logit + additive + injected
    }

    /// Sum of the injected terms whose descriptor set is exactly `ids`.
    pub fn injected_term<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> f64 {
        let wanted: BTreeSet<&str> = ids.into_iter().collect();
        self.injected
            .iter()
            .filter(|t| {
                let set: BTreeSet<&str> = t.descriptors.iter().map(String::as_str).collect();
                set == wanted
            })
            .map(|t| t.value)
            .sum()
    }
}

/// Emits `samples_per_job` records per job. Each record draws from its own
/// stream keyed by (seed, condition, sample index), so output does not depend
/// on job order.
pub fn simulate(oracle: &OracleSpec, jobs: &[InstructionJob]) -> Vec<UtteranceRecord> {
    let reps = oracle.samples_per_job.max(1) as u64;
    let mut out = Vec::with_capacity(jobs.len() * reps as usize);
    for job in jobs {
        let p = logistic(oracle.true_logit(job.descriptor_ids()));
        for rep in 0..reps {
            let sample_index = job.sample_index * reps + rep;
            let outcome = match oracle.noise {
                NoiseMode::Deterministic => Outcome::Probability(p),
                NoiseMode::Bernoulli => {
                    let key = format!("{}/{}", job.condition_id, sample_index);
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(oracle.seed, &key));
                    let female = rng.gen::<f64>() < p;
                    Outcome::Label(if female {
                        GenderLabel::Female
                    } else {
                        GenderLabel::Male
                    })
                }
            };
            out.push(UtteranceRecord {
                condition_id: job.condition_id.clone(),
                sample_index,
                template_id: job.template_id.clone(),
                transcript_id: job.transcript_id.clone(),
                outcome,
            });
        }
    }
    out
}
