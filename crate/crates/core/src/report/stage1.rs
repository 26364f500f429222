//! Per-descriptor marginal rates, tiers and subgroup summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::stratify::MIN_STRATIFY_SAMPLES;
use crate::interaction::{stratify, Tier};
use crate::ledger::{ConditionStats, Ledger, StatsOptions};
use crate::prompt_space::{select_polar_descriptors, Axis, CompositionalSeedSet, Lexicon, SemanticConfig};

use super::Provenance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRow {
    pub descriptor: String,
    pub axis: Axis,
    pub surface: String,
    pub subgroup: Option<String>,
    pub condition_id: String,
    pub n: usize,
    pub p_hat: f64,
    pub logit: f64,
    pub tier: Tier,
    pub binomial_p: f64,
}

/// Mean ± SD of P̂ over the descriptors of one subgroup. `sd` is absent for
/// single-descriptor groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupRow {
    pub axis: Axis,
    pub group: String,
    pub n_descriptors: usize,
    pub mean_p_hat: f64,
    pub sd_p_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSetIds {
    pub status: Vec<String>,
    pub career_female: Vec<String>,
    pub career_male: Vec<String>,
    pub persona_female: Vec<String>,
    pub persona_male: Vec<String>,
}

impl From<&CompositionalSeedSet> for SeedSetIds {
    fn from(s: &CompositionalSeedSet) -> Self {
        let ids = |v: &[crate::prompt_space::Descriptor]| v.iter().map(|d| d.id.clone()).collect();
        SeedSetIds {
            status: ids(&s.status),
            career_female: ids(&s.career_female),
            career_male: ids(&s.career_male),
            persona_female: ids(&s.persona_female),
            persona_male: ids(&s.persona_male),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Report {
    pub provenance: Provenance,
    pub alpha: f64,
    pub descriptors: Vec<DescriptorRow>,
    pub subgroups: Vec<SubgroupRow>,
    pub seed_set: SeedSetIds,
}

impl Stage1Report {
    pub fn row(&self, descriptor: &str) -> Option<&DescriptorRow> {
        self.descriptors.iter().find(|r| r.descriptor == descriptor)
    }

    pub fn tier_of(&self, descriptor: &str) -> Option<Tier> {
        self.row(descriptor).map(|r| r.tier)
    }
}

/// Everything Stage 2 needs from Stage 1.
pub struct Stage1Outcome {
    pub report: Stage1Report,
    pub seed_set: CompositionalSeedSet,
}

pub fn run_stage1(
    lexicon: &Lexicon,
    ledger: &Ledger,
    opts: &StatsOptions,
    alpha: f64,
    polar_k: usize,
    provenance: Provenance,
) -> Result<Stage1Outcome> {
    let missing: Vec<String> = lexicon
        .descriptors()
        .iter()
        .map(|d| SemanticConfig::univariate(d).condition_id())
        .filter(|id| !ledger.contains(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteLedger(missing));
    }

    let stats: Vec<ConditionStats> = lexicon
        .descriptors()
        .iter()
        .map(|d| {
            let id = SemanticConfig::univariate(d).condition_id();
            let s = ledger.condition_stats(&id, opts)?;
            if s.n < MIN_STRATIFY_SAMPLES {
                return Err(Error::InsufficientSamples {
                    condition_id: id,
                    n: s.n,
                    required: MIN_STRATIFY_SAMPLES,
                });
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let tiers = stratify(
        lexicon.descriptors().iter().zip(&stats).map(|(d, s)| (d.id.as_str(), s)),
        alpha,
    )?;

    let descriptors: Vec<DescriptorRow> = lexicon
        .descriptors()
        .iter()
        .zip(&stats)
        .zip(&tiers)
        .map(|((d, s), t)| DescriptorRow {
            descriptor: d.id.clone(),
            axis: d.axis,
            surface: d.surface.clone(),
            subgroup: d.subgroup.clone(),
            condition_id: s.condition_id.clone(),
            n: s.n,
            p_hat: s.p_hat,
            logit: s.logit,
            tier: t.tier,
            binomial_p: t.p_value,
        })
        .collect();

    let subgroups = subgroup_rows(&descriptors);
    let seed_set = select_polar_descriptors(
        lexicon,
        |d| descriptors.iter().find(|r| r.descriptor == d.id).map(|r| r.p_hat),
        polar_k,
    )?;

    Ok(Stage1Outcome {
        report: Stage1Report {
            provenance,
            alpha,
            descriptors,
            subgroups,
            seed_set: SeedSetIds::from(&seed_set),
        },
        seed_set,
    })
}

/// Status and persona rows group by the configured subgroup (status level,
/// personality trait); careers group by tier.
fn subgroup_rows(rows: &[DescriptorRow]) -> Vec<SubgroupRow> {
    let mut out = Vec::new();
    for axis in Axis::ALL {
        let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
        let on_axis = rows.iter().filter(|r| r.axis == axis);
        if axis == Axis::Career {
            for tier in [Tier::FemaleLeaning, Tier::Mixed, Tier::MaleLeaning] {
                let ps: Vec<f64> = on_axis.clone().filter(|r| r.tier == tier).map(|r| r.p_hat).collect();
                if !ps.is_empty() {
                    groups.push((tier.abbrev().to_string(), ps));
                }
            }
        } else {
            for r in on_axis {
                let key = r.subgroup.clone().unwrap_or_else(|| r.descriptor.clone());
                match groups.iter_mut().find(|(g, _)| *g == key) {
                    Some((_, ps)) => ps.push(r.p_hat),
                    None => groups.push((key, vec![r.p_hat])),
                }
            }
        }
        out.extend(groups.into_iter().map(|(group, ps)| {
            let (mean, sd) = mean_sd(&ps);
            SubgroupRow {
                axis,
                group,
                n_descriptors: ps.len(),
                mean_p_hat: mean,
                sd_p_hat: sd,
            }
        }));
    }
    out
}

/// Mean and sample standard deviation (n − 1 denominator).
pub(crate) fn mean_sd(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_sd() {
        let (m, sd) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        // Sum of squares 32 over 7.
        assert!((sd.unwrap() - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_sd(&[0.3]), (0.3, None));
    }
}
