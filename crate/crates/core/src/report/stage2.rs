//! Compositional interactions over the polar seed set, aggregated into
//! cue-class cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::bucket::{color_class, marker};
use crate::interaction::{analyze, classify_bucket, permutation_test_contrast, Bucket, Contrast, InteractionSpec, Order, Sign, Tier};
use crate::ledger::{Ledger, StatsOptions};
use crate::prompt_space::{Axis, CompositionalSeedSet, Descriptor, Polarity, SemanticConfig};
use crate::seed::derive_seed;

use super::stage1::{SeedSetIds, Stage1Report};
use super::Provenance;

/// Cells whose |mean I| stays at or below this, with no significant cell,
/// read as additive.
pub const ADDITIVE_MAX_ABS_I: f64 = 1.81;
/// Composite P̂ at or beyond these bounds counts as saturated.
pub const SATURATION_HIGH: f64 = 0.95;
pub const SATURATION_LOW: f64 = 0.05;

pub const CELL_AGGREGATION: &str = "cell I is the mean of member interaction terms; \
cell p is a permutation test of that mean contrast";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRow {
    pub composite: String,
    pub order: Order,
    pub descriptors: Vec<String>,
    pub surfaces: Vec<String>,
    pub n: usize,
    pub p_hat: f64,
    pub i_value: f64,
    pub p_value: f64,
    pub bucket: Bucket,
    pub sign: Sign,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    /// Axis combination, e.g. "Sta. × Car.".
    pub family: String,
    /// Cue classes, e.g. "H. Sta. + F-ln. Car.".
    pub label: String,
    /// Cue polarity per populated slot; `None` for a status level that
    /// Stage 1 placed in the mixed tier.
    pub polarities: Vec<Option<Polarity>>,
    pub members: Vec<String>,
    pub mean_p_hat: f64,
    /// Mean of the member interaction terms.
    pub i_value: f64,
    /// Permutation p-value of the mean contrast.
    pub p_value: f64,
    pub bucket: Bucket,
    pub sign: Sign,
    pub color: String,
    pub marker: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Paradigm {
    #[serde(rename = "Additive Smoothness")]
    Additive,
    #[serde(rename = "Asymmetric Veto Power")]
    Veto,
    #[serde(rename = "Prior Saturation")]
    Saturation,
}

impl Paradigm {
    pub fn label(self) -> &'static str {
        match self {
            Paradigm::Additive => "Additive Smoothness",
            Paradigm::Veto => "Asymmetric Veto Power",
            Paradigm::Saturation => "Prior Saturation",
        }
    }
}

/// Rule-based reading of the cell pattern. Not a statistical test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadigmVerdict {
    pub heuristic: bool,
    pub paradigms: Vec<Paradigm>,
    pub max_abs_cell_i: f64,
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Report {
    pub provenance: Provenance,
    pub seed_set: SeedSetIds,
    /// How cell values and p-values are derived from member combinations.
    pub cell_aggregation: String,
    pub interactions: Vec<InteractionRow>,
    pub cells: Vec<CellRow>,
    pub paradigm: ParadigmVerdict,
}

pub fn run_stage2(
    stage1: &Stage1Report,
    seed_set: &CompositionalSeedSet,
    ledger: &Ledger,
    opts: &StatsOptions,
    iterations: usize,
    seed: u64,
    provenance: Provenance,
) -> Result<Stage2Report> {
    let seed_descriptors: Vec<&Descriptor> = seed_set
        .status
        .iter()
        .chain(seed_set.careers())
        .chain(seed_set.personas())
        .collect();
    let missing_stage1: Vec<String> = seed_descriptors
        .iter()
        .filter(|d| !ledger.contains(&SemanticConfig::univariate(d).condition_id()) || stage1.row(&d.id).is_none())
        .map(|d| d.id.clone())
        .collect();
    if !missing_stage1.is_empty() {
        return Err(Error::MissingStage1(missing_stage1));
    }

    let composites: Vec<SemanticConfig> = seed_set.bi_configs().into_iter().chain(seed_set.tri_configs()).collect();
    let missing: Vec<String> = composites
        .iter()
        .map(|c| c.condition_id())
        .filter(|id| !ledger.contains(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteLedger(missing));
    }

    let specs: Vec<InteractionSpec> = composites
        .iter()
        .map(InteractionSpec::for_config)
        .collect::<Result<_>>()?;
    let results = specs
        .par_iter()
        .map(|spec| analyze(ledger, spec, opts, iterations, derive_seed(seed, &spec.composite)))
        .collect::<Result<Vec<_>>>()?;

    let interactions: Vec<InteractionRow> = composites
        .iter()
        .zip(results)
        .map(|(config, r)| {
            let stats = ledger.condition_stats(&r.spec.composite, opts)?;
            Ok(InteractionRow {
                composite: r.spec.composite.clone(),
                order: r.spec.order,
                descriptors: r.spec.descriptors.clone(),
                surfaces: config.populated().map(|d| d.surface.clone()).collect(),
                n: stats.n,
                p_hat: stats.p_hat,
                i_value: r.i_value,
                p_value: r.p_value,
                bucket: r.bucket,
                sign: r.sign,
                color: color_class(r.bucket, r.sign),
            })
        })
        .collect::<Result<_>>()?;

    let groups = group_cells(stage1, seed_set, &composites);
    let cells = groups
        .par_iter()
        .map(|g| {
            let members: Vec<&InteractionRow> = g.members.iter().map(|&i| &interactions[i]).collect();
            let contrast = Contrast::mean(g.members.iter().map(|&i| &specs[i]).map(|s| s.contrast()).collect::<Vec<_>>().iter());
            let perm = permutation_test_contrast(ledger, &contrast, opts, iterations, derive_seed(seed, &format!("cell:{}", g.label)))?;
            let k = members.len() as f64;
            let i_value = members.iter().map(|m| m.i_value).sum::<f64>() / k;
            let bucket = classify_bucket(i_value, perm.p_value);
            let sign = Sign::of(i_value);
            Ok(CellRow {
                family: g.family.clone(),
                label: g.label.clone(),
                polarities: g.polarities.clone(),
                members: members.iter().map(|m| m.composite.clone()).collect(),
                mean_p_hat: members.iter().map(|m| m.p_hat).sum::<f64>() / k,
                i_value,
                p_value: perm.p_value,
                bucket,
                sign,
                color: color_class(bucket, sign),
                marker: marker(bucket, sign).to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let paradigm = classify_paradigm(&cells);
    Ok(Stage2Report {
        provenance,
        seed_set: SeedSetIds::from(seed_set),
        cell_aggregation: CELL_AGGREGATION.to_string(),
        interactions,
        cells,
        paradigm,
    })
}

struct CellGroup {
    family: String,
    label: String,
    polarities: Vec<Option<Polarity>>,
    members: Vec<usize>,
}

fn status_class(d: &Descriptor) -> String {
    let name = d.subgroup.as_deref().unwrap_or(&d.id);
    let initial: String = name.chars().take(1).flat_map(char::to_uppercase).collect();
    format!("{initial}. {}", Axis::Status.abbrev())
}

fn group_cells(stage1: &Stage1Report, seed_set: &CompositionalSeedSet, composites: &[SemanticConfig]) -> Vec<CellGroup> {
    let mut groups: Vec<CellGroup> = Vec::new();
    for (i, config) in composites.iter().enumerate() {
        let mut classes = Vec::new();
        let mut polarities = Vec::new();
        for d in config.populated() {
            if d.axis == Axis::Status {
                classes.push(status_class(d));
                polarities.push(match stage1.tier_of(&d.id) {
                    Some(Tier::FemaleLeaning) => Some(Polarity::Female),
                    Some(Tier::MaleLeaning) => Some(Polarity::Male),
                    _ => None,
                });
            } else {
                let p = seed_set.polarity_of(d);
                let class = p.map_or("?", Polarity::abbrev);
                classes.push(format!("{class} {}", d.axis.abbrev()));
                polarities.push(p);
            }
        }
        let family = config.populated().map(|d| d.axis.abbrev()).collect::<Vec<_>>().join(" × ");
        let label = classes.join(" + ");
        match groups.iter_mut().find(|g| g.label == label) {
            Some(g) => g.members.push(i),
            None => groups.push(CellGroup {
                family,
                label,
                polarities,
                members: vec![i],
            }),
        }
    }
    groups
}

pub fn classify_paradigm(cells: &[CellRow]) -> ParadigmVerdict {
    let max_abs_cell_i = cells.iter().map(|c| c.i_value.abs()).fold(0.0, f64::max);
    let any_significant = cells.iter().any(|c| c.p_value < 0.05);
    let mut paradigms = Vec::new();
    let mut evidence = Vec::new();

    if max_abs_cell_i <= ADDITIVE_MAX_ABS_I && !any_significant {
        paradigms.push(Paradigm::Additive);
        evidence.push(format!("max |I| = {max_abs_cell_i:.3} with no cell below p = 0.05"));
    }
    for c in cells.iter().filter(|c| c.bucket == Bucket::Dark) {
        let has = |p| c.polarities.contains(&Some(p));
        let opposing = has(Polarity::Female) && has(Polarity::Male);
        // Mixed-tier status levels carry no polarity; congruence needs at
        // least two polar cues pointing the same way.
        let congruent = !opposing && c.polarities.iter().flatten().count() >= 2;
        let saturated = c.mean_p_hat >= SATURATION_HIGH || c.mean_p_hat <= SATURATION_LOW;
        if opposing {
            if !paradigms.contains(&Paradigm::Veto) {
                paradigms.push(Paradigm::Veto);
            }
            evidence.push(format!("veto: {} (I = {:.3}, opposing cues)", c.label, c.i_value));
        } else if congruent && saturated {
            if !paradigms.contains(&Paradigm::Saturation) {
                paradigms.push(Paradigm::Saturation);
            }
            evidence.push(format!(
                "saturation: {} (I = {:.3}, P̂ = {:.3})",
                c.label, c.i_value, c.mean_p_hat
            ));
        }
    }
    ParadigmVerdict {
        heuristic: true,
        paradigms,
        max_abs_cell_i,
        evidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(polarities: Vec<Option<Polarity>>, i_value: f64, p_value: f64, mean_p_hat: f64) -> CellRow {
        let bucket = classify_bucket(i_value, p_value);
        let sign = Sign::of(i_value);
        CellRow {
            family: "Car. × Per.".into(),
            label: "x".into(),
            polarities,
            members: vec![],
            mean_p_hat,
            i_value,
            p_value,
            bucket,
            sign,
            color: color_class(bucket, sign),
            marker: marker(bucket, sign).into(),
        }
    }

    const F: Option<Polarity> = Some(Polarity::Female);
    const M: Option<Polarity> = Some(Polarity::Male);

    #[test]
    fn additive_when_small_and_insignificant() {
        let v = classify_paradigm(&[cell(vec![F, M], 1.2, 0.3, 0.5), cell(vec![F, F], -1.81, 0.2, 0.7)]);
        assert_eq!(v.paradigms, vec![Paradigm::Additive]);
        assert!(v.heuristic);
    }

    #[test]
    fn veto_on_dark_opposing_cell() {
        // A male-leaning career with a strongly female persona: the composite
        // is pushed against the sum of its parts.
        let v = classify_paradigm(&[cell(vec![M, F], -3.4, 0.001, 0.3)]);
        assert_eq!(v.paradigms, vec![Paradigm::Veto]);
    }

    #[test]
    fn saturation_on_dark_congruent_extreme_cell() {
        let v = classify_paradigm(&[cell(vec![F, F], -3.1, 0.002, 0.97)]);
        assert_eq!(v.paradigms, vec![Paradigm::Saturation]);
        // Same cell away from the ceiling is neither.
        let v = classify_paradigm(&[cell(vec![F, F], -3.1, 0.002, 0.80)]);
        assert!(v.paradigms.is_empty());
    }

    #[test]
    fn congruence_ignores_unpolarized_status() {
        let v = classify_paradigm(&[cell(vec![None, F, F], -4.0, 0.001, 0.96)]);
        assert_eq!(v.paradigms, vec![Paradigm::Saturation]);
        let v = classify_paradigm(&[cell(vec![None, F], -4.0, 0.001, 0.96)]);
        assert!(v.paradigms.is_empty());
    }

    #[test]
    fn high_status_female_career_male_persona_fixture_is_veto() {
        let v = classify_paradigm(&[cell(vec![M, F, M], -5.78, 0.001, 0.4)]);
        assert_eq!(v.paradigms, vec![Paradigm::Veto]);
        assert_eq!(classify_bucket(-5.78, 0.001), Bucket::Dark);
    }

    #[test]
    fn medium_cells_do_not_trigger_mechanisms() {
        let v = classify_paradigm(&[cell(vec![M, F], -2.0, 0.03, 0.3)]);
        assert!(v.paradigms.is_empty());
    }
}
