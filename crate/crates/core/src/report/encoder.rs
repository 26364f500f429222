//! Encoder-side association table: one row per descriptor group, one column
//! per encoder.

use serde::{Deserialize, Serialize};

use crate::encoder::{axis_effect_size, standardized_scores, EmbeddingSet};
use crate::error::{Error, Result};
use crate::interaction::Tier;
use crate::prompt_space::{Axis, AuditConfig};

use super::stage1::Stage1Report;
use super::Provenance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderCell {
    pub encoder: String,
    /// Absent when the group's Δ values have no spread to standardize by.
    pub cohens_d: Option<f64>,
    pub mean_delta: f64,
    pub n_values: usize,
    /// "orange" for a female-leaning effect, "blue" for male-leaning.
    pub color: String,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderRow {
    pub axis: Axis,
    pub group: String,
    pub descriptors: Vec<String>,
    pub cells: Vec<EncoderCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    pub descriptor: String,
    pub delta: f64,
    pub standardized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderWordScores {
    pub encoder: String,
    pub words: Vec<WordScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderReport {
    pub provenance: Provenance,
    /// How each cell's d is computed.
    pub effect_size: String,
    pub encoders: Vec<String>,
    pub rows: Vec<EncoderRow>,
    pub word_scores: Vec<EncoderWordScores>,
}

pub const EFFECT_SIZE_METHOD: &str = "one-sample Cohen's d of word-level delta against 0 (sample SD); \
single-descriptor groups use one delta per contextualization";

/// Female-leaning effects render orange, male-leaning blue.
pub fn sign_color(d: f64) -> &'static str {
    if d >= 0.0 {
        "orange"
    } else {
        "blue"
    }
}

struct Group {
    axis: Axis,
    name: String,
    descriptors: Vec<String>,
}

/// Status levels are single words, so their rows use one Δ per
/// contextualization. Careers group by Stage 1 tier when available, personas
/// by trait.
fn groups(config: &AuditConfig, stage1: Option<&Stage1Report>) -> Vec<Group> {
    let mut out: Vec<Group> = Vec::new();
    let mut push = |axis: Axis, name: String, id: &str| match out.iter_mut().find(|g| g.axis == axis && g.name == name) {
        Some(g) => g.descriptors.push(id.to_string()),
        None => out.push(Group {
            axis,
            name,
            descriptors: vec![id.to_string()],
        }),
    };
    for d in config.lexicon.axis(Axis::Status) {
        push(Axis::Status, d.subgroup.clone().unwrap_or_else(|| d.id.clone()), &d.id);
    }
    match stage1 {
        Some(s1) => {
            for tier in [Tier::FemaleLeaning, Tier::Mixed, Tier::MaleLeaning] {
                for d in config.lexicon.axis(Axis::Career) {
                    if s1.tier_of(&d.id) == Some(tier) {
                        push(Axis::Career, tier.abbrev().to_string(), &d.id);
                    }
                }
            }
        }
        None => {
            for d in config.lexicon.axis(Axis::Career) {
                push(Axis::Career, "All".to_string(), &d.id);
            }
        }
    }
    for d in config.lexicon.axis(Axis::Persona) {
        push(Axis::Persona, d.subgroup.clone().unwrap_or_else(|| "All".into()), &d.id);
    }
    out
}

fn require_word<'a>(set: &'a EmbeddingSet, id: &str) -> Result<&'a EmbeddingSet> {
    if set.trait_vectors(id).is_empty() {
        return Err(Error::MissingDescriptorStats(format!(
            "{id} has no trait rows in embeddings for {}",
            set.encoder
        )));
    }
    Ok(set)
}

fn cell(set: &EmbeddingSet, group: &Group) -> Result<EncoderCell> {
    let values: Vec<f64> = if group.descriptors.len() == 1 {
        require_word(set, &group.descriptors[0])?.context_deltas(&group.descriptors[0])?
    } else {
        group
            .descriptors
            .iter()
            .map(|id| require_word(set, id)?.word_delta(id))
            .collect::<Result<_>>()?
    };
    let mean_delta = values.iter().sum::<f64>() / values.len() as f64;
    let (cohens_d, note) = match axis_effect_size(&group.name, &values) {
        Ok(s) => (Some(s.cohens_d), None),
        Err(e @ (Error::TooFewValues(_) | Error::DegenerateVariance { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let signed = cohens_d.unwrap_or(mean_delta);
    Ok(EncoderCell {
        encoder: set.encoder.clone(),
        cohens_d,
        mean_delta,
        n_values: values.len(),
        color: sign_color(signed).to_string(),
        note,
    })
}

pub fn run_encoder_report(
    config: &AuditConfig,
    sets: &[EmbeddingSet],
    stage1: Option<&Stage1Report>,
    provenance: Provenance,
) -> Result<EncoderReport> {
    for set in sets {
        set.check_anchors(&config.anchors)?;
    }
    let groups = groups(config, stage1);
    let rows = groups
        .iter()
        .map(|g| {
            Ok(EncoderRow {
                axis: g.axis,
                group: g.name.clone(),
                descriptors: g.descriptors.clone(),
                cells: sets.iter().map(|s| cell(s, g)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;

    let word_scores = sets
        .iter()
        .map(|set| {
            let ids: Vec<&str> = config.lexicon.descriptors().iter().map(|d| d.id.as_str()).collect();
            let deltas: Vec<f64> = ids
                .iter()
                .map(|id| require_word(set, id)?.word_delta(id))
                .collect::<Result<_>>()?;
            let z = standardized_scores(&deltas)?;
            Ok(EncoderWordScores {
                encoder: set.encoder.clone(),
                words: ids
                    .iter()
                    .zip(deltas.iter().zip(z))
                    .map(|(id, (&delta, standardized))| WordScore {
                        descriptor: id.to_string(),
                        delta,
                        standardized,
                    })
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;

    Ok(EncoderReport {
        provenance,
        effect_size: EFFECT_SIZE_METHOD.to_string(),
        encoders: sets.iter().map(|s| s.encoder.clone()).collect(),
        rows,
        word_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opposite_signs_get_opposite_colors() {
        // Female-leaning and male-leaning career groups as reported for one
        // encoder: d = 1.67 and d = -1.71.
        assert_eq!(sign_color(1.67), "orange");
        assert_eq!(sign_color(-1.71), "blue");
    }
}
