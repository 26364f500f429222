//! Text-encoder semantic bias: relative cosine similarity of trait embeddings
//! to female and male anchor sets, and effect sizes over groups of words.

pub mod file;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{EmbeddingRow, EmbeddingSet, Role, EMBEDDING_SCHEMA};

const ZERO_NORM: f64 = 1e-12;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    for n in [nu, nv] {
        if n <= ZERO_NORM {
            return Err(Error::ZeroVector { norm: n });
        }
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

fn mean_cosine<T: AsRef<[f64]>, A: AsRef<[f64]>>(traits: &[T], anchors: &[A]) -> Result<f64> {
    let mut total = 0.0;
    for t in traits {
        for a in anchors {
            total += cosine(t.as_ref(), a.as_ref())?;
        }
    }
    Ok(total / (traits.len() * anchors.len()) as f64)
}

/// Mean cosine to the female anchors minus mean cosine to the male anchors,
/// averaged over every trait contextualization.
pub fn delta<T, F, M>(traits: &[T], female: &[F], male: &[M]) -> Result<f64>
where
    T: AsRef<[f64]>,
    F: AsRef<[f64]>,
    M: AsRef<[f64]>,
{
    if traits.is_empty() {
        return Err(Error::EmptyAnchorSet("trait contextualizations"));
    }
    if female.is_empty() {
        return Err(Error::EmptyAnchorSet("female"));
    }
    if male.is_empty() {
        return Err(Error::EmptyAnchorSet("male"));
    }
    Ok(mean_cosine(traits, female)? - mean_cosine(traits, male)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBiasSummary {
    pub group: String,
    pub mean_delta: f64,
    pub std_delta: f64,
    pub cohens_d: f64,
    pub n_words: usize,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One-sample Cohen's d of a group's Δ values against zero (sample SD).
pub fn axis_effect_size(group: &str, deltas: &[f64]) -> Result<AxisBiasSummary> {
    if deltas.len() < 2 {
        return Err(Error::TooFewValues(deltas.len()));
    }
    let (mean, sd) = mean_sd(deltas);
    let scale = deltas.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sd <= scale * 1e-14 {
        return Err(Error::DegenerateVariance { n: deltas.len() });
    }
    Ok(AxisBiasSummary {
        group: group.to_string(),
        mean_delta: mean,
        std_delta: sd,
        cohens_d: mean / sd,
        n_words: deltas.len(),
    })
}

/// `(Δ − mean) / sd` against every Δ from the same encoder.
pub fn standardized_scores(deltas: &[f64]) -> Result<Vec<f64>> {
    if deltas.len() < 2 {
        return Err(Error::TooFewValues(deltas.len()));
    }
    let (mean, sd) = mean_sd(deltas);
    if sd == 0.0 {
        return Err(Error::DegenerateVariance { n: deltas.len() });
    }
    Ok(deltas.iter().map(|d| (d - mean) / sd).collect())
}
