//! Social axes, descriptor lexicons and the semantic configurations built from them.
//!
//! A [`SemanticConfig`] holds at most one descriptor per axis; empty slots are
//! rendered away by the template engine in [`template`]. Enumeration of the
//! Stage 1 and Stage 2 job sets lives in [`enumerate`].

pub mod config;
pub mod enumerate;
pub mod template;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use config::AuditConfig;
pub use enumerate::{
    enumerate_bi, enumerate_configs, enumerate_tri, enumerate_univariate, realize,
    select_polar_descriptors, CompositionalSeedSet, InstructionJob, Polarity,
};
pub use template::PromptTemplate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Status,
    Career,
    Persona,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Status, Axis::Career, Axis::Persona];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Status => "status",
            Axis::Career => "career",
            Axis::Persona => "persona",
        }
    }

    /// Short label used in rendered tables.
    pub fn abbrev(self) -> &'static str {
        match self {
            Axis::Status => "Sta.",
            Axis::Career => "Car.",
            Axis::Persona => "Per.",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "status" => Some(Axis::Status),
            "career" => Some(Axis::Career),
            "persona" => Some(Axis::Persona),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A word on one social axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Descriptor {
    pub id: String,
    pub axis: Axis,
    pub surface: String,
    /// Big Five trait for personas, `High`/`Low` for status.
    pub subgroup: Option<String>,
}

impl Descriptor {
    pub fn new(id: impl Into<String>, axis: Axis, surface: impl Into<String>) -> Self {
        Descriptor {
            id: id.into(),
            axis,
            surface: surface.into(),
            subgroup: None,
        }
    }

    pub fn with_subgroup(mut self, subgroup: impl Into<String>) -> Self {
        self.subgroup = Some(subgroup.into());
        self
    }
}

/// Validated descriptor set, kept in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    descriptors: Vec<Descriptor>,
}

impl Lexicon {
    /// Checks surfaces are non-empty and ids unique. Status cardinality is
    /// only enforced when a status descriptor is present.
    pub fn new(descriptors: Vec<Descriptor>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for d in &descriptors {
            if d.id.trim().is_empty() {
                return Err(Error::InvalidConfigFile("descriptor with empty id".into()));
            }
            if d.surface.trim().is_empty() {
                return Err(Error::InvalidConfigFile(format!(
                    "descriptor `{}` has an empty surface form",
                    d.id
                )));
            }
            if !seen.insert(d.id.as_str()) {
                return Err(Error::InvalidConfigFile(format!(
                    "duplicate descriptor id `{}`",
                    d.id
                )));
            }
        }
        let lexicon = Lexicon { descriptors };
        let status = lexicon.axis(Axis::Status).count();
        if status != 0 && status != 2 {
            return Err(Error::ConfigCountMismatch {
                what: "status descriptors".into(),
                declared: 2,
                found: status,
            });
        }
        Ok(lexicon)
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn axis(&self, axis: Axis) -> impl Iterator<Item = &Descriptor> {
        self.descriptors.iter().filter(move |d| d.axis == axis)
    }

    pub fn get(&self, id: &str) -> Option<&Descriptor> {
        self.descriptors.iter().find(|d| d.id == id)
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }
}

/// The abstract tuple (status, career, persona) with optional slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemanticConfig {
    status: Option<Descriptor>,
    career: Option<Descriptor>,
    persona: Option<Descriptor>,
}

impl SemanticConfig {
    pub fn new(
        status: Option<Descriptor>,
        career: Option<Descriptor>,
        persona: Option<Descriptor>,
    ) -> Result<Self> {
        for (slot, d) in [
            (Axis::Status, &status),
            (Axis::Career, &career),
            (Axis::Persona, &persona),
        ] {
            if let Some(d) = d {
                if d.axis != slot {
                    return Err(Error::AxisMismatch {
                        descriptor: d.id.clone(),
                        slot: slot.as_str(),
                        found: d.axis.as_str(),
                    });
                }
            }
        }
        let config = SemanticConfig {
            status,
            career,
            persona,
        };
        if config.arity() == 0 {
            return Err(Error::MalformedConfig("all three slots are empty".into()));
        }
        Ok(config)
    }

    /// Places each descriptor in the slot of its own axis.
    pub fn from_descriptors<'a>(descriptors: impl IntoIterator<Item = &'a Descriptor>) -> Result<Self> {
        let mut slots: [Option<Descriptor>; 3] = [None, None, None];
        for d in descriptors {
            let idx = d.axis as usize;
            if slots[idx].is_some() {
                return Err(Error::MalformedConfig(format!(
                    "two descriptors for the {} axis",
                    d.axis
                )));
            }
            slots[idx] = Some(d.clone());
        }
        let [status, career, persona] = slots;
        SemanticConfig::new(status, career, persona)
    }

    pub fn univariate(d: &Descriptor) -> Self {
        SemanticConfig::from_descriptors([d]).expect("a single descriptor is always a valid config")
    }

    pub fn slot(&self, axis: Axis) -> Option<&Descriptor> {
        match axis {
            Axis::Status => self.status.as_ref(),
            Axis::Career => self.career.as_ref(),
            Axis::Persona => self.persona.as_ref(),
        }
    }

    /// Populated slots in axis order.
    pub fn populated(&self) -> impl Iterator<Item = &Descriptor> {
        Axis::ALL.into_iter().filter_map(move |a| self.slot(a))
    }

    pub fn arity(&self) -> usize {
        self.populated().count()
    }

    /// Order-independent identity keyed by (axis, descriptor id) of the
    /// populated slots.
    pub fn condition_id(&self) -> String {
        condition_id_of(self.populated().map(|d| (d.axis, d.id.as_str())))
    }

    /// Every sub-configuration obtained by dropping exactly one populated slot.
    pub fn facets(&self) -> Vec<SemanticConfig> {
        let populated: Vec<&Descriptor> = self.populated().collect();
        if populated.len() < 2 {
            return Vec::new();
        }
        (0..populated.len())
            .map(|skip| {
                SemanticConfig::from_descriptors(
                    populated
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, d)| *d),
                )
                .expect("sub-configuration of a valid config")
            })
            .collect()
    }
}

/// Hash of the canonical `axis=id` list. Slot order is fixed by axis, so any
/// permutation of the input yields the same id.
pub fn condition_id_of<'a>(slots: impl IntoIterator<Item = (Axis, &'a str)>) -> String {
    let mut keyed: Vec<(Axis, &str)> = slots.into_iter().collect();
    keyed.sort();
    let canonical = keyed
        .iter()
        .map(|(a, id)| format!("{}={}", a.as_str(), id))
        .collect::<Vec<_>>()
        .join("|");
    let digest = Sha256::digest(canonical.as_bytes());
    hex::encode(&digest[..8])
}
