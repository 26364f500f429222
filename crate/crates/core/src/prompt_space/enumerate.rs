//! Realization of semantic configurations into jobs, and the Stage 1 / Stage 2
//! enumerations.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::Transcript;
use super::{Axis, Descriptor, Lexicon, PromptTemplate, SemanticConfig};

/// One fully realized prompt plus its transcript. Serialized as one line of the
/// job manifest; field order is the wire order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstructionJob {
    pub condition_id: String,
    pub sample_index: u64,
    pub status: Option<String>,
    pub career: Option<String>,
    pub persona: Option<String>,
    pub template_id: String,
    pub transcript_id: String,
    pub instruction: String,
    pub transcript: String,
}

impl InstructionJob {
    /// Descriptor ids of the populated slots, in axis order.
    pub fn descriptor_ids(&self) -> impl Iterator<Item = &str> {
        [&self.status, &self.career, &self.persona]
            .into_iter()
            .filter_map(|s| s.as_deref())
    }

    pub fn arity(&self) -> usize {
        self.descriptor_ids().count()
    }
}

/// The template × transcript grid every condition is crossed with.
#[derive(Debug, Clone, Copy)]
pub struct Sampling<'a> {
    pub templates: &'a [PromptTemplate],
    pub transcripts: &'a [Transcript],
}

impl<'a> Sampling<'a> {
    /// Checks the grid against the declared sizes.
    pub fn new(
        templates: &'a [PromptTemplate],
        transcripts: &'a [Transcript],
        declared_templates: usize,
        declared_transcripts: usize,
    ) -> Result<Self> {
        if templates.len() != declared_templates {
            return Err(Error::ConfigCountMismatch {
                what: "templates".into(),
                declared: declared_templates,
                found: templates.len(),
            });
        }
        if transcripts.len() != declared_transcripts {
            return Err(Error::ConfigCountMismatch {
                what: "transcripts".into(),
                declared: declared_transcripts,
                found: transcripts.len(),
            });
        }
        if templates.is_empty() || transcripts.is_empty() {
            return Err(Error::ConfigCountMismatch {
                what: "sampling grid".into(),
                declared: 1,
                found: 0,
            });
        }
        Ok(Sampling {
            templates,
            transcripts,
        })
    }

    pub fn jobs_per_condition(&self) -> usize {
        self.templates.len() * self.transcripts.len()
    }
}

impl super::AuditConfig {
    pub fn sampling(&self) -> Sampling<'_> {
        Sampling {
            templates: &self.templates,
            transcripts: &self.transcripts,
        }
    }
}

pub fn realize(
    config: &SemanticConfig,
    template: &PromptTemplate,
    transcript: &Transcript,
) -> InstructionJob {
    let id_of = |axis| config.slot(axis).map(|d: &Descriptor| d.id.clone());
    InstructionJob {
        condition_id: config.condition_id(),
        sample_index: 0,
        status: id_of(Axis::Status),
        career: id_of(Axis::Career),
        persona: id_of(Axis::Persona),
        template_id: template.id().to_string(),
        transcript_id: transcript.id.clone(),
        instruction: template.render(config),
        transcript: transcript.text.clone(),
    }
}

/// Crosses each config with every (template, transcript) pair. Jobs are
/// condition-major, then template, then transcript; `sample_index` counts
/// within a condition.
pub fn enumerate_configs(configs: &[SemanticConfig], sampling: &Sampling<'_>) -> Vec<InstructionJob> {
    let mut jobs = Vec::with_capacity(configs.len() * sampling.jobs_per_condition());
    for config in configs {
        let mut index = 0u64;
        for template in sampling.templates {
            for transcript in sampling.transcripts {
                let mut job = realize(config, template, transcript);
                job.sample_index = index;
                index += 1;
                jobs.push(job);
            }
        }
    }
    jobs
}

pub fn univariate_configs(lexicon: &Lexicon) -> Vec<SemanticConfig> {
    lexicon
        .descriptors()
        .iter()
        .map(SemanticConfig::univariate)
        .collect()
}

pub fn enumerate_univariate(lexicon: &Lexicon, sampling: &Sampling<'_>) -> Vec<InstructionJob> {
    enumerate_configs(&univariate_configs(lexicon), sampling)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Female,
    Male,
}

impl Polarity {
    pub fn abbrev(self) -> &'static str {
        match self {
            Polarity::Female => "F-ln.",
            Polarity::Male => "M-ln.",
        }
    }
}

/// The descriptors that seed Stage 2: both status levels plus the `k` most
/// female- and male-polar careers and personas.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionalSeedSet {
    pub status: Vec<Descriptor>,
    pub career_female: Vec<Descriptor>,
    pub career_male: Vec<Descriptor>,
    pub persona_female: Vec<Descriptor>,
    pub persona_male: Vec<Descriptor>,
}

impl CompositionalSeedSet {
    pub fn new(
        status: Vec<Descriptor>,
        career_female: Vec<Descriptor>,
        career_male: Vec<Descriptor>,
        persona_female: Vec<Descriptor>,
        persona_male: Vec<Descriptor>,
    ) -> Result<Self> {
        let seed = CompositionalSeedSet {
            status,
            career_female,
            career_male,
            persona_female,
            persona_male,
        };
        seed.validate()?;
        Ok(seed)
    }

    fn validate(&self) -> Result<()> {
        if self.status.len() != 2 {
            return Err(Error::InsufficientDescriptors {
                axis: "status",
                available: self.status.len(),
                required: 2,
            });
        }
        let k = self.k();
        for (axis, list) in [
            (Axis::Status, &self.status),
            (Axis::Career, &self.career_female),
            (Axis::Career, &self.career_male),
            (Axis::Persona, &self.persona_female),
            (Axis::Persona, &self.persona_male),
        ] {
            if axis != Axis::Status && (list.len() != k || k == 0) {
                return Err(Error::MalformedConfig(format!(
                    "seed set needs the same non-zero count per polarity on the {axis} axis"
                )));
            }
            if let Some(d) = list.iter().find(|d| d.axis != axis) {
                return Err(Error::AxisMismatch {
                    descriptor: d.id.clone(),
                    slot: axis.as_str(),
                    found: d.axis.as_str(),
                });
            }
        }
        Ok(())
    }

    /// Descriptors per polarity per non-status axis.
    pub fn k(&self) -> usize {
        self.career_female.len()
    }

    pub fn careers(&self) -> impl Iterator<Item = &Descriptor> {
        self.career_female.iter().chain(&self.career_male)
    }

    pub fn personas(&self) -> impl Iterator<Item = &Descriptor> {
        self.persona_female.iter().chain(&self.persona_male)
    }

    /// Selection polarity of a career or persona in this seed set.
    pub fn polarity_of(&self, d: &Descriptor) -> Option<Polarity> {
        let has = |list: &[Descriptor]| list.iter().any(|x| x.id == d.id);
        if has(&self.career_female) || has(&self.persona_female) {
            Some(Polarity::Female)
        } else if has(&self.career_male) || has(&self.persona_male) {
            Some(Polarity::Male)
        } else {
            None
        }
    }

    /// Status × Career, then Status × Persona, then Career × Persona.
    pub fn bi_configs(&self) -> Vec<SemanticConfig> {
        let mut out = Vec::new();
        for s in &self.status {
            for c in self.careers() {
                out.push(SemanticConfig::from_descriptors([s, c]).expect("distinct axes"));
            }
        }
        for s in &self.status {
            for p in self.personas() {
                out.push(SemanticConfig::from_descriptors([s, p]).expect("distinct axes"));
            }
        }
        for c in self.careers() {
            for p in self.personas() {
                out.push(SemanticConfig::from_descriptors([c, p]).expect("distinct axes"));
            }
        }
        out
    }

    pub fn tri_configs(&self) -> Vec<SemanticConfig> {
        let mut out = Vec::new();
        for s in &self.status {
            for c in self.careers() {
                for p in self.personas() {
                    out.push(SemanticConfig::from_descriptors([s, c, p]).expect("distinct axes"));
                }
            }
        }
        out
    }
}

/// Picks the `k` highest-P̂ and `k` lowest-P̂ careers and personas. Ties are
/// broken by descriptor id: candidates are ranked by (P̂ descending, id
/// ascending); the female side takes the head and the male side the tail.
pub fn select_polar_descriptors(
    lexicon: &Lexicon,
    p_hat: impl Fn(&Descriptor) -> Option<f64>,
    k: usize,
) -> Result<CompositionalSeedSet> {
    let status: Vec<Descriptor> = lexicon.axis(Axis::Status).cloned().collect();
    if status.len() != 2 {
        return Err(Error::InsufficientDescriptors {
            axis: "status",
            available: status.len(),
            required: 2,
        });
    }
    if k == 0 {
        return Err(Error::MalformedConfig("polar count k must be positive".into()));
    }

    let pick = |axis: Axis| -> Result<(Vec<Descriptor>, Vec<Descriptor>)> {
        let mut ranked = lexicon
            .axis(axis)
            .map(|d| {
                p_hat(d)
                    .map(|p| (p, d))
                    .ok_or_else(|| Error::MissingDescriptorStats(d.id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        if ranked.len() < 2 * k {
            return Err(Error::InsufficientDescriptors {
                axis: axis.as_str(),
                available: ranked.len(),
                required: 2 * k,
            });
        }
        ranked.sort_by(|(pa, a), (pb, b)| {
            pb.partial_cmp(pa)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.id.cmp(&b.id))
        });
        let female = ranked[..k].iter().map(|(_, d)| (*d).clone()).collect();
        let male = ranked[ranked.len() - k..]
            .iter()
            .rev()
            .map(|(_, d)| (*d).clone())
            .collect();
        Ok((female, male))
    };

    let (career_female, career_male) = pick(Axis::Career)?;
    let (persona_female, persona_male) = pick(Axis::Persona)?;
    CompositionalSeedSet::new(status, career_female, career_male, persona_female, persona_male)
}

pub fn enumerate_bi(seed: &CompositionalSeedSet, sampling: &Sampling<'_>) -> Vec<InstructionJob> {
    enumerate_configs(&seed.bi_configs(), sampling)
}

pub fn enumerate_tri(seed: &CompositionalSeedSet, sampling: &Sampling<'_>) -> Vec<InstructionJob> {
    enumerate_configs(&seed.tri_configs(), sampling)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::prompt_space::AuditConfig;

    fn toy_lexicon(careers: &[&str], personas: &[&str]) -> Lexicon {
        let mut ds = vec![
            Descriptor::new("high", Axis::Status, "high-status").with_subgroup("High"),
            Descriptor::new("low", Axis::Status, "low-status").with_subgroup("Low"),
        ];
        ds.extend(careers.iter().map(|c| Descriptor::new(*c, Axis::Career, *c)));
        ds.extend(personas.iter().map(|p| Descriptor::new(*p, Axis::Persona, *p)));
        Lexicon::new(ds).unwrap()
    }

    fn toy_sampling(n_templates: usize, n_transcripts: usize) -> (Vec<PromptTemplate>, Vec<Transcript>) {
        let templates = (0..n_templates)
            .map(|i| {
                PromptTemplate::parse(
                    format!("t{i}"),
                    format!("Voice {i}: {{a}} [{{status}} ][{{persona}} ]{{career|person}}."),
                )
                .unwrap()
            })
            .collect();
        let transcripts = (0..n_transcripts)
            .map(|i| Transcript {
                id: format!("c{i}"),
                text: format!("Line {i}."),
            })
            .collect();
        (templates, transcripts)
    }

    #[test]
    fn toy_univariate_counts() {
        let lex = Lexicon::new(vec![
            Descriptor::new("a", Axis::Career, "a"),
            Descriptor::new("b", Axis::Career, "b"),
            Descriptor::new("c", Axis::Persona, "c"),
        ])
        .unwrap();
        let (t, c) = toy_sampling(2, 2);
        let s = Sampling::new(&t, &c, 2, 2).unwrap();
        assert_eq!(enumerate_univariate(&lex, &s).len(), 12);

        let one = Lexicon::new(vec![Descriptor::new("a", Axis::Career, "a")]).unwrap();
        let (t, c) = toy_sampling(10, 10);
        let s = Sampling::new(&t, &c, 10, 10).unwrap();
        assert_eq!(enumerate_univariate(&one, &s).len(), 100);
    }

    #[test]
    fn sampling_rejects_undeclared_counts() {
        let (t, c) = toy_sampling(9, 10);
        let err = Sampling::new(&t, &c, 10, 10).unwrap_err();
        assert_eq!(err.kind(), "ConfigCountMismatch");
    }

    #[test]
    fn realize_contains_every_surface_once() {
        let cfg = AuditConfig::default_config();
        let high = cfg.lexicon.get("high").unwrap();
        let nurse = cfg.lexicon.get("nurse").unwrap();
        let reckless = cfg.lexicon.get("reckless").unwrap();
        let tri = SemanticConfig::from_descriptors([high, nurse, reckless]).unwrap();
        for t in &cfg.templates {
            let job = realize(&tri, t, &cfg.transcripts[0]);
            for w in ["high-status", "nurse", "reckless"] {
                assert_eq!(job.instruction.matches(w).count(), 1, "{}", job.instruction);
            }
            let uni = realize(&SemanticConfig::univariate(nurse), t, &cfg.transcripts[0]);
            assert!(uni.instruction.contains("nurse"));
            assert!(!uni.instruction.contains("status"));
            assert!(!uni.instruction.contains("reckless"));
        }
    }

    #[test]
    fn polar_selection_takes_extrema() {
        let lex = toy_lexicon(&["a", "b", "c"], &["x", "y"]);
        let p: BTreeMap<&str, f64> =
            [("a", 0.9), ("b", 0.1), ("c", 0.5), ("x", 0.2), ("y", 0.3)].into();
        let seed = select_polar_descriptors(&lex, |d| p.get(d.id.as_str()).copied(), 1).unwrap();
        assert_eq!(seed.career_female[0].id, "a");
        assert_eq!(seed.career_male[0].id, "b");
        assert_eq!(seed.persona_female[0].id, "y");
        assert_eq!(seed.persona_male[0].id, "x");
    }

    #[test]
    fn polar_selection_ties_break_by_id() {
        let lex = toy_lexicon(&["d", "b", "a", "c"], &["z", "w", "y", "x"]);
        let seed = select_polar_descriptors(&lex, |_| Some(0.5), 1).unwrap();
        assert_eq!(seed.career_female[0].id, "a");
        assert_eq!(seed.career_male[0].id, "d");
        assert_eq!(seed.persona_female[0].id, "w");
        assert_eq!(seed.persona_male[0].id, "z");
    }

    #[test]
    fn polar_selection_needs_two_k() {
        let lex = toy_lexicon(&["a", "b", "c"], &["x", "y", "z", "w"]);
        let err = select_polar_descriptors(&lex, |_| Some(0.5), 2).unwrap_err();
        assert_eq!(err.kind(), "InsufficientDescriptors");
        let err = select_polar_descriptors(&lex, |d| (d.id != "b").then_some(0.5), 1).unwrap_err();
        assert_eq!(err.kind(), "MissingDescriptorStats");
    }

    #[test]
    fn reduced_seed_enumerates_by_hand_count() {
        // k = 1: S×C 2·2 + S×P 2·2 + C×P 2·2 = 12, tri 2·2·2 = 8.
        let lex = toy_lexicon(&["a", "b"], &["x", "y"]);
        let seed = select_polar_descriptors(&lex, |_| Some(0.5), 1).unwrap();
        let (t, c) = toy_sampling(1, 1);
        let s = Sampling::new(&t, &c, 1, 1).unwrap();
        let bi = enumerate_bi(&seed, &s);
        assert_eq!(bi.len(), 12);
        assert!(bi.iter().all(|j| j.arity() == 2));
        let tri = enumerate_tri(&seed, &s);
        assert_eq!(tri.len(), 8);
        assert!(tri.iter().all(|j| j.arity() == 3));
    }
}
