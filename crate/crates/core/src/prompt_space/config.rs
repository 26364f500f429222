//! The lexicon/template/transcript/anchor configuration file (TOML).

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

use super::{Axis, Descriptor, Lexicon, PromptTemplate};

pub const DEFAULT_CONFIG: &str = include_str!("../../config/default.toml");
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchors {
    pub female: Vec<String>,
    pub male: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub lexicon: Lexicon,
    pub templates: Vec<PromptTemplate>,
    pub transcripts: Vec<Transcript>,
    pub anchors: Anchors,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    declared: Declared,
    anchors: Anchors,
    #[serde(default)]
    status: Vec<RawDescriptor>,
    #[serde(default)]
    career: Vec<RawDescriptor>,
    #[serde(default)]
    persona: Vec<RawDescriptor>,
    templates: Vec<RawTemplate>,
    transcripts: Vec<RawTranscript>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Declared {
    status: usize,
    career: usize,
    persona: usize,
    templates: usize,
    transcripts: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDescriptor {
    id: String,
    surface: String,
    subgroup: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    id: String,
    pattern: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTranscript {
    id: String,
    text: String,
}

fn check_count(what: &str, declared: usize, found: usize) -> Result<()> {
    if declared != found {
        return Err(Error::ConfigCountMismatch {
            what: what.to_string(),
            declared,
            found,
        });
    }
    Ok(())
}

impl AuditConfig {
    pub fn default_config() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG).expect("bundled default config is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfigFile(e.to_string()))?;
        if raw.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::InvalidConfigFile(format!(
                "unsupported schema_version {}",
                raw.schema_version
            )));
        }
        let d = &raw.declared;
        check_count("status descriptors", d.status, raw.status.len())?;
        check_count("career descriptors", d.career, raw.career.len())?;
        check_count("persona descriptors", d.persona, raw.persona.len())?;
        check_count("templates", d.templates, raw.templates.len())?;
        check_count("transcripts", d.transcripts, raw.transcripts.len())?;

        let descriptors = [
            (Axis::Status, raw.status),
            (Axis::Career, raw.career),
            (Axis::Persona, raw.persona),
        ]
        .into_iter()
        .flat_map(|(axis, list)| {
            list.into_iter().map(move |r| Descriptor {
                id: r.id,
                axis,
                surface: r.surface,
                subgroup: r.subgroup,
            })
        })
        .collect();
        let lexicon = Lexicon::new(descriptors)?;

        let templates = raw
            .templates
            .into_iter()
            .map(|t| PromptTemplate::parse(t.id, t.pattern))
            .collect::<Result<Vec<_>>>()?;
        unique_ids("template", templates.iter().map(|t| t.id()))?;

        let transcripts: Vec<Transcript> = raw
            .transcripts
            .into_iter()
            .map(|t| Transcript {
                id: t.id,
                text: t.text,
            })
            .collect();
        unique_ids("transcript", transcripts.iter().map(|t| t.id.as_str()))?;

        if raw.anchors.female.is_empty() {
            return Err(Error::EmptyAnchorSet("female"));
        }
        if raw.anchors.male.is_empty() {
            return Err(Error::EmptyAnchorSet("male"));
        }

        Ok(AuditConfig {
            lexicon,
            templates,
            transcripts,
            anchors: raw.anchors,
        })
    }
}

fn unique_ids<'a>(what: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::InvalidConfigFile(format!("duplicate {what} id `{id}`")));
        }
    }
    Ok(())
}
