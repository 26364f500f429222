//! Tab-separated embedding file.
//!
//! ```text
//! compbias-embeddings/v1 encoder=bert-base-uncased dim=768 count=<rows>
//! trait nurse t01 0.013 -0.201 …
//! female she - …
//! male he - …
//! ```
//!
//! Fields are separated by single tabs, shown as spaces above. The header
//! carries the format tag, encoder name, vector dimension and row count.
//! Each row is `role`, `key`, `context` (`-` when absent) and exactly
//! `dim` components. Roles are `trait`, `female` and `male`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::prompt_space::config::Anchors;

use super::{delta, norm, ZERO_NORM};

pub const EMBEDDING_SCHEMA: &str = "compbias-embeddings/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Trait,
    Female,
    Male,
}

impl Role {
    fn parse(s: &str) -> Option<Role> {
        match s {
            "trait" => Some(Role::Trait),
            "female" => Some(Role::Female),
            "male" => Some(Role::Male),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Role::Trait => "trait",
            Role::Female => "female",
            Role::Male => "male",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub role: Role,
    pub key: String,
    pub context: Option<String>,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub encoder: String,
    pub dim: usize,
    pub rows: Vec<EmbeddingRow>,
}

impl EmbeddingSet {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let violation = |line: usize, reason: String| Error::SchemaViolation { line, reason };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::EmptyEmbeddingFile(source.to_string()))?;
        let mut fields = header.split('\t');
        if fields.next() != Some(EMBEDDING_SCHEMA) {
            return Err(violation(1, format!("header must start with `{EMBEDDING_SCHEMA}`")));
        }
        let (mut encoder, mut dim, mut count) = (None, None, None);
        for f in fields {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| violation(1, format!("bad header field `{f}`")))?;
            match k {
                "encoder" => encoder = Some(v.to_string()),
                "dim" => dim = v.parse::<usize>().ok(),
                "count" => count = v.parse::<usize>().ok(),
                _ => return Err(violation(1, format!("unknown header field `{k}`"))),
            }
        }
        let encoder = encoder.ok_or_else(|| violation(1, "missing encoder".into()))?;
        let dim = dim
            .filter(|&d| d > 0)
            .ok_or_else(|| violation(1, "missing or invalid dim".into()))?;
        let count = count.ok_or_else(|| violation(1, "missing or invalid count".into()))?;

        let mut rows = Vec::with_capacity(count);
        for (i, line) in lines {
            let line_no = i + 1;
            let mut cols = line.split('\t');
            let role = cols
                .next()
                .and_then(Role::parse)
                .ok_or_else(|| violation(line_no, "unknown role".into()))?;
            let key = cols
                .next()
                .filter(|k| !k.is_empty())
                .ok_or_else(|| violation(line_no, "missing key".into()))?
                .to_string();
            let context = match cols.next() {
                Some("-") => None,
                Some(c) if !c.is_empty() => Some(c.to_string()),
                _ => return Err(violation(line_no, "missing context column".into())),
            };
            let vector = cols
                .map(|c| c.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| violation(line_no, "non-numeric or non-finite component".into()))?;
            if vector.len() != dim {
                return Err(violation(
                    line_no,
                    format!("vector has {} components, header says {dim}", vector.len()),
                ));
            }
            if norm(&vector) <= ZERO_NORM {
                return Err(violation(line_no, "zero vector".into()));
            }
            rows.push(EmbeddingRow {
                role,
                key,
                context,
                vector,
            });
        }
        if rows.len() != count {
            return Err(violation(
                1,
                format!("header count {count} but {} rows", rows.len()),
            ));
        }
        let set = EmbeddingSet { encoder, dim, rows };
        if !set.rows.iter().any(|r| r.role == Role::Trait) {
            return Err(Error::EmptyEmbeddingFile(source.to_string()));
        }
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{EMBEDDING_SCHEMA}\tencoder={}\tdim={}\tcount={}\n",
            self.encoder,
            self.dim,
            self.rows.len()
        );
        for r in &self.rows {
            let _ = write!(
                out,
                "{}\t{}\t{}",
                r.role.as_str(),
                r.key,
                r.context.as_deref().unwrap_or("-")
            );
            for x in &r.vector {
                let _ = write!(out, "\t{x}");
            }
            out.push('\n');
        }
        out
    }

    fn vectors(&self, role: Role) -> Vec<&[f64]> {
        self.rows
            .iter()
            .filter(|r| r.role == role)
            .map(|r| r.vector.as_slice())
            .collect()
    }

    pub fn trait_vectors(&self, key: &str) -> Vec<&[f64]> {
        self.rows
            .iter()
            .filter(|r| r.role == Role::Trait && r.key == key)
            .map(|r| r.vector.as_slice())
            .collect()
    }

    /// Δ for one descriptor, averaged over its contextualizations.
    pub fn word_delta(&self, key: &str) -> Result<f64> {
        delta(
            &self.trait_vectors(key),
            &self.vectors(Role::Female),
            &self.vectors(Role::Male),
        )
    }

    /// One Δ per contextualization of `key`.
    pub fn context_deltas(&self, key: &str) -> Result<Vec<f64>> {
        let female = self.vectors(Role::Female);
        let male = self.vectors(Role::Male);
        self.trait_vectors(key)
            .into_iter()
            .map(|t| delta(&[t], &female, &male))
            .collect()
    }

    /// Errors unless every configured anchor word has at least one row.
    pub fn check_anchors(&self, anchors: &Anchors) -> Result<()> {
        for (role, words) in [(Role::Female, &anchors.female), (Role::Male, &anchors.male)] {
            for w in words {
                if !self.rows.iter().any(|r| r.role == role && &r.key == w) {
                    return Err(Error::MissingAnchor(w.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn with_swapped_anchors(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.rows {
            r.role = match r.role {
                Role::Female => Role::Male,
                Role::Male => Role::Female,
                Role::Trait => Role::Trait,
            };
        }
        out
    }
}
