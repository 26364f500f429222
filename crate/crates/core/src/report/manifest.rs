//! Audit manifest: which config, ledgers and embeddings to analyze, and with
//! which seed and permutation budget.
//!
//! ```toml
//! config = "config/default.toml"      # optional, bundled default otherwise
//! ledgers = ["runs/stage1.jsonl", "runs/stage2.jsonl"]
//! embeddings = ["emb/bert.tsv"]       # columns of the encoder table, in order
//! seed = 2024
//! iterations = 10000
//! output_dir = "out"
//! alpha = 0.05                        # Stage 1 stratification level
//! polar_k = 2                         # descriptors per polarity in Stage 2
//! outcome = "hard"                    # or "soft" to average probabilities
//!
//! [oracle]                            # optional synthetic classifier
//! noise = "bernoulli"
//! seed = 7
//! cue_weights = { nurse = 2.0 }
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interaction::MIN_ITERATIONS;
use crate::ledger::{OracleSpec, OutcomeMode};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    config: Option<PathBuf>,
    #[serde(default)]
    ledgers: Vec<PathBuf>,
    #[serde(default)]
    embeddings: Vec<PathBuf>,
    seed: u64,
    #[serde(default = "default_iterations")]
    iterations: usize,
    output_dir: PathBuf,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_k")]
    polar_k: usize,
    #[serde(default)]
    outcome: OutcomeMode,
    oracle: Option<OracleSpec>,
}

fn default_iterations() -> usize {
    10_000
}
fn default_alpha() -> f64 {
    0.05
}
fn default_k() -> usize {
    2
}

#[derive(Debug, Clone)]
pub struct AuditManifest {
    pub config: Option<PathBuf>,
    pub ledgers: Vec<PathBuf>,
    pub embeddings: Vec<PathBuf>,
    pub seed: u64,
    pub iterations: usize,
    pub output_dir: PathBuf,
    pub alpha: f64,
    pub polar_k: usize,
    pub outcome: OutcomeMode,
    pub oracle: Option<OracleSpec>,
    /// SHA-256 of the manifest bytes.
    pub hash: String,
}

impl AuditManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_bytes(&bytes, base)
    }

    pub fn from_bytes(bytes: &[u8], base: &Path) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::InvalidManifest(format!("not UTF-8: {e}")))?;
        let raw: RawManifest =
            toml::from_str(text).map_err(|e| Error::InvalidManifest(e.to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let manifest = AuditManifest {
            config: raw.config.map(resolve),
            ledgers: raw.ledgers.into_iter().map(resolve).collect(),
            embeddings: raw.embeddings.into_iter().map(resolve).collect(),
            seed: raw.seed,
            iterations: raw.iterations,
            output_dir: resolve(raw.output_dir),
            alpha: raw.alpha,
            polar_k: raw.polar_k,
            outcome: raw.outcome,
            oracle: raw.oracle,
            hash: hex::encode(Sha256::digest(bytes)),
        };
        manifest.validate_values()?;
        Ok(manifest)
    }

    fn validate_values(&self) -> Result<()> {
        if self.iterations < MIN_ITERATIONS {
            return Err(Error::TooFewIterations {
                requested: self.iterations,
                minimum: MIN_ITERATIONS,
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidManifest(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if self.polar_k == 0 {
            return Err(Error::InvalidManifest("polar_k must be positive".into()));
        }
        Ok(())
    }

    /// Every referenced input path must exist.
    pub fn check_paths(&self) -> Result<()> {
        self.validate_values()?;
        for p in self.config.iter().chain(&self.ledgers).chain(&self.embeddings) {
            if !p.exists() {
                return Err(Error::MissingPath(p.display().to_string()));
            }
        }
        Ok(())
    }
}
