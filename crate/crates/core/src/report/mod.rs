//! Report generation and the audit pipeline behind the CLI.

pub mod encoder;
pub mod manifest;
pub mod render;
pub mod stage1;
pub mod stage2;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoder::EmbeddingSet;
use crate::error::{Error, Result};
use crate::ledger::wire::{read_ledger_file, write_records};
use crate::ledger::{simulate, ContinuityPolicy, Ledger, OutcomeMode, StatsOptions, UtteranceRecord};
use crate::prompt_space::{enumerate_bi, enumerate_tri, enumerate_univariate, AuditConfig, CompositionalSeedSet, InstructionJob};

pub use encoder::{run_encoder_report, EncoderReport};
pub use manifest::AuditManifest;
pub use stage1::{run_stage1, Stage1Outcome, Stage1Report};
pub use stage2::{classify_paradigm, run_stage2, Paradigm, ParadigmVerdict, Stage2Report};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run metadata stamped on every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub toolkit: String,
    pub version: String,
    pub manifest_sha256: String,
    pub seed: u64,
    pub iterations: usize,
    pub outcome: OutcomeMode,
    pub continuity: ContinuityPolicy,
}

/// A loaded manifest together with its prompt-space config.
pub struct Audit {
    pub manifest: AuditManifest,
    pub config: AuditConfig,
}

impl Audit {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_manifest(AuditManifest::load(path)?)
    }

    pub fn from_manifest(manifest: AuditManifest) -> Result<Self> {
        manifest.check_paths()?;
        let config = match &manifest.config {
            Some(p) => AuditConfig::load(p)?,
            None => AuditConfig::default_config(),
        };
        Ok(Audit { manifest, config })
    }

    pub fn options(&self) -> StatsOptions {
        StatsOptions {
            outcome: self.manifest.outcome,
            continuity: ContinuityPolicy::Clamp,
        }
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            toolkit: env!("CARGO_PKG_NAME").to_string(),
            version: TOOLKIT_VERSION.to_string(),
            manifest_sha256: self.manifest.hash.clone(),
            seed: self.manifest.seed,
            iterations: self.manifest.iterations,
            outcome: self.manifest.outcome,
            continuity: ContinuityPolicy::Clamp,
        }
    }

    pub fn stage1_jobs(&self) -> Vec<InstructionJob> {
        enumerate_univariate(&self.config.lexicon, &self.config.sampling())
    }

    pub fn stage2_jobs(&self, seed_set: &CompositionalSeedSet) -> Vec<InstructionJob> {
        let sampling = self.config.sampling();
        let mut jobs = enumerate_bi(seed_set, &sampling);
        jobs.extend(enumerate_tri(seed_set, &sampling));
        jobs
    }

    /// Runs the manifest's oracle through both stages: Stage 1 jobs first,
    /// then the Stage 2 jobs for the seed set those results select.
    pub fn simulate(&self) -> Result<Vec<UtteranceRecord>> {
        let oracle = self
            .manifest
            .oracle
            .as_ref()
            .ok_or_else(|| Error::InvalidManifest("simulation needs an [oracle] section".into()))?;
        let mut records = simulate(oracle, &self.stage1_jobs());
        let ledger = Ledger::ingest(records.clone())?;
        let s1 = self.stage1(&ledger)?;
        records.extend(simulate(oracle, &self.stage2_jobs(&s1.seed_set)));
        Ok(records)
    }

    /// The manifest's ledgers merged, or a simulated ledger when none are
    /// listed and an oracle is configured.
    pub fn ledger(&self) -> Result<Ledger> {
        if self.manifest.ledgers.is_empty() {
            if self.manifest.oracle.is_some() {
                return Ledger::ingest(self.simulate()?);
            }
            return Err(Error::InvalidManifest("no ledgers listed and no [oracle] section".into()));
        }
        let mut ledgers = self.manifest.ledgers.iter().map(read_ledger_file);
        let first = ledgers.next().expect("non-empty")?;
        ledgers.try_fold(first, |acc, l| acc.merge(l?))
    }

    pub fn stage1(&self, ledger: &Ledger) -> Result<Stage1Outcome> {
        run_stage1(
            &self.config.lexicon,
            ledger,
            &self.options(),
            self.manifest.alpha,
            self.manifest.polar_k,
            self.provenance(),
        )
    }

    pub fn stage2(&self, ledger: &Ledger, stage1: &Stage1Outcome) -> Result<Stage2Report> {
        run_stage2(
            &stage1.report,
            &stage1.seed_set,
            ledger,
            &self.options(),
            self.manifest.iterations,
            self.manifest.seed,
            self.provenance(),
        )
    }

    pub fn embeddings(&self) -> Result<Vec<EmbeddingSet>> {
        self.manifest.embeddings.iter().map(EmbeddingSet::load).collect()
    }

    pub fn encoder(&self, stage1: Option<&Stage1Report>) -> Result<EncoderReport> {
        if self.manifest.embeddings.is_empty() {
            return Err(Error::InvalidManifest("no embeddings listed".into()));
        }
        run_encoder_report(&self.config, &self.embeddings()?, stage1, self.provenance())
    }
}

/// Writes report files into one directory and remembers what it wrote.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(OutputDir { dir, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn with_file(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        self.with_file(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, items: &[T]) -> Result<()> {
        self.with_file(name, |w| {
            for item in items {
                serde_json::to_writer(&mut *w, item)?;
                writeln!(w)?;
            }
            Ok(())
        })
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.with_file(name, |w| w.write_all(text.as_bytes()))
    }

    pub fn ledger(&mut self, name: &str, records: &[UtteranceRecord]) -> Result<()> {
        self.with_file(name, |w| write_records(w, records))
    }

    pub fn stage1(&mut self, report: &Stage1Report) -> Result<()> {
        self.json("stage1.json", report)?;
        self.text("stage1.txt", &render::stage1_table(report))
    }

    pub fn stage2(&mut self, report: &Stage2Report) -> Result<()> {
        self.json("stage2.json", report)?;
        self.jsonl("interactions.jsonl", &report.interactions)?;
        self.text("stage2.txt", &render::stage2_table(report))
    }

    pub fn encoder(&mut self, report: &EncoderReport) -> Result<()> {
        self.json("encoder.json", report)?;
        self.text("encoder.txt", &render::encoder_table(report))
    }
}
