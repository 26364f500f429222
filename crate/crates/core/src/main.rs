use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use compbias::ledger::wire::validate_ledger;
use compbias::report::{Audit, AuditManifest, OutputDir, Stage1Outcome};
use compbias::{Error, Result};

#[derive(Parser)]
#[command(name = "compbias", version, about = "Compositional gender-bias audit for instruction-guided TTS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Audit manifest (TOML).
    #[arg(long)]
    manifest: PathBuf,
    /// Override the manifest seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the permutation iteration count.
    #[arg(long)]
    iterations: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write Stage 1 jobs, and Stage 2 jobs when ledgers cover Stage 1.
    Enumerate(Common),
    /// Run the manifest's oracle over both stages and write its ledger.
    Simulate(Common),
    /// Per-descriptor rates, tiers and the Stage 2 seed set.
    Stage1(Common),
    /// Interaction terms, cells and the paradigm reading.
    Stage2(Common),
    /// Encoder association table.
    Encoder(Common),
    /// Every stage the manifest has inputs for.
    All(Common),
    /// Check a ledger file and list every schema violation.
    Validate {
        ledger: PathBuf,
    },
}

fn audit(c: &Common) -> Result<Audit> {
    let mut m = AuditManifest::load(&c.manifest)?;
    if let Some(s) = c.seed {
        m.seed = s;
    }
    if let Some(i) = c.iterations {
        m.iterations = i;
    }
    if let Some(o) = &c.out {
        m.output_dir = o.clone();
    }
    Audit::from_manifest(m)
}

fn stage1(a: &Audit, out: &mut OutputDir) -> Result<(compbias::ledger::Ledger, Stage1Outcome)> {
    let ledger = a.ledger()?;
    let s1 = a.stage1(&ledger)?;
    out.stage1(&s1.report)?;
    Ok((ledger, s1))
}

fn run(command: Command) -> Result<Vec<PathBuf>> {
    let (common, cmd) = match command {
        Command::Validate { ledger } => {
            let file = std::fs::File::open(&ledger).map_err(|e| Error::Io {
                path: ledger.display().to_string(),
                source: e,
            })?;
            let errors = validate_ledger(BufReader::new(file));
            return match errors.into_iter().next() {
                None => Ok(vec![ledger]),
                Some(first) => Err(first),
            };
        }
        Command::Enumerate(c) => (c, "enumerate"),
        Command::Simulate(c) => (c, "simulate"),
        Command::Stage1(c) => (c, "stage1"),
        Command::Stage2(c) => (c, "stage2"),
        Command::Encoder(c) => (c, "encoder"),
        Command::All(c) => (c, "all"),
    };
    let a = audit(&common)?;
    let mut out = OutputDir::create(&a.manifest.output_dir)?;
    match cmd {
        "enumerate" => {
            out.jsonl("jobs_stage1.jsonl", &a.stage1_jobs())?;
            if !a.manifest.ledgers.is_empty() {
                let s1 = a.stage1(&a.ledger()?)?;
                out.jsonl("jobs_stage2.jsonl", &a.stage2_jobs(&s1.seed_set))?;
            }
        }
        "simulate" => out.ledger("ledger_simulated.jsonl", &a.simulate()?)?,
        "stage1" => {
            stage1(&a, &mut out)?;
        }
        "stage2" => {
            let (ledger, s1) = stage1(&a, &mut out)?;
            out.stage2(&a.stage2(&ledger, &s1)?)?;
        }
        "encoder" => {
            let s1 = if a.manifest.ledgers.is_empty() && a.manifest.oracle.is_none() {
                None
            } else {
                Some(stage1(&a, &mut out)?.1)
            };
            out.encoder(&a.encoder(s1.as_ref().map(|s| &s.report))?)?;
        }
        _ => {
            out.jsonl("jobs_stage1.jsonl", &a.stage1_jobs())?;
            let ledger = if a.manifest.ledgers.is_empty() {
                let records = a.simulate()?;
                out.ledger("ledger_simulated.jsonl", &records)?;
                compbias::ledger::Ledger::ingest(records)?
            } else {
                a.ledger()?
            };
            let s1 = a.stage1(&ledger)?;
            out.stage1(&s1.report)?;
            out.jsonl("jobs_stage2.jsonl", &a.stage2_jobs(&s1.seed_set))?;
            out.stage2(&a.stage2(&ledger, &s1)?)?;
            if !a.manifest.embeddings.is_empty() {
                out.encoder(&a.encoder(Some(&s1.report))?)?;
            }
        }
    }
    Ok(out.written().to_vec())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(2)
        }
    }
}
