//! Line-delimited JSON ledger format shared with the model adapter.
//!
//! One utterance per line:
//!
//! ```text
//! {"schema":"compbias.ledger/v1","condition_id":"…","sample_index":0,"template_id":"t01","transcript_id":"c01","female_prob":0.83}
//! {"schema":"compbias.ledger/v1","condition_id":"…","sample_index":1,"template_id":"t01","transcript_id":"c02","label":"Female"}
//! ```
//!
//! Exactly one of `female_prob` and `label` is present. Unknown fields and a
//! missing or different `schema` tag are schema violations.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{GenderLabel, Ledger, LedgerBuilder, Outcome, UtteranceRecord};

pub const LEDGER_SCHEMA: &str = "compbias.ledger/v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    schema: String,
    condition_id: String,
    sample_index: u64,
    template_id: String,
    transcript_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    female_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<GenderLabel>,
}

pub fn parse_line(line: &str, line_no: usize) -> Result<UtteranceRecord> {
    let violation = |reason: String| Error::SchemaViolation {
        line: line_no,
        reason,
    };
    let wire: WireRecord = serde_json::from_str(line).map_err(|e| violation(e.to_string()))?;
    if wire.schema != LEDGER_SCHEMA {
        return Err(violation(format!(
            "schema tag `{}`, expected `{LEDGER_SCHEMA}`",
            wire.schema
        )));
    }
    let outcome = match (wire.female_prob, wire.label) {
        (Some(p), None) => Outcome::Probability(p),
        (None, Some(l)) => Outcome::Label(l),
        (Some(_), Some(_)) => return Err(violation("both female_prob and label present".into())),
        (None, None) => return Err(violation("neither female_prob nor label present".into())),
    };
    Ok(UtteranceRecord {
        condition_id: wire.condition_id,
        sample_index: wire.sample_index,
        template_id: wire.template_id,
        transcript_id: wire.transcript_id,
        outcome,
    })
}

pub fn to_line(record: &UtteranceRecord) -> String {
    let (female_prob, label) = match record.outcome {
        Outcome::Probability(p) => (Some(p), None),
        Outcome::Label(l) => (None, Some(l)),
    };
    let wire = WireRecord {
        schema: LEDGER_SCHEMA.to_string(),
        condition_id: record.condition_id.clone(),
        sample_index: record.sample_index,
        template_id: record.template_id.clone(),
        transcript_id: record.transcript_id.clone(),
        female_prob,
        label,
    };
    serde_json::to_string(&wire).expect("ledger record serializes")
}

/// Streams and validates a ledger. Blank lines are skipped.
pub fn read_ledger(reader: impl BufRead) -> Result<Ledger> {
    let mut builder = LedgerBuilder::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::SchemaViolation {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        builder.push(parse_line(&line, i + 1)?, i + 1)?;
    }
    Ok(builder.finish())
}

pub fn read_ledger_file(path: impl AsRef<Path>) -> Result<Ledger> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_ledger(std::io::BufReader::new(file))
}

/// Validation pass that collects every error instead of stopping at the first.
pub fn validate_ledger(reader: impl BufRead) -> Vec<Error> {
    let mut builder = LedgerBuilder::default();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        match line {
            Ok(l) if l.trim().is_empty() => {}
            Ok(l) => {
                if let Err(e) = parse_line(&l, i + 1).and_then(|r| builder.push(r, i + 1)) {
                    errors.push(e);
                }
            }
            Err(e) => errors.push(Error::SchemaViolation {
                line: i + 1,
                reason: e.to_string(),
            }),
        }
    }
    errors
}

pub fn write_records<'a>(
    mut out: impl Write,
    records: impl IntoIterator<Item = &'a UtteranceRecord>,
) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", to_line(r))?;
    }
    Ok(())
}
