//! Encounter-log ingestion: CSV parsing, validation, deduplication, and
//! fixed-width temporal segmentation.
//!
//! Input CSV contract: header required, columns exactly
//! `encounter_id,provider_id,role,day_index,phase,complication_count`,
//! UTF-8, comma-delimited, no embedded commas in ids. Lines starting with
//! `#` are treated as comments and skipped, so files produced by the
//! pipeline (which carry a manifest-hash comment header) re-ingest cleanly.

mod synth;

pub use synth::{generate_synthetic, SynthConfig};

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::ops::Range;
use thiserror::Error;

/// Provider role. Unknown tokens are mapped to `Other` at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Surgeon,
    Anesthesiologist,
    Nurse,
    Physician,
    Other,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::Surgeon,
        Role::Anesthesiologist,
        Role::Nurse,
        Role::Physician,
        Role::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Surgeon => "surgeon",
            Role::Anesthesiologist => "anesthesiologist",
            Role::Nurse => "nurse",
            Role::Physician => "physician",
            Role::Other => "other",
        }
    }

    /// Strict token match; anything else is `None` (callers map to `Other`).
    fn from_token(tok: &str) -> Option<Role> {
        match tok {
            "surgeon" => Some(Role::Surgeon),
            "anesthesiologist" => Some(Role::Anesthesiologist),
            "nurse" => Some(Role::Nurse),
            "physician" => Some(Role::Physician),
            "other" => Some(Role::Other),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Care phase an encounter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Intra,
    Post,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Intra => "intra",
            Phase::Post => "post",
        }
    }

    pub fn from_token(tok: &str) -> Option<Phase> {
        match tok {
            "intra" => Some(Phase::Intra),
            "post" => Some(Phase::Post),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One provider's participation in one encounter.
///
/// All records sharing an `(encounter_id, phase)` key carry the same
/// `day_index` and `complication_count`; `dedupe` enforces this.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub encounter_id: String,
    pub provider_id: String,
    pub role: Role,
    pub day_index: u32,
    pub phase: Phase,
    pub complication_count: u32,
}

pub const CSV_HEADER: &str = "encounter_id,provider_id,role,day_index,phase,complication_count";

const EXPECTED_COLUMNS: [&str; 6] = [
    "encounter_id",
    "provider_id",
    "role",
    "day_index",
    "phase",
    "complication_count",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("empty input: no header row found")]
    EmptyInput,
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },
    #[error("malformed row at line {line}: {msg}")]
    MalformedRow { line: u64, msg: String },
    #[error("conflicting {field} for encounter `{encounter_id}` ({phase}): {left} vs {right}")]
    ConflictingEncounter {
        encounter_id: String,
        phase: Phase,
        field: &'static str,
        left: u32,
        right: u32,
    },
    #[error("window_days must be > 0")]
    ZeroWindow,
    #[error("horizon_days ({horizon}) must be a positive multiple of window_days ({window})")]
    HorizonNotMultiple { horizon: u32, window: u32 },
    #[error(
        "{count} record(s) beyond horizon day {horizon} (encounters: {})",
        encounters.join(", ")
    )]
    BeyondHorizon {
        horizon: u32,
        count: usize,
        encounters: Vec<String>,
    },
    #[error("synthetic config: {0}")]
    InvalidSynthConfig(String),
    #[error("empty provider pool for required role `{0}`")]
    EmptyPool(Role),
}

/// Result of `parse_events`: records in row order plus a count of rows whose
/// role token was unknown and mapped to `other`.
#[derive(Debug)]
pub struct ParseOutcome {
    pub records: Vec<EventRecord>,
    pub unknown_role_warnings: usize,
}

/// Parse an encounter-log CSV from any reader.
///
/// Every well-formed row becomes one record, in row order. A malformed row
/// (wrong field count, unparsable integer, unknown phase) aborts with the
/// offending line number. Unknown role tokens do not abort: they map to
/// `Role::Other` and bump `unknown_role_warnings`.
pub fn parse_events<R: Read>(source: R) -> Result<ParseOutcome, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| match e.position() {
            Some(p) => IngestError::MalformedRow {
                line: p.line(),
                msg: e.to_string(),
            },
            None => IngestError::EmptyInput,
        })?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(IngestError::EmptyInput);
    }
    let found: Vec<&str> = headers.iter().collect();
    if found != EXPECTED_COLUMNS {
        return Err(IngestError::HeaderMismatch {
            expected: CSV_HEADER.to_string(),
            found: found.join(","),
        });
    }

    let mut records = Vec::new();
    let mut unknown_role_warnings = 0usize;
    for row in reader.records() {
        let row = row.map_err(|e| IngestError::MalformedRow {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != EXPECTED_COLUMNS.len() {
            return Err(IngestError::MalformedRow {
                line,
                msg: format!("expected 6 fields, found {}", row.len()),
            });
        }
        let field = |idx: usize| row.get(idx).unwrap_or_default();
        let role = match Role::from_token(field(2)) {
            Some(r) => r,
            None => {
                unknown_role_warnings += 1;
                Role::Other
            }
        };
        let day_index: u32 = field(3).parse().map_err(|_| IngestError::MalformedRow {
            line,
            msg: format!("day_index `{}` is not a non-negative integer", field(3)),
        })?;
        let phase = Phase::from_token(field(4)).ok_or_else(|| IngestError::MalformedRow {
            line,
            msg: format!("phase `{}` is not one of intra|post", field(4)),
        })?;
        let complication_count: u32 =
            field(5).parse().map_err(|_| IngestError::MalformedRow {
                line,
                msg: format!(
                    "complication_count `{}` is not a non-negative integer",
                    field(5)
                ),
            })?;
        if field(0).is_empty() || field(1).is_empty() {
            return Err(IngestError::MalformedRow {
                line,
                msg: "encounter_id and provider_id must be non-empty".to_string(),
            });
        }
        records.push(EventRecord {
            encounter_id: field(0).to_string(),
            provider_id: field(1).to_string(),
            role,
            day_index,
            phase,
            complication_count,
        });
    }
    Ok(ParseOutcome {
        records,
        unknown_role_warnings,
    })
}

/// Result of `dedupe`: surviving records (first occurrence kept, order
/// preserved) plus the number of removed duplicates.
#[derive(Debug)]
pub struct DedupeOutcome {
    pub records: Vec<EventRecord>,
    pub removed: usize,
}

/// Collapse exact-duplicate `(encounter_id, provider_id)` pairs within the
/// same phase, keeping the first occurrence.
///
/// Also enforces encounter consistency: all records of one
/// `(encounter_id, phase)` must agree on `day_index` and
/// `complication_count`, otherwise the encounter is named in the error.
pub fn dedupe(records: Vec<EventRecord>) -> Result<DedupeOutcome, IngestError> {
    let mut seen: HashMap<(String, String, Phase), ()> = HashMap::with_capacity(records.len());
    let mut encounter_fields: HashMap<(String, Phase), (u32, u32)> = HashMap::new();
    let mut out = Vec::with_capacity(records.len());
    let mut removed = 0usize;

    for rec in records {
        let enc_key = (rec.encounter_id.clone(), rec.phase);
        match encounter_fields.get(&enc_key) {
            Some(&(day, comp)) => {
                if day != rec.day_index {
                    return Err(IngestError::ConflictingEncounter {
                        encounter_id: rec.encounter_id,
                        phase: rec.phase,
                        field: "day_index",
                        left: day,
                        right: rec.day_index,
                    });
                }
                if comp != rec.complication_count {
                    return Err(IngestError::ConflictingEncounter {
                        encounter_id: rec.encounter_id,
                        phase: rec.phase,
                        field: "complication_count",
                        left: comp,
                        right: rec.complication_count,
                    });
                }
            }
            None => {
                encounter_fields.insert(enc_key, (rec.day_index, rec.complication_count));
            }
        }
        let key = (rec.encounter_id.clone(), rec.provider_id.clone(), rec.phase);
        if seen.insert(key, ()).is_some() {
            removed += 1;
        } else {
            out.push(rec);
        }
    }
    Ok(DedupeOutcome {
        records: out,
        removed,
    })
}

/// One fixed-width temporal slice of the record stream.
#[derive(Debug, Clone)]
pub struct Segment {
    pub index: usize,
    /// Half-open day interval `[window*index, window*(index+1))`.
    pub day_range: Range<u32>,
    pub records: Vec<EventRecord>,
}

pub const DEFAULT_WINDOW_DAYS: u32 = 100;
pub const DEFAULT_HORIZON_DAYS: u32 = 1300;

/// Partition records into `horizon_days / window_days` half-open windows.
///
/// Records at or beyond the horizon are rejected (not dropped), listing the
/// offending encounter ids. Empty segments are permitted.
pub fn segment(
    records: Vec<EventRecord>,
    window_days: u32,
    horizon_days: u32,
) -> Result<Vec<Segment>, IngestError> {
    if window_days == 0 {
        return Err(IngestError::ZeroWindow);
    }
    if horizon_days == 0 || horizon_days % window_days != 0 {
        return Err(IngestError::HorizonNotMultiple {
            horizon: horizon_days,
            window: window_days,
        });
    }
    let n_segments = (horizon_days / window_days) as usize;

    let beyond: Vec<&EventRecord> = records
        .iter()
        .filter(|r| r.day_index >= horizon_days)
        .collect();
    if !beyond.is_empty() {
        let mut encounters: Vec<String> =
            beyond.iter().map(|r| r.encounter_id.clone()).collect();
        encounters.sort();
        encounters.dedup();
        let count = beyond.len();
        encounters.truncate(8);
        return Err(IngestError::BeyondHorizon {
            horizon: horizon_days,
            count,
            encounters,
        });
    }

    let mut segments: Vec<Segment> = (0..n_segments)
        .map(|i| Segment {
            index: i,
            day_range: (window_days * i as u32)..(window_days * (i as u32 + 1)),
            records: Vec::new(),
        })
        .collect();
    for rec in records {
        let idx = (rec.day_index / window_days) as usize;
        segments[idx].records.push(rec);
    }
    Ok(segments)
}

/// Serialize records to the input CSV format (header, then one row per
/// record in order). The writer receives exactly the bytes `parse_events`
/// accepts, so synth output round-trips.
pub fn write_events_csv<W: std::io::Write>(
    mut w: W,
    records: &[EventRecord],
) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.encounter_id, r.provider_id, r.role, r.day_index, r.phase, r.complication_count
        )?;
    }
    Ok(())
}
