use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};

use chrono::Utc;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::domain::{string_enum, Record, RecordKind, Timestamp};

string_enum! {
    pub enum Format: "format" {
        Jsonl => "jsonl",
        Csv => "csv",
    }
}

/// Records parsed from one source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordBatch {
    pub records: Vec<Record>,
    pub source_name: String,
    pub ingested_at: Timestamp,
}

impl RecordBatch {
    pub fn new(records: Vec<Record>, source_name: impl Into<String>) -> Self {
        RecordBatch {
            records,
            source_name: source_name.into(),
            ingested_at: Utc::now(),
        }
    }

    pub fn to_jsonl(&self) -> String {
        to_jsonl(&self.records)
    }
}

/// A line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseFailure {
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
    #[error("csv input needs a record type")]
    MissingRecordType,
    #[error("csv header: {0}")]
    Header(String),
}

/// Parses a JSONL stream (each line tagged by `type`) or a single-type CSV
/// file with a header row. Valid lines become records in input order; each
/// invalid line yields one [`LineError`]. Blank lines are skipped.
pub fn parse_records(
    input: impl Read,
    format: Format,
    record_type: Option<RecordKind>,
    source_name: &str,
) -> Result<(RecordBatch, Vec<LineError>), ParseFailure> {
    let (records, errors) = match format {
        Format::Jsonl => parse_jsonl(input)?,
        Format::Csv => parse_csv(input, record_type.ok_or(ParseFailure::MissingRecordType)?)?,
    };
    Ok((RecordBatch::new(records, source_name), errors))
}

fn parse_jsonl(input: impl Read) -> Result<(Vec<Record>, Vec<LineError>), ParseFailure> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line_no = idx + 1;
        let line = match line {
            Ok(line) => line,
            Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                errors.push(LineError {
                    line: line_no,
                    message: "invalid UTF-8".into(),
                });
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if line.trim().is_empty() {
            continue;
        }
        match parse_json_line(&line) {
            Ok(record) => records.push(record),
            Err(message) => errors.push(LineError {
                line: line_no,
                message,
            }),
        }
    }
    Ok((records, errors))
}

/// Parses one tagged JSON object.
pub fn parse_json_line(line: &str) -> Result<Record, String> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let tag = match value.get("type") {
        Some(serde_json::Value::String(tag)) => tag.clone(),
        Some(_) => return Err("field 'type' must be a string".into()),
        None => return Err("missing field 'type'".into()),
    };
    tag.parse::<RecordKind>().map_err(|e| e.to_string())?;
    serde_json::from_value(value).map_err(|e| format!("invalid {tag}: {e}"))
}

fn parse_csv(
    input: impl Read,
    kind: RecordKind,
) -> Result<(Vec<Record>, Vec<LineError>), ParseFailure> {
    fn rows<T: DeserializeOwned + Into<Record>>(
        reader: &mut csv::Reader<impl Read>,
    ) -> Result<(Vec<Record>, Vec<LineError>), ParseFailure> {
        let headers = reader
            .headers()
            .map_err(|e| ParseFailure::Header(e.to_string()))?
            .clone();
        let mut records = Vec::new();
        let mut errors = Vec::new();
        let mut raw = csv::StringRecord::new();
        loop {
            let line = reader.position().line() as usize;
            match reader.read_record(&mut raw) {
                Ok(false) => break,
                Ok(true) => {
                    let line = raw.position().map_or(line, |p| p.line() as usize);
                    if raw.iter().all(|f| f.trim().is_empty()) {
                        continue;
                    }
                    match raw.deserialize::<T>(Some(&headers)) {
                        Ok(r) => records.push(r.into()),
                        Err(e) => errors.push(LineError {
                            line,
                            message: csv_message(&e),
                        }),
                    }
                }
                Err(e) => match e.kind() {
                    csv::ErrorKind::Io(_) => {
                        return Err(ParseFailure::Io(io::Error::other(e.to_string())))
                    }
                    _ => errors.push(LineError {
                        line: e.position().map_or(line, |p| p.line() as usize),
                        message: csv_message(&e),
                    }),
                },
            }
        }
        Ok((records, errors))
    }

    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(input);
    use crate::domain::*;
    match kind {
        RecordKind::Encounter => rows::<EncounterRecord>(&mut reader),
        RecordKind::Surgery => rows::<SurgeryRecord>(&mut reader),
        RecordKind::Appointment => rows::<AppointmentRecord>(&mut reader),
        RecordKind::ProcessEvent => rows::<ProcessEventRecord>(&mut reader),
        RecordKind::Txn => rows::<FinancialTxn>(&mut reader),
        RecordKind::Claim => rows::<ClaimRecord>(&mut reader),
        RecordKind::Balance => rows::<BalanceSnapshot>(&mut reader),
        RecordKind::Survey => rows::<SurveyResponse>(&mut reader),
        RecordKind::Incident => rows::<IncidentRecord>(&mut reader),
        RecordKind::Transplant => rows::<TransplantCase>(&mut reader),
        RecordKind::Capacity => rows::<CapacityRecord>(&mut reader),
        RecordKind::Staff => rows::<StaffRecord>(&mut reader),
        RecordKind::Divert => rows::<DivertEventRecord>(&mut reader),
    }
}

fn csv_message(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(_) => err.to_string(),
            None => err.kind().to_string(),
        },
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    }
}

/// One JSON object per line, each tagged with its `type`.
pub fn to_jsonl(records: &[Record]) -> String {
    records.iter().map(|r| r.to_json_line() + "\n").collect()
}

/// Writes records of a single kind as CSV with a header row.
/// Panics if `records` mixes kinds.
pub fn write_csv(records: &[Record], out: impl Write) -> Result<(), csv::Error> {
    fn emit<T: Serialize>(w: &mut csv::Writer<impl Write>, r: &T) -> Result<(), csv::Error> {
        w.serialize(r)
    }
    let mut writer = csv::Writer::from_writer(out);
    let kind = records.first().map(Record::kind);
    for record in records {
        assert_eq!(
            Some(record.kind()),
            kind,
            "csv output holds one record type"
        );
        match record {
            Record::Encounter(r) => emit(&mut writer, r)?,
            Record::Surgery(r) => emit(&mut writer, r)?,
            Record::Appointment(r) => emit(&mut writer, r)?,
            Record::ProcessEvent(r) => emit(&mut writer, r)?,
            Record::Txn(r) => emit(&mut writer, r)?,
            Record::Claim(r) => emit(&mut writer, r)?,
            Record::Balance(r) => emit(&mut writer, r)?,
            Record::Survey(r) => emit(&mut writer, r)?,
            Record::Incident(r) => emit(&mut writer, r)?,
            Record::Transplant(r) => emit(&mut writer, r)?,
            Record::Capacity(r) => emit(&mut writer, r)?,
            Record::Staff(r) => emit(&mut writer, r)?,
            Record::Divert(r) => emit(&mut writer, r)?,
        }
    }
    writer.flush()?;
    Ok(())
}
