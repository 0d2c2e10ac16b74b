//! Parsing, persistence and synthetic generation of record batches.

mod parse;
mod store;
mod synth;

pub use parse::{
    parse_json_line, parse_records, to_jsonl, write_csv, Format, LineError, ParseFailure,
    RecordBatch,
};
pub use store::{EventStore, IngestSummary, Rejection, StoreError};
pub use synth::{generate_synthetic, SynthConfig, SynthConfigError, SYNTH_START_YEAR};
