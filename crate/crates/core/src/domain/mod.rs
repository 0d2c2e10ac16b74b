//! Record types ingested by the engine and their validation rules.
//!
//! All records are immutable values; money is always integer minor units
//! and timestamps are UTC.

mod enums;
mod fixed;
mod records;
mod validate;

pub use enums::*;
pub use fixed::Milli;
pub use records::*;
pub use validate::{validate_record, ValidationReport, Violation};

use crate::number::{ratio, Number};

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("encounter still open: {0} has no discharge_ts")]
    EncounterOpen(String),
}

/// Length of stay in days, exact (`seconds / 86400`).
pub fn length_of_stay(encounter: &EncounterRecord) -> Result<Number, DomainError> {
    let discharge = encounter
        .discharge_ts
        .ok_or_else(|| DomainError::EncounterOpen(encounter.encounter_id.clone()))?;
    let seconds = (discharge - encounter.admit_ts).num_seconds();
    Ok(ratio(seconds as i128, SECONDS_PER_DAY as i128))
}
