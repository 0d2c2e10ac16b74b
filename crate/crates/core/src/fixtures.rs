//! Record builders with plain defaults, for tests and examples.
//!
//! Each builder fills the fields that rarely matter with fixed values
//! (department `general`, doctor `d1`, location `main`); override them with
//! struct update syntax.

use chrono::{NaiveDate, TimeZone, Utc};

use crate::domain::*;

/// Parses `YYYY-MM-DDTHH:MM[:SS]Z`. Panics on malformed input.
pub fn ts(text: &str) -> Timestamp {
    let body = text.strip_suffix('Z').unwrap_or(text);
    let naive = chrono::NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| chrono::NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M"))
        .unwrap_or_else(|e| panic!("bad timestamp '{text}': {e}"));
    Utc.from_utc_datetime(&naive)
}

pub fn date(text: &str) -> NaiveDate {
    NaiveDate::parse_from_str(text, "%Y-%m-%d").unwrap_or_else(|e| panic!("bad date '{text}': {e}"))
}

pub fn encounter(
    id: &str,
    kind: EncounterKind,
    admit: &str,
    discharge: Option<&str>,
) -> EncounterRecord {
    EncounterRecord {
        encounter_id: id.into(),
        patient_id: format!("p-{id}"),
        kind,
        admit_ts: ts(admit),
        discharge_ts: discharge.map(ts),
        department: "general".into(),
        doctor_id: "d1".into(),
        location: "main".into(),
        drg_code: None,
        planned: false,
        disposition: Disposition::Discharged,
    }
}

pub fn surgery(id: &str, encounter_id: &str, start: &str, end: &str) -> SurgeryRecord {
    SurgeryRecord {
        surgery_id: id.into(),
        encounter_id: encounter_id.into(),
        or_room_id: "or1".into(),
        scheduled_start: ts(start),
        actual_start: ts(start),
        actual_end: ts(end),
        procedure_code: "p0".into(),
        surgeon_id: "d1".into(),
        pre_op_minutes: 0,
    }
}

/// A completed appointment seen on arrival, or a no-show/cancellation with no times.
pub fn appointment(id: &str, scheduled: &str, status: AppointmentStatus) -> AppointmentRecord {
    let completed = status == AppointmentStatus::Completed;
    AppointmentRecord {
        appointment_id: id.into(),
        patient_id: format!("p-{id}"),
        scheduled_ts: ts(scheduled),
        arrival_ts: completed.then(|| ts(scheduled)),
        seen_ts: completed.then(|| ts(scheduled)),
        status,
        department: "general".into(),
        doctor_id: "d1".into(),
        rvu: Milli(1000),
    }
}

pub fn process_event(encounter_id: &str, stage: Stage, at: &str) -> ProcessEventRecord {
    ProcessEventRecord {
        encounter_id: encounter_id.into(),
        stage,
        ts: ts(at),
    }
}

pub fn txn(
    id: &str,
    at: &str,
    amount_minor: i64,
    category: TxnCategory,
    txn_type: TxnType,
) -> FinancialTxn {
    FinancialTxn {
        txn_id: id.into(),
        ts: ts(at),
        amount_minor,
        category,
        txn_type,
        department: "general".into(),
        location: "main".into(),
        doctor_id: None,
        encounter_id: None,
        channel: None,
        received_ts: None,
        deposited_ts: None,
    }
}

pub fn claim(
    id: &str,
    encounter_id: &str,
    discharge: &str,
    status: ClaimStatus,
    billed: i64,
    paid: i64,
) -> ClaimRecord {
    ClaimRecord {
        claim_id: id.into(),
        encounter_id: encounter_id.into(),
        discharge_ts: ts(discharge),
        billed_ts: None,
        submitted_ts: None,
        status,
        amount_billed_minor: billed,
        amount_paid_minor: paid,
        denial_reason: (status == ClaimStatus::Denied).then(|| "not covered".to_string()),
    }
}

/// A snapshot with every figure zero and one share outstanding.
pub fn balance(as_of: &str) -> BalanceSnapshot {
    BalanceSnapshot {
        as_of_date: date(as_of),
        cash_minor: 0,
        current_assets_minor: 0,
        current_liabilities_minor: 0,
        total_liabilities_minor: 0,
        shareholders_equity_minor: 0,
        total_assets_minor: 0,
        capital_employed_minor: 0,
        debtors_minor: 0,
        shares_outstanding: 1,
    }
}

pub fn survey(
    id: &str,
    at: &str,
    respondent: Respondent,
    category: SurveyCategory,
    score: i64,
) -> SurveyResponse {
    SurveyResponse {
        response_id: id.into(),
        encounter_id: None,
        ts: ts(at),
        respondent,
        category,
        question_code: "q1".into(),
        score,
    }
}

pub fn incident(id: &str, at: &str, category: IncidentCategory) -> IncidentRecord {
    IncidentRecord {
        incident_id: id.into(),
        ts: ts(at),
        department: "general".into(),
        category,
        severity: Severity::Low,
        resolved_ts: None,
    }
}

/// A transplanted case with the given cold ischemia time and a successful outcome.
pub fn transplant(id: &str, listed: &str, transplanted: &str, cit_minutes: i64) -> TransplantCase {
    TransplantCase {
        case_id: id.into(),
        organ: "kidney".into(),
        listed_ts: ts(listed),
        status: TransplantStatus::Transplanted,
        transplant_ts: Some(ts(transplanted)),
        cold_ischemia_minutes: Some(cit_minutes),
        donor_type: Some(DonorType::Deceased),
        outcome: Some(Outcome::Success),
    }
}

pub fn capacity(resource: Resource, on: &str, units: i64) -> CapacityRecord {
    CapacityRecord {
        resource,
        department: Some("general".into()),
        date: date(on),
        available_units: units,
        available_minutes: None,
    }
}

pub fn staff(id: &str, fte: Milli) -> StaffRecord {
    StaffRecord {
        staff_id: id.into(),
        role: StaffRole::Doctor,
        fte_fraction: fte,
        department: "general".into(),
    }
}

pub fn divert(id: &str, start: &str, minutes: i64) -> DivertEventRecord {
    DivertEventRecord {
        divert_id: id.into(),
        start_ts: ts(start),
        duration_minutes: minutes,
        reason: "full".into(),
    }
}
