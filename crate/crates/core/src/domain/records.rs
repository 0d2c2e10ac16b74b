use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::enums::*;
use super::fixed::Milli;

pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncounterRecord {
    pub encounter_id: String,
    pub patient_id: String,
    pub kind: EncounterKind,
    pub admit_ts: Timestamp,
    #[serde(default)]
    pub discharge_ts: Option<Timestamp>,
    pub department: String,
    pub doctor_id: String,
    pub location: String,
    #[serde(default)]
    pub drg_code: Option<String>,
    pub planned: bool,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurgeryRecord {
    pub surgery_id: String,
    pub encounter_id: String,
    pub or_room_id: String,
    pub scheduled_start: Timestamp,
    pub actual_start: Timestamp,
    pub actual_end: Timestamp,
    pub procedure_code: String,
    pub surgeon_id: String,
    pub pre_op_minutes: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppointmentRecord {
    pub appointment_id: String,
    pub patient_id: String,
    pub scheduled_ts: Timestamp,
    #[serde(default)]
    pub arrival_ts: Option<Timestamp>,
    #[serde(default)]
    pub seen_ts: Option<Timestamp>,
    pub status: AppointmentStatus,
    pub department: String,
    pub doctor_id: String,
    pub rvu: Milli,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessEventRecord {
    pub encounter_id: String,
    pub stage: Stage,
    pub ts: Timestamp,
}

/// A money movement. `amount_minor` is in minor currency units (cents, paise).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinancialTxn {
    pub txn_id: String,
    pub ts: Timestamp,
    pub amount_minor: i64,
    pub category: TxnCategory,
    pub txn_type: TxnType,
    pub department: String,
    pub location: String,
    #[serde(default)]
    pub doctor_id: Option<String>,
    #[serde(default)]
    pub encounter_id: Option<String>,
    #[serde(default)]
    pub channel: Option<Channel>,
    #[serde(default)]
    pub received_ts: Option<Timestamp>,
    #[serde(default)]
    pub deposited_ts: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimRecord {
    pub claim_id: String,
    pub encounter_id: String,
    pub discharge_ts: Timestamp,
    #[serde(default)]
    pub billed_ts: Option<Timestamp>,
    #[serde(default)]
    pub submitted_ts: Option<Timestamp>,
    pub status: ClaimStatus,
    pub amount_billed_minor: i64,
    pub amount_paid_minor: i64,
    #[serde(default)]
    pub denial_reason: Option<String>,
}

/// Point-in-time balance sheet figures, all in minor currency units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalanceSnapshot {
    pub as_of_date: NaiveDate,
    pub cash_minor: i64,
    pub current_assets_minor: i64,
    pub current_liabilities_minor: i64,
    pub total_liabilities_minor: i64,
    pub shareholders_equity_minor: i64,
    pub total_assets_minor: i64,
    pub capital_employed_minor: i64,
    pub debtors_minor: i64,
    pub shares_outstanding: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyResponse {
    pub response_id: String,
    #[serde(default)]
    pub encounter_id: Option<String>,
    pub ts: Timestamp,
    pub respondent: Respondent,
    pub category: SurveyCategory,
    pub question_code: String,
    pub score: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentRecord {
    pub incident_id: String,
    pub ts: Timestamp,
    pub department: String,
    pub category: IncidentCategory,
    pub severity: Severity,
    #[serde(default)]
    pub resolved_ts: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransplantCase {
    pub case_id: String,
    pub organ: String,
    pub listed_ts: Timestamp,
    pub status: TransplantStatus,
    #[serde(default)]
    pub transplant_ts: Option<Timestamp>,
    #[serde(default)]
    pub cold_ischemia_minutes: Option<i64>,
    #[serde(default)]
    pub donor_type: Option<DonorType>,
    #[serde(default)]
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityRecord {
    pub resource: Resource,
    #[serde(default)]
    pub department: Option<String>,
    pub date: NaiveDate,
    pub available_units: i64,
    #[serde(default)]
    pub available_minutes: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaffRecord {
    pub staff_id: String,
    pub role: StaffRole,
    pub fte_fraction: Milli,
    pub department: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivertEventRecord {
    pub divert_id: String,
    pub start_ts: Timestamp,
    pub duration_minutes: i64,
    pub reason: String,
}

string_enum! {
    /// The external type tag of every ingestible record.
    pub enum RecordKind: "record type" {
        Encounter => "encounter",
        Surgery => "surgery",
        Appointment => "appointment",
        ProcessEvent => "process_event",
        Txn => "txn",
        Claim => "claim",
        Balance => "balance",
        Survey => "survey",
        Incident => "incident",
        Transplant => "transplant",
        Capacity => "capacity",
        Staff => "staff",
        Divert => "divert",
    }
}

/// Any ingestible record, tagged by `type` in its JSON form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Record {
    #[serde(rename = "encounter")]
    Encounter(EncounterRecord),
    #[serde(rename = "surgery")]
    Surgery(SurgeryRecord),
    #[serde(rename = "appointment")]
    Appointment(AppointmentRecord),
    #[serde(rename = "process_event")]
    ProcessEvent(ProcessEventRecord),
    #[serde(rename = "txn")]
    Txn(FinancialTxn),
    #[serde(rename = "claim")]
    Claim(ClaimRecord),
    #[serde(rename = "balance")]
    Balance(BalanceSnapshot),
    #[serde(rename = "survey")]
    Survey(SurveyResponse),
    #[serde(rename = "incident")]
    Incident(IncidentRecord),
    #[serde(rename = "transplant")]
    Transplant(TransplantCase),
    #[serde(rename = "capacity")]
    Capacity(CapacityRecord),
    #[serde(rename = "staff")]
    Staff(StaffRecord),
    #[serde(rename = "divert")]
    Divert(DivertEventRecord),
}

/// Primary key of a record; duplicates are rejected at ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecordKey {
    Id(RecordKind, String),
    ProcessEvent(String, Stage),
    Balance(NaiveDate),
    Capacity(Resource, Option<String>, NaiveDate),
}

impl Record {
    pub fn kind(&self) -> RecordKind {
        match self {
            Record::Encounter(_) => RecordKind::Encounter,
            Record::Surgery(_) => RecordKind::Surgery,
            Record::Appointment(_) => RecordKind::Appointment,
            Record::ProcessEvent(_) => RecordKind::ProcessEvent,
            Record::Txn(_) => RecordKind::Txn,
            Record::Claim(_) => RecordKind::Claim,
            Record::Balance(_) => RecordKind::Balance,
            Record::Survey(_) => RecordKind::Survey,
            Record::Incident(_) => RecordKind::Incident,
            Record::Transplant(_) => RecordKind::Transplant,
            Record::Capacity(_) => RecordKind::Capacity,
            Record::Staff(_) => RecordKind::Staff,
            Record::Divert(_) => RecordKind::Divert,
        }
    }

    pub fn key(&self) -> RecordKey {
        let id = |s: &String| RecordKey::Id(self.kind(), s.clone());
        match self {
            Record::Encounter(r) => id(&r.encounter_id),
            Record::Surgery(r) => id(&r.surgery_id),
            Record::Appointment(r) => id(&r.appointment_id),
            Record::ProcessEvent(r) => RecordKey::ProcessEvent(r.encounter_id.clone(), r.stage),
            Record::Txn(r) => id(&r.txn_id),
            Record::Claim(r) => id(&r.claim_id),
            Record::Balance(r) => RecordKey::Balance(r.as_of_date),
            Record::Survey(r) => id(&r.response_id),
            Record::Incident(r) => id(&r.incident_id),
            Record::Transplant(r) => id(&r.case_id),
            Record::Capacity(r) => RecordKey::Capacity(r.resource, r.department.clone(), r.date),
            Record::Staff(r) => id(&r.staff_id),
            Record::Divert(r) => id(&r.divert_id),
        }
    }

    /// The record as a single-line JSON object carrying its `type` tag.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

macro_rules! impl_from_record {
    ($($variant:ident($ty:ty)),+ $(,)?) => {
        $(impl From<$ty> for Record {
            fn from(r: $ty) -> Self {
                Record::$variant(r)
            }
        })+
    };
}

impl_from_record!(
    Encounter(EncounterRecord),
    Surgery(SurgeryRecord),
    Appointment(AppointmentRecord),
    ProcessEvent(ProcessEventRecord),
    Txn(FinancialTxn),
    Claim(ClaimRecord),
    Balance(BalanceSnapshot),
    Survey(SurveyResponse),
    Incident(IncidentRecord),
    Transplant(TransplantCase),
    Capacity(CapacityRecord),
    Staff(StaffRecord),
    Divert(DivertEventRecord),
);
