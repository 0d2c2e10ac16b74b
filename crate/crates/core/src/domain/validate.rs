use serde::Serialize;

use super::enums::*;
use super::records::*;

/// One broken invariant on a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Field paths involved, in declaration order.
    pub fields: Vec<&'static str>,
    pub message: String,
}

/// Result of [`validate_record`]. Empty means the record is well formed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, fields: &[&'static str], message: impl Into<String>) {
        self.violations.push(Violation {
            fields: fields.to_vec(),
            message: message.into(),
        });
    }

    fn non_empty(&mut self, field: &'static str, value: &str) {
        if value.trim().is_empty() {
            self.push(&[field], format!("{field} must not be empty"));
        }
    }

    fn not_before(&mut self, later: &'static str, earlier: &'static str, ok: bool) {
        if !ok {
            self.push(&[later, earlier], format!("{later} precedes {earlier}"));
        }
    }

    fn non_negative(&mut self, field: &'static str, value: i64) {
        if value < 0 {
            self.push(&[field], format!("{field} must be non-negative"));
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.fields.join(","), v.message))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks every type invariant of `record`. Violations are data, never errors.
pub fn validate_record(record: &Record) -> ValidationReport {
    let mut report = ValidationReport::default();
    let r = &mut report;
    match record {
        Record::Encounter(e) => {
            r.non_empty("encounter_id", &e.encounter_id);
            r.non_empty("patient_id", &e.patient_id);
            r.non_empty("doctor_id", &e.doctor_id);
            if let Some(discharge) = e.discharge_ts {
                r.not_before("discharge_ts", "admit_ts", discharge >= e.admit_ts);
            }
        }
        Record::Surgery(s) => {
            r.non_empty("surgery_id", &s.surgery_id);
            r.non_empty("encounter_id", &s.encounter_id);
            r.non_empty("surgeon_id", &s.surgeon_id);
            r.not_before("actual_end", "actual_start", s.actual_end >= s.actual_start);
            r.non_negative("pre_op_minutes", s.pre_op_minutes);
        }
        Record::Appointment(a) => {
            r.non_empty("appointment_id", &a.appointment_id);
            r.non_empty("patient_id", &a.patient_id);
            r.non_empty("doctor_id", &a.doctor_id);
            if a.rvu.0 < 0 {
                r.push(&["rvu"], "rvu must be non-negative");
            }
            match a.status {
                AppointmentStatus::Completed => match (a.arrival_ts, a.seen_ts) {
                    (Some(arrival), Some(seen)) => {
                        r.not_before("seen_ts", "arrival_ts", seen >= arrival)
                    }
                    _ => r.push(
                        &["status", "arrival_ts", "seen_ts"],
                        "completed appointment requires arrival_ts and seen_ts",
                    ),
                },
                AppointmentStatus::NoShow => {
                    if a.seen_ts.is_some() {
                        r.push(
                            &["status", "seen_ts"],
                            "no_show appointment cannot have seen_ts",
                        );
                    }
                }
                AppointmentStatus::Cancelled => {}
            }
        }
        Record::ProcessEvent(p) => r.non_empty("encounter_id", &p.encounter_id),
        Record::Txn(t) => {
            r.non_empty("txn_id", &t.txn_id);
            if t.amount_minor == 0 {
                r.push(&["amount_minor"], "amount_minor must be non-zero");
            }
            if let (Some(received), Some(deposited)) = (t.received_ts, t.deposited_ts) {
                r.not_before("deposited_ts", "received_ts", deposited >= received);
            }
        }
        Record::Claim(c) => {
            r.non_empty("claim_id", &c.claim_id);
            r.non_empty("encounter_id", &c.encounter_id);
            if c.amount_billed_minor <= 0 {
                r.push(
                    &["amount_billed_minor"],
                    "amount_billed_minor must be positive",
                );
            }
            r.non_negative("amount_paid_minor", c.amount_paid_minor);
            if c.amount_paid_minor > c.amount_billed_minor {
                r.push(
                    &["amount_paid_minor", "amount_billed_minor"],
                    "amount_paid_minor exceeds amount_billed_minor",
                );
            }
            if c.status == ClaimStatus::Denied
                && c.denial_reason
                    .as_deref()
                    .is_none_or(|s| s.trim().is_empty())
            {
                r.push(
                    &["status", "denial_reason"],
                    "denied claim requires denial_reason",
                );
            }
        }
        Record::Balance(b) => {
            if b.shares_outstanding <= 0 {
                r.push(
                    &["shares_outstanding"],
                    "shares_outstanding must be positive",
                );
            }
        }
        Record::Survey(s) => {
            r.non_empty("response_id", &s.response_id);
            if !(1..=5).contains(&s.score) {
                r.push(&["score"], "score out of [1,5]");
            }
            if s.respondent == Respondent::Rn && s.category != SurveyCategory::Nursing {
                r.push(
                    &["respondent", "category"],
                    "rn respondents only answer nursing questions",
                );
            }
        }
        Record::Incident(i) => {
            r.non_empty("incident_id", &i.incident_id);
            if let Some(resolved) = i.resolved_ts {
                r.not_before("resolved_ts", "ts", resolved >= i.ts);
            }
        }
        Record::Transplant(t) => {
            r.non_empty("case_id", &t.case_id);
            if t.status == TransplantStatus::Transplanted
                && (t.transplant_ts.is_none() || t.cold_ischemia_minutes.is_none())
            {
                r.push(
                    &["status", "transplant_ts", "cold_ischemia_minutes"],
                    "transplanted case requires transplant_ts and cold_ischemia_minutes",
                );
            }
            if let Some(ts) = t.transplant_ts {
                r.not_before("transplant_ts", "listed_ts", ts >= t.listed_ts);
            }
            if let Some(cit) = t.cold_ischemia_minutes {
                r.non_negative("cold_ischemia_minutes", cit);
            }
        }
        Record::Capacity(c) => {
            r.non_negative("available_units", c.available_units);
            if let Some(minutes) = c.available_minutes {
                r.non_negative("available_minutes", minutes);
            }
        }
        Record::Staff(s) => {
            r.non_empty("staff_id", &s.staff_id);
            if s.fte_fraction.0 <= 0 || s.fte_fraction.0 > 1000 {
                r.push(&["fte_fraction"], "fte_fraction out of (0,1]");
            }
        }
        Record::Divert(d) => {
            r.non_empty("divert_id", &d.divert_id);
            if d.duration_minutes <= 0 {
                r.push(&["duration_minutes"], "duration_minutes must be positive");
            }
        }
    }
    report
}
