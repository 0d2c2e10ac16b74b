//! The named measures the engine aggregates from records.
//!
//! Every measure is an exact aggregate over one record type for one period
//! and dimension filter. KPI expressions combine them.

use std::collections::HashMap;
use std::sync::LazyLock;

use super::filter::{DimSet, Dimension};
use crate::domain::{IncidentCategory, RecordKind, Stage, SurveyCategory, SECONDS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    /// Number of records or observations.
    Count,
    /// Integer minor currency units.
    Money,
    /// Any other summed quantity (days, minutes, RVUs, FTEs, scores).
    Quantity,
    /// Point-in-time balance sheet figure; absent when no snapshot exists.
    Balance,
    /// Calendar facts about the period itself.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Respects the dimension filter; present only when the filter
    /// constrains nothing outside these dimensions.
    Filtered(DimSet),
    /// Ignores the filter (hospital-wide reference totals and constants).
    Global,
}

#[derive(Debug, Clone)]
pub struct MeasureSpec {
    pub name: String,
    pub kind: MeasureKind,
    pub scope: Scope,
    /// Level at the period end rather than a sum of events in the period.
    pub stock: bool,
    /// Accumulated integer units per reported unit (e.g. 86400 seconds per day).
    pub scale: i64,
    pub source: Option<RecordKind>,
}

impl MeasureSpec {
    pub fn is_summable(&self) -> bool {
        matches!(
            self.kind,
            MeasureKind::Count | MeasureKind::Money | MeasureKind::Quantity
        )
    }

    pub fn available_under(&self, filter_dims: DimSet) -> bool {
        match self.scope {
            Scope::Filtered(dims) => dims.is_superset(filter_dims),
            Scope::Global => true,
        }
    }
}

pub struct MeasureCatalog {
    specs: Vec<MeasureSpec>,
    index: HashMap<String, usize>,
}

impl MeasureCatalog {
    pub fn get(&self, name: &str) -> Option<&MeasureSpec> {
        self.index.get(name).map(|&i| &self.specs[i])
    }

    pub fn index_of(&self, name: &str) -> usize {
        *self
            .index
            .get(name)
            .unwrap_or_else(|| panic!("measure '{name}' is not in the catalog"))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn specs(&self) -> &[MeasureSpec] {
        &self.specs
    }
}

pub const ENCOUNTER_DIMS: DimSet = DimSet::of(&[
    Dimension::Department,
    Dimension::Doctor,
    Dimension::Location,
    Dimension::Drg,
]);
pub const APPOINTMENT_DIMS: DimSet = DimSet::of(&[Dimension::Department, Dimension::Doctor]);
pub const DEPARTMENT_ONLY: DimSet = DimSet::of(&[Dimension::Department]);
pub const ORGAN_ONLY: DimSet = DimSet::of(&[Dimension::Organ]);

pub const SECONDS_PER_MINUTE: i64 = 60;

pub const ER: &str = "er";
pub const NON_ER: &str = "non_er";

/// Adjacent stage pairs of the clinical and administrative pathways.
pub fn canonical_stage_pairs() -> Vec<(Stage, Stage)> {
    [Stage::CLINICAL, Stage::NON_CLINICAL]
        .iter()
        .flat_map(|seq| seq.windows(2).map(|w| (w[0], w[1])))
        .collect()
}

pub fn lag_kpi_id(from: Stage, to: Stage, cohort: &str) -> String {
    format!("lag_{from}_to_{to}_{cohort}")
}

pub fn lag_sum_measure(from: Stage, to: Stage, cohort: &str) -> String {
    format!("{}_minutes_sum", lag_kpi_id(from, to, cohort))
}

pub fn lag_samples_measure(from: Stage, to: Stage, cohort: &str) -> String {
    format!("{}_samples", lag_kpi_id(from, to, cohort))
}

pub static CATALOG: LazyLock<MeasureCatalog> = LazyLock::new(build_catalog);

fn build_catalog() -> MeasureCatalog {
    use MeasureKind::*;
    use RecordKind as K;

    let mut specs = Vec::new();
    let mut add = |name: &str, kind: MeasureKind, scope: Scope, scale: i64, source: Option<K>| {
        specs.push(MeasureSpec {
            name: name.to_string(),
            kind,
            scope,
            stock: false,
            scale,
            source,
        });
    };
    let enc = Scope::Filtered(ENCOUNTER_DIMS);
    let appt = Scope::Filtered(APPOINTMENT_DIMS);
    let dept = Scope::Filtered(DEPARTMENT_ONLY);
    let organ = Scope::Filtered(ORGAN_ONLY);
    let none = Scope::Filtered(DimSet::NONE);
    let day = SECONDS_PER_DAY;
    let min = SECONDS_PER_MINUTE;

    for name in [
        "revenue",
        "operating_expense",
        "fte_cost",
        "admin_cost",
        "overtime_cost",
        "referral_commission",
        "interest",
        "tax",
        "depreciation",
        "amortization",
        "operating_expense_total",
        "net_credit_sales",
        "pos_collection",
        "write_off_total",
    ] {
        add(name, Money, enc, 1, Some(K::Txn));
    }
    add("pos_payments", Count, enc, 1, Some(K::Txn));
    add("pos_deposit_compliant", Count, enc, 1, Some(K::Txn));

    for name in [
        "encounters",
        "admissions",
        "discharges",
        "readmits",
        "extended_stays",
        "long_stays",
        "er_presents",
        "er_admits",
        "ttt_samples",
        "registrations",
    ] {
        add(name, Count, enc, 1, Some(K::Encounter));
    }
    add("los_days_sum", Quantity, enc, day, Some(K::Encounter));
    add("patient_days", Quantity, enc, day, Some(K::Encounter));
    add("ttt_minutes_sum", Quantity, enc, min, Some(K::ProcessEvent));
    add(
        "registration_wait_minutes_sum",
        Quantity,
        enc,
        min,
        Some(K::ProcessEvent),
    );
    add(
        "hospital_patient_days",
        Quantity,
        Scope::Global,
        day,
        Some(K::Encounter),
    );

    add("bed_days_available", Quantity, dept, 1, Some(K::Capacity));
    add("or_available_minutes", Quantity, dept, 1, Some(K::Capacity));
    add(
        "er_bay_days_available",
        Quantity,
        dept,
        1,
        Some(K::Capacity),
    );

    add("diverts", Count, none, 1, Some(K::Divert));
    add("divert_minutes", Quantity, none, 1, Some(K::Divert));

    add("surgeries", Count, enc, 1, Some(K::Surgery));
    add("or_used_minutes", Quantity, enc, min, Some(K::Surgery));
    add("pre_op_minutes_sum", Quantity, enc, 1, Some(K::Surgery));
    add("or_wait_minutes_sum", Quantity, enc, min, Some(K::Surgery));

    for name in [
        "scheduled_appointments",
        "cancelled_appointments",
        "no_shows",
        "completed_appointments",
    ] {
        add(name, Count, appt, 1, Some(K::Appointment));
    }
    add(
        "appointment_wait_minutes_sum",
        Quantity,
        appt,
        min,
        Some(K::Appointment),
    );
    add("rvu_total", Quantity, appt, 1000, Some(K::Appointment));

    for cat in SurveyCategory::ALL {
        add(
            &format!("survey_{cat}_score_sum"),
            Quantity,
            enc,
            1,
            Some(K::Survey),
        );
        add(
            &format!("survey_{cat}_responses"),
            Count,
            enc,
            1,
            Some(K::Survey),
        );
    }
    add("rn_nursing_score_sum", Quantity, enc, 1, Some(K::Survey));
    add("rn_nursing_responses", Count, enc, 1, Some(K::Survey));

    add("incidents", Count, dept, 1, Some(K::Incident));
    for cat in IncidentCategory::ALL {
        add(
            &format!("incidents_{cat}"),
            Count,
            dept,
            1,
            Some(K::Incident),
        );
    }
    add("resolved_incidents", Count, dept, 1, Some(K::Incident));
    add(
        "resolution_days_sum",
        Quantity,
        dept,
        day,
        Some(K::Incident),
    );

    for name in [
        "claims",
        "claims_adjudicated",
        "claims_denied",
        "claims_paid",
        "claims_partial",
        "claims_open",
        "billed_claims",
    ] {
        add(name, Count, enc, 1, Some(K::Claim));
    }
    add("adjudicated_billed", Money, enc, 1, Some(K::Claim));
    add("adjudicated_paid", Money, enc, 1, Some(K::Claim));
    add("days_to_bill_sum", Quantity, enc, day, Some(K::Claim));

    for name in [
        "transplants",
        "cit_compliant",
        "transplant_successes",
        "transplant_failures",
        "living_donor_transplants",
        "donor_typed_transplants",
        "new_listings",
    ] {
        add(name, Count, organ, 1, Some(K::Transplant));
    }
    add("cit_minutes_sum", Quantity, organ, 1, Some(K::Transplant));
    add(
        "transplant_wait_days_sum",
        Quantity,
        organ,
        day,
        Some(K::Transplant),
    );

    for (from, to) in canonical_stage_pairs() {
        for cohort in [ER, NON_ER] {
            add(
                &lag_sum_measure(from, to, cohort),
                Quantity,
                enc,
                min,
                Some(K::ProcessEvent),
            );
            add(
                &lag_samples_measure(from, to, cohort),
                Count,
                enc,
                1,
                Some(K::ProcessEvent),
            );
        }
    }

    for name in [
        "cash",
        "current_assets",
        "current_liabilities",
        "total_liabilities",
        "shareholders_equity",
        "capital_employed",
        "debtors",
        "shares_outstanding",
        "average_total_assets",
    ] {
        add(name, Balance, none, 1, Some(K::Balance));
    }

    for name in ["days_in_period", "working_days", "dcoh_day_basis"] {
        add(name, Constant, Scope::Global, 1, None);
    }

    let mut stock = |name: &str, kind: MeasureKind, scope: Scope, scale: i64, source: K| {
        specs.push(MeasureSpec {
            name: name.to_string(),
            kind,
            scope,
            stock: true,
            scale,
            source: Some(source),
        });
    };
    stock("waiting_list", Count, organ, 1, K::Transplant);
    stock("waiting_list_days_sum", Quantity, organ, day, K::Transplant);
    stock("fte_total", Quantity, dept, 1000, K::Staff);
    stock("headcount", Count, dept, 1, K::Staff);

    let index = specs
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.clone(), i))
        .collect();
    MeasureCatalog { specs, index }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_identifiers() {
        let specs = CATALOG.specs();
        let mut names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), specs.len());
        for name in names {
            assert!(crate::dsl::tokenize(name).unwrap().len() == 1, "{name}");
        }
    }

    #[test]
    fn ten_canonical_stage_pairs() {
        let pairs = canonical_stage_pairs();
        assert_eq!(pairs.len(), 10);
        assert_eq!(
            pairs[0],
            (Stage::InitialAssessment, Stage::ConsultantInformed)
        );
    }
}
