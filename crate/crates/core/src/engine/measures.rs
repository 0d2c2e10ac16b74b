use chrono::Duration;

use super::catalog::{
    canonical_stage_pairs, lag_samples_measure, lag_sum_measure, MeasureKind, CATALOG, ER, NON_ER,
};
use super::filter::{DimValues, DimensionFilter};
use super::period::{local_date, Period, PeriodRange};
use super::Engine;
use crate::domain::*;
use crate::dsl::MeasureContext;
use crate::number::{int, ratio, Number};

/// Integer accumulators, one per catalog entry.
struct Acc {
    sums: Vec<i128>,
}

impl Acc {
    fn new() -> Self {
        Acc {
            sums: vec![0; CATALOG.specs().len()],
        }
    }

    fn add(&mut self, name: &str, amount: i128) {
        self.sums[CATALOG.index_of(name)] += amount;
    }

    fn inc(&mut self, name: &str) {
        self.add(name, 1);
    }
}

fn seconds(from: Timestamp, to: Timestamp) -> i128 {
    (to - from).num_seconds() as i128
}

impl<'a> Engine<'a> {
    pub(crate) fn encounter_dims(&self, e: &'a EncounterRecord) -> DimValues<'a> {
        DimValues {
            department: Some(&e.department),
            doctor: Some(&e.doctor_id),
            location: Some(&e.location),
            drg: e.drg_code.as_deref(),
            organ: None,
        }
    }

    /// Dimensions inherited from an encounter; empty when it is unknown.
    pub(crate) fn dims_via(&self, encounter_id: Option<&str>) -> DimValues<'a> {
        encounter_id
            .and_then(|id| self.encounter(id))
            .map(|e| self.encounter_dims(e))
            .unwrap_or_default()
    }

    pub(crate) fn surgery_dims(&self, s: &'a SurgeryRecord) -> DimValues<'a> {
        DimValues {
            doctor: Some(&s.surgeon_id),
            ..self.dims_via(Some(&s.encounter_id))
        }
    }

    pub(crate) fn txn_dims(&self, t: &'a FinancialTxn) -> DimValues<'a> {
        DimValues {
            department: Some(&t.department),
            doctor: t.doctor_id.as_deref(),
            location: Some(&t.location),
            drg: self.dims_via(t.encounter_id.as_deref()).drg,
            organ: None,
        }
    }

    /// Dimension values of every record of a kind, for drilldown grouping.
    pub(crate) fn dims_of_kind(&self, kind: RecordKind) -> Vec<DimValues<'a>> {
        let d = self.data;
        let dept = |s: &'a String| DimValues {
            department: Some(s),
            ..Default::default()
        };
        match kind {
            RecordKind::Encounter => d
                .encounters
                .iter()
                .map(|e| self.encounter_dims(e))
                .collect(),
            RecordKind::Surgery => d.surgeries.iter().map(|s| self.surgery_dims(s)).collect(),
            RecordKind::Appointment => d
                .appointments
                .iter()
                .map(|a| DimValues {
                    department: Some(&a.department),
                    doctor: Some(&a.doctor_id),
                    ..Default::default()
                })
                .collect(),
            RecordKind::ProcessEvent => d
                .process_events
                .iter()
                .map(|p| self.dims_via(Some(&p.encounter_id)))
                .collect(),
            RecordKind::Txn => d.txns.iter().map(|t| self.txn_dims(t)).collect(),
            RecordKind::Claim => d
                .claims
                .iter()
                .map(|c| self.dims_via(Some(&c.encounter_id)))
                .collect(),
            RecordKind::Survey => d
                .surveys
                .iter()
                .map(|s| self.dims_via(s.encounter_id.as_deref()))
                .collect(),
            RecordKind::Incident => d.incidents.iter().map(|i| dept(&i.department)).collect(),
            RecordKind::Capacity => d
                .capacity
                .iter()
                .map(|c| DimValues {
                    department: c.department.as_deref(),
                    ..Default::default()
                })
                .collect(),
            RecordKind::Staff => d.staff.iter().map(|s| dept(&s.department)).collect(),
            RecordKind::Transplant => d
                .transplants
                .iter()
                .map(|t| DimValues {
                    organ: Some(&t.organ),
                    ..Default::default()
                })
                .collect(),
            RecordKind::Balance | RecordKind::Divert => {
                vec![DimValues::default(); self.count_of(kind)]
            }
        }
    }

    fn count_of(&self, kind: RecordKind) -> usize {
        match kind {
            RecordKind::Balance => self.data.balances.len(),
            RecordKind::Divert => self.data.diverts.len(),
            _ => 0,
        }
    }

    /// Every catalog measure available under `filter`, aggregated exactly
    /// over the records attributed to `period`.
    ///
    /// Counts and sums with no matching records are zero. Balance figures
    /// are absent when no snapshot exists on or before the period end.
    pub fn build_measure_context(
        &self,
        period: Period,
        filter: &DimensionFilter,
    ) -> MeasureContext {
        let range = self.range(period);
        let mut acc = Acc::new();
        self.add_encounters(&range, filter, &mut acc);
        self.add_process_events(&range, filter, &mut acc);
        self.add_surgeries(&range, filter, &mut acc);
        self.add_appointments(&range, filter, &mut acc);
        self.add_txns(&range, filter, &mut acc);
        self.add_claims(&range, filter, &mut acc);
        self.add_surveys(&range, filter, &mut acc);
        self.add_incidents(&range, filter, &mut acc);
        self.add_transplants(&range, filter, &mut acc);
        self.add_capacity(&range, filter, &mut acc);
        self.add_staff(filter, &mut acc);
        self.add_diverts(&range, &mut acc);

        let filter_dims = filter.dims();
        let mut ctx = MeasureContext::new();
        for (spec, sum) in CATALOG.specs().iter().zip(&acc.sums) {
            let summable = matches!(
                spec.kind,
                MeasureKind::Count | MeasureKind::Money | MeasureKind::Quantity
            );
            if summable && spec.available_under(filter_dims) {
                ctx.insert(spec.name.clone(), ratio(*sum, spec.scale as i128));
            }
        }
        if filter_dims == super::DimSet::NONE {
            self.add_balances(&range, &mut ctx);
        }
        let days = range.days();
        ctx.insert("days_in_period", int(days as i128));
        ctx.insert(
            "working_days",
            int(self
                .config
                .working_days
                .count(range.first_day, range.last_day) as i128),
        );
        ctx.insert(
            "dcoh_day_basis",
            int(if self.config.days_cash_raw {
                1
            } else {
                days as i128
            }),
        );
        ctx
    }

    fn add_encounters(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        let extended = seconds_in_days(self.config.extended_stay_days);
        let long = seconds_in_days(self.config.long_stay_days);
        for (i, e) in self.data.encounters.iter().enumerate() {
            let inpatient = e.kind == EncounterKind::Inpatient;
            if inpatient {
                let stay_end = e.discharge_ts.unwrap_or(range.end).min(range.end);
                let stay_start = e.admit_ts.max(range.start);
                if stay_start < stay_end {
                    acc.add("hospital_patient_days", seconds(stay_start, stay_end));
                }
            }
            if !filter.matches(&self.encounter_dims(e)) {
                continue;
            }
            if range.contains(e.admit_ts) {
                acc.inc("encounters");
                if inpatient {
                    acc.inc("admissions");
                    if self.is_readmit(i) {
                        acc.inc("readmits");
                    }
                }
                if e.kind == EncounterKind::Emergency {
                    acc.inc("er_presents");
                    if e.disposition == Disposition::Admitted {
                        acc.inc("er_admits");
                    }
                }
            }
            if !inpatient {
                continue;
            }
            if let Some(discharge) = e.discharge_ts.filter(|d| range.contains(*d)) {
                let los = seconds(e.admit_ts, discharge);
                acc.inc("discharges");
                acc.add("los_days_sum", los);
                if los > extended {
                    acc.inc("extended_stays");
                }
                if los > long {
                    acc.inc("long_stays");
                }
            }
            let stay_end = e.discharge_ts.unwrap_or(range.end).min(range.end);
            let stay_start = e.admit_ts.max(range.start);
            if stay_start < stay_end {
                acc.add("patient_days", seconds(stay_start, stay_end));
            }
        }
    }

    fn add_process_events(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        let pairs = canonical_stage_pairs();
        for (encounter_id, stages) in self.stage_times() {
            let encounter = self.encounter(encounter_id);
            let dims = encounter
                .map(|e| self.encounter_dims(e))
                .unwrap_or_default();
            if !filter.matches(&dims) {
                continue;
            }
            let cohort = match encounter {
                Some(e) if e.kind == EncounterKind::Emergency => ER,
                _ => NON_ER,
            };
            for (from, to, lag) in observed_lags(stages, range) {
                if pairs.contains(&(from, to)) {
                    acc.add(&lag_sum_measure(from, to, cohort), lag);
                    acc.inc(&lag_samples_measure(from, to, cohort));
                }
            }
            let Some(e) = encounter else { continue };
            if let Some(&ts) = stages.get(&Stage::TreatmentStarted) {
                if e.kind == EncounterKind::Emergency && range.contains(ts) {
                    acc.add("ttt_minutes_sum", seconds(e.admit_ts, ts));
                    acc.inc("ttt_samples");
                }
            }
            if let Some(&ts) = stages.get(&Stage::InitialAssessment) {
                if range.contains(ts) {
                    acc.add("registration_wait_minutes_sum", seconds(e.admit_ts, ts));
                    acc.inc("registrations");
                }
            }
        }
    }

    fn add_surgeries(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        for s in &self.data.surgeries {
            if !range.contains(s.actual_start) || !filter.matches(&self.surgery_dims(s)) {
                continue;
            }
            acc.inc("surgeries");
            acc.add("or_used_minutes", seconds(s.actual_start, s.actual_end));
            acc.add("pre_op_minutes_sum", s.pre_op_minutes as i128);
            acc.add(
                "or_wait_minutes_sum",
                seconds(s.scheduled_start, s.actual_start),
            );
        }
    }

    fn add_appointments(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        for a in &self.data.appointments {
            let dims = DimValues {
                department: Some(&a.department),
                doctor: Some(&a.doctor_id),
                ..Default::default()
            };
            if !range.contains(a.scheduled_ts) || !filter.matches(&dims) {
                continue;
            }
            acc.inc("scheduled_appointments");
            match a.status {
                AppointmentStatus::Cancelled => acc.inc("cancelled_appointments"),
                AppointmentStatus::NoShow => acc.inc("no_shows"),
                AppointmentStatus::Completed => {
                    acc.inc("completed_appointments");
                    acc.add("rvu_total", a.rvu.0 as i128);
                    if let (Some(arrival), Some(seen)) = (a.arrival_ts, a.seen_ts) {
                        acc.add("appointment_wait_minutes_sum", seconds(arrival, seen));
                    }
                }
            }
        }
    }

    fn add_txns(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        let tz = self.config.time_zone;
        for t in &self.data.txns {
            if !range.contains(t.ts) || !filter.matches(&self.txn_dims(t)) {
                continue;
            }
            let amount = t.amount_minor as i128;
            match t.txn_type {
                TxnType::Charge => {
                    acc.add(t.category.as_str(), amount);
                    if t.category == TxnCategory::Revenue {
                        if t.channel == Some(Channel::Insurance) {
                            acc.add("net_credit_sales", amount);
                        }
                    } else if TxnCategory::EBITDA_EXPENSES.contains(&t.category)
                        || matches!(
                            t.category,
                            TxnCategory::Depreciation | TxnCategory::Amortization
                        )
                    {
                        acc.add("operating_expense_total", amount);
                    }
                }
                TxnType::Payment if t.channel == Some(Channel::Pos) => {
                    acc.add("pos_collection", amount);
                    acc.inc("pos_payments");
                    let received = local_date(tz, t.received_ts.unwrap_or(t.ts));
                    let compliant = t
                        .deposited_ts
                        .is_some_and(|d| local_date(tz, d) <= received + Duration::days(1));
                    if compliant {
                        acc.inc("pos_deposit_compliant");
                    }
                }
                TxnType::WriteOff => acc.add("write_off_total", amount),
                TxnType::Payment | TxnType::Deposit => {}
            }
        }
    }

    fn add_claims(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        for c in &self.data.claims {
            if !range.contains(c.discharge_ts)
                || !filter.matches(&self.dims_via(Some(&c.encounter_id)))
            {
                continue;
            }
            acc.inc("claims");
            acc.inc(match c.status {
                ClaimStatus::Open => "claims_open",
                ClaimStatus::Paid => "claims_paid",
                ClaimStatus::Partial => "claims_partial",
                ClaimStatus::Denied => "claims_denied",
            });
            if c.status.is_adjudicated() {
                acc.inc("claims_adjudicated");
                acc.add("adjudicated_billed", c.amount_billed_minor as i128);
                acc.add("adjudicated_paid", c.amount_paid_minor as i128);
            }
            if let Some(billed) = c.billed_ts {
                acc.inc("billed_claims");
                acc.add("days_to_bill_sum", seconds(c.discharge_ts, billed));
            }
        }
    }

    fn add_surveys(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        for s in &self.data.surveys {
            if !range.contains(s.ts) || !filter.matches(&self.dims_via(s.encounter_id.as_deref())) {
                continue;
            }
            let (sum, count) = match s.respondent {
                Respondent::Patient => (
                    format!("survey_{}_score_sum", s.category),
                    format!("survey_{}_responses", s.category),
                ),
                Respondent::Rn => (
                    "rn_nursing_score_sum".to_string(),
                    "rn_nursing_responses".to_string(),
                ),
            };
            acc.add(&sum, s.score as i128);
            acc.inc(&count);
        }
    }

    fn add_incidents(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        for i in &self.data.incidents {
            if !filter.matches(&DimValues {
                department: Some(&i.department),
                ..Default::default()
            }) {
                continue;
            }
            if range.contains(i.ts) {
                acc.inc("incidents");
                acc.inc(&format!("incidents_{}", i.category));
            }
            if let Some(resolved) = i.resolved_ts.filter(|r| range.contains(*r)) {
                acc.inc("resolved_incidents");
                acc.add("resolution_days_sum", seconds(i.ts, resolved));
            }
        }
    }

    fn add_transplants(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        let threshold = self.config.cit_threshold_minutes;
        for t in &self.data.transplants {
            if !filter.matches(&DimValues {
                organ: Some(&t.organ),
                ..Default::default()
            }) {
                continue;
            }
            if range.contains(t.listed_ts) {
                acc.inc("new_listings");
            }
            match t.status {
                TransplantStatus::Active | TransplantStatus::New if t.listed_ts < range.end => {
                    acc.inc("waiting_list");
                    acc.add("waiting_list_days_sum", seconds(t.listed_ts, range.end));
                }
                TransplantStatus::Transplanted => {
                    let Some(ts) = t.transplant_ts.filter(|ts| range.contains(*ts)) else {
                        continue;
                    };
                    acc.inc("transplants");
                    acc.add("transplant_wait_days_sum", seconds(t.listed_ts, ts));
                    if let Some(cit) = t.cold_ischemia_minutes {
                        acc.add("cit_minutes_sum", cit as i128);
                        if cit < threshold {
                            acc.inc("cit_compliant");
                        }
                    }
                    if let Some(donor) = t.donor_type {
                        acc.inc("donor_typed_transplants");
                        if donor == DonorType::Living {
                            acc.inc("living_donor_transplants");
                        }
                    }
                    match t.outcome {
                        Some(Outcome::Success) => acc.inc("transplant_successes"),
                        Some(Outcome::Failure) => acc.inc("transplant_failures"),
                        None => {}
                    }
                }
                _ => {}
            }
        }
    }

    fn add_capacity(&self, range: &PeriodRange, filter: &DimensionFilter, acc: &mut Acc) {
        for c in &self.data.capacity {
            let dims = DimValues {
                department: c.department.as_deref(),
                ..Default::default()
            };
            if !range.contains_date(c.date) || !filter.matches(&dims) {
                continue;
            }
            match c.resource {
                Resource::Beds => acc.add("bed_days_available", c.available_units as i128),
                Resource::OrRooms => acc.add(
                    "or_available_minutes",
                    c.available_minutes.unwrap_or(0) as i128,
                ),
                Resource::ErBays => acc.add("er_bay_days_available", c.available_units as i128),
            }
        }
    }

    fn add_staff(&self, filter: &DimensionFilter, acc: &mut Acc) {
        for s in &self.data.staff {
            if filter.matches(&DimValues {
                department: Some(&s.department),
                ..Default::default()
            }) {
                acc.add("fte_total", s.fte_fraction.0 as i128);
                acc.inc("headcount");
            }
        }
    }

    fn add_diverts(&self, range: &PeriodRange, acc: &mut Acc) {
        for d in &self.data.diverts {
            if range.contains(d.start_ts) {
                acc.inc("diverts");
                acc.add("divert_minutes", d.duration_minutes as i128);
            }
        }
    }

    fn add_balances(&self, range: &PeriodRange, ctx: &mut MeasureContext) {
        let Some(closing) = self
            .data
            .balances
            .iter()
            .filter(|b| b.as_of_date <= range.last_day)
            .max_by_key(|b| b.as_of_date)
        else {
            return;
        };
        let money = |v: i64| int(v as i128);
        ctx.insert("cash", money(closing.cash_minor));
        ctx.insert("current_assets", money(closing.current_assets_minor));
        ctx.insert(
            "current_liabilities",
            money(closing.current_liabilities_minor),
        );
        ctx.insert("total_liabilities", money(closing.total_liabilities_minor));
        ctx.insert(
            "shareholders_equity",
            money(closing.shareholders_equity_minor),
        );
        ctx.insert("capital_employed", money(closing.capital_employed_minor));
        ctx.insert("debtors", money(closing.debtors_minor));
        ctx.insert("shares_outstanding", money(closing.shares_outstanding));
        let in_period = self
            .data
            .balances
            .iter()
            .filter(|b| range.contains_date(b.as_of_date));
        let first = in_period.clone().min_by_key(|b| b.as_of_date);
        let last = in_period.max_by_key(|b| b.as_of_date);
        let average: Number = match (first, last) {
            (Some(f), Some(l)) => ratio(
                f.total_assets_minor as i128 + l.total_assets_minor as i128,
                2,
            ),
            _ => money(closing.total_assets_minor),
        };
        ctx.insert("average_total_assets", average);
    }
}

fn seconds_in_days(days: i64) -> i128 {
    days as i128 * SECONDS_PER_DAY as i128
}

/// Lags between consecutive recorded stages of each pathway, in seconds,
/// for pairs whose later stage falls in the period. Stages an encounter
/// never reached are skipped, so the pair spans the gap.
pub(crate) fn observed_lags(
    stages: &std::collections::BTreeMap<Stage, Timestamp>,
    range: &PeriodRange,
) -> Vec<(Stage, Stage, i128)> {
    let mut lags = Vec::new();
    for sequence in [Stage::CLINICAL, Stage::NON_CLINICAL] {
        let present: Vec<(Stage, Timestamp)> = sequence
            .iter()
            .filter_map(|s| stages.get(s).map(|ts| (*s, *ts)))
            .collect();
        for w in present.windows(2) {
            let ((from, from_ts), (to, to_ts)) = (w[0], w[1]);
            if range.contains(to_ts) {
                lags.push((from, to, seconds(from_ts, to_ts)));
            }
        }
    }
    lags
}
