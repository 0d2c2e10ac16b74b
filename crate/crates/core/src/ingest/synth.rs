//! Deterministic synthetic hospital data.
//!
//! The generator draws from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `SynthConfig::seed`, so a given configuration yields the same records on
//! every platform. Data starts on 2015-01-01 UTC and covers `months` whole
//! calendar months.

use chrono::{Datelike, Duration, NaiveDate, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::parse::RecordBatch;
use crate::dataset::Dataset;
use crate::domain::*;

pub const SYNTH_START_YEAR: i32 = 2015;

const DRG_CODES: &[&str] = &["190", "291", "392", "470", "871"];
const LOCATIONS: &[&str] = &["main", "north"];
const ORGANS: &[&str] = &["kidney", "liver"];
const BEDS_PER_DEPARTMENT: i64 = 20;
const OR_ROOMS: i64 = 3;
const OR_MINUTES_PER_ROOM: i64 = 600;
const ER_BAYS: i64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub months: u32,
    pub daily_admissions_mean: f64,
    pub departments: Vec<String>,
    pub doctors: u32,
    pub no_show_rate: f64,
    pub denial_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            months: 3,
            daily_admissions_mean: 10.0,
            departments: vec!["cardiology".into(), "general".into(), "orthopedics".into()],
            doctors: 8,
            no_show_rate: 0.1,
            denial_rate: 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid synthetic config: {0}")]
pub struct SynthConfigError(pub String);

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthConfigError> {
        let fail = |m: &str| Err(SynthConfigError(m.to_string()));
        if self.months == 0 {
            return fail("months must be positive");
        }
        if self.months > 1200 {
            return fail("months must be at most 1200");
        }
        if !(self.daily_admissions_mean.is_finite() && self.daily_admissions_mean > 0.0) {
            return fail("daily_admissions_mean must be positive");
        }
        if self.doctors == 0 {
            return fail("doctors must be positive");
        }
        if self.departments.is_empty() {
            return fail("departments must not be empty");
        }
        if self.departments.iter().any(|d| d.trim().is_empty()) {
            return fail("department names must not be empty");
        }
        let mut seen = self.departments.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.departments.len() {
            return fail("department names must be unique");
        }
        for (name, rate) in [
            ("no_show_rate", self.no_show_rate),
            ("denial_rate", self.denial_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(SynthConfigError(format!("{name} must be in [0,1]")));
            }
        }
        Ok(())
    }
}

/// Generates a full synthetic store: encounters with their pathway events,
/// surgeries, charges, payments and claims, plus appointments, surveys,
/// incidents, transplants, daily capacity, staff, monthly balance sheets and
/// diverts. Operating rooms are staffed on weekdays only. Every record passes [`validate_record`] and every reference to
/// an encounter resolves.
pub fn generate_synthetic(config: &SynthConfig) -> Result<RecordBatch, SynthConfigError> {
    config.validate()?;
    let mut g = Generator::new(config);
    g.run();
    let mut batch = RecordBatch::new(
        g.out.records().collect(),
        format!("synthetic:seed={}", config.seed),
    );
    batch.ingested_at = g.start_ts();
    Ok(batch)
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    start: NaiveDate,
    end: NaiveDate,
    doctors: Vec<String>,
    patients: u64,
    out: Dataset,
    seq: u64,
}

fn at(day: NaiveDate, minute: i64) -> Timestamp {
    Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).expect("midnight")) + Duration::minutes(minute)
}

fn pick<T: Clone>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items.choose(rng).expect("non-empty choice").clone()
}

fn add_months(date: NaiveDate, months: u32) -> NaiveDate {
    let total = date.year() * 12 + date.month0() as i32 + months as i32;
    NaiveDate::from_ymd_opt(total.div_euclid(12), total.rem_euclid(12) as u32 + 1, 1)
        .expect("valid month")
}

impl<'a> Generator<'a> {
    fn new(cfg: &'a SynthConfig) -> Self {
        let start = NaiveDate::from_ymd_opt(SYNTH_START_YEAR, 1, 1).expect("valid date");
        let end = add_months(start, cfg.months);
        let expected = cfg.daily_admissions_mean * 30.0 * cfg.months as f64;
        Generator {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            start,
            end,
            doctors: (1..=cfg.doctors).map(|i| format!("D{i:03}")).collect(),
            patients: (expected / 3.0).ceil().max(10.0) as u64,
            out: Dataset::new(),
            seq: 0,
        }
    }

    fn start_ts(&self) -> Timestamp {
        at(self.start, 0)
    }

    fn end_ts(&self) -> Timestamp {
        at(self.end, 0)
    }

    fn next_id(&mut self, prefix: &str) -> String {
        self.seq += 1;
        format!("{prefix}{:07}", self.seq)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p.clamp(0.0, 1.0))
    }

    fn minutes(&mut self, lo: i64, hi: i64) -> Duration {
        Duration::minutes(self.rng.random_range(lo..=hi))
    }

    fn run(&mut self) {
        let admissions = Poisson::new(self.cfg.daily_admissions_mean).expect("validated mean");
        let appointments =
            Poisson::new(self.cfg.daily_admissions_mean * 0.5).expect("validated mean");
        self.staff();
        let mut day = self.start;
        while day < self.end {
            let n = admissions.sample(&mut self.rng) as u64;
            for _ in 0..n {
                self.encounter(day);
            }
            let n = appointments.sample(&mut self.rng) as u64;
            for _ in 0..n {
                self.appointment(day);
            }
            self.capacity(day);
            if self.chance(0.1) {
                self.incident(day);
            }
            if self.chance(0.03) {
                self.divert(day);
            }
            if self.chance(0.07) {
                self.transplant(day);
            }
            if day.day() == 1 {
                self.monthly_costs(day);
                self.nurse_surveys(day);
            }
            let next = day.succ_opt().expect("date in range");
            if next.month() != day.month() {
                self.balance(day);
            }
            day = next;
        }
    }

    fn staff(&mut self) {
        for (i, doctor) in self.doctors.clone().into_iter().enumerate() {
            let department = self.cfg.departments[i % self.cfg.departments.len()].clone();
            self.out.push(
                StaffRecord {
                    staff_id: format!("S-{doctor}"),
                    role: StaffRole::Doctor,
                    fte_fraction: Milli::ONE,
                    department,
                }
                .into(),
            );
        }
        for department in self.cfg.departments.clone() {
            for k in 0..4 {
                let fte = Milli(if k % 2 == 0 { 1000 } else { 800 });
                let role = if k < 3 {
                    StaffRole::Rn
                } else {
                    StaffRole::Support
                };
                let staff_id = format!("S-{department}-{k}");
                self.out.push(
                    StaffRecord {
                        staff_id,
                        role,
                        fte_fraction: fte,
                        department: department.clone(),
                    }
                    .into(),
                );
            }
        }
    }

    fn encounter(&mut self, day: NaiveDate) {
        let roll: f64 = self.rng.random();
        let kind = if roll < 0.5 {
            EncounterKind::Inpatient
        } else if roll < 0.8 {
            EncounterKind::Outpatient
        } else {
            EncounterKind::Emergency
        };
        let encounter_id = self.next_id("E");
        let patient_id = format!("P{:06}", self.rng.random_range(0..self.patients));
        let admit = at(day, self.rng.random_range(0..1440));
        let stay = match kind {
            EncounterKind::Inpatient => self.minutes(1440, 14 * 1440),
            EncounterKind::Outpatient => self.minutes(30, 240),
            EncounterKind::Emergency => self.minutes(120, 720),
        };
        let discharge = Some(admit + stay).filter(|d| *d < self.end_ts());
        let department = pick(&mut self.rng, &self.cfg.departments);
        let doctor_id = pick(&mut self.rng, &self.doctors);
        let location = pick(&mut self.rng, LOCATIONS).to_string();
        let drg_code = match kind {
            EncounterKind::Outpatient => None,
            _ => Some(pick(&mut self.rng, DRG_CODES).to_string()),
        };
        let planned = kind == EncounterKind::Inpatient && self.chance(0.3);
        let disposition = match (kind, discharge) {
            (_, None) => Disposition::Other,
            (EncounterKind::Emergency, _) if self.chance(0.2) => Disposition::Admitted,
            (EncounterKind::Inpatient, _) if self.chance(0.02) => Disposition::Deceased,
            _ => Disposition::Discharged,
        };
        let e = EncounterRecord {
            encounter_id,
            patient_id,
            kind,
            admit_ts: admit,
            discharge_ts: discharge,
            department,
            doctor_id,
            location,
            drg_code,
            planned,
            disposition,
        };
        self.pathway(&e);
        if kind == EncounterKind::Inpatient && self.chance(0.3) {
            self.surgery(&e);
        }
        self.charges(&e);
        if let Some(discharge) = e.discharge_ts {
            if kind == EncounterKind::Inpatient {
                self.claim(&e, discharge);
            }
            if self.chance(0.3) {
                self.patient_survey(&e, discharge);
            }
        }
        self.out.push(e.into());
    }

    fn pathway(&mut self, e: &EncounterRecord) {
        let stages: &[Stage] = match e.kind {
            EncounterKind::Emergency => &[
                Stage::InitialAssessment,
                Stage::ConsultantInformed,
                Stage::Diagnosis,
                Stage::TreatmentStarted,
            ],
            EncounterKind::Inpatient => &[Stage::InitialAssessment, Stage::BedAllocated],
            EncounterKind::Outpatient => &[Stage::InitialAssessment],
        };
        let mut ts = e.admit_ts;
        for &stage in stages {
            ts += self.minutes(5, 60);
            self.out.push(
                ProcessEventRecord {
                    encounter_id: e.encounter_id.clone(),
                    stage,
                    ts,
                }
                .into(),
            );
        }
        if let (EncounterKind::Inpatient, Some(discharge)) = (e.kind, e.discharge_ts) {
            let billed = discharge - self.minutes(30, 180);
            let paid = discharge - self.minutes(0, 25);
            for (stage, ts) in [(Stage::DischargeBilled, billed), (Stage::PaymentDone, paid)] {
                self.out.push(
                    ProcessEventRecord {
                        encounter_id: e.encounter_id.clone(),
                        stage,
                        ts,
                    }
                    .into(),
                );
            }
        }
    }

    fn surgery(&mut self, e: &EncounterRecord) {
        let scheduled_start = e.admit_ts + self.minutes(120, 720);
        let actual_start = scheduled_start + self.minutes(0, 60);
        let actual_end = actual_start + self.minutes(30, 240);
        let surgery = SurgeryRecord {
            surgery_id: self.next_id("S"),
            encounter_id: e.encounter_id.clone(),
            or_room_id: format!("OR{}", self.rng.random_range(1..=OR_ROOMS)),
            scheduled_start,
            actual_start,
            actual_end,
            procedure_code: format!("P{:03}", self.rng.random_range(1..=40)),
            surgeon_id: e.doctor_id.clone(),
            pre_op_minutes: self.rng.random_range(10..=90),
        };
        self.out.push(surgery.into());
    }

    fn charges(&mut self, e: &EncounterRecord) {
        let revenue = match e.kind {
            EncounterKind::Inpatient => self.rng.random_range(200_000..=1_500_000),
            EncounterKind::Outpatient => self.rng.random_range(5_000..=40_000),
            EncounterKind::Emergency => self.rng.random_range(20_000..=150_000),
        };
        let channel = if e.kind == EncounterKind::Inpatient {
            Channel::Insurance
        } else {
            Channel::Pos
        };
        let charge = |txn_id: String,
                      amount_minor: i64,
                      category: TxnCategory,
                      txn_type: TxnType| FinancialTxn {
            txn_id,
            ts: e.admit_ts,
            amount_minor,
            category,
            txn_type,
            department: e.department.clone(),
            location: e.location.clone(),
            doctor_id: Some(e.doctor_id.clone()),
            encounter_id: Some(e.encounter_id.clone()),
            channel: None,
            received_ts: None,
            deposited_ts: None,
        };
        let mut rev = charge(
            self.next_id("T"),
            revenue,
            TxnCategory::Revenue,
            TxnType::Charge,
        );
        rev.channel = Some(channel);
        self.out.push(rev.into());
        let cost = revenue * self.rng.random_range(40..=95) / 100;
        let cost = charge(
            self.next_id("T"),
            cost.max(1),
            TxnCategory::OperatingExpense,
            TxnType::Charge,
        );
        self.out.push(cost.into());

        if channel == Channel::Pos {
            let received = e.discharge_ts.unwrap_or(e.admit_ts);
            let lag_days = if self.chance(0.85) {
                self.rng.random_range(0..=1)
            } else {
                self.rng.random_range(2..=4)
            };
            let deposited = received + Duration::days(lag_days);
            let mut pay = charge(
                self.next_id("T"),
                revenue,
                TxnCategory::Revenue,
                TxnType::Payment,
            );
            pay.ts = received;
            pay.channel = Some(Channel::Pos);
            pay.received_ts = Some(received);
            pay.deposited_ts = Some(deposited).filter(|d| *d < self.end_ts());
            self.out.push(pay.into());
        } else if self.chance(0.05) {
            let mut w = charge(
                self.next_id("T"),
                revenue / 10 + 1,
                TxnCategory::Revenue,
                TxnType::WriteOff,
            );
            w.ts = e.discharge_ts.unwrap_or(e.admit_ts);
            self.out.push(w.into());
        }
    }

    fn claim(&mut self, e: &EncounterRecord, discharge: Timestamp) {
        let billed = self.rng.random_range(200_000..=1_500_000);
        let billed_ts = discharge + self.minutes(60, 5 * 1440);
        let (status, paid) = if self.chance(self.cfg.denial_rate) {
            (ClaimStatus::Denied, 0)
        } else {
            match self.rng.random_range(0..10) {
                0..=6 => (ClaimStatus::Paid, billed),
                7..=8 => (
                    ClaimStatus::Partial,
                    billed * self.rng.random_range(30..=90) / 100,
                ),
                _ => (ClaimStatus::Open, 0),
            }
        };
        let claim = ClaimRecord {
            claim_id: self.next_id("C"),
            encounter_id: e.encounter_id.clone(),
            discharge_ts: discharge,
            billed_ts: Some(billed_ts),
            submitted_ts: Some(billed_ts + Duration::days(1)),
            status,
            amount_billed_minor: billed,
            amount_paid_minor: paid,
            denial_reason: (status == ClaimStatus::Denied)
                .then(|| "documentation incomplete".to_string()),
        };
        self.out.push(claim.into());
    }

    fn patient_survey(&mut self, e: &EncounterRecord, discharge: Timestamp) {
        let category = pick(&mut self.rng, SurveyCategory::ALL);
        let survey = SurveyResponse {
            response_id: self.next_id("R"),
            encounter_id: Some(e.encounter_id.clone()),
            ts: discharge,
            respondent: Respondent::Patient,
            category,
            question_code: format!("{category}_1"),
            score: self.rng.random_range(1..=5),
        };
        self.out.push(survey.into());
    }

    fn nurse_surveys(&mut self, day: NaiveDate) {
        for _ in 0..self.cfg.departments.len() {
            let survey = SurveyResponse {
                response_id: self.next_id("R"),
                encounter_id: None,
                ts: at(day, self.rng.random_range(480..1020)),
                respondent: Respondent::Rn,
                category: SurveyCategory::Nursing,
                question_code: "nursing_rn_1".into(),
                score: self.rng.random_range(2..=5),
            };
            self.out.push(survey.into());
        }
    }

    fn appointment(&mut self, day: NaiveDate) {
        let scheduled_ts = at(day, self.rng.random_range(480..1080));
        let status = if self.chance(self.cfg.no_show_rate) {
            AppointmentStatus::NoShow
        } else if self.chance(0.05) {
            AppointmentStatus::Cancelled
        } else {
            AppointmentStatus::Completed
        };
        let (arrival_ts, seen_ts) = match status {
            AppointmentStatus::Completed => {
                let arrival = scheduled_ts + self.minutes(-10, 15);
                (Some(arrival), Some(arrival + self.minutes(5, 60)))
            }
            _ => (None, None),
        };
        let appointment = AppointmentRecord {
            appointment_id: self.next_id("A"),
            patient_id: format!("P{:06}", self.rng.random_range(0..self.patients)),
            scheduled_ts,
            arrival_ts,
            seen_ts,
            status,
            department: pick(&mut self.rng, &self.cfg.departments),
            doctor_id: pick(&mut self.rng, &self.doctors),
            rvu: Milli(self.rng.random_range(500..=3000)),
        };
        self.out.push(appointment.into());
    }

    fn capacity(&mut self, date: NaiveDate) {
        for department in self.cfg.departments.clone() {
            let units = BEDS_PER_DEPARTMENT - self.rng.random_range(0..=2);
            let department = Some(department);
            self.out.push(
                CapacityRecord {
                    resource: Resource::Beds,
                    department,
                    date,
                    available_units: units,
                    available_minutes: None,
                }
                .into(),
            );
        }
        if date.weekday().number_from_monday() <= 5 {
            self.out.push(
                CapacityRecord {
                    resource: Resource::OrRooms,
                    department: None,
                    date,
                    available_units: OR_ROOMS,
                    available_minutes: Some(OR_ROOMS * OR_MINUTES_PER_ROOM),
                }
                .into(),
            );
        }
        self.out.push(
            CapacityRecord {
                resource: Resource::ErBays,
                department: None,
                date,
                available_units: ER_BAYS,
                available_minutes: None,
            }
            .into(),
        );
    }

    fn incident(&mut self, day: NaiveDate) {
        let ts = at(day, self.rng.random_range(0..1440));
        let resolved_ts = Some(ts + self.minutes(60, 20 * 1440))
            .filter(|r| *r < self.end_ts() && self.rng.random_bool(0.8));
        let incident = IncidentRecord {
            incident_id: self.next_id("I"),
            ts,
            department: pick(&mut self.rng, &self.cfg.departments),
            category: pick(&mut self.rng, IncidentCategory::ALL),
            severity: pick(&mut self.rng, Severity::ALL),
            resolved_ts,
        };
        self.out.push(incident.into());
    }

    fn divert(&mut self, day: NaiveDate) {
        let divert = DivertEventRecord {
            divert_id: self.next_id("V"),
            start_ts: at(day, self.rng.random_range(0..1440)),
            duration_minutes: self.rng.random_range(15..=240),
            reason: "er_capacity".into(),
        };
        self.out.push(divert.into());
    }

    fn transplant(&mut self, day: NaiveDate) {
        let listed_ts = at(day, self.rng.random_range(0..1440));
        let transplant_ts = listed_ts + self.minutes(1440, 120 * 1440);
        let roll = self.rng.random_range(0..10);
        let case = if roll < 6 && transplant_ts < self.end_ts() {
            TransplantCase {
                case_id: self.next_id("X"),
                organ: pick(&mut self.rng, ORGANS).to_string(),
                listed_ts,
                status: TransplantStatus::Transplanted,
                transplant_ts: Some(transplant_ts),
                cold_ischemia_minutes: Some(self.rng.random_range(240..=720)),
                donor_type: Some(if self.chance(0.3) {
                    DonorType::Living
                } else {
                    DonorType::Deceased
                }),
                outcome: Some(if self.chance(0.9) {
                    Outcome::Success
                } else {
                    Outcome::Failure
                }),
            }
        } else {
            let status = match roll {
                9 => TransplantStatus::Removed,
                _ if listed_ts + Duration::days(30) >= self.end_ts() => TransplantStatus::New,
                _ => TransplantStatus::Active,
            };
            TransplantCase {
                case_id: self.next_id("X"),
                organ: pick(&mut self.rng, ORGANS).to_string(),
                listed_ts,
                status,
                transplant_ts: None,
                cold_ischemia_minutes: None,
                donor_type: None,
                outcome: None,
            }
        };
        self.out.push(case.into());
    }

    fn monthly_costs(&mut self, day: NaiveDate) {
        let lines = [
            (TxnCategory::FteCost, 3_000_000),
            (TxnCategory::AdminCost, 800_000),
            (TxnCategory::OvertimeCost, 300_000),
            (TxnCategory::ReferralCommission, 150_000),
            (TxnCategory::Interest, 200_000),
            (TxnCategory::Tax, 400_000),
            (TxnCategory::Depreciation, 500_000),
            (TxnCategory::Amortization, 100_000),
        ];
        for department in self.cfg.departments.clone() {
            for (category, base) in lines {
                let amount_minor = base * self.rng.random_range(80..=120) / 100;
                let txn = FinancialTxn {
                    txn_id: self.next_id("T"),
                    ts: at(day, 0),
                    amount_minor,
                    category,
                    txn_type: TxnType::Charge,
                    department: department.clone(),
                    location: LOCATIONS[0].into(),
                    doctor_id: None,
                    encounter_id: None,
                    channel: None,
                    received_ts: None,
                    deposited_ts: None,
                };
                self.out.push(txn.into());
            }
        }
    }

    fn balance(&mut self, as_of_date: NaiveDate) {
        let scale = self.cfg.daily_admissions_mean.max(1.0);
        let mut money = |lo: i64, hi: i64| (self.rng.random_range(lo..=hi) as f64 * scale) as i64;
        let current_assets_minor = money(40_000_000, 60_000_000);
        let current_liabilities_minor = money(20_000_000, 35_000_000);
        let total_liabilities_minor = money(80_000_000, 120_000_000);
        let shareholders_equity_minor = money(100_000_000, 150_000_000);
        let snapshot = BalanceSnapshot {
            as_of_date,
            cash_minor: money(10_000_000, 30_000_000),
            current_assets_minor,
            current_liabilities_minor,
            total_liabilities_minor,
            shareholders_equity_minor,
            total_assets_minor: total_liabilities_minor + shareholders_equity_minor,
            capital_employed_minor: shareholders_equity_minor + total_liabilities_minor
                - current_liabilities_minor,
            debtors_minor: money(15_000_000, 30_000_000),
            shares_outstanding: 1_000_000,
        };
        self.out.push(snapshot.into());
    }
}
