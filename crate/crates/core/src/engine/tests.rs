use super::*;
use crate::domain::*;
use crate::fixtures::*;
use crate::number::{int, ratio};

fn june() -> Period {
    Period::month(2015, 6).unwrap()
}

fn value_of(values: &[KpiValue], id: &str) -> Value {
    values
        .iter()
        .find(|v| v.kpi_id == id)
        .unwrap_or_else(|| panic!("{id} missing"))
        .value
        .clone()
}

fn defined(v: Number) -> Value {
    Value::Defined(v)
}

fn undefined(reason: &str) -> Value {
    Value::Undefined(reason.to_string())
}

struct Fixture {
    data: Dataset,
    registry: Registry,
    config: EngineConfig,
}

impl Fixture {
    fn new(records: Vec<Record>) -> Self {
        Fixture {
            data: Dataset::from_records(records),
            registry: default_registry(),
            config: EngineConfig::default(),
        }
    }

    fn engine(&self) -> Engine<'_> {
        Engine::new(&self.data, &self.registry, &self.config)
    }

    fn kpi(&self, id: &str, period: Period) -> Value {
        self.engine()
            .kpi_value(id, period, &DimensionFilter::none())
            .unwrap()
            .value
    }
}

fn dept(d: &str) -> DimensionFilter {
    DimensionFilter::none()
        .with(Dimension::Department, d)
        .unwrap()
}

#[test]
fn default_registry_parses_and_ratio_kpis_are_quotients() {
    let reg = default_registry();
    assert!(reg.len() > 90);
    for def in reg.iter() {
        if def.unit == crate::dsl::Unit::Ratio {
            assert!(def.quotient().is_some(), "{}", def.kpi_id);
        }
    }
    let text = reg.to_text();
    let again = parse_registry(&text).unwrap();
    assert_eq!(again.len(), reg.len());
}

#[test]
fn empty_store_measures() {
    let f = Fixture::new(vec![]);
    let ctx = f
        .engine()
        .build_measure_context(june(), &DimensionFilter::none());
    for spec in CATALOG.specs() {
        match spec.kind {
            MeasureKind::Balance => assert!(ctx.get(&spec.name).is_none()),
            MeasureKind::Constant => assert!(ctx.get(&spec.name).is_some()),
            _ => assert_eq!(ctx.get(&spec.name), Some(&int(0)), "{}", spec.name),
        }
    }
    assert_eq!(ctx.get("days_in_period"), Some(&int(30)));
}

#[test]
fn single_revenue_txn() {
    let f = Fixture::new(vec![txn(
        "t1",
        "2015-06-10T10:00Z",
        1000_00,
        TxnCategory::Revenue,
        TxnType::Charge,
    )
    .into()]);
    let ctx = f
        .engine()
        .build_measure_context(june(), &DimensionFilter::none());
    assert_eq!(ctx.get("revenue"), Some(&int(1000_00)));
}

#[test]
fn filter_by_department() {
    let a = encounter("e1", EncounterKind::Inpatient, "2015-06-01T00:00Z", None);
    let b = EncounterRecord {
        department: "cardio".into(),
        ..encounter("e2", EncounterKind::Inpatient, "2015-06-02T00:00Z", None)
    };
    let f = Fixture::new(vec![a.into(), b.into()]);
    let ctx = f.engine().build_measure_context(june(), &dept("cardio"));
    assert_eq!(ctx.get("admissions"), Some(&int(1)));
    assert!(ctx.get("diverts").is_none());
}

fn financial_fixture(revenue: i64, opex: i64) -> Fixture {
    let mut records: Vec<Record> = vec![txn(
        "r",
        "2015-06-05T00:00Z",
        revenue,
        TxnCategory::Revenue,
        TxnType::Charge,
    )
    .into()];
    if opex != 0 {
        records.push(
            txn(
                "o",
                "2015-06-05T00:00Z",
                opex,
                TxnCategory::OperatingExpense,
                TxnType::Charge,
            )
            .into(),
        );
    }
    Fixture::new(records)
}

#[test]
fn financial_core_examples() {
    let f = financial_fixture(1000_00, 0);
    let v = f.engine().compute_financial_core(june());
    assert_eq!(value_of(&v, "ebitda"), defined(int(1000_00)));
    assert_eq!(value_of(&v, "ebitda_margin"), defined(int(1)));

    let f = financial_fixture(1000_00, 600_00);
    let v = f.engine().compute_financial_core(june());
    assert_eq!(value_of(&v, "ebitda"), defined(int(400_00)));
    assert_eq!(value_of(&v, "ebitda_margin"), defined(ratio(4, 10)));
    let margin = v.iter().find(|k| k.kpi_id == "ebitda_margin").unwrap();
    assert_eq!(margin.numerator, Some(int(400_00)));
    assert_eq!(margin.denominator, Some(int(1000_00)));

    let f = Fixture::new(vec![]);
    let v = f.engine().compute_financial_core(june());
    assert_eq!(value_of(&v, "ebitda_margin"), undefined("division by zero"));
}

#[test]
fn financial_chain() {
    let c = |id: &str, amt: i64, cat: TxnCategory| -> Record {
        txn(id, "2015-06-05T00:00Z", amt, cat, TxnType::Charge).into()
    };
    let mut b = balance("2015-06-30");
    b.shares_outstanding = 10;
    b.capital_employed_minor = 1000;
    b.total_assets_minor = 2000;
    let mut opening = balance("2015-06-01");
    opening.total_assets_minor = 1000;
    let f = Fixture::new(vec![
        c("r", 1000, TxnCategory::Revenue),
        c("a", 100, TxnCategory::AdminCost),
        c("d", 50, TxnCategory::Depreciation),
        c("m", 50, TxnCategory::Amortization),
        c("i", 100, TxnCategory::Interest),
        c("t", 200, TxnCategory::Tax),
        b.into(),
        opening.into(),
    ]);
    let v = f.engine().compute_financial_core(june());
    assert_eq!(value_of(&v, "ebitda"), defined(int(900)));
    assert_eq!(value_of(&v, "ebit"), defined(int(800)));
    assert_eq!(value_of(&v, "operating_margin"), defined(ratio(8, 10)));
    assert_eq!(value_of(&v, "pbt"), defined(int(700)));
    assert_eq!(value_of(&v, "net_income"), defined(int(500)));
    assert_eq!(value_of(&v, "eps"), defined(int(50)));
    assert_eq!(value_of(&v, "return_on_capital"), defined(ratio(8, 10)));
    assert_eq!(value_of(&v, "return_on_assets"), defined(ratio(500, 1500)));
}

#[test]
fn cashflow_examples() {
    let mut b = balance("2015-06-30");
    b.current_assets_minor = 500;
    b.current_liabilities_minor = 500;
    b.debtors_minor = 300_00;
    b.cash_minor = 90_00;
    let mut credit = txn(
        "r",
        "2015-06-03T00:00Z",
        900_00,
        TxnCategory::Revenue,
        TxnType::Charge,
    );
    credit.channel = Some(Channel::Insurance);
    let opex = txn(
        "o",
        "2015-06-03T00:00Z",
        900_00,
        TxnCategory::OperatingExpense,
        TxnType::Charge,
    );
    let dep = txn(
        "d",
        "2015-06-03T00:00Z",
        50_00,
        TxnCategory::Depreciation,
        TxnType::Charge,
    );
    let f = Fixture::new(vec![b.into(), credit.into(), opex.into(), dep.into()]);
    let v = f.engine().compute_cashflow(june());
    assert_eq!(value_of(&v, "current_ratio"), defined(int(1)));
    assert_eq!(value_of(&v, "collection_ratio_days"), defined(int(10)));
    assert_eq!(value_of(&v, "days_cash_on_hand"), defined(int(3)));
    assert_eq!(value_of(&v, "debt_equity"), undefined("division by zero"));

    let mut raw = f.config.clone();
    raw.days_cash_raw = true;
    let engine = Engine::new(&f.data, &f.registry, &raw);
    let v = engine.compute_cashflow(june());
    assert_eq!(value_of(&v, "days_cash_on_hand"), defined(ratio(1, 10)));
}

#[test]
fn cashflow_without_snapshot() {
    let f = Fixture::new(vec![balance("2015-07-01").into()]);
    let v = f.engine().compute_cashflow(june());
    assert_eq!(v.len(), 4);
    for k in v {
        assert_eq!(
            k.value,
            undefined("missing balance snapshot"),
            "{}",
            k.kpi_id
        );
    }
}

#[test]
fn operational_examples() {
    let e = encounter(
        "e1",
        EncounterKind::Inpatient,
        "2015-06-01T00:00Z",
        Some("2015-06-06T00:00Z"),
    );
    let mut records: Vec<Record> = vec![e.into()];
    for i in 0..10 {
        let status = match i {
            0 => AppointmentStatus::Cancelled,
            1 | 2 => AppointmentStatus::NoShow,
            _ => AppointmentStatus::Completed,
        };
        records.push(appointment(&format!("a{i}"), "2015-06-10T09:00Z", status).into());
    }
    let f = Fixture::new(records);
    let v = f
        .engine()
        .compute_operational(june(), &DimensionFilter::none());
    assert_eq!(value_of(&v, "alos"), defined(int(5)));
    assert_eq!(value_of(&v, "no_show_rate"), defined(ratio(2, 9)));
    assert_eq!(value_of(&v, "outpatient_visits"), defined(int(7)));
    assert_eq!(value_of(&v, "bed_occupancy"), undefined("division by zero"));

    let f = Fixture::new(vec![capacity(Resource::Beds, "2015-06-01", 10).into()]);
    assert_eq!(f.kpi("bed_occupancy", june()), defined(int(0)));
    assert_eq!(f.kpi("alos", june()), undefined("no data"));
}

#[test]
fn stays_thresholds_and_patient_days() {
    let long = encounter(
        "e1",
        EncounterKind::Inpatient,
        "2015-05-01T00:00Z",
        Some("2015-06-10T00:00Z"),
    );
    let ext = encounter(
        "e2",
        EncounterKind::Inpatient,
        "2015-06-01T00:00Z",
        Some("2015-06-12T00:00Z"),
    );
    let exact = encounter(
        "e3",
        EncounterKind::Inpatient,
        "2015-06-01T00:00Z",
        Some("2015-06-11T00:00Z"),
    );
    let open = encounter("e4", EncounterKind::Inpatient, "2015-06-29T12:00Z", None);
    let f = Fixture::new(vec![long.into(), ext.into(), exact.into(), open.into()]);
    let ctx = f
        .engine()
        .build_measure_context(june(), &DimensionFilter::none());
    assert_eq!(ctx.get("extended_stays"), Some(&int(2)));
    assert_eq!(ctx.get("long_stays"), Some(&int(1)));
    assert_eq!(
        ctx.get("patient_days"),
        Some(&(int(9 + 11 + 10) + ratio(3, 2)))
    );
}

#[test]
fn readmissions() {
    let first = encounter(
        "e1",
        EncounterKind::Inpatient,
        "2015-05-01T00:00Z",
        Some("2015-05-20T00:00Z"),
    );
    let within = EncounterRecord {
        patient_id: "p-e1".into(),
        ..encounter(
            "e2",
            EncounterKind::Inpatient,
            "2015-06-19T00:00Z",
            Some("2015-06-21T00:00Z"),
        )
    };
    let planned = EncounterRecord {
        patient_id: "p-e1".into(),
        planned: true,
        ..encounter(
            "e3",
            EncounterKind::Inpatient,
            "2015-06-22T00:00Z",
            Some("2015-06-23T00:00Z"),
        )
    };
    let outside = EncounterRecord {
        patient_id: "p-e1".into(),
        ..encounter("e4", EncounterKind::Inpatient, "2015-08-01T00:00Z", None)
    };
    let f = Fixture::new(vec![
        first.into(),
        within.into(),
        planned.into(),
        outside.into(),
    ]);
    assert_eq!(
        f.kpi("unplanned_readmit_rate", june()),
        defined(ratio(1, 2))
    );
    assert_eq!(
        f.kpi("unplanned_readmit_rate", Period::month(2015, 8).unwrap()),
        undefined("no data")
    );
}

#[test]
fn er_and_or_kpis() {
    let er = EncounterRecord {
        disposition: Disposition::Admitted,
        ..encounter(
            "e1",
            EncounterKind::Emergency,
            "2015-06-01T10:00Z",
            Some("2015-06-01T12:00Z"),
        )
    };
    let er2 = encounter(
        "e2",
        EncounterKind::Emergency,
        "2015-06-01T10:00Z",
        Some("2015-06-01T12:00Z"),
    );
    let mut s = surgery("s1", "e1", "2015-06-01T11:00Z", "2015-06-01T12:30Z");
    s.scheduled_start = ts("2015-06-01T10:30Z");
    s.pre_op_minutes = 20;
    let mut cap = capacity(Resource::OrRooms, "2015-06-01", 1);
    cap.available_minutes = Some(360);
    let f = Fixture::new(vec![
        er.into(),
        er2.into(),
        s.into(),
        cap.into(),
        process_event("e1", Stage::TreatmentStarted, "2015-06-01T10:45Z").into(),
        process_event("e1", Stage::InitialAssessment, "2015-06-01T10:05Z").into(),
        divert("v1", "2015-06-02T00:00Z", 30).into(),
    ]);
    let v = f
        .engine()
        .compute_operational(june(), &DimensionFilter::none());
    assert_eq!(value_of(&v, "er_presents"), defined(int(2)));
    assert_eq!(value_of(&v, "er_admit_rate"), defined(ratio(1, 2)));
    assert_eq!(value_of(&v, "time_to_treatment"), defined(int(45)));
    assert_eq!(value_of(&v, "registration_wait_minutes"), defined(int(5)));
    assert_eq!(value_of(&v, "or_utilization"), defined(ratio(90, 360)));
    assert_eq!(value_of(&v, "or_idle_minutes"), defined(int(270)));
    assert_eq!(value_of(&v, "avg_pre_op_minutes"), defined(int(20)));
    assert_eq!(value_of(&v, "or_wait_minutes"), defined(int(30)));
    assert_eq!(value_of(&v, "divert_count"), defined(int(1)));
}

#[test]
fn process_lag_examples() {
    let enc = |id: &str| encounter(id, EncounterKind::Inpatient, "2015-06-01T00:00Z", None);
    let f = Fixture::new(vec![
        enc("e1").into(),
        process_event("e1", Stage::InitialAssessment, "2015-06-01T01:00Z").into(),
        process_event("e1", Stage::BedAllocated, "2015-06-01T01:30Z").into(),
    ]);
    let lags = f.engine().compute_process_lags(june(), false);
    assert_eq!(
        value_of(&lags, "lag_initial_assessment_to_bed_allocated_non_er"),
        defined(int(30))
    );
    assert_eq!(
        value_of(
            &lags,
            "lag_first_inward_assessment_to_results_reported_non_er"
        ),
        undefined("no data")
    );
    assert_eq!(lags.len(), 11);

    let f = Fixture::new(vec![
        enc("e1").into(),
        enc("e2").into(),
        process_event("e1", Stage::PreauthDone, "2015-06-01T01:00Z").into(),
        process_event("e1", Stage::CounsellingDone, "2015-06-01T01:10Z").into(),
        process_event("e2", Stage::PreauthDone, "2015-06-01T01:00Z").into(),
        process_event("e2", Stage::CounsellingDone, "2015-06-01T01:30Z").into(),
    ]);
    let lags = f.engine().compute_process_lags(june(), false);
    assert_eq!(
        value_of(&lags, "lag_preauth_done_to_counselling_done_non_er"),
        defined(int(20))
    );
    assert_eq!(
        f.kpi("lag_preauth_done_to_counselling_done_non_er", june()),
        defined(int(20))
    );
    let er = f.engine().compute_process_lags(june(), true);
    assert_eq!(
        value_of(&er, "lag_preauth_done_to_counselling_done_er"),
        undefined("no data")
    );
}

#[test]
fn quality_examples() {
    let s = |id: &str, cat: SurveyCategory, score: i64| -> Record {
        survey(id, "2015-06-10T00:00Z", Respondent::Patient, cat, score).into()
    };
    let f = Fixture::new(vec![
        s("1", SurveyCategory::PatientCare, 3),
        s("2", SurveyCategory::PatientCare, 4),
        s("3", SurveyCategory::PatientCare, 5),
        s("4", SurveyCategory::Overall, 5),
        survey(
            "5",
            "2015-06-10T00:00Z",
            Respondent::Rn,
            SurveyCategory::Nursing,
            2,
        )
        .into(),
        s("6", SurveyCategory::Nursing, 4),
    ]);
    let v = f.engine().compute_quality(june(), &DimensionFilter::none());
    assert_eq!(value_of(&v, "satisfaction_patient_care"), defined(int(4)));
    assert_eq!(value_of(&v, "satisfaction_overall"), defined(int(5)));
    assert_eq!(value_of(&v, "nursing_rn_score"), defined(int(2)));
    assert_eq!(value_of(&v, "nursing_patient_score"), defined(int(4)));
    for cat in IncidentCategory::ALL {
        assert_eq!(value_of(&v, &format!("incidents_{cat}")), defined(int(0)));
    }
    assert_eq!(
        value_of(&v, "complaint_resolution_days"),
        undefined("no data")
    );
}

#[test]
fn quality_all_fives_and_drg_rows() {
    let mut records: Vec<Record> = Vec::new();
    for (i, cat) in SurveyCategory::ALL.iter().enumerate() {
        if *cat != SurveyCategory::Nursing {
            records.push(
                survey(
                    &i.to_string(),
                    "2015-06-10T00:00Z",
                    Respondent::Patient,
                    *cat,
                    5,
                )
                .into(),
            );
        }
    }
    let mut e = encounter(
        "e1",
        EncounterKind::Inpatient,
        "2015-06-01T00:00Z",
        Some("2015-06-02T00:00Z"),
    );
    e.drg_code = Some("470".into());
    records.push(e.into());
    let mut inc = incident("i1", "2015-06-01T00:00Z", IncidentCategory::WaitTime);
    inc.resolved_ts = Some(ts("2015-06-03T12:00Z"));
    records.push(inc.into());
    let f = Fixture::new(records);
    let v = f.engine().compute_quality(june(), &DimensionFilter::none());
    for id in [
        "satisfaction_patient_care",
        "satisfaction_customer_service",
        "satisfaction_overall",
        "recommend_score",
    ] {
        assert_eq!(value_of(&v, id), defined(int(5)));
    }
    assert_eq!(
        value_of(&v, "complaint_resolution_days"),
        defined(ratio(5, 2))
    );
    let drg_row = v
        .iter()
        .find(|k| k.filter.get(Dimension::Drg) == Some("470"))
        .unwrap();
    assert_eq!(drg_row.value, defined(int(1)));
}

#[test]
fn revenue_cycle_examples() {
    let c = |id: &str, status: ClaimStatus, billed: i64, paid: i64| -> Record {
        claim(id, "e1", "2015-06-10T00:00Z", status, billed, paid).into()
    };
    let f = Fixture::new(vec![
        c("1", ClaimStatus::Paid, 100, 100),
        c("2", ClaimStatus::Paid, 50, 50),
    ]);
    let v = f.engine().compute_revenue_cycle(june(), None);
    assert_eq!(value_of(&v, "denial_rate_count"), defined(int(0)));
    assert_eq!(value_of(&v, "denial_rate_amount"), defined(int(0)));

    let f = Fixture::new(vec![
        c("1", ClaimStatus::Paid, 100, 100),
        c("2", ClaimStatus::Paid, 100, 100),
        c("3", ClaimStatus::Partial, 100, 50),
        c("4", ClaimStatus::Denied, 100, 0),
        c("5", ClaimStatus::Open, 100, 0),
    ]);
    let v = f.engine().compute_revenue_cycle(june(), None);
    assert_eq!(value_of(&v, "denial_rate_count"), defined(ratio(1, 4)));
    assert_eq!(value_of(&v, "denial_rate_amount"), defined(ratio(150, 400)));
}

#[test]
fn deposit_compliance_same_or_next_day() {
    let pos = |id: &str, deposited: &str| -> Record {
        let mut t = txn(
            id,
            "2015-06-01T10:00Z",
            100,
            TxnCategory::Revenue,
            TxnType::Payment,
        );
        t.channel = Some(Channel::Pos);
        t.received_ts = Some(ts("2015-06-01T10:00Z"));
        t.deposited_ts = Some(ts(deposited));
        t.into()
    };
    // 2015-06-01 is a Monday.
    let f = Fixture::new(vec![pos("wed", "2015-06-03T09:00Z")]);
    assert_eq!(f.kpi("deposit_compliance", june()), defined(int(0)));
    let f = Fixture::new(vec![pos("tue", "2015-06-02T23:00Z")]);
    assert_eq!(f.kpi("deposit_compliance", june()), defined(int(1)));
    assert_eq!(f.kpi("pos_collection", june()), defined(int(100)));
}

#[test]
fn provider_examples() {
    let e = encounter(
        "e1",
        EncounterKind::Inpatient,
        "2015-06-01T00:00Z",
        Some("2015-06-03T00:00Z"),
    );
    let mut rev = txn(
        "t1",
        "2015-06-02T00:00Z",
        1000_00,
        TxnCategory::Revenue,
        TxnType::Charge,
    );
    rev.doctor_id = Some("d1".into());
    let mut other = txn(
        "t2",
        "2015-06-02T00:00Z",
        500_00,
        TxnCategory::Revenue,
        TxnType::Charge,
    );
    other.doctor_id = Some("d2".into());
    let f = Fixture::new(vec![
        e.into(),
        rev.into(),
        other.into(),
        staff("s1", Milli(2000)).into(),
        staff("s2", Milli(1000)).into(),
        staff("s3", Milli(1000)).into(),
    ]);
    let report = f.engine().compute_provider(june());
    assert_eq!(report.doctors.len(), 2);
    let d1 = &report.doctors[0];
    assert_eq!(d1.doctor_id, "d1");
    assert_eq!(d1.occupancy_share.value, defined(int(1)));
    assert_eq!(d1.revenue_per_encounter.value, defined(int(1000_00)));
    let d2 = &report.doctors[1];
    assert_eq!(d2.encounters.value, defined(int(0)));
    assert_eq!(d2.revenue_per_encounter.value, undefined("no data"));
    assert_eq!(
        value_of(&report.hospital, "revenue_per_fte"),
        defined(int(1500_00) / int(4))
    );
}

#[test]
fn revenue_per_fte_example() {
    let f = Fixture::new(vec![
        txn(
            "t1",
            "2015-06-02T00:00Z",
            1000_00,
            TxnCategory::Revenue,
            TxnType::Charge,
        )
        .into(),
        staff("s1", Milli(4000)).into(),
    ]);
    assert_eq!(f.kpi("revenue_per_fte", june()), defined(int(250_00)));
}

#[test]
fn transplant_examples() {
    let f = Fixture::new(vec![
        transplant("c1", "2015-01-01T00:00Z", "2015-06-01T00:00Z", 360).into(),
        transplant("c2", "2015-01-01T00:00Z", "2015-06-02T00:00Z", 600).into(),
        transplant("c3", "2015-01-01T00:00Z", "2015-06-03T00:00Z", 480).into(),
    ]);
    let v = f.engine().compute_transplant(june());
    assert_eq!(value_of(&v, "cit_compliance_rate"), defined(ratio(2, 3)));
    assert_eq!(value_of(&v, "avg_cit_minutes"), defined(int(480)));
    assert_eq!(value_of(&v, "failure_rate"), defined(int(0)));
    assert_eq!(value_of(&v, "living_donor_share"), defined(int(0)));

    let f = Fixture::new(vec![]);
    let v = f.engine().compute_transplant(june());
    assert_eq!(value_of(&v, "avg_cit_minutes"), undefined("no data"));
}

#[test]
fn cit_boundary_is_strict() {
    let f = Fixture::new(vec![transplant(
        "c1",
        "2015-01-01T00:00Z",
        "2015-06-01T00:00Z",
        540,
    )
    .into()]);
    assert_eq!(f.kpi("cit_compliance_rate", june()), defined(int(0)));
}

#[test]
fn waiting_list_is_a_period_end_stock() {
    let mut active = transplant("c1", "2015-06-20T00:00Z", "2015-06-21T00:00Z", 0);
    active.status = TransplantStatus::Active;
    active.transplant_ts = None;
    active.cold_ischemia_minutes = None;
    let f = Fixture::new(vec![active.into()]);
    assert_eq!(f.kpi("waiting_list", june()), defined(int(1)));
    assert_eq!(f.kpi("avg_wait_days_active", june()), defined(int(11)));
    assert_eq!(
        f.kpi("waiting_list", Period::month(2015, 5).unwrap()),
        defined(int(0))
    );
}

fn drg_fixture(revenues: &[(&str, i64)]) -> Fixture {
    let mut records: Vec<Record> = Vec::new();
    for (i, (drg, amount)) in revenues.iter().enumerate() {
        let id = format!("e{i}");
        let mut e = encounter(&id, EncounterKind::Inpatient, "2015-06-01T00:00Z", None);
        e.drg_code = Some(drg.to_string());
        let mut t = txn(
            &format!("t{i}"),
            "2015-06-02T00:00Z",
            *amount,
            TxnCategory::Revenue,
            TxnType::Charge,
        );
        t.encounter_id = Some(id);
        records.push(e.into());
        records.push(t.into());
    }
    Fixture::new(records)
}

fn ranked(f: &Fixture, key: RankKey, order: RankOrder, n: usize) -> Vec<String> {
    f.engine()
        .rank_drg(june(), key, order, n)
        .unwrap()
        .rows
        .into_iter()
        .map(|r| r.drg_code)
        .collect()
}

#[test]
fn rank_drg_examples() {
    let f = drg_fixture(&[("A", 100)]);
    for key in RankKey::ALL {
        for order in RankOrder::ALL {
            assert_eq!(ranked(&f, *key, *order, 3), vec!["A"]);
        }
    }
    let f = drg_fixture(&[("A", 100), ("B", 300), ("C", 200)]);
    assert_eq!(
        ranked(&f, RankKey::Revenue, RankOrder::Top, 2),
        vec!["B", "C"]
    );
    assert_eq!(
        ranked(&f, RankKey::Revenue, RankOrder::Bottom, 2),
        vec!["A", "C"]
    );
    let f = drg_fixture(&[("B", 100), ("A", 100)]);
    assert_eq!(
        ranked(&f, RankKey::Revenue, RankOrder::Top, 2),
        vec!["A", "B"]
    );
    assert!(f
        .engine()
        .rank_drg(june(), RankKey::Revenue, RankOrder::Top, 0)
        .is_err());
}

#[test]
fn rank_margin_uses_attributed_expense_only() {
    let mut f = drg_fixture(&[("A", 100), ("B", 300)]);
    let mut cost = txn(
        "x",
        "2015-06-02T00:00Z",
        250,
        TxnCategory::OperatingExpense,
        TxnType::Charge,
    );
    cost.encounter_id = Some("e1".into());
    f.data.push(cost.into());
    f.data.push(
        txn(
            "y",
            "2015-06-02T00:00Z",
            9999,
            TxnCategory::OperatingExpense,
            TxnType::Charge,
        )
        .into(),
    );
    assert_eq!(
        ranked(&f, RankKey::Margin, RankOrder::Top, 2),
        vec!["A", "B"]
    );
    let rank = f
        .engine()
        .rank_drg(june(), RankKey::Margin, RankOrder::Bottom, 1)
        .unwrap();
    assert_eq!(rank.rows[0].margin, int(50));
}

#[test]
fn ytd_examples() {
    let mut records: Vec<Record> = Vec::new();
    for (month, n) in [(1, 10), (2, 20), (3, 30)] {
        for i in 0..n {
            let admit = format!("2015-{month:02}-05T00:00Z");
            records.push(
                encounter(
                    &format!("e{month}-{i}"),
                    EncounterKind::Inpatient,
                    &admit,
                    None,
                )
                .into(),
            );
        }
    }
    let f = Fixture::new(records);
    let engine = f.engine();
    let none = DimensionFilter::none();
    assert_eq!(
        engine
            .aggregate_ytd(2015, 3, "admissions", &none)
            .unwrap()
            .value,
        defined(int(60))
    );
    assert_eq!(
        engine
            .aggregate_ytd(2015, 1, "admissions", &none)
            .unwrap()
            .value,
        engine
            .kpi_value("admissions", Period::month(2015, 1).unwrap(), &none)
            .unwrap()
            .value
    );

    let mut records: Vec<Record> = Vec::new();
    for (month, scheduled) in [(1, 10), (2, 20)] {
        for i in 0..scheduled {
            let status = if i == 0 {
                AppointmentStatus::NoShow
            } else {
                AppointmentStatus::Completed
            };
            records.push(
                appointment(
                    &format!("a{month}-{i}"),
                    &format!("2015-{month:02}-05T09:00Z"),
                    status,
                )
                .into(),
            );
        }
    }
    let f = Fixture::new(records);
    let ytd = f
        .engine()
        .aggregate_ytd(2015, 2, "no_show_rate", &none)
        .unwrap();
    assert_eq!(ytd.value, defined(ratio(2, 30)));
    assert_eq!(ytd.numerator, Some(int(2)));
    assert_eq!(ytd.denominator, Some(int(30)));
    assert!(f
        .engine()
        .aggregate_ytd(2015, 13, "no_show_rate", &none)
        .is_err());
}

#[test]
fn drilldown_examples() {
    let mut records: Vec<Record> = Vec::new();
    for i in 0..30 {
        let mut e = encounter(
            &format!("e{i}"),
            EncounterKind::Inpatient,
            "2015-06-05T00:00Z",
            None,
        );
        e.department = if i < 10 { "cardio" } else { "ortho" }.into();
        records.push(e.into());
    }
    let f = Fixture::new(records);
    let d = f
        .engine()
        .drilldown("admissions", june(), Dimension::Department)
        .unwrap();
    assert_eq!(d.total.value, defined(int(30)));
    let rows: Vec<(&str, Value)> = d
        .rows
        .iter()
        .map(|(k, v)| (k.as_str(), v.value.clone()))
        .collect();
    assert_eq!(
        rows,
        vec![("cardio", defined(int(10))), ("ortho", defined(int(20)))]
    );
    assert_eq!(d.row_sum(), int(30));

    let f = Fixture::new(vec![encounter(
        "e1",
        EncounterKind::Inpatient,
        "2015-06-05T00:00Z",
        None,
    )
    .into()]);
    let d = f
        .engine()
        .drilldown("admissions", june(), Dimension::Department)
        .unwrap();
    assert_eq!(d.rows.len(), 1);
    assert_eq!(d.rows[0].1.value, d.total.value);
}

#[test]
fn revenue_drilldown_has_unassigned_row() {
    let mut a = txn(
        "t1",
        "2015-06-02T00:00Z",
        700,
        TxnCategory::Revenue,
        TxnType::Charge,
    );
    a.doctor_id = Some("d1".into());
    let b = txn(
        "t2",
        "2015-06-02T00:00Z",
        300,
        TxnCategory::Revenue,
        TxnType::Charge,
    );
    let f = Fixture::new(vec![a.into(), b.into()]);
    let d = f
        .engine()
        .drilldown("revenue", june(), Dimension::Doctor)
        .unwrap();
    assert_eq!(d.rows.last().unwrap().0, UNASSIGNED);
    assert_eq!(d.rows.last().unwrap().1.value, defined(int(300)));
    assert_eq!(d.row_sum(), int(1000));
}

#[test]
fn inapplicable_dimension_names_valid_ones() {
    let f = Fixture::new(vec![]);
    let err = f
        .engine()
        .drilldown("divert_count", june(), Dimension::Department)
        .unwrap_err();
    assert_eq!(
        err.to_string(),
        "dimension department is not applicable to kpi 'divert_count'; valid dimensions: none"
    );
    let err = f
        .engine()
        .drilldown("incident_count", june(), Dimension::Doctor)
        .unwrap_err();
    assert!(err.to_string().ends_with("valid dimensions: department"));
    let err = f
        .engine()
        .kpi_value("transplants", june(), &dept("x"))
        .unwrap_err();
    assert!(matches!(err, EngineError::InapplicableDimension { .. }));
    assert!(matches!(
        f.engine()
            .kpi_value("nope", june(), &DimensionFilter::none()),
        Err(EngineError::UnknownKpi(_))
    ));
}

#[test]
fn additivity_flags() {
    let reg = default_registry();
    assert!(is_additive(reg.get("ebitda").unwrap(), true));
    assert!(is_additive(reg.get("or_idle_minutes").unwrap(), true));
    assert!(!is_additive(reg.get("ebitda_margin").unwrap(), false));
    assert!(is_additive(reg.get("waiting_list").unwrap(), false));
    assert!(!is_additive(reg.get("waiting_list").unwrap(), true));
    assert!(!is_additive(reg.get("eps").unwrap(), false));
}

#[test]
fn reporting_zone_moves_month_boundaries() {
    let t = txn(
        "t1",
        "2015-05-31T20:00Z",
        100,
        TxnCategory::Revenue,
        TxnType::Charge,
    );
    let mut f = Fixture::new(vec![t.into()]);
    assert_eq!(f.kpi("revenue", june()), defined(int(0)));
    f.config.time_zone = chrono_tz::Asia::Kolkata;
    assert_eq!(f.kpi("revenue", june()), defined(int(100)));
}
