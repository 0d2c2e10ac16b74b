use super::*;
use crate::alerting::AlertStore;
use crate::domain::{Record, TxnCategory, TxnType};
use crate::engine::{GoalPeriod, GoalTarget};
use crate::fixtures::{transplant, txn};
use crate::number::int;

fn dataset() -> Dataset {
    let mut records: Vec<Record> = vec![
        txn(
            "T1",
            "2015-06-03T10:00:00Z",
            150_050,
            TxnCategory::Revenue,
            TxnType::Charge,
        )
        .into(),
        txn(
            "T2",
            "2015-06-04T10:00:00Z",
            49_950,
            TxnCategory::Revenue,
            TxnType::Charge,
        )
        .into(),
    ];
    for (id, cit) in [("X1", 360), ("X2", 600), ("X3", 480)] {
        records.push(transplant(id, "2015-05-01T00:00:00Z", "2015-06-10T00:00:00Z", cit).into());
    }
    Dataset::from_records(records)
}

fn params(period: &str) -> ValueParams {
    ValueParams {
        period: Some(period.into()),
        ..Default::default()
    }
}

#[test]
fn money_values_are_minor_units() {
    let ws = Workspace::with_defaults();
    let data = dataset();
    let q = Query::new(&ws, &data);
    let body = q.kpi_value("revenue", &params("2015-06")).unwrap();
    assert_eq!(body.value, Some(Amount::Minor(200_000)));
    assert_eq!(body.currency.as_deref(), Some("USD"));
    let json = serde_json::to_value(&body).unwrap();
    assert_eq!(json["value"], 200_000);
    assert!(json.get("goal").is_none() && json.get("drilldown").is_none());
}

#[test]
fn cit_compliance_with_goal() {
    let mut ws = Workspace::with_defaults();
    ws.goals = crate::engine::GoalSet::new(vec![GoalTarget::new(
        "cit_compliance_rate",
        GoalPeriod::Every(PeriodKind::Month),
        int(1),
    )]);
    let data = dataset();
    let q = Query::new(&ws, &data);
    let body = q
        .kpi_value("cit_compliance_rate", &params("2015-06"))
        .unwrap();
    assert_eq!(body.value, Some(Amount::Real(2.0 / 3.0)));
    assert_eq!((body.numerator, body.denominator), (Some(2.0), Some(3.0)));
    assert!(body.goal.is_some());
}

#[test]
fn error_codes() {
    let ws = Workspace::with_defaults();
    let data = dataset();
    let q = Query::new(&ws, &data);
    let e = q.kpi_value("nope", &params("2015-06")).unwrap_err();
    assert_eq!((e.status, e.code.as_str()), (404, "unknown_kpi"));
    let e = q.kpi_value("revenue", &params("2015-13")).unwrap_err();
    assert_eq!((e.status, e.code.as_str()), (400, "invalid_period"));
    assert!(e.message.contains("invalid month"), "{}", e.message);
    let p = ValueParams {
        filter: FilterParams {
            organ: Some("kidney".into()),
            ..Default::default()
        },
        ..params("2015-06")
    };
    let e = q.kpi_value("revenue", &p).unwrap_err();
    assert_eq!((e.status, e.code.as_str()), (400, "inapplicable_dimension"));
    assert!(e.message.contains("department"), "{}", e.message);
    let e = q.kpi_value("revenue", &ValueParams::default()).unwrap_err();
    assert_eq!(e.code, "missing_parameter");
    let e = q
        .dashboard(
            "lobby",
            &DashboardParams {
                period: Some("2015-06".into()),
            },
            &AlertStore::in_memory(),
        )
        .unwrap_err();
    assert_eq!((e.status, e.code.as_str()), (404, "unknown_view"));
}

#[test]
fn drilldown_rows_sum_to_total() {
    let ws = Workspace::with_defaults();
    let data = dataset();
    let q = Query::new(&ws, &data);
    let p = ValueParams {
        drilldown: Some("department".into()),
        ..params("2015-06")
    };
    let body = q.kpi_value("revenue", &p).unwrap();
    let drill = body.drilldown.unwrap();
    assert!(drill.additive);
    assert_eq!(drill.rows.len(), 1);
    assert_eq!(drill.rows[0].value, body.value);
}

#[test]
fn series_limits() {
    let ws = Workspace::with_defaults();
    let data = dataset();
    let q = Query::new(&ws, &data);
    let series = |from: &str, to: &str| {
        q.kpi_series(
            "revenue",
            &SeriesParams {
                from: Some(from.into()),
                to: Some(to.into()),
                ..Default::default()
            },
        )
    };
    let body = series("2015-05", "2015-07").unwrap();
    assert_eq!(body.points.len(), 3);
    assert_eq!(body.points[1].value, Some(Amount::Minor(200_000)));
    assert_eq!(body.points[0].value, Some(Amount::Minor(0)));
    assert_eq!(series("2015-07", "2015-05").unwrap_err().status, 400);
    assert_eq!(series("2000-01", "2020-01").unwrap_err().status, 400);
    assert_eq!(series("2000-01", "2019-12").unwrap().points.len(), 240);
}

#[test]
fn dashboard_has_month_and_ytd_tiles() {
    let ws = Workspace::with_defaults();
    let data = dataset();
    let q = Query::new(&ws, &data);
    let body = q
        .dashboard(
            "executive",
            &DashboardParams {
                period: Some("2015-06".into()),
            },
            &AlertStore::in_memory(),
        )
        .unwrap();
    assert_eq!(body.tiles.len(), ws.views[&View::Executive].len());
    assert_eq!(body.tiles[0].month.scope, PeriodKind::Month);
    assert_eq!(body.tiles[0].ytd.scope, PeriodKind::Ytd);
    let text = render(&body);
    assert!(text.ends_with("}\n"));
}

#[test]
fn rank_parameters_are_checked() {
    let ws = Workspace::with_defaults();
    let data = dataset();
    let q = Query::new(&ws, &data);
    let ok = RankParams {
        period: Some("2015-06".into()),
        ..Default::default()
    };
    assert!(q.drg_rank(&ok).unwrap().rows.is_empty());
    for (key, n) in [
        (Some("volume"), None),
        (None, Some("many")),
        (None, Some("0")),
    ] {
        let p = RankParams {
            key: key.map(Into::into),
            n: n.map(Into::into),
            ..ok.clone()
        };
        assert_eq!(q.drg_rank(&p).unwrap_err().status, 400);
    }
}

#[test]
fn alerts_are_raised_and_actions_mapped() {
    let mut ws = Workspace::with_defaults();
    ws.rules = crate::alerting::parse_rules(
        "alert cit_low on cit_compliance_rate when lt 0.9 severity warning escalate_after 1\n",
        &ws.registry,
    )
    .unwrap();
    let data = dataset();
    let mut alerts = AlertStore::in_memory();
    let now = crate::fixtures::ts("2015-07-01T00:00:00Z");
    let changed = evaluate_alerts(&ws, &data, &mut alerts, now).unwrap();
    let ids: Vec<&str> = changed.iter().map(|a| a.alert_id.as_str()).collect();
    assert!(ids.contains(&"cit_low:2015-06"), "{ids:?}");
    assert!(evaluate_alerts(&ws, &data, &mut alerts, now)
        .unwrap()
        .is_empty());
    let e = alert_action(&mut alerts, "missing", "resolve", now).unwrap_err();
    assert_eq!((e.status, e.code.as_str()), (404, "unknown_alert"));
    let e = alert_action(&mut alerts, "cit_low:2015-06", "escalate", now).unwrap_err();
    assert_eq!(e.status, 404);
    alert_action(&mut alerts, "cit_low:2015-06", "resolve", now).unwrap();
    let e = alert_action(&mut alerts, "cit_low:2015-06", "acknowledge", now).unwrap_err();
    assert_eq!((e.status, e.code.as_str()), (409, "illegal_transition"));
}
