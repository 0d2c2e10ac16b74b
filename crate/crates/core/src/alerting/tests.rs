use chrono::{TimeZone, Utc};

use super::*;
use crate::dsl::Value;
use crate::engine::{default_registry, DimensionFilter};
use crate::number::int;

fn now(day: u32) -> Timestamp {
    Utc.with_ymd_and_hms(2015, 7, day, 0, 0, 0).unwrap()
}

fn june() -> Period {
    Period::month(2015, 6).unwrap()
}

fn rules() -> Vec<AlertRule> {
    let text = "alert ar_high on ar_days when gt 90 severity critical escalate_after 2\n\
                alert cit_low on cit_compliance_rate when lt 0.9 severity warning escalate_after 1\n";
    parse_rules(text, &default_registry()).unwrap()
}

fn obs(kpi_id: &str, period: Period, value: Value) -> KpiValue {
    KpiValue {
        kpi_id: kpi_id.into(),
        period,
        filter: DimensionFilter::none(),
        value,
        numerator: None,
        denominator: None,
    }
}

fn snapshot(period: Period, ar: Value, cit: Value) -> Vec<KpiValue> {
    vec![
        obs("ar_days", period, ar),
        obs("cit_compliance_rate", period, cit),
    ]
}

#[test]
fn receivables_over_ninety_days_fire_one_critical_alert() {
    let fired = evaluate_rules(
        &rules(),
        &snapshot(june(), Value::Defined(int(120)), Value::Defined(int(1))),
        june(),
        &[],
        now(1),
    );
    assert_eq!(fired.len(), 1);
    let alert = &fired[0];
    assert_eq!(alert.alert_id, "ar_high:2015-06");
    assert_eq!(
        (alert.severity, alert.state, alert.kind),
        (
            AlertSeverity::Critical,
            AlertState::Open,
            AlertKind::Threshold
        )
    );
    assert_eq!(alert.observed_value, Some(120.0));
}

#[test]
fn value_at_threshold_does_not_fire_strict_rule() {
    let fired = evaluate_rules(
        &rules(),
        &snapshot(june(), Value::Defined(int(90)), Value::Defined(int(1))),
        june(),
        &[],
        now(1),
    );
    assert!(fired.is_empty());
}

#[test]
fn undefined_value_raises_info_data_quality_alert() {
    let fired = evaluate_rules(
        &rules(),
        &snapshot(
            june(),
            Value::Defined(int(10)),
            Value::Undefined("no data".into()),
        ),
        june(),
        &[],
        now(1),
    );
    assert_eq!(fired.len(), 1);
    assert_eq!(fired[0].alert_id, "cit_low:2015-06:dq");
    assert_eq!(
        (fired[0].severity, fired[0].kind),
        (AlertSeverity::Info, AlertKind::DataQuality)
    );
    assert!(fired[0].message.contains("no data"));
}

#[test]
fn same_snapshot_twice_is_idempotent() {
    let mut store = AlertStore::in_memory();
    let obs = snapshot(
        june(),
        Value::Defined(int(120)),
        Value::Undefined("no data".into()),
    );
    assert_eq!(
        store
            .evaluate(&rules(), &obs, june(), now(1))
            .unwrap()
            .len(),
        2
    );
    assert!(store
        .evaluate(&rules(), &obs, june(), now(2))
        .unwrap()
        .is_empty());
    assert_eq!(store.len(), 2);
    assert!(store.list(None).iter().all(|a| a.updated_at == now(1)));
}

#[test]
fn persisting_alert_escalates_then_resolves() {
    let mut store = AlertStore::in_memory();
    let high = |p: Period| snapshot(p, Value::Defined(int(120)), Value::Defined(int(1)));
    let july = june().next();
    let august = july.next();
    store
        .evaluate(&rules(), &high(june()), june(), now(1))
        .unwrap();
    store.evaluate(&rules(), &high(july), july, now(2)).unwrap();
    let alert = store.get("ar_high:2015-06").unwrap();
    assert_eq!(
        (alert.state, alert.last_period.as_str()),
        (AlertState::Open, "2015-07")
    );
    store
        .evaluate(&rules(), &high(august), august, now(3))
        .unwrap();
    assert_eq!(
        store.get("ar_high:2015-06").unwrap().state,
        AlertState::Escalated
    );
    assert_eq!(store.len(), 1);

    let september = august.next();
    let ok = snapshot(september, Value::Defined(int(60)), Value::Defined(int(1)));
    let changed = store.evaluate(&rules(), &ok, september, now(4)).unwrap();
    assert_eq!(changed[0].state, AlertState::Resolved);
    assert!(store.active().is_empty());
}

#[test]
fn earlier_period_does_not_resolve_later_alert() {
    let mut store = AlertStore::in_memory();
    let july = june().next();
    store
        .evaluate(
            &rules(),
            &snapshot(july, Value::Defined(int(120)), Value::Defined(int(1))),
            july,
            now(1),
        )
        .unwrap();
    let changed = store
        .evaluate(
            &rules(),
            &snapshot(june(), Value::Defined(int(10)), Value::Defined(int(1))),
            june(),
            now(2),
        )
        .unwrap();
    assert!(changed.is_empty());
}

#[test]
fn manual_resolution_is_not_undone_by_reevaluation() {
    let mut store = AlertStore::in_memory();
    let obs = snapshot(june(), Value::Defined(int(120)), Value::Defined(int(1)));
    store.evaluate(&rules(), &obs, june(), now(1)).unwrap();
    store
        .transition("ar_high:2015-06", AlertAction::Resolve, now(2))
        .unwrap();
    assert!(store
        .evaluate(&rules(), &obs, june(), now(3))
        .unwrap()
        .is_empty());
    assert_eq!(
        store.get("ar_high:2015-06").unwrap().state,
        AlertState::Resolved
    );
}

#[test]
fn transition_table() {
    let legal: Vec<(AlertState, AlertState)> = AlertState::ALL
        .iter()
        .flat_map(|&from| AlertState::ALL.iter().map(move |&to| (from, to)))
        .filter(|(from, to)| from.can_transition(*to))
        .collect();
    use AlertState::*;
    assert_eq!(
        legal,
        vec![
            (Open, Acknowledged),
            (Open, Escalated),
            (Open, Resolved),
            (Acknowledged, Resolved),
            (Escalated, Resolved)
        ]
    );
}

#[test]
fn operator_actions() {
    let mut store = AlertStore::in_memory();
    let obs = snapshot(june(), Value::Defined(int(120)), Value::Defined(int(1)));
    store.evaluate(&rules(), &obs, june(), now(1)).unwrap();
    let acked = store
        .transition("ar_high:2015-06", AlertAction::Acknowledge, now(2))
        .unwrap();
    assert_eq!(
        (acked.state, acked.updated_at),
        (AlertState::Acknowledged, now(2))
    );
    assert!(matches!(
        store.transition("ar_high:2015-06", AlertAction::Acknowledge, now(3)),
        Err(AlertStoreError::Illegal(_))
    ));
    store
        .transition("ar_high:2015-06", AlertAction::Resolve, now(3))
        .unwrap();
    assert!(matches!(
        store.transition("ar_high:2015-06", AlertAction::Acknowledge, now(4)),
        Err(AlertStoreError::Illegal(IllegalTransition {
            from: AlertState::Resolved,
            to: AlertState::Acknowledged
        }))
    ));
    assert!(matches!(
        store.transition("nope", AlertAction::Resolve, now(4)),
        Err(AlertStoreError::UnknownAlert(_))
    ));
}

#[test]
fn persisted_store_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alerts.json");
    let obs = snapshot(june(), Value::Defined(int(120)), Value::Defined(int(1)));
    AlertStore::open(&path)
        .unwrap()
        .evaluate(&rules(), &obs, june(), now(1))
        .unwrap();
    let store = AlertStore::open(&path).unwrap();
    assert_eq!(store.list(Some(AlertState::Open)).len(), 1);
}
