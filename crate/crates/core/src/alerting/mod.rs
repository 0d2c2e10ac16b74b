//! Threshold rules over KPI values and the lifecycle of the alerts they raise.

mod rules;
mod store;

use serde::{Deserialize, Serialize};

pub use rules::{parse_rules, AlertRule, AlertSeverity, Comparator, RuleError};
pub use store::{AlertStore, AlertStoreError};

use crate::domain::{string_enum, Timestamp};
use crate::engine::{Engine, EngineError, KpiValue, Period, PeriodKind};
use crate::number::to_f64;

string_enum! {
    pub enum AlertState: "alert state" {
        Open => "open",
        Acknowledged => "acknowledged",
        Escalated => "escalated",
        Resolved => "resolved",
    }
}

impl AlertState {
    /// The only legal moves: open to acknowledged, escalated or resolved,
    /// and acknowledged or escalated to resolved.
    pub fn can_transition(self, to: AlertState) -> bool {
        use AlertState::*;
        matches!(
            (self, to),
            (Open, Acknowledged)
                | (Open, Escalated)
                | (Open, Resolved)
                | (Acknowledged, Resolved)
                | (Escalated, Resolved)
        )
    }

    pub fn is_active(self) -> bool {
        self != AlertState::Resolved
    }
}

string_enum! {
    /// Operator actions on an alert. Escalation happens only through evaluation.
    pub enum AlertAction: "alert action" {
        Acknowledge => "acknowledge",
        Resolve => "resolve",
    }
}

impl AlertAction {
    pub fn target(self) -> AlertState {
        match self {
            AlertAction::Acknowledge => AlertState::Acknowledged,
            AlertAction::Resolve => AlertState::Resolved,
        }
    }
}

string_enum! {
    pub enum AlertKind: "alert kind" {
        Threshold => "threshold",
        DataQuality => "data_quality",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("illegal transition {from} -> {to}")]
pub struct IllegalTransition {
    pub from: AlertState,
    pub to: AlertState,
}

/// One alert raised by a rule.
///
/// `period` is the month the alert opened in; `last_period` the latest
/// month its condition was seen. Ids are `<rule_id>:<period>` for
/// threshold alerts and `<rule_id>:<period>:dq` for data-quality alerts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertEvent {
    pub alert_id: String,
    pub rule_id: String,
    pub kpi_id: String,
    pub kind: AlertKind,
    pub severity: AlertSeverity,
    pub filter: crate::engine::DimensionFilter,
    pub period: String,
    pub last_period: String,
    pub observed_value: Option<f64>,
    pub message: String,
    pub state: AlertState,
    pub opened_at: Timestamp,
    pub updated_at: Timestamp,
}

impl AlertEvent {
    pub fn transition(&mut self, to: AlertState, now: Timestamp) -> Result<(), IllegalTransition> {
        if !self.state.can_transition(to) {
            return Err(IllegalTransition {
                from: self.state,
                to,
            });
        }
        self.state = to;
        self.updated_at = now;
        Ok(())
    }

    fn opened(&self) -> Period {
        Period::parse(&self.period, PeriodKind::Month.as_str())
            .expect("alert periods are valid months")
    }
}

/// Applies `rules` to the KPI values observed for `period` and returns every
/// alert that was opened or changed. `existing` holds the alerts raised so
/// far; an alert id already taken, even by a resolved alert, is not reused,
/// and a month inside the span of an earlier alert of the same rule and
/// kind does not open another one.
///
/// A rule whose comparator holds opens an alert, or refreshes the rule's
/// active threshold alert. An undefined value opens an info data-quality
/// alert instead and leaves threshold alerts alone. Once a rule's condition
/// stops holding in a period no earlier than the last one
/// seen, its active alert of that kind is resolved. An open alert
/// whose age in months reaches the rule's `escalate_after_periods` is
/// escalated. Alerts opened after `period` are not touched.
pub fn evaluate_rules(
    rules: &[AlertRule],
    observations: &[KpiValue],
    period: Period,
    existing: &[AlertEvent],
    now: Timestamp,
) -> Vec<AlertEvent> {
    let period = period.as_month();
    let mut changed = Vec::new();
    for (rule, value) in rules.iter().zip(observations) {
        debug_assert_eq!(rule.kpi_id, value.kpi_id);
        let number = value.value.as_number();
        let current = |kind: AlertKind| {
            existing.iter().find(|a| {
                a.rule_id == rule.rule_id
                    && a.kind == kind
                    && a.state.is_active()
                    && a.opened() <= period
            })
        };
        let firing = [
            (
                AlertKind::Threshold,
                number.is_some_and(|v| rule.comparator.holds(v, &rule.threshold)),
            ),
            (AlertKind::DataQuality, number.is_none()),
        ];
        for (kind, fires) in firing {
            let active = current(kind);
            let mut alert = match (active, fires) {
                (None, false) => continue,
                (Some(a), false) => {
                    let latest = period.label() >= a.last_period;
                    if latest && (kind == AlertKind::DataQuality || number.is_some()) {
                        let mut a = a.clone();
                        a.transition(AlertState::Resolved, now)
                            .expect("active alerts can resolve");
                        changed.push(a);
                    }
                    continue;
                }
                (Some(a), true) => a.clone(),
                (None, true) => {
                    let alert = new_alert(rule, kind, period, now);
                    let covered = |a: &AlertEvent| {
                        a.rule_id == rule.rule_id
                            && a.kind == kind
                            && a.period <= alert.period
                            && alert.period <= a.last_period
                    };
                    if existing
                        .iter()
                        .any(|a| a.alert_id == alert.alert_id || covered(a))
                    {
                        continue;
                    }
                    alert
                }
            };
            let before = alert.clone();
            if period.label() > alert.last_period {
                alert.last_period = period.label();
            }
            if alert.last_period == period.label() {
                alert.observed_value = number.map(to_f64);
                alert.message = message(rule, value);
            }
            let age = period.month_index() - alert.opened().month_index();
            if alert.state == AlertState::Open && age >= i64::from(rule.escalate_after_periods) {
                alert.state = AlertState::Escalated;
            }
            if active.is_none() || alert != before {
                if active.is_some() {
                    alert.updated_at = now;
                }
                changed.push(alert);
            }
        }
    }
    changed
}

fn new_alert(rule: &AlertRule, kind: AlertKind, period: Period, now: Timestamp) -> AlertEvent {
    let mut alert_id = format!("{}:{}", rule.rule_id, period.label());
    let severity = match kind {
        AlertKind::Threshold => rule.severity,
        AlertKind::DataQuality => {
            alert_id.push_str(":dq");
            AlertSeverity::Info
        }
    };
    AlertEvent {
        alert_id,
        rule_id: rule.rule_id.clone(),
        kpi_id: rule.kpi_id.clone(),
        kind,
        severity,
        filter: rule.filter.clone(),
        period: period.label(),
        last_period: period.label(),
        observed_value: None,
        message: String::new(),
        state: AlertState::Open,
        opened_at: now,
        updated_at: now,
    }
}

fn message(rule: &AlertRule, value: &KpiValue) -> String {
    match value.value.as_number() {
        Some(v) => format!(
            "{} = {} ({} {})",
            rule.kpi_id,
            to_f64(v),
            rule.comparator,
            to_f64(&rule.threshold)
        ),
        None => format!(
            "{} undefined: {}",
            rule.kpi_id,
            value.value.reason().unwrap_or("unknown")
        ),
    }
}

/// The KPI value each rule is evaluated against, in rule order.
pub fn observe(
    engine: &Engine<'_>,
    rules: &[AlertRule],
    period: Period,
) -> Result<Vec<KpiValue>, EngineError> {
    rules
        .iter()
        .map(|r| engine.kpi_value(&r.kpi_id, period, &r.filter))
        .collect()
}

#[cfg(test)]
mod tests;
