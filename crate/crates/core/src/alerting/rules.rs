use std::fmt;

use serde::{Serialize, Serializer};

use crate::domain::string_enum;
use crate::dsl::Registry;
use crate::engine::{kpi_dims, Dimension, DimensionFilter};
use crate::number::{format_decimal, parse_decimal, to_f64, Number};

string_enum! {
    pub enum Comparator: "comparator" {
        Lt => "lt",
        Le => "le",
        Gt => "gt",
        Ge => "ge",
    }
}

impl Comparator {
    pub fn holds(self, value: &Number, threshold: &Number) -> bool {
        match self {
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
            Comparator::Gt => value > threshold,
            Comparator::Ge => value >= threshold,
        }
    }
}

string_enum! {
    pub enum AlertSeverity: "severity" {
        Info => "info",
        Warning => "warning",
        Critical => "critical",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlertRule {
    pub rule_id: String,
    pub kpi_id: String,
    pub comparator: Comparator,
    #[serde(serialize_with = "number_as_f64")]
    pub threshold: Number,
    pub severity: AlertSeverity,
    pub filter: DimensionFilter,
    pub escalate_after_periods: u32,
}

fn number_as_f64<S: Serializer>(n: &Number, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(to_f64(n))
}

impl fmt::Display for AlertRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let threshold =
            format_decimal(&self.threshold).unwrap_or_else(|| to_f64(&self.threshold).to_string());
        write!(
            f,
            "alert {} on {} when {} {} severity {} escalate_after {}",
            self.rule_id,
            self.kpi_id,
            self.comparator,
            threshold,
            self.severity,
            self.escalate_after_periods
        )?;
        if !self.filter.is_empty() {
            let parts: Vec<String> = self
                .filter
                .iter()
                .map(|(d, v)| format!("{d}={v}"))
                .collect();
            write!(f, " filter {}", parts.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("rules line {line}: {message}")]
pub struct RuleError {
    pub line: usize,
    pub message: String,
}

/// Parses a rules file. Each non-blank line reads
///
/// ```text
/// alert <rule_id> on <kpi_id> when <lt|le|gt|ge> <threshold> severity <level> escalate_after <n> [filter <dim>=<value>,...]
/// ```
///
/// `#` starts a comment. Rules naming unknown KPIs, filtering on
/// dimensions the KPI does not support, or repeating a rule id or a
/// `(kpi, filter, comparator, threshold)` tuple are rejected.
pub fn parse_rules(text: &str, registry: &Registry) -> Result<Vec<AlertRule>, RuleError> {
    let mut rules: Vec<AlertRule> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let rule = parse_rule(content, registry).map_err(|message| RuleError { line, message })?;
        if rules.iter().any(|r| r.rule_id == rule.rule_id) {
            return Err(RuleError {
                line,
                message: format!("duplicate rule id '{}'", rule.rule_id),
            });
        }
        if rules.iter().any(|r| {
            r.kpi_id == rule.kpi_id
                && r.filter == rule.filter
                && r.comparator == rule.comparator
                && r.threshold == rule.threshold
        }) {
            return Err(RuleError {
                line,
                message: format!("rule '{}' repeats an existing condition", rule.rule_id),
            });
        }
        rules.push(rule);
    }
    Ok(rules)
}

fn parse_rule(content: &str, registry: &Registry) -> Result<AlertRule, String> {
    let words: Vec<&str> = content.split_whitespace().collect();
    let expect = |i: usize, kw: &str| match words.get(i) {
        Some(w) if *w == kw => Ok(()),
        Some(w) => Err(format!("expected '{kw}', found '{w}'")),
        None => Err(format!("expected '{kw}'")),
    };
    let word = |i: usize, what: &str| {
        words
            .get(i)
            .copied()
            .ok_or_else(|| format!("missing {what}"))
    };
    expect(0, "alert")?;
    let rule_id = word(1, "rule id")?;
    expect(2, "on")?;
    let kpi_id = word(3, "kpi id")?;
    expect(4, "when")?;
    let comparator: Comparator = word(5, "comparator")?
        .parse()
        .map_err(|e: crate::domain::UnknownVariant| e.to_string())?;
    let text = word(6, "threshold")?;
    let threshold = parse_decimal(text).ok_or_else(|| format!("invalid threshold '{text}'"))?;
    expect(7, "severity")?;
    let severity: AlertSeverity = word(8, "severity")?
        .parse()
        .map_err(|e: crate::domain::UnknownVariant| e.to_string())?;
    expect(9, "escalate_after")?;
    let text = word(10, "escalate_after")?;
    let escalate_after_periods: u32 = match text.parse() {
        Ok(n) if n > 0 => n,
        _ => {
            return Err(format!(
                "escalate_after must be a positive integer, got '{text}'"
            ))
        }
    };
    let mut filter = DimensionFilter::none();
    match words.len() {
        11 => {}
        13 if words[11] == "filter" => {
            for part in words[12].split(',') {
                let (dim, value) = part
                    .split_once('=')
                    .ok_or_else(|| format!("expected dim=value, got '{part}'"))?;
                let dim: Dimension = dim
                    .parse()
                    .map_err(|e: crate::domain::UnknownVariant| e.to_string())?;
                if value.is_empty() {
                    return Err(format!("empty value for {dim}"));
                }
                filter = filter.with(dim, value).map_err(|e| e.to_string())?;
            }
        }
        _ => {
            return Err(format!(
                "unexpected trailing input '{}'",
                words[11..].join(" ")
            ))
        }
    }
    let def = registry
        .get(kpi_id)
        .ok_or_else(|| format!("unknown kpi '{kpi_id}'"))?;
    let valid = kpi_dims(def);
    if let Some((dim, _)) = filter.iter().find(|(d, _)| !valid.contains(*d)) {
        return Err(format!(
            "dimension {dim} is not applicable to kpi '{kpi_id}'"
        ));
    }
    Ok(AlertRule {
        rule_id: rule_id.to_string(),
        kpi_id: kpi_id.to_string(),
        comparator,
        threshold,
        severity,
        filter,
        escalate_after_periods,
    })
}
