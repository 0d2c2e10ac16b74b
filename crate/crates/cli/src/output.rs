//! Table and CSV renderings of query bodies.

use caremetrics_core::alerting::AlertEvent;
use caremetrics_core::dsl::Unit;
use caremetrics_core::query::{
    AlertList, Amount, DashboardBody, IngestBody, KpiList, KpiValueBody, RankBody, SeriesBody,
};
use serde::Serialize;

/// A body printable as JSON, an aligned table or CSV. `rows` starts with
/// the header row.
pub trait Emit: Serialize {
    fn rows(&self) -> Vec<Vec<String>>;

    fn table(&self) -> String {
        table_text(&self.rows())
    }
}

pub fn table_text(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn csv_text(rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 input")
}

/// Money in major units with two decimals; other units with up to four.
pub fn amount_text(amount: &Amount, unit: Unit) -> String {
    match amount {
        Amount::Minor(m) => {
            let sign = if *m < 0 { "-" } else { "" };
            format!(
                "{sign}{}.{:02}",
                m.unsigned_abs() / 100,
                m.unsigned_abs() % 100
            )
        }
        Amount::Real(v) if unit == Unit::Count && v.fract() == 0.0 => format!("{v}"),
        Amount::Real(v) => {
            let text = format!("{v:.4}");
            let text = text.trim_end_matches('0').trim_end_matches('.');
            text.to_string()
        }
    }
}

fn value_text(value: &Option<Amount>, reason: &Option<String>, unit: Unit) -> String {
    match value {
        Some(v) => amount_text(v, unit),
        None => format!("n/a ({})", reason.as_deref().unwrap_or("undefined")),
    }
}

fn filter_text(body: &KpiValueBody) -> String {
    body.filter
        .iter()
        .map(|(d, v)| format!("{d}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn value_row(b: &KpiValueBody) -> Vec<String> {
    vec![
        b.kpi_id.clone(),
        b.period.clone(),
        b.scope.to_string(),
        filter_text(b),
        value_text(&b.value, &b.reason, b.unit),
        b.unit.to_string(),
        b.goal
            .as_ref()
            .map(|g| g.status.to_string())
            .unwrap_or_default(),
    ]
}

fn value_header() -> Vec<String> {
    ["kpi", "period", "scope", "filter", "value", "unit", "goal"]
        .map(String::from)
        .to_vec()
}

impl Emit for KpiValueBody {
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = vec![value_header(), value_row(self)];
        if let Some(drill) = &self.drilldown {
            rows.push(Vec::new());
            rows.push(vec![drill.dimension.to_string(), "value".into()]);
            for r in &drill.rows {
                rows.push(vec![
                    r.group.clone(),
                    value_text(&r.value, &r.reason, self.unit),
                ]);
            }
        }
        rows
    }
}

impl Emit for SeriesBody {
    fn rows(&self) -> Vec<Vec<String>> {
        std::iter::once(value_header())
            .chain(self.points.iter().map(value_row))
            .collect()
    }
}

impl Emit for DashboardBody {
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = vec![["kpi", "month", "ytd", "unit", "goal"]
            .map(String::from)
            .to_vec()];
        for t in &self.tiles {
            rows.push(vec![
                t.month.kpi_id.clone(),
                value_text(&t.month.value, &t.month.reason, t.month.unit),
                value_text(&t.ytd.value, &t.ytd.reason, t.ytd.unit),
                t.month.unit.to_string(),
                t.month
                    .goal
                    .as_ref()
                    .map(|g| g.status.to_string())
                    .unwrap_or_default(),
            ]);
        }
        if !self.alerts.is_empty() {
            rows.push(Vec::new());
            rows.extend(alert_rows(self.alerts.iter()));
        }
        rows
    }
}

impl Emit for RankBody {
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = vec![["rank", "drg", "revenue", "expense", "margin"]
            .map(String::from)
            .to_vec()];
        for r in &self.rows {
            let money = |m: i64| amount_text(&Amount::Minor(m), Unit::Money);
            rows.push(vec![
                r.rank.to_string(),
                r.drg_code.clone(),
                money(r.revenue),
                money(r.expense),
                money(r.margin),
            ]);
        }
        rows
    }
}

impl Emit for KpiList<'_> {
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = vec![
            ["kpi", "name", "unit", "direction", "category", "dimensions"]
                .map(String::from)
                .to_vec(),
        ];
        for k in &self.kpis {
            let d = k.definition;
            let dims: Vec<String> = k.dimensions.iter().map(ToString::to_string).collect();
            rows.push(vec![
                d.kpi_id.clone(),
                d.display_name.clone(),
                d.unit.to_string(),
                d.direction.to_string(),
                d.category.to_string(),
                dims.join(","),
            ]);
        }
        rows
    }
}

fn alert_rows<'a>(alerts: impl Iterator<Item = &'a AlertEvent>) -> Vec<Vec<String>> {
    let mut rows = vec![[
        "alert",
        "state",
        "severity",
        "kpi",
        "last_period",
        "message",
    ]
    .map(String::from)
    .to_vec()];
    for a in alerts {
        rows.push(vec![
            a.alert_id.clone(),
            a.state.to_string(),
            a.severity.to_string(),
            a.kpi_id.clone(),
            a.last_period.clone(),
            a.message.clone(),
        ]);
    }
    rows
}

impl Emit for AlertList<'_> {
    fn rows(&self) -> Vec<Vec<String>> {
        alert_rows(self.alerts.iter().copied())
    }
}

impl Emit for AlertEvent {
    fn rows(&self) -> Vec<Vec<String>> {
        alert_rows(std::iter::once(self))
    }
}

impl Emit for IngestBody {
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = vec![
            vec!["accepted".into(), self.accepted.to_string()],
            vec![
                "rejected_duplicates".into(),
                self.rejected_duplicates.to_string(),
            ],
            vec!["rejected_invalid".into(), self.rejected_invalid.to_string()],
            vec!["batch_seq".into(), self.batch_seq.to_string()],
        ];
        for e in &self.parse_errors {
            rows.push(vec![format!("line {}", e.line), e.message.clone()]);
        }
        for r in &self.rejections {
            rows.push(vec![
                format!("record {}", r.index),
                format!("{}: {}", r.kind, r.reason),
            ]);
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn money_and_ratios() {
        assert_eq!(amount_text(&Amount::Minor(200_050), Unit::Money), "2000.50");
        assert_eq!(amount_text(&Amount::Minor(-5), Unit::Money), "-0.05");
        assert_eq!(amount_text(&Amount::Real(2.0 / 3.0), Unit::Ratio), "0.6667");
        assert_eq!(amount_text(&Amount::Real(12.0), Unit::Count), "12");
        assert_eq!(amount_text(&Amount::Real(3.5), Unit::Days), "3.5");
        assert_eq!(
            value_text(&None, &Some("division by zero".into()), Unit::Ratio),
            "n/a (division by zero)"
        );
    }

    #[test]
    fn tables_align_and_csv_quotes() {
        let rows = vec![
            vec!["a".to_string(), "bb".into()],
            vec!["ccc".into(), "d,e".into()],
        ];
        assert_eq!(table_text(&rows), "a    bb\nccc  d,e\n");
        assert_eq!(csv_text(&rows), "a,bb\nccc,\"d,e\"\n");
    }
}
