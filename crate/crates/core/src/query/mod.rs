//! Request handling shared by the HTTP service and the command line.
//!
//! Each query takes raw string parameters, evaluates them against one
//! dataset snapshot and returns a serializable body. Both front ends render
//! bodies with [`render`], so their JSON output is identical byte for byte.

mod settings;
mod views;

use serde::{Deserialize, Serialize};

pub use settings::{
    Settings, Workspace, WorkspaceError, ALERTS_FILE, DEFAULT_GOALS_FILE, DEFAULT_REGISTRY_FILE,
    DEFAULT_RULES_FILE, SETTINGS_FILE, STORE_DIR,
};
pub use views::View;

use crate::alerting::{observe, AlertAction, AlertEvent, AlertState, AlertStore, AlertStoreError};
use crate::dataset::Dataset;
use crate::domain::RecordKind;
use crate::domain::Timestamp;
use crate::dsl::{Direction, KpiCategory, KpiDefinition, Unit};
use crate::engine::{
    compare_to_goal, is_additive, kpi_dims, month_of, DimSet, Dimension, DimensionFilter, Engine,
    EngineError, GoalOutcome, KpiValue, Period, PeriodKind, RankKey, RankOrder,
};
use crate::ingest::{parse_records, EventStore, Format, IngestSummary, LineError, Rejection};
use crate::number::{round_to_i64, to_f64, Number};

/// Months evaluated against the alert rules, ending at the latest data month.
pub const ALERT_LOOKBACK_MONTHS: i64 = 12;
/// Longest range the series query accepts, in months.
pub const MAX_SERIES_MONTHS: i64 = 240;
pub const DEFAULT_RANK_N: usize = 10;

/// A failed query: HTTP status, stable machine code and a message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{message}")]
pub struct QueryError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl QueryError {
    pub fn new(status: u16, code: &str, message: impl Into<String>) -> Self {
        QueryError {
            status,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(400, code, message)
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(404, code, message)
    }

    /// True for errors caused by the caller's input rather than data or storage.
    pub fn is_usage(&self) -> bool {
        (400..500).contains(&self.status)
    }
}

impl From<EngineError> for QueryError {
    fn from(e: EngineError) -> Self {
        match &e {
            EngineError::UnknownKpi(_) => QueryError::not_found("unknown_kpi", e.to_string()),
            EngineError::InapplicableDimension { .. } => {
                QueryError::bad_request("inapplicable_dimension", e.to_string())
            }
            EngineError::Period(_) => QueryError::bad_request("invalid_period", e.to_string()),
            EngineError::InvalidArgument(_) => {
                QueryError::bad_request("invalid_parameter", e.to_string())
            }
        }
    }
}

impl From<AlertStoreError> for QueryError {
    fn from(e: AlertStoreError) -> Self {
        match &e {
            AlertStoreError::UnknownAlert(_) => {
                QueryError::not_found("unknown_alert", e.to_string())
            }
            AlertStoreError::Illegal(_) => {
                QueryError::new(409, "illegal_transition", e.to_string())
            }
            _ => QueryError::new(500, "storage_error", e.to_string()),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn render<T: Serialize>(body: &T) -> String {
    let mut text = serde_json::to_string_pretty(body).expect("bodies serialize");
    text.push('\n');
    text
}

/// Dimension constraints as query parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterParams {
    pub department: Option<String>,
    pub doctor: Option<String>,
    pub location: Option<String>,
    pub drg: Option<String>,
    pub organ: Option<String>,
}

impl FilterParams {
    pub fn to_filter(&self) -> Result<DimensionFilter, QueryError> {
        let mut filter = DimensionFilter::none();
        for (dim, value) in [
            (Dimension::Department, &self.department),
            (Dimension::Doctor, &self.doctor),
            (Dimension::Location, &self.location),
            (Dimension::Drg, &self.drg),
            (Dimension::Organ, &self.organ),
        ] {
            if let Some(value) = value {
                if value.is_empty() {
                    return Err(QueryError::bad_request(
                        "invalid_parameter",
                        format!("empty value for {dim}"),
                    ));
                }
                filter = filter
                    .with(dim, value.clone())
                    .expect("each dimension once");
            }
        }
        Ok(filter)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueParams {
    pub period: Option<String>,
    pub scope: Option<String>,
    #[serde(flatten)]
    pub filter: FilterParams,
    pub drilldown: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesParams {
    pub from: Option<String>,
    pub to: Option<String>,
    pub scope: Option<String>,
    #[serde(flatten)]
    pub filter: FilterParams,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankParams {
    pub period: Option<String>,
    pub key: Option<String>,
    pub order: Option<String>,
    pub n: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DashboardParams {
    pub period: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertParams {
    pub state: Option<String>,
}

/// Input format and, for CSV, the record type of every row.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestParams {
    pub format: Option<String>,
    #[serde(rename = "type")]
    pub record_type: Option<String>,
}

fn required<'a>(value: &'a Option<String>, name: &str) -> Result<&'a str, QueryError> {
    value.as_deref().ok_or_else(|| {
        QueryError::bad_request("missing_parameter", format!("missing parameter '{name}'"))
    })
}

fn parse_enum<T: std::str::FromStr<Err = crate::domain::UnknownVariant>>(
    value: &Option<String>,
    default: T,
) -> Result<T, QueryError> {
    match value {
        None => Ok(default),
        Some(text) => text.parse().map_err(|e: crate::domain::UnknownVariant| {
            QueryError::bad_request("invalid_parameter", e.to_string())
        }),
    }
}

/// Parses `YYYY-MM` with a `month|ytd` scope.
pub fn parse_period(period: &Option<String>, scope: &Option<String>) -> Result<Period, QueryError> {
    let text = required(period, "period")?;
    Period::parse(text, scope.as_deref().unwrap_or("month"))
        .map_err(|e| QueryError::bad_request("invalid_period", e.to_string()))
}

/// A number in a body: money as rounded minor units, anything else as a float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Amount {
    Minor(i64),
    Real(f64),
}

impl Amount {
    pub fn of(value: &Number, unit: Unit) -> Amount {
        match (unit, round_to_i64(value)) {
            (Unit::Money, Some(minor)) => Amount::Minor(minor),
            _ => Amount::Real(to_f64(value)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalBody {
    pub target: Amount,
    pub warn_band_pct: f64,
    pub variance: Option<Amount>,
    pub variance_pct: Option<f64>,
    pub status: crate::engine::GoalStatus,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrilldownRow {
    pub group: String,
    pub value: Option<Amount>,
    pub reason: Option<String>,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrilldownBody {
    pub dimension: Dimension,
    /// Whether the rows of a defined total add up to it.
    pub additive: bool,
    pub rows: Vec<DrilldownRow>,
}

/// One KPI value as served to clients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpiValueBody {
    pub kpi_id: String,
    pub display_name: String,
    pub unit: Unit,
    pub direction: Direction,
    pub period: String,
    pub scope: PeriodKind,
    pub filter: DimensionFilter,
    pub value: Option<Amount>,
    pub reason: Option<String>,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub currency: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal: Option<GoalBody>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drilldown: Option<DrilldownBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpiInfo<'a> {
    #[serde(flatten)]
    pub definition: &'a KpiDefinition,
    pub dimensions: Vec<Dimension>,
    pub additive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpiList<'a> {
    pub kpis: Vec<KpiInfo<'a>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesBody {
    pub kpi_id: String,
    pub unit: Unit,
    pub scope: PeriodKind,
    pub filter: DimensionFilter,
    pub from: String,
    pub to: String,
    pub points: Vec<KpiValueBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tile {
    pub month: KpiValueBody,
    pub ytd: KpiValueBody,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DashboardBody {
    pub view: View,
    pub period: String,
    pub currency: String,
    pub tiles: Vec<Tile>,
    pub alerts: Vec<AlertEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub drg_code: String,
    pub revenue: i64,
    pub expense: i64,
    pub margin: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankBody {
    pub period: String,
    pub key: RankKey,
    pub order: RankOrder,
    pub currency: String,
    pub rows: Vec<RankRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlertList<'a> {
    pub alerts: Vec<&'a AlertEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestBody {
    pub accepted: usize,
    pub rejected_duplicates: usize,
    pub rejected_invalid: usize,
    pub batch_seq: u64,
    pub parse_errors: Vec<ParseErrorBody>,
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseErrorBody {
    pub line: usize,
    pub message: String,
}

impl IngestBody {
    pub fn new(summary: IngestSummary, parse_errors: &[LineError]) -> Self {
        IngestBody {
            accepted: summary.accepted,
            rejected_duplicates: summary.rejected_duplicates,
            rejected_invalid: summary.rejected_invalid,
            batch_seq: summary.batch_seq,
            parse_errors: parse_errors
                .iter()
                .map(|e| ParseErrorBody {
                    line: e.line,
                    message: e.message.clone(),
                })
                .collect(),
            rejections: summary.rejections,
        }
    }

    /// True when any input line or record was refused for being malformed.
    pub fn has_data_errors(&self) -> bool {
        !self.parse_errors.is_empty() || self.rejected_invalid > 0
    }
}

pub fn kpi_list(ws: &Workspace) -> KpiList<'_> {
    let kpis = ws
        .registry
        .iter()
        .map(|def| KpiInfo {
            definition: def,
            dimensions: kpi_dims(def).iter().collect(),
            additive: is_additive(def, false),
        })
        .collect();
    KpiList { kpis }
}

pub fn alert_list<'a>(
    alerts: &'a crate::alerting::AlertStore,
    state: &Option<String>,
) -> Result<AlertList<'a>, QueryError> {
    let state = match state {
        None => None,
        Some(text) => Some(
            text.parse::<AlertState>()
                .map_err(|e| QueryError::bad_request("invalid_parameter", e.to_string()))?,
        ),
    };
    Ok(AlertList {
        alerts: alerts.list(state),
    })
}

/// The latest calendar month holding any record, if the dataset is not empty.
pub fn latest_month(ws: &Workspace, data: &Dataset) -> Option<Period> {
    data.latest_timestamp()
        .map(|ts| month_of(ws.config.time_zone, ts))
}

/// Parses `input` and appends the valid, new records to `store`.
pub fn ingest(
    store: &mut EventStore,
    input: impl std::io::Read,
    params: &IngestParams,
    source_name: &str,
) -> Result<IngestBody, QueryError> {
    let format = parse_enum(&params.format, Format::Jsonl)?;
    let kind = match &params.record_type {
        None => None,
        Some(text) => Some(
            text.parse::<RecordKind>()
                .map_err(|e| QueryError::bad_request("invalid_parameter", e.to_string()))?,
        ),
    };
    let (batch, errors) = parse_records(input, format, kind, source_name)
        .map_err(|e| QueryError::bad_request("invalid_input", e.to_string()))?;
    let summary = store
        .ingest(&batch)
        .map_err(|e| QueryError::new(500, "storage_error", e.to_string()))?;
    Ok(IngestBody::new(summary, &errors))
}

/// Applies an operator action such as `acknowledge` to one alert.
pub fn alert_action(
    alerts: &mut AlertStore,
    alert_id: &str,
    action: &str,
    now: Timestamp,
) -> Result<AlertEvent, QueryError> {
    let action: AlertAction = action.parse().map_err(|e: crate::domain::UnknownVariant| {
        QueryError::not_found("unknown_action", e.to_string())
    })?;
    Ok(alerts.transition(alert_id, action, now)?)
}

/// Runs the workspace rules over each of the last
/// [`ALERT_LOOKBACK_MONTHS`] months of data, oldest first, and returns the
/// alerts that changed. Repeating a run changes nothing.
pub fn evaluate_alerts(
    ws: &Workspace,
    data: &Dataset,
    alerts: &mut AlertStore,
    now: Timestamp,
) -> Result<Vec<AlertEvent>, QueryError> {
    let Some((first, last)) = data.timestamp_span() else {
        return Ok(Vec::new());
    };
    if ws.rules.is_empty() {
        return Ok(Vec::new());
    }
    let tz = ws.config.time_zone;
    let latest = month_of(tz, last).month_index();
    let start = month_of(tz, first)
        .month_index()
        .max(latest - ALERT_LOOKBACK_MONTHS + 1);
    let engine = Engine::new(data, &ws.registry, &ws.config);
    let mut changed: Vec<AlertEvent> = Vec::new();
    for index in start..=latest {
        let period = Period::from_month_index(PeriodKind::Month, index);
        let observations = observe(&engine, &ws.rules, period)?;
        for alert in alerts.evaluate(&ws.rules, &observations, period, now)? {
            changed.retain(|a| a.alert_id != alert.alert_id);
            changed.push(alert);
        }
    }
    Ok(changed)
}

/// Queries over one dataset snapshot.
pub struct Query<'a> {
    ws: &'a Workspace,
    engine: Engine<'a>,
}

impl<'a> Query<'a> {
    pub fn new(ws: &'a Workspace, data: &'a Dataset) -> Self {
        Query {
            ws,
            engine: Engine::new(data, &ws.registry, &ws.config),
        }
    }

    pub fn engine(&self) -> &Engine<'a> {
        &self.engine
    }

    pub fn workspace(&self) -> &'a Workspace {
        self.ws
    }

    fn currency_for(&self, unit: Unit) -> Option<String> {
        (unit == Unit::Money).then(|| self.ws.config.currency.clone())
    }

    /// Serializable form of an engine result, with the goal comparison when
    /// a goal is set for the KPI and period.
    pub fn value_body(&self, def: &KpiDefinition, value: &KpiValue) -> KpiValueBody {
        let unit = def.unit;
        let goal = match compare_to_goal(
            value,
            self.ws.goals.lookup(&def.kpi_id, value.period),
            def.direction,
        ) {
            GoalOutcome::NoGoal => None,
            GoalOutcome::Compared(c) => Some(GoalBody {
                target: Amount::of(&c.target, unit),
                warn_band_pct: to_f64(&c.warn_band_pct),
                variance: c.variance.as_ref().map(|v| Amount::of(v, unit)),
                variance_pct: c.variance_pct.as_ref().map(to_f64),
                status: c.status,
                reason: c.reason,
            }),
        };
        KpiValueBody {
            kpi_id: def.kpi_id.clone(),
            display_name: def.display_name.clone(),
            unit,
            direction: def.direction,
            period: value.period.label(),
            scope: value.period.kind,
            filter: value.filter.clone(),
            value: value.value.as_number().map(|v| Amount::of(v, unit)),
            reason: value.value.reason().map(str::to_string),
            numerator: value.numerator.as_ref().map(to_f64),
            denominator: value.denominator.as_ref().map(to_f64),
            currency: self.currency_for(unit),
            goal,
            drilldown: None,
        }
    }

    /// `GET /kpis/{id}/value` and `compute --kpi <id>`.
    pub fn kpi_value(
        &self,
        kpi_id: &str,
        params: &ValueParams,
    ) -> Result<KpiValueBody, QueryError> {
        let def = self.engine.definition(kpi_id)?;
        let period = parse_period(&params.period, &params.scope)?;
        let filter = params.filter.to_filter()?;
        self.engine.check_filter(def, &filter)?;
        let dimension = match &params.drilldown {
            None => None,
            Some(text) => Some(
                text.parse::<Dimension>()
                    .map_err(|e| QueryError::bad_request("invalid_parameter", e.to_string()))?,
            ),
        };
        let Some(dimension) = dimension else {
            let value = self.engine.kpi_value(kpi_id, period, &filter)?;
            return Ok(self.value_body(def, &value));
        };
        let drill = self
            .engine
            .drilldown_with(kpi_id, period, dimension, &filter)?;
        let mut body = self.value_body(def, &drill.total);
        let rows = drill
            .rows
            .iter()
            .map(|(group, v)| DrilldownRow {
                group: group.clone(),
                value: v.value.as_number().map(|n| Amount::of(n, def.unit)),
                reason: v.value.reason().map(str::to_string),
                numerator: v.numerator.as_ref().map(to_f64),
                denominator: v.denominator.as_ref().map(to_f64),
            })
            .collect();
        body.drilldown = Some(DrilldownBody {
            dimension,
            additive: is_additive(def, false),
            rows,
        });
        Ok(body)
    }

    /// `GET /kpis/{id}/series`: one value per month from `from` to `to`.
    pub fn kpi_series(
        &self,
        kpi_id: &str,
        params: &SeriesParams,
    ) -> Result<SeriesBody, QueryError> {
        let def = self.engine.definition(kpi_id)?;
        let from =
            parse_period(&params.from, &params.scope).map_err(|e| rename_missing(e, "from"))?;
        let to = parse_period(&params.to, &params.scope).map_err(|e| rename_missing(e, "to"))?;
        let months = to.month_index() - from.month_index() + 1;
        if months < 1 {
            return Err(QueryError::bad_request(
                "invalid_parameter",
                "'from' is after 'to'",
            ));
        }
        if months > MAX_SERIES_MONTHS {
            return Err(QueryError::bad_request(
                "invalid_parameter",
                format!("series spans {months} months; the limit is {MAX_SERIES_MONTHS}"),
            ));
        }
        let filter = params.filter.to_filter()?;
        self.engine.check_filter(def, &filter)?;
        let points = (0..months)
            .map(|i| {
                let period = Period::from_month_index(from.kind, from.month_index() + i);
                self.engine
                    .kpi_value(kpi_id, period, &filter)
                    .map(|v| self.value_body(def, &v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SeriesBody {
            kpi_id: def.kpi_id.clone(),
            unit: def.unit,
            scope: from.kind,
            filter,
            from: from.label(),
            to: to.label(),
            points,
        })
    }

    /// `GET /dashboards/{view}`: month and YTD tiles plus the view's active alerts.
    pub fn dashboard(
        &self,
        view: &str,
        params: &DashboardParams,
        alerts: &AlertStore,
    ) -> Result<DashboardBody, QueryError> {
        let view: View = view.parse().map_err(|e: crate::domain::UnknownVariant| {
            QueryError::not_found("unknown_view", e.to_string())
        })?;
        let month = parse_period(&params.period, &None)?;
        let ytd = Period::new(PeriodKind::Ytd, month.year, month.month).expect("valid month");
        let ids = self.ws.views.get(&view).cloned().unwrap_or_default();
        let none = DimensionFilter::none();
        let values = |period| {
            self.engine
                .compute_kpis(ids.iter().map(String::as_str), period, &none)
        };
        let tiles = values(month)
            .into_iter()
            .zip(values(ytd))
            .map(|(m, y)| {
                let def = self.ws.registry.get(&m.kpi_id).expect("view kpis exist");
                Tile {
                    month: self.value_body(def, &m),
                    ytd: self.value_body(def, &y),
                }
            })
            .collect();
        let alerts = alerts
            .list(None)
            .into_iter()
            .filter(|a| a.state.is_active() && ids.contains(&a.kpi_id))
            .cloned()
            .collect();
        Ok(DashboardBody {
            view,
            period: month.label(),
            currency: self.ws.config.currency.clone(),
            tiles,
            alerts,
        })
    }

    /// `GET /drg/rank`.
    pub fn drg_rank(&self, params: &RankParams) -> Result<RankBody, QueryError> {
        let period = parse_period(&params.period, &None)?;
        let key = parse_enum(&params.key, RankKey::Revenue)?;
        let order = parse_enum(&params.order, RankOrder::Top)?;
        let n = match &params.n {
            None => DEFAULT_RANK_N,
            Some(text) => text.parse::<usize>().map_err(|_| {
                QueryError::bad_request(
                    "invalid_parameter",
                    format!("n must be a positive integer, got '{text}'"),
                )
            })?,
        };
        let rank = self.engine.rank_drg(period, key, order, n)?;
        let minor = |v: &Number| round_to_i64(v).unwrap_or(i64::MAX);
        let rows = rank
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| RankRow {
                rank: i + 1,
                drg_code: r.drg_code.clone(),
                revenue: minor(&r.revenue),
                expense: minor(&r.expense),
                margin: minor(&r.margin),
            })
            .collect();
        Ok(RankBody {
            period: period.label(),
            key,
            order,
            currency: self.ws.config.currency.clone(),
            rows,
        })
    }

    /// KPIs of one category or of the whole registry for a period, unfiltered.
    pub fn category_values(
        &self,
        category: Option<KpiCategory>,
        period: Period,
    ) -> Vec<KpiValueBody> {
        let ids: Vec<&str> = self
            .ws
            .registry
            .iter()
            .filter(|d| category.is_none_or(|c| d.category == c))
            .map(|d| d.kpi_id.as_str())
            .collect();
        self.engine
            .compute_kpis(ids, period, &DimensionFilter::none())
            .iter()
            .map(|v| self.value_body(self.ws.registry.get(&v.kpi_id).expect("registered"), v))
            .collect()
    }
}

fn rename_missing(e: QueryError, name: &str) -> QueryError {
    match e.code.as_str() {
        "missing_parameter" => {
            QueryError::bad_request("missing_parameter", format!("missing parameter '{name}'"))
        }
        _ => e,
    }
}

/// Valid dimensions of a KPI, for error messages and listings.
pub fn dimensions_of(def: &KpiDefinition) -> DimSet {
    kpi_dims(def)
}

#[cfg(test)]
mod tests;
