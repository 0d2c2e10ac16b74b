//! KPI computation over an immutable dataset snapshot.

mod catalog;
mod compute;
mod config;
mod drill;
mod filter;
mod goals;
mod measures;
mod period;

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

pub use catalog::{
    canonical_stage_pairs, lag_kpi_id, MeasureCatalog, MeasureKind, MeasureSpec, Scope, CATALOG,
    ER, NON_ER,
};
pub use compute::{DoctorRow, ProviderReport};
pub use config::{EngineConfig, WorkingDays};
pub use drill::{DrgRank, DrgRow, Drilldown, RankKey, RankOrder};
pub use filter::{DimSet, DimValues, Dimension, DimensionFilter, DuplicateConstraint, UNASSIGNED};
pub use goals::{
    compare_to_goal, GoalComparison, GoalError, GoalOutcome, GoalPeriod, GoalSet, GoalStatus,
    GoalTarget,
};
pub use period::{
    local_date, local_midnight, month_of, parse_year_month, Period, PeriodError, PeriodKind,
    PeriodRange,
};

use crate::dataset::Dataset;
use crate::domain::{EncounterKind, EncounterRecord, Stage, Timestamp};
use crate::dsl::BinOp;
use crate::dsl::{
    evaluate, Expr, KpiDefinition, MeasureContext, Registry, Value, DIVISION_BY_ZERO,
};
use crate::number::Number;

/// The default KPI catalog in registry file form.
pub const DEFAULT_REGISTRY: &str = include_str!("../../registry/default.kpi");

pub const NO_DATA: &str = "no data";
pub const MISSING_BALANCE: &str = "missing balance snapshot";

/// Parses registry text against the engine's measure catalog.
pub fn parse_registry(text: &str) -> Result<Registry, crate::dsl::RegistryError> {
    Registry::parse(text, &|name| CATALOG.contains(name))
}

pub fn default_registry() -> Registry {
    parse_registry(DEFAULT_REGISTRY).expect("default registry is valid")
}

/// One KPI evaluated for one period and filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KpiValue {
    pub kpi_id: String,
    pub period: Period,
    pub filter: DimensionFilter,
    pub value: Value,
    pub numerator: Option<Number>,
    pub denominator: Option<Number>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("unknown kpi '{0}'")]
    UnknownKpi(String),
    #[error(
        "dimension {dimension} is not applicable to kpi '{kpi_id}'; valid dimensions: {}",
        list_dims(valid)
    )]
    InapplicableDimension {
        kpi_id: String,
        dimension: Dimension,
        valid: DimSet,
    },
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error("{0}")]
    InvalidArgument(String),
}

fn list_dims(dims: &DimSet) -> String {
    let names: Vec<&str> = dims.iter().map(Dimension::as_str).collect();
    if names.is_empty() {
        "none".to_string()
    } else {
        names.join(", ")
    }
}

/// Dimensions a KPI can be filtered or drilled by: those shared by every
/// filter-respecting measure it mentions.
pub fn kpi_dims(def: &KpiDefinition) -> DimSet {
    def.resolved
        .measures()
        .into_iter()
        .fold(DimSet::ALL, |acc, name| match CATALOG.get(name) {
            Some(MeasureSpec {
                scope: Scope::Filtered(dims),
                ..
            }) => acc.intersect(*dims),
            _ => acc,
        })
}

/// True when the KPI's value over a partition of records is the sum of its
/// values over the parts: a homogeneous linear combination of summable measures.
/// With `across_time` the measures must also be flows rather than stocks.
pub fn is_additive(def: &KpiDefinition, across_time: bool) -> bool {
    expr_is_additive(&def.resolved, across_time)
}

/// [`is_additive`] for a resolved expression.
pub fn expr_is_additive(expr: &Expr, across_time: bool) -> bool {
    homogeneous(expr)
        && expr
            .measures()
            .into_iter()
            .all(|name| match CATALOG.get(name) {
                Some(spec) => {
                    spec.is_summable()
                        && matches!(spec.scope, Scope::Filtered(_))
                        && !(across_time && spec.stock)
                }
                None => false,
            })
}

fn homogeneous(expr: &Expr) -> bool {
    match expr {
        Expr::Literal(_) => false,
        Expr::Measure(_) => true,
        Expr::Paren(inner) => homogeneous(inner),
        Expr::Binary { op, left, right } => match op {
            BinOp::Add | BinOp::Sub => homogeneous(left) && homogeneous(right),
            BinOp::Mul => {
                (left.is_constant() && homogeneous(right))
                    || (right.is_constant() && homogeneous(left))
            }
            BinOp::Div => homogeneous(left) && right.is_constant(),
        },
    }
}

/// Query interface over one dataset snapshot. Cheap to build; holds indexes
/// derived from the records (encounter lookup, readmission flags, stage times).
pub struct Engine<'a> {
    pub data: &'a Dataset,
    pub registry: &'a Registry,
    pub config: &'a EngineConfig,
    encounter_index: HashMap<&'a str, usize>,
    readmit: Vec<bool>,
    stages: HashMap<&'a str, BTreeMap<Stage, Timestamp>>,
}

impl<'a> Engine<'a> {
    pub fn new(data: &'a Dataset, registry: &'a Registry, config: &'a EngineConfig) -> Self {
        let encounter_index = data
            .encounters
            .iter()
            .enumerate()
            .map(|(i, e)| (e.encounter_id.as_str(), i))
            .collect();
        let mut stages: HashMap<&str, BTreeMap<Stage, Timestamp>> = HashMap::new();
        for ev in &data.process_events {
            stages
                .entry(ev.encounter_id.as_str())
                .or_default()
                .insert(ev.stage, ev.ts);
        }
        let readmit = readmission_flags(&data.encounters, config.readmit_window_days);
        Engine {
            data,
            registry,
            config,
            encounter_index,
            readmit,
            stages,
        }
    }

    pub fn encounter(&self, id: &str) -> Option<&'a EncounterRecord> {
        self.encounter_index
            .get(id)
            .map(|&i| &self.data.encounters[i])
    }

    pub(crate) fn is_readmit(&self, encounter_index: usize) -> bool {
        self.readmit[encounter_index]
    }

    pub(crate) fn stage_times(
        &self,
    ) -> impl Iterator<Item = (&'a str, &BTreeMap<Stage, Timestamp>)> {
        self.stages.iter().map(|(k, v)| (*k, v))
    }

    pub fn range(&self, period: Period) -> PeriodRange {
        period.range(self.config.time_zone, self.config.fiscal_year_start)
    }

    pub fn definition(&self, kpi_id: &str) -> Result<&'a KpiDefinition, EngineError> {
        self.registry
            .get(kpi_id)
            .ok_or_else(|| EngineError::UnknownKpi(kpi_id.to_string()))
    }

    /// Checks that every constrained dimension applies to the KPI.
    pub fn check_filter(
        &self,
        def: &KpiDefinition,
        filter: &DimensionFilter,
    ) -> Result<(), EngineError> {
        let valid = kpi_dims(def);
        match filter.iter().map(|(d, _)| d).find(|d| !valid.contains(*d)) {
            Some(dimension) => Err(EngineError::InapplicableDimension {
                kpi_id: def.kpi_id.clone(),
                dimension,
                valid,
            }),
            None => Ok(()),
        }
    }

    /// The value of one KPI for a period and filter.
    pub fn kpi_value(
        &self,
        kpi_id: &str,
        period: Period,
        filter: &DimensionFilter,
    ) -> Result<KpiValue, EngineError> {
        let def = self.definition(kpi_id)?;
        self.check_filter(def, filter)?;
        let ctx = self.build_measure_context(period, filter);
        Ok(evaluate_kpi(def, &ctx, period, filter))
    }

    /// Evaluates the listed KPIs that exist in the registry over one shared
    /// measure context. KPIs the filter does not apply to are undefined.
    pub fn compute_kpis<'k>(
        &self,
        kpi_ids: impl IntoIterator<Item = &'k str>,
        period: Period,
        filter: &DimensionFilter,
    ) -> Vec<KpiValue> {
        let ctx = self.build_measure_context(period, filter);
        kpi_ids
            .into_iter()
            .filter_map(|id| self.registry.get(id))
            .map(|def| evaluate_kpi(def, &ctx, period, filter))
            .collect()
    }

    /// Fiscal year-to-date value through `through_month`, computed from
    /// year-to-date measure totals rather than by combining monthly values.
    pub fn aggregate_ytd(
        &self,
        year: i32,
        through_month: u32,
        kpi_id: &str,
        filter: &DimensionFilter,
    ) -> Result<KpiValue, EngineError> {
        let period = Period::ytd(year, through_month)?;
        self.kpi_value(kpi_id, period, filter)
    }
}

/// Evaluates a KPI over a prepared context, attaching numerator and
/// denominator for quotient KPIs and a precise reason when undefined.
pub fn evaluate_kpi(
    def: &KpiDefinition,
    ctx: &MeasureContext,
    period: Period,
    filter: &DimensionFilter,
) -> KpiValue {
    let value = match evaluate(&def.resolved, ctx) {
        Value::Defined(v) => Value::Defined(v),
        Value::Undefined(reason) => Value::Undefined(explain(def, ctx, filter, reason)),
    };
    let (numerator, denominator) = match def.quotient() {
        Some((num, den)) => (
            evaluate(num, ctx).as_number().cloned(),
            evaluate(den, ctx).as_number().cloned(),
        ),
        None => (None, None),
    };
    KpiValue {
        kpi_id: def.kpi_id.clone(),
        period,
        filter: filter.clone(),
        value,
        numerator,
        denominator,
    }
}

fn explain(
    def: &KpiDefinition,
    ctx: &MeasureContext,
    filter: &DimensionFilter,
    reason: String,
) -> String {
    if let Some(name) = reason.strip_prefix("missing measure ") {
        return match CATALOG.get(name) {
            Some(spec) if !spec.available_under(filter.dims()) => format!(
                "not applicable under filter on {}",
                list_dims(&filter.dims())
            ),
            Some(spec) if spec.kind == MeasureKind::Balance => MISSING_BALANCE.to_string(),
            _ => reason,
        };
    }
    if reason == DIVISION_BY_ZERO {
        if let Some((_, den)) = def.quotient() {
            let counts_only = den.measures().into_iter().all(|name| {
                CATALOG
                    .get(name)
                    .is_some_and(|s| s.kind == MeasureKind::Count)
            });
            let den_zero = evaluate(den, ctx).as_number().is_some_and(Zero::is_zero);
            if counts_only && !den.measures().is_empty() && den_zero {
                return NO_DATA.to_string();
            }
        }
    }
    reason
}

/// Marks inpatient unplanned admissions that begin within `window_days`
/// after a discharge of another inpatient stay of the same patient.
fn readmission_flags(encounters: &[EncounterRecord], window_days: i64) -> Vec<bool> {
    let mut by_patient: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, e) in encounters.iter().enumerate() {
        if e.kind == EncounterKind::Inpatient {
            by_patient.entry(e.patient_id.as_str()).or_default().push(i);
        }
    }
    let window = chrono::Duration::days(window_days);
    let mut flags = vec![false; encounters.len()];
    for stays in by_patient.values() {
        for &i in stays {
            let e = &encounters[i];
            if e.planned {
                continue;
            }
            flags[i] = stays.iter().any(|&j| {
                j != i
                    && encounters[j]
                        .discharge_ts
                        .is_some_and(|d| d <= e.admit_ts && e.admit_ts - d <= window)
            });
        }
    }
    flags
}

// Amounts in tests are written as major_minor.
#[cfg(test)]
#[allow(clippy::inconsistent_digit_grouping)]
mod tests;
