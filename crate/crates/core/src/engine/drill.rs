use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::catalog::{Scope, CATALOG};
use super::filter::{Dimension, DimensionFilter, UNASSIGNED};
use super::period::Period;
use super::{evaluate_kpi, kpi_dims, Engine, EngineError, KpiValue};
use crate::domain::{string_enum, TxnType};
use crate::dsl::KpiDefinition;
use crate::number::{int, Number};

/// A KPI total and its decomposition along one dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drilldown {
    pub kpi_id: String,
    pub dimension: Dimension,
    pub total: KpiValue,
    pub rows: Vec<(String, KpiValue)>,
}

string_enum! {
    pub enum RankKey: "rank key" {
        Revenue => "revenue",
        Margin => "margin",
    }
}

string_enum! {
    pub enum RankOrder: "rank order" {
        Top => "top",
        Bottom => "bottom",
    }
}

/// Revenue and directly attributable expense of one DRG, in minor units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrgRow {
    pub drg_code: String,
    pub revenue: Number,
    pub expense: Number,
    pub margin: Number,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrgRank {
    pub period: Period,
    pub key: RankKey,
    pub order: RankOrder,
    pub rows: Vec<DrgRow>,
}

/// Sort order for group labels: lexicographic, with the unassigned group last.
pub(crate) fn group_order(a: &str, b: &str) -> Ordering {
    (a == UNASSIGNED, a).cmp(&(b == UNASSIGNED, b))
}

impl Engine<'_> {
    /// Decomposes a KPI along `dimension`, one row per distinct value among
    /// the records feeding it. Records without a value form the
    /// `(unassigned)` row.
    pub fn drilldown(
        &self,
        kpi_id: &str,
        period: Period,
        dimension: Dimension,
    ) -> Result<Drilldown, EngineError> {
        self.drilldown_with(kpi_id, period, dimension, &DimensionFilter::none())
    }

    /// Like [`Engine::drilldown`], within an already filtered slice.
    pub fn drilldown_with(
        &self,
        kpi_id: &str,
        period: Period,
        dimension: Dimension,
        base: &DimensionFilter,
    ) -> Result<Drilldown, EngineError> {
        let def = self.definition(kpi_id)?;
        self.check_filter(def, base)?;
        let valid = kpi_dims(def);
        if !valid.contains(dimension) || base.get(dimension).is_some() {
            return Err(EngineError::InapplicableDimension {
                kpi_id: kpi_id.to_string(),
                dimension,
                valid,
            });
        }
        let total = evaluate_kpi(def, &self.build_measure_context(period, base), period, base);
        let rows = self
            .group_values(def, dimension, base)
            .into_iter()
            .map(|value| {
                let filter = base
                    .clone()
                    .with(dimension, value.clone())
                    .expect("dimension unconstrained");
                let ctx = self.build_measure_context(period, &filter);
                (value, evaluate_kpi(def, &ctx, period, &filter))
            })
            .collect();
        Ok(Drilldown {
            kpi_id: kpi_id.to_string(),
            dimension,
            total,
            rows,
        })
    }

    /// Distinct values of `dimension` over the records feeding the KPI that
    /// match `base`, in display order.
    pub fn group_values(
        &self,
        def: &KpiDefinition,
        dimension: Dimension,
        base: &DimensionFilter,
    ) -> Vec<String> {
        let kinds: BTreeSet<_> = def
            .resolved
            .measures()
            .into_iter()
            .filter_map(|name| CATALOG.get(name))
            .filter(|spec| matches!(spec.scope, Scope::Filtered(_)))
            .filter_map(|spec| spec.source)
            .collect();
        let mut values = BTreeSet::new();
        for kind in kinds {
            for dims in self.dims_of_kind(kind) {
                if base.matches(&dims) {
                    values.insert(dims.get(dimension).unwrap_or(UNASSIGNED).to_string());
                }
            }
        }
        let mut values: Vec<String> = values.into_iter().collect();
        values.sort_by(|a, b| group_order(a, b));
        values
    }

    /// DRGs ranked by revenue or margin. Margin deducts only expenses
    /// charged against an encounter; DRG-less encounters are left out.
    /// Ties are broken by DRG code ascending.
    pub fn rank_drg(
        &self,
        period: Period,
        key: RankKey,
        order: RankOrder,
        n: usize,
    ) -> Result<DrgRank, EngineError> {
        if n == 0 {
            return Err(EngineError::InvalidArgument("n must be at least 1".into()));
        }
        let range = self.range(period);
        let mut groups: BTreeMap<&str, (i128, i128)> = BTreeMap::new();
        for e in &self.data.encounters {
            if let (Some(drg), true) = (e.drg_code.as_deref(), range.contains(e.admit_ts)) {
                groups.entry(drg).or_default();
            }
        }
        for t in &self.data.txns {
            if t.txn_type != TxnType::Charge || !range.contains(t.ts) {
                continue;
            }
            let drg = t
                .encounter_id
                .as_deref()
                .and_then(|id| self.encounter(id))
                .and_then(|e| e.drg_code.as_deref());
            let Some(drg) = drg else { continue };
            let entry = groups.entry(drg).or_default();
            if t.category.is_expense() {
                entry.1 += t.amount_minor as i128;
            } else {
                entry.0 += t.amount_minor as i128;
            }
        }
        let mut rows: Vec<DrgRow> = groups
            .into_iter()
            .map(|(drg, (revenue, expense))| DrgRow {
                drg_code: drg.to_string(),
                revenue: int(revenue),
                expense: int(expense),
                margin: int(revenue - expense),
            })
            .collect();
        let metric = |row: &DrgRow| match key {
            RankKey::Revenue => row.revenue.clone(),
            RankKey::Margin => row.margin.clone(),
        };
        rows.sort_by(|a, b| {
            let by_metric = match order {
                RankOrder::Top => metric(b).cmp(&metric(a)),
                RankOrder::Bottom => metric(a).cmp(&metric(b)),
            };
            by_metric.then_with(|| a.drg_code.cmp(&b.drg_code))
        });
        rows.truncate(n);
        Ok(DrgRank {
            period,
            key,
            order,
            rows,
        })
    }
}

impl Drilldown {
    /// Sum of the defined row values.
    pub fn row_sum(&self) -> Number {
        self.rows
            .iter()
            .filter_map(|(_, v)| v.value.as_number())
            .fold(Number::zero(), |acc, v| acc + v)
    }
}
