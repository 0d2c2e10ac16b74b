use std::collections::BTreeMap;

use super::catalog::{canonical_stage_pairs, lag_kpi_id, SECONDS_PER_MINUTE};
use super::filter::{Dimension, DimensionFilter};
use super::measures::observed_lags;
use super::period::Period;
use super::{Engine, KpiValue, NO_DATA};
use crate::domain::{EncounterKind, Stage};
use crate::dsl::{KpiCategory, Value};
use crate::number::{int, ratio};

pub const FINANCIAL_CORE: &[&str] = &[
    "revenue",
    "operating_expenses",
    "ebitda",
    "ebitda_margin",
    "ebit",
    "operating_margin",
    "pbt",
    "net_income",
    "eps",
    "return_on_capital",
    "return_on_assets",
];

pub const CASHFLOW: &[&str] = &[
    "days_cash_on_hand",
    "current_ratio",
    "debt_equity",
    "collection_ratio_days",
];

pub const OPERATIONAL: &[&str] = &[
    "admissions",
    "unplanned_readmit_rate",
    "alos",
    "bed_occupancy",
    "extended_stay_count",
    "long_stay_count",
    "er_presents",
    "er_admit_rate",
    "divert_count",
    "time_to_treatment",
    "surgeries",
    "or_utilization",
    "or_idle_minutes",
    "avg_pre_op_minutes",
    "or_wait_minutes",
    "outpatient_visits",
    "rvu_total",
    "no_show_rate",
    "appointment_wait_minutes",
    "registration_wait_minutes",
];

pub const QUALITY: &[&str] = &[
    "patients_treated",
    "satisfaction_patient_care",
    "satisfaction_customer_service",
    "satisfaction_overall",
    "recommend_score",
    "nursing_rn_score",
    "nursing_patient_score",
    "incident_count",
    "incidents_professional_conduct",
    "incidents_communication",
    "incidents_treatment_care",
    "incidents_wait_time",
    "incidents_other",
    "complaint_resolution_days",
];

pub const REVENUE_CYCLE: &[&str] = &[
    "pos_collection",
    "ar_days",
    "denial_rate_count",
    "denial_rate_amount",
    "days_to_bill",
    "write_off_total",
    "deposit_compliance",
];

pub const PROVIDER_HOSPITAL: &[&str] = &["revenue_per_bed", "revenue_per_fte", "cost_per_fte"];

pub const TRANSPLANT: &[&str] = &[
    "transplants",
    "avg_cit_minutes",
    "cit_compliance_rate",
    "avg_wait_days_transplanted",
    "avg_wait_days_active",
    "failure_rate",
    "living_donor_share",
    "new_listings",
    "waiting_list",
];

/// Per-doctor provider figures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoctorRow {
    pub doctor_id: String,
    pub revenue: KpiValue,
    pub encounters: KpiValue,
    pub revenue_per_encounter: KpiValue,
    pub occupancy_share: KpiValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderReport {
    pub doctors: Vec<DoctorRow>,
    pub hospital: Vec<KpiValue>,
}

impl Engine<'_> {
    /// Earnings, margins and returns.
    pub fn compute_financial_core(&self, period: Period) -> Vec<KpiValue> {
        self.compute_kpis(
            FINANCIAL_CORE.iter().copied(),
            period,
            &DimensionFilter::none(),
        )
    }

    /// Liquidity and collection KPIs from the latest balance snapshot.
    pub fn compute_cashflow(&self, period: Period) -> Vec<KpiValue> {
        self.compute_kpis(CASHFLOW.iter().copied(), period, &DimensionFilter::none())
    }

    pub fn compute_operational(&self, period: Period, filter: &DimensionFilter) -> Vec<KpiValue> {
        self.compute_kpis(OPERATIONAL.iter().copied(), period, filter)
    }

    /// Average minutes between consecutive recorded pathway stages for one
    /// cohort (emergency or not). Every canonical pair is reported, undefined
    /// when unobserved; pairs spanning a skipped stage follow when observed.
    pub fn compute_process_lags(&self, period: Period, emergency: bool) -> Vec<KpiValue> {
        let range = self.range(period);
        let cohort = if emergency { super::ER } else { super::NON_ER };
        let mut sums: BTreeMap<(Stage, Stage), (i128, i128)> = BTreeMap::new();
        for (encounter_id, stages) in self.stage_times() {
            let is_er = self
                .encounter(encounter_id)
                .is_some_and(|e| e.kind == EncounterKind::Emergency);
            if is_er != emergency {
                continue;
            }
            for (from, to, lag) in observed_lags(stages, &range) {
                let entry = sums.entry((from, to)).or_default();
                entry.0 += lag;
                entry.1 += 1;
            }
        }
        let canonical = canonical_stage_pairs();
        let extra: Vec<(Stage, Stage)> = sums
            .keys()
            .filter(|p| !canonical.contains(p))
            .copied()
            .collect();
        canonical
            .into_iter()
            .chain(extra)
            .map(|(from, to)| {
                let (sum, n) = sums.get(&(from, to)).copied().unwrap_or_default();
                let (value, numerator, denominator) = if n == 0 {
                    (Value::Undefined(NO_DATA.into()), Some(int(0)), Some(int(0)))
                } else {
                    let minutes = ratio(sum, SECONDS_PER_MINUTE as i128);
                    (
                        Value::Defined(&minutes / int(n)),
                        Some(minutes),
                        Some(int(n)),
                    )
                };
                KpiValue {
                    kpi_id: lag_kpi_id(from, to, cohort),
                    period,
                    filter: DimensionFilter::none(),
                    value,
                    numerator,
                    denominator,
                }
            })
            .collect()
    }

    /// Quality KPIs, followed by patients treated per DRG.
    pub fn compute_quality(&self, period: Period, filter: &DimensionFilter) -> Vec<KpiValue> {
        let mut out = self.compute_kpis(QUALITY.iter().copied(), period, filter);
        if filter.get(Dimension::Drg).is_none() {
            if let Ok(drill) =
                self.drilldown_with("patients_treated", period, Dimension::Drg, filter)
            {
                out.extend(drill.rows.into_iter().map(|(_, v)| v));
            }
        }
        out
    }

    pub fn compute_revenue_cycle(&self, period: Period, location: Option<&str>) -> Vec<KpiValue> {
        let filter = match location {
            Some(loc) => DimensionFilter::none()
                .with(Dimension::Location, loc)
                .expect("single constraint"),
            None => DimensionFilter::none(),
        };
        self.compute_kpis(REVENUE_CYCLE.iter().copied(), period, &filter)
    }

    pub fn compute_provider(&self, period: Period) -> ProviderReport {
        let none = DimensionFilter::none();
        let mut ids = Vec::new();
        for kpi in ["encounters", "revenue"] {
            if let Some(def) = self.registry.get(kpi) {
                ids.extend(self.group_values(def, Dimension::Doctor, &none));
            }
        }
        ids.sort_by(|a, b| super::drill::group_order(a, b));
        ids.dedup();
        let mut doctors = Vec::new();
        for doctor_id in ids {
            let filter = DimensionFilter::none()
                .with(Dimension::Doctor, doctor_id.clone())
                .expect("single constraint");
            let ids = [
                "revenue",
                "encounters",
                "revenue_per_encounter",
                "occupancy_share",
            ];
            let mut values = self.compute_kpis(ids, period, &filter).into_iter();
            let (
                Some(revenue),
                Some(encounters),
                Some(revenue_per_encounter),
                Some(occupancy_share),
            ) = (values.next(), values.next(), values.next(), values.next())
            else {
                break;
            };
            doctors.push(DoctorRow {
                doctor_id,
                revenue,
                encounters,
                revenue_per_encounter,
                occupancy_share,
            });
        }
        let hospital = self.compute_kpis(
            PROVIDER_HOSPITAL.iter().copied(),
            period,
            &DimensionFilter::none(),
        );
        ProviderReport { doctors, hospital }
    }

    pub fn compute_transplant(&self, period: Period) -> Vec<KpiValue> {
        self.compute_kpis(TRANSPLANT.iter().copied(), period, &DimensionFilter::none())
    }

    /// Every registry KPI of a category.
    pub fn compute_category(
        &self,
        category: KpiCategory,
        period: Period,
        filter: &DimensionFilter,
    ) -> Vec<KpiValue> {
        let ids: Vec<&str> = self
            .registry
            .by_category(category)
            .map(|d| d.kpi_id.as_str())
            .collect();
        self.compute_kpis(ids, period, filter)
    }
}
