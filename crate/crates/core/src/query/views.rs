use std::collections::BTreeMap;

use crate::domain::string_enum;
use crate::dsl::{KpiCategory, Registry};

string_enum! {
    /// The four dashboard pages.
    pub enum View: "view" {
        Executive => "executive",
        Quality => "quality",
        Operations => "operations",
        Finance => "finance",
    }
}

const EXECUTIVE: &[&str] = &[
    "revenue",
    "ebitda_margin",
    "net_income",
    "admissions",
    "bed_occupancy",
    "alos",
    "patients_treated",
    "satisfaction_overall",
    "ar_days",
    "cit_compliance_rate",
];

impl View {
    /// Built-in KPI lists. Views other than executive take whole registry
    /// categories; process lag KPIs are left to the series endpoint.
    pub fn defaults(registry: &Registry) -> BTreeMap<View, Vec<String>> {
        let of = |cats: &[KpiCategory]| -> Vec<String> {
            registry
                .iter()
                .filter(|d| cats.contains(&d.category) && !d.kpi_id.starts_with("lag_"))
                .map(|d| d.kpi_id.clone())
                .collect()
        };
        let executive = EXECUTIVE
            .iter()
            .filter(|id| registry.get(id).is_some())
            .map(|id| id.to_string())
            .collect();
        BTreeMap::from([
            (View::Executive, executive),
            (
                View::Quality,
                of(&[KpiCategory::Quality, KpiCategory::Transplant]),
            ),
            (View::Operations, of(&[KpiCategory::Operational])),
            (
                View::Finance,
                of(&[
                    KpiCategory::Financial,
                    KpiCategory::RevenueCycle,
                    KpiCategory::Provider,
                ]),
            ),
        ])
    }
}
