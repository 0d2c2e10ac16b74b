use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate, Weekday};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

/// How "working days" are counted for the collection ratio.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum WorkingDays {
    /// Every calendar day in the period.
    #[default]
    Calendar,
    /// Monday to Friday, minus listed holidays.
    Weekdays {
        #[serde(default)]
        holidays: BTreeSet<NaiveDate>,
    },
}

impl WorkingDays {
    /// Working days in the inclusive date range.
    pub fn count(&self, first: NaiveDate, last: NaiveDate) -> i64 {
        match self {
            WorkingDays::Calendar => (last - first).num_days() + 1,
            WorkingDays::Weekdays { holidays } => first
                .iter_days()
                .take_while(|d| *d <= last)
                .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
                .filter(|d| !holidays.contains(d))
                .count() as i64,
        }
    }
}

/// Engine tunables. Defaults follow common industry conventions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Zone used to bucket UTC timestamps into calendar days and months.
    pub time_zone: Tz,
    /// First month of the fiscal year (1 = January).
    pub fiscal_year_start: u32,
    /// Unplanned admissions within this many days of a prior discharge count as readmissions.
    pub readmit_window_days: i64,
    pub extended_stay_days: i64,
    pub long_stay_days: i64,
    /// Cold ischemia below this many minutes is compliant (9 hours).
    pub cit_threshold_minutes: i64,
    pub working_days: WorkingDays,
    /// Divide cash by the period's total (not daily) cash expense.
    pub days_cash_raw: bool,
    pub currency: String,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            time_zone: Tz::UTC,
            fiscal_year_start: 1,
            readmit_window_days: 30,
            extended_stay_days: 10,
            long_stay_days: 30,
            cit_threshold_minutes: 540,
            working_days: WorkingDays::Calendar,
            days_cash_raw: false,
            currency: "USD".to_string(),
        }
    }
}
