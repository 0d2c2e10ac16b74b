use std::fmt;

use chrono::{Datelike, Duration, NaiveDate, TimeZone};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::domain::{string_enum, Timestamp};

string_enum! {
    pub enum PeriodKind: "scope" {
        Month => "month",
        Ytd => "ytd",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PeriodError {
    #[error("invalid month")]
    InvalidMonth,
    #[error("malformed period '{0}', expected YYYY-MM")]
    Malformed(String),
    #[error("invalid scope '{0}', expected month or ytd")]
    InvalidScope(String),
}

/// A reporting window: one calendar month, or fiscal year-to-date through a month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Period {
    pub kind: PeriodKind,
    pub year: i32,
    pub month: u32,
}

/// The concrete date and instant bounds of a period in the reporting zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodRange {
    pub first_day: NaiveDate,
    pub last_day: NaiveDate,
    /// Inclusive start instant.
    pub start: Timestamp,
    /// Exclusive end instant.
    pub end: Timestamp,
}

impl PeriodRange {
    pub fn contains(&self, ts: Timestamp) -> bool {
        self.start <= ts && ts < self.end
    }

    pub fn contains_date(&self, date: NaiveDate) -> bool {
        self.first_day <= date && date <= self.last_day
    }

    pub fn days(&self) -> i64 {
        (self.last_day - self.first_day).num_days() + 1
    }
}

impl Period {
    pub fn month(year: i32, month: u32) -> Result<Self, PeriodError> {
        Self::new(PeriodKind::Month, year, month)
    }

    pub fn ytd(year: i32, month: u32) -> Result<Self, PeriodError> {
        Self::new(PeriodKind::Ytd, year, month)
    }

    pub fn new(kind: PeriodKind, year: i32, month: u32) -> Result<Self, PeriodError> {
        if !(1..=12).contains(&month) {
            return Err(PeriodError::InvalidMonth);
        }
        Ok(Period { kind, year, month })
    }

    /// Parses `YYYY-MM` plus a scope (`month` or `ytd`).
    pub fn parse(text: &str, scope: &str) -> Result<Self, PeriodError> {
        let kind = scope
            .parse::<PeriodKind>()
            .map_err(|_| PeriodError::InvalidScope(scope.into()))?;
        let (year, month) = parse_year_month(text)?;
        Self::new(kind, year, month)
    }

    /// The `YYYY-MM` label of the (through-)month.
    pub fn label(&self) -> String {
        format!("{:04}-{:02}", self.year, self.month)
    }

    /// Months since year 0, for period arithmetic.
    pub fn month_index(&self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_month_index(kind: PeriodKind, index: i64) -> Self {
        Period {
            kind,
            year: index.div_euclid(12) as i32,
            month: index.rem_euclid(12) as u32 + 1,
        }
    }

    /// The previous calendar month, same kind.
    pub fn prev(&self) -> Self {
        Self::from_month_index(self.kind, self.month_index() - 1)
    }

    pub fn next(&self) -> Self {
        Self::from_month_index(self.kind, self.month_index() + 1)
    }

    pub fn as_month(&self) -> Self {
        Period {
            kind: PeriodKind::Month,
            ..*self
        }
    }

    /// First month of the fiscal year containing this period's month.
    pub fn fiscal_start(&self, fiscal_year_start: u32) -> (i32, u32) {
        if self.month >= fiscal_year_start {
            (self.year, fiscal_year_start)
        } else {
            (self.year - 1, fiscal_year_start)
        }
    }

    pub fn range(&self, tz: Tz, fiscal_year_start: u32) -> PeriodRange {
        let (start_year, start_month) = match self.kind {
            PeriodKind::Month => (self.year, self.month),
            PeriodKind::Ytd => self.fiscal_start(fiscal_year_start),
        };
        let first_day = NaiveDate::from_ymd_opt(start_year, start_month, 1).expect("valid month");
        let next = self.as_month().next();
        let next_first = NaiveDate::from_ymd_opt(next.year, next.month, 1).expect("valid month");
        PeriodRange {
            first_day,
            last_day: next_first - Duration::days(1),
            start: local_midnight(tz, first_day),
            end: local_midnight(tz, next_first),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PeriodKind::Month => write!(f, "{}", self.label()),
            PeriodKind::Ytd => write!(f, "{} ytd", self.label()),
        }
    }
}

pub fn parse_year_month(text: &str) -> Result<(i32, u32), PeriodError> {
    let malformed = || PeriodError::Malformed(text.to_string());
    let (y, m) = text.split_once('-').ok_or_else(malformed)?;
    if y.len() != 4 || m.len() != 2 || !y.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let year: i32 = y.parse().map_err(|_| malformed())?;
    let month: u32 = m.parse().map_err(|_| malformed())?;
    if !(1..=12).contains(&month) {
        return Err(PeriodError::InvalidMonth);
    }
    Ok((year, month))
}

/// Start of `date` in `tz`, as UTC. Days that begin inside a DST gap start
/// at the first valid local instant.
pub fn local_midnight(tz: Tz, date: NaiveDate) -> Timestamp {
    let mut naive = date.and_hms_opt(0, 0, 0).expect("midnight");
    loop {
        if let Some(dt) = tz.from_local_datetime(&naive).earliest() {
            return dt.with_timezone(&chrono::Utc);
        }
        naive += Duration::minutes(15);
    }
}

/// Calendar date of `ts` in `tz`.
pub fn local_date(tz: Tz, ts: Timestamp) -> NaiveDate {
    ts.with_timezone(&tz).date_naive()
}

/// The month containing `ts` in `tz`.
pub fn month_of(tz: Tz, ts: Timestamp) -> Period {
    let d = local_date(tz, ts);
    Period {
        kind: PeriodKind::Month,
        year: d.year(),
        month: d.month(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Utc;

    #[test]
    fn parse_periods() {
        assert_eq!(
            Period::parse("2015-06", "month").unwrap(),
            Period::month(2015, 6).unwrap()
        );
        assert_eq!(
            Period::parse("2015-13", "month").unwrap_err(),
            PeriodError::InvalidMonth
        );
        assert_eq!(
            Period::parse("2015-00", "ytd").unwrap_err(),
            PeriodError::InvalidMonth
        );
        assert!(matches!(
            Period::parse("2015-6", "month"),
            Err(PeriodError::Malformed(_))
        ));
        assert!(matches!(
            Period::parse("2015-06", "week"),
            Err(PeriodError::InvalidScope(_))
        ));
    }

    #[test]
    fn month_range_utc() {
        let r = Period::month(2015, 2).unwrap().range(Tz::UTC, 1);
        assert_eq!(r.days(), 28);
        assert_eq!(r.start, Utc.with_ymd_and_hms(2015, 2, 1, 0, 0, 0).unwrap());
        assert_eq!(r.end, Utc.with_ymd_and_hms(2015, 3, 1, 0, 0, 0).unwrap());
        assert!(r.contains(r.start));
        assert!(!r.contains(r.end));
    }

    #[test]
    fn ytd_with_april_fiscal_year() {
        let r = Period::ytd(2016, 2).unwrap().range(Tz::UTC, 4);
        assert_eq!(r.first_day, NaiveDate::from_ymd_opt(2015, 4, 1).unwrap());
        assert_eq!(r.last_day, NaiveDate::from_ymd_opt(2016, 2, 29).unwrap());
        let r = Period::ytd(2015, 6).unwrap().range(Tz::UTC, 1);
        assert_eq!(r.days(), 181);
    }

    #[test]
    fn zone_shifts_bounds() {
        let r = Period::month(2015, 6)
            .unwrap()
            .range(chrono_tz::Asia::Kolkata, 1);
        assert_eq!(
            r.start,
            Utc.with_ymd_and_hms(2015, 5, 31, 18, 30, 0).unwrap()
        );
    }

    #[test]
    fn month_arithmetic() {
        let jan = Period::month(2015, 1).unwrap();
        assert_eq!(jan.prev(), Period::month(2014, 12).unwrap());
        assert_eq!(jan.prev().next(), jan);
    }
}
