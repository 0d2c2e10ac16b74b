use num_traits::{One, Zero};

use super::period::{parse_year_month, Period, PeriodKind};
use super::KpiValue;
use crate::domain::string_enum;
use crate::dsl::{Direction, Registry, Value};
use crate::number::{int, parse_decimal, Number};

string_enum! {
    pub enum GoalStatus: "goal status" {
        OnTrack => "on_track",
        AtRisk => "at_risk",
        OffTrack => "off_track",
    }
}

/// Periods a goal applies to: one month (or YTD through it), or every month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GoalPeriod {
    Exact(Period),
    Every(PeriodKind),
}

impl GoalPeriod {
    fn kind(&self) -> PeriodKind {
        match self {
            GoalPeriod::Exact(p) => p.kind,
            GoalPeriod::Every(kind) => *kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalTarget {
    pub kpi_id: String,
    pub period: GoalPeriod,
    pub target: Number,
    pub warn_band_pct: Number,
}

impl GoalTarget {
    pub fn new(kpi_id: impl Into<String>, period: GoalPeriod, target: Number) -> Self {
        GoalTarget {
            kpi_id: kpi_id.into(),
            period,
            target,
            warn_band_pct: int(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalComparison {
    pub target: Number,
    pub warn_band_pct: Number,
    /// `value − target`; absent when the value is undefined.
    pub variance: Option<Number>,
    /// `variance / target`; absent when undefined or the target is zero.
    pub variance_pct: Option<Number>,
    pub status: GoalStatus,
    /// Why the value is undefined, when it is.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalOutcome {
    NoGoal,
    Compared(Box<GoalComparison>),
}

/// Compares a KPI value with its goal.
///
/// Higher-better KPIs are on track at or above target and at risk within
/// `warn_band_pct` percent below it; lower-better KPIs mirror that. An
/// undefined value is off track.
pub fn compare_to_goal(
    value: &KpiValue,
    goal: Option<&GoalTarget>,
    direction: Direction,
) -> GoalOutcome {
    let Some(goal) = goal else {
        return GoalOutcome::NoGoal;
    };
    let target = goal.target.clone();
    let band = &goal.warn_band_pct / int(100);
    let (status, variance, reason) = match &value.value {
        Value::Undefined(reason) => (GoalStatus::OffTrack, None, Some(reason.clone())),
        Value::Defined(v) => {
            let status = match direction {
                Direction::HigherBetter if *v >= target => GoalStatus::OnTrack,
                Direction::HigherBetter if *v >= &target * (Number::one() - &band) => {
                    GoalStatus::AtRisk
                }
                Direction::LowerBetter if *v <= target => GoalStatus::OnTrack,
                Direction::LowerBetter if *v <= &target * (Number::one() + &band) => {
                    GoalStatus::AtRisk
                }
                _ => GoalStatus::OffTrack,
            };
            (status, Some(v - &target), None)
        }
    };
    let variance_pct = variance
        .as_ref()
        .filter(|_| !target.is_zero())
        .map(|v| v / &target);
    GoalOutcome::Compared(Box::new(GoalComparison {
        target,
        warn_band_pct: goal.warn_band_pct.clone(),
        variance,
        variance_pct,
        status,
        reason,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("goals line {line}: {message}")]
pub struct GoalError {
    pub line: usize,
    pub message: String,
}

/// Goals loaded from a goals file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoalSet {
    goals: Vec<GoalTarget>,
}

impl GoalSet {
    pub fn new(goals: Vec<GoalTarget>) -> Self {
        GoalSet { goals }
    }

    /// Parses lines of the form
    /// `goal <kpi_id> period=<YYYY-MM|*> scope=<month|ytd> target=<x> [warn_band_pct=<y>]`.
    /// `#` starts a comment. Every KPI must exist in `registry`.
    pub fn parse(text: &str, registry: &Registry) -> Result<Self, GoalError> {
        let mut goals: Vec<GoalTarget> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| GoalError { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            if words.next() != Some("goal") {
                return Err(err("expected 'goal'".into()));
            }
            let kpi_id = words.next().ok_or_else(|| err("missing kpi id".into()))?;
            if registry.get(kpi_id).is_none() {
                return Err(err(format!("unknown kpi '{kpi_id}'")));
            }
            let (mut period, mut scope, mut target, mut band) = (None, None, None, None);
            for word in words {
                let (key, value) = word
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected key=value, got '{word}'")))?;
                let slot = match key {
                    "period" => &mut period,
                    "scope" => &mut scope,
                    "target" => &mut target,
                    "warn_band_pct" => &mut band,
                    _ => return Err(err(format!("unknown key '{key}'"))),
                };
                if slot.replace(value).is_some() {
                    return Err(err(format!("repeated key '{key}'")));
                }
            }
            let kind = match scope.unwrap_or("month").parse::<PeriodKind>() {
                Ok(kind) => kind,
                Err(e) => return Err(err(e.to_string())),
            };
            let period = match period.ok_or_else(|| err("missing period".into()))? {
                "*" => GoalPeriod::Every(kind),
                text => {
                    let (year, month) = parse_year_month(text).map_err(|e| err(e.to_string()))?;
                    GoalPeriod::Exact(
                        Period::new(kind, year, month).map_err(|e| err(e.to_string()))?,
                    )
                }
            };
            let decimal = |name: &str, text: &str| {
                parse_decimal(text).ok_or_else(|| err(format!("invalid {name} '{text}'")))
            };
            let target = decimal(
                "target",
                target.ok_or_else(|| err("missing target".into()))?,
            )?;
            let warn_band_pct = match band {
                Some(text) => decimal("warn_band_pct", text)?,
                None => int(10),
            };
            if warn_band_pct < Number::zero() {
                return Err(err("warn_band_pct must be non-negative".into()));
            }
            if goals
                .iter()
                .any(|g| g.kpi_id == kpi_id && g.period == period)
            {
                return Err(err(format!("duplicate goal for '{kpi_id}'")));
            }
            goals.push(GoalTarget {
                kpi_id: kpi_id.to_string(),
                period,
                target,
                warn_band_pct,
            });
        }
        Ok(GoalSet { goals })
    }

    /// The goal for a KPI and period: an exact-period goal wins over an
    /// every-period goal of the same scope.
    pub fn lookup(&self, kpi_id: &str, period: Period) -> Option<&GoalTarget> {
        let mine = || self.goals.iter().filter(move |g| g.kpi_id == kpi_id);
        mine()
            .find(|g| g.period == GoalPeriod::Exact(period))
            .or_else(|| mine().find(|g| g.period == GoalPeriod::Every(period.kind)))
    }

    pub fn iter(&self) -> impl Iterator<Item = &GoalTarget> {
        self.goals.iter()
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    /// Scope of a goal, for display.
    pub fn scope_of(goal: &GoalTarget) -> PeriodKind {
        goal.period.kind()
    }
}
