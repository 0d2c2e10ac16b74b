use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono_tz::Tz;
use serde::Deserialize;

use super::views::View;
use crate::alerting::{parse_rules, AlertRule, AlertStore, AlertStoreError};
use crate::dsl::Registry;
use crate::engine::{default_registry, parse_registry, EngineConfig, GoalSet, WorkingDays};
use crate::ingest::{EventStore, StoreError};

pub const SETTINGS_FILE: &str = "caremetrics.toml";
pub const STORE_DIR: &str = "store";
pub const ALERTS_FILE: &str = "alerts.json";
pub const DEFAULT_REGISTRY_FILE: &str = "registry.kpi";
pub const DEFAULT_GOALS_FILE: &str = "goals.txt";
pub const DEFAULT_RULES_FILE: &str = "rules.txt";

/// Contents of `caremetrics.toml`. Every key is optional. Relative paths
/// are resolved against the data directory.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub registry: Option<PathBuf>,
    pub goals: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub time_zone: Option<String>,
    pub fiscal_year_start: Option<u32>,
    pub currency: Option<String>,
    pub readmit_window_days: Option<i64>,
    pub extended_stay_days: Option<i64>,
    pub long_stay_days: Option<i64>,
    pub cit_threshold_minutes: Option<i64>,
    pub working_days: Option<WorkingDays>,
    pub days_cash_raw: Option<bool>,
    /// KPI ids shown per dashboard view, replacing the built-in lists.
    #[serde(default)]
    pub views: BTreeMap<View, Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Alerts(#[from] AlertStoreError),
}

/// Everything loaded from a data directory apart from the records
/// themselves: engine settings, KPI registry, goals, alert rules and views.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub data_dir: Option<PathBuf>,
    pub config: EngineConfig,
    pub registry: Registry,
    pub goals: GoalSet,
    pub rules: Vec<AlertRule>,
    pub views: BTreeMap<View, Vec<String>>,
}

impl Workspace {
    /// Built-in registry and default settings with no goals or rules.
    pub fn with_defaults() -> Self {
        let registry = default_registry();
        let views = View::defaults(&registry);
        Workspace {
            data_dir: None,
            config: EngineConfig::default(),
            registry,
            goals: GoalSet::default(),
            rules: Vec::new(),
            views,
        }
    }

    /// Loads `caremetrics.toml` and the files it names from `data_dir`.
    /// Without explicit paths, `registry.kpi`, `goals.txt` and `rules.txt`
    /// are used when present.
    pub fn load(data_dir: impl Into<PathBuf>) -> Result<Self, WorkspaceError> {
        let data_dir = data_dir.into();
        let settings_path = data_dir.join(SETTINGS_FILE);
        let settings: Settings = match read_optional(&settings_path)? {
            Some(text) => {
                toml::from_str(&text).map_err(|e| invalid(&settings_path, e.to_string()))?
            }
            None => Settings::default(),
        };
        Self::from_settings(data_dir, settings)
    }

    pub fn from_settings(data_dir: PathBuf, settings: Settings) -> Result<Self, WorkspaceError> {
        let settings_path = data_dir.join(SETTINGS_FILE);
        let resolve = |explicit: &Option<PathBuf>, default: &str| -> (PathBuf, bool) {
            match explicit {
                Some(p) => (data_dir.join(p), true),
                None => (data_dir.join(default), false),
            }
        };
        let load_text = |(path, required): (PathBuf, bool)| -> Result<Option<(PathBuf, String)>, WorkspaceError> {
            match read_optional(&path)? {
                Some(text) => Ok(Some((path, text))),
                None if required => Err(WorkspaceError::Io {
                    path,
                    source: io::Error::new(io::ErrorKind::NotFound, "file not found"),
                }),
                None => Ok(None),
            }
        };

        let mut config = EngineConfig::default();
        if let Some(zone) = &settings.time_zone {
            config.time_zone = zone
                .parse::<Tz>()
                .map_err(|_| invalid(&settings_path, format!("unknown time zone '{zone}'")))?;
        }
        if let Some(month) = settings.fiscal_year_start {
            if !(1..=12).contains(&month) {
                return Err(invalid(
                    &settings_path,
                    "fiscal_year_start must be in 1..=12".into(),
                ));
            }
            config.fiscal_year_start = month;
        }
        if let Some(currency) = &settings.currency {
            config.currency = currency.clone();
        }
        for (value, slot, name) in [
            (
                settings.readmit_window_days,
                &mut config.readmit_window_days,
                "readmit_window_days",
            ),
            (
                settings.extended_stay_days,
                &mut config.extended_stay_days,
                "extended_stay_days",
            ),
            (
                settings.long_stay_days,
                &mut config.long_stay_days,
                "long_stay_days",
            ),
            (
                settings.cit_threshold_minutes,
                &mut config.cit_threshold_minutes,
                "cit_threshold_minutes",
            ),
        ] {
            if let Some(v) = value {
                if v <= 0 {
                    return Err(invalid(&settings_path, format!("{name} must be positive")));
                }
                *slot = v;
            }
        }
        if let Some(wd) = &settings.working_days {
            config.working_days = wd.clone();
        }
        if let Some(raw) = settings.days_cash_raw {
            config.days_cash_raw = raw;
        }

        let registry = match load_text(resolve(&settings.registry, DEFAULT_REGISTRY_FILE))? {
            Some((path, text)) => {
                parse_registry(&text).map_err(|e| invalid(&path, e.to_string()))?
            }
            None => default_registry(),
        };
        let goals = match load_text(resolve(&settings.goals, DEFAULT_GOALS_FILE))? {
            Some((path, text)) => {
                GoalSet::parse(&text, &registry).map_err(|e| invalid(&path, e.to_string()))?
            }
            None => GoalSet::default(),
        };
        let rules = match load_text(resolve(&settings.rules, DEFAULT_RULES_FILE))? {
            Some((path, text)) => {
                parse_rules(&text, &registry).map_err(|e| invalid(&path, e.to_string()))?
            }
            None => Vec::new(),
        };
        let mut views = View::defaults(&registry);
        for (view, ids) in settings.views {
            if let Some(unknown) = ids.iter().find(|id| registry.get(id).is_none()) {
                return Err(invalid(
                    &settings_path,
                    format!("view {view} lists unknown kpi '{unknown}'"),
                ));
            }
            views.insert(view, ids);
        }
        Ok(Workspace {
            data_dir: Some(data_dir),
            config,
            registry,
            goals,
            rules,
            views,
        })
    }

    /// Opens the record store under the data directory, or an empty
    /// in-memory store when there is none.
    pub fn open_store(&self) -> Result<EventStore, WorkspaceError> {
        Ok(match &self.data_dir {
            Some(dir) => EventStore::open(dir.join(STORE_DIR))?,
            None => EventStore::in_memory(),
        })
    }

    pub fn open_alerts(&self) -> Result<AlertStore, WorkspaceError> {
        Ok(match &self.data_dir {
            Some(dir) => AlertStore::open(dir.join(ALERTS_FILE))?,
            None => AlertStore::in_memory(),
        })
    }
}

fn invalid(path: &Path, message: String) -> WorkspaceError {
    WorkspaceError::Invalid {
        path: path.to_path_buf(),
        message,
    }
}

fn read_optional(path: &Path) -> Result<Option<String>, WorkspaceError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(WorkspaceError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}
