use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::{evaluate_rules, AlertAction, AlertEvent, AlertRule, AlertState, IllegalTransition};
use crate::domain::Timestamp;
use crate::engine::{KpiValue, Period};

#[derive(Debug, thiserror::Error)]
pub enum AlertStoreError {
    #[error("unknown alert '{0}'")]
    UnknownAlert(String),
    #[error(transparent)]
    Illegal(#[from] IllegalTransition),
    #[error("alert store I/O error at {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("alert store {path} is corrupt: {message}")]
    Corrupt { path: PathBuf, message: String },
}

/// Every alert ever raised, keyed by id, optionally persisted as one JSON
/// file that is replaced atomically on each change.
#[derive(Debug, Default)]
pub struct AlertStore {
    path: Option<PathBuf>,
    alerts: BTreeMap<String, AlertEvent>,
}

impl AlertStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads the alerts in `path`; a missing file means no alerts yet.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, AlertStoreError> {
        let path = path.into();
        let alerts = match fs::read_to_string(&path) {
            Ok(text) => {
                let list: Vec<AlertEvent> =
                    serde_json::from_str(&text).map_err(|e| AlertStoreError::Corrupt {
                        path: path.clone(),
                        message: e.to_string(),
                    })?;
                list.into_iter().map(|a| (a.alert_id.clone(), a)).collect()
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(source) => return Err(AlertStoreError::Io { path, source }),
        };
        Ok(AlertStore {
            path: Some(path),
            alerts,
        })
    }

    pub fn get(&self, alert_id: &str) -> Option<&AlertEvent> {
        self.alerts.get(alert_id)
    }

    /// Alerts in id order, optionally only those in `state`.
    pub fn list(&self, state: Option<AlertState>) -> Vec<&AlertEvent> {
        self.alerts
            .values()
            .filter(|a| state.is_none_or(|s| a.state == s))
            .collect()
    }

    pub fn active(&self) -> Vec<AlertEvent> {
        self.alerts
            .values()
            .filter(|a| a.state.is_active())
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.alerts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alerts.is_empty()
    }

    /// Runs [`evaluate_rules`] against the stored alerts and records the result.
    pub fn evaluate(
        &mut self,
        rules: &[AlertRule],
        observations: &[KpiValue],
        period: Period,
        now: Timestamp,
    ) -> Result<Vec<AlertEvent>, AlertStoreError> {
        let changed = evaluate_rules(
            rules,
            observations,
            period,
            &self.alerts.values().cloned().collect::<Vec<_>>(),
            now,
        );
        if changed.is_empty() {
            return Ok(changed);
        }
        let mut next = self.alerts.clone();
        for alert in &changed {
            next.insert(alert.alert_id.clone(), alert.clone());
        }
        self.commit(next)?;
        Ok(changed)
    }

    pub fn transition(
        &mut self,
        alert_id: &str,
        action: AlertAction,
        now: Timestamp,
    ) -> Result<AlertEvent, AlertStoreError> {
        let mut alert = self
            .alerts
            .get(alert_id)
            .cloned()
            .ok_or_else(|| AlertStoreError::UnknownAlert(alert_id.to_string()))?;
        alert.transition(action.target(), now)?;
        let mut next = self.alerts.clone();
        next.insert(alert.alert_id.clone(), alert.clone());
        self.commit(next)?;
        Ok(alert)
    }

    fn commit(&mut self, next: BTreeMap<String, AlertEvent>) -> Result<(), AlertStoreError> {
        if let Some(path) = &self.path {
            write_atomically(path, &next)?;
        }
        self.alerts = next;
        Ok(())
    }
}

fn write_atomically(
    path: &Path,
    alerts: &BTreeMap<String, AlertEvent>,
) -> Result<(), AlertStoreError> {
    let io_err = |source| AlertStoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let list: Vec<&AlertEvent> = alerts.values().collect();
    let body = serde_json::to_vec_pretty(&list).expect("alerts serialize");
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, body).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}
