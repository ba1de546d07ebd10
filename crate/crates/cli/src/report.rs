//! Report schema and emission. The machine format is JSON with stable key
//! order and shortest round-trip float encoding, so identical runs produce
//! byte-identical files; wall time is printed to the console only.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Blocked,
    Inconclusive,
    Skipped,
}

impl CheckStatus {
    pub fn is_ok(self) -> bool {
        matches!(self, CheckStatus::Pass | CheckStatus::Skipped)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_residual: Option<f64>,
    /// Chart point attaining the worst residual.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Vec<f64>>,
    /// Observed convergence order at the worst point, when measurable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocked_by: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl CheckSummary {
    pub fn blocked(name: &str, by: &str) -> Self {
        CheckSummary {
            name: name.into(),
            status: CheckStatus::Blocked,
            worst_residual: None,
            location: None,
            order: None,
            blocked_by: Some(by.into()),
            message: None,
            details: BTreeMap::new(),
        }
    }

    pub fn skipped(name: &str, reason: &str) -> Self {
        CheckSummary {
            name: name.into(),
            status: CheckStatus::Skipped,
            worst_residual: None,
            location: None,
            order: None,
            blocked_by: None,
            message: Some(reason.into()),
            details: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub u: Vec<f64>,
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub source: String,
    pub params: BTreeMap<String, f64>,
    pub grid: Vec<usize>,
    pub fd_step: f64,
    pub checks: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub version: String,
    pub checks: Vec<CheckSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointRecord>>,
}

impl Report {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.status.is_ok())
    }

    /// Machine form: deterministic pretty JSON with a trailing newline.
    pub fn to_machine_string(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).context("serializing report")?;
        text.push('\n');
        Ok(text)
    }

    pub fn write_machine(&self, path: &Path) -> Result<()> {
        let text = self.to_machine_string()?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn from_machine_str(text: &str) -> Result<Report> {
        serde_json::from_str(text).context("parsing machine report")
    }

    /// Console table: one fixed-format row per check.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let status = match check.status {
                CheckStatus::Pass => "PASS".to_string(),
                CheckStatus::Fail => "FAIL".to_string(),
                CheckStatus::Inconclusive => "INCONCLUSIVE".to_string(),
                CheckStatus::Skipped => "SKIPPED".to_string(),
                CheckStatus::Blocked => format!(
                    "BLOCKED(by={})",
                    check.blocked_by.as_deref().unwrap_or("?")
                ),
            };
            let _ = write!(out, "{status} {}", check.name);
            if let Some(worst) = check.worst_residual {
                let _ = write!(out, " worst={worst:.1e}");
            }
            if let Some(order) = check.order {
                let _ = write!(out, " order={order:.1}");
            }
            if let Some(msg) = &check.message {
                let _ = write!(out, " ({msg})");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> Report {
        Report {
            config: ConfigEcho {
                source: "catalog:cyl:c=1:kappa=1".into(),
                params: BTreeMap::new(),
                grid: vec![8, 8],
                fd_step: 1e-3,
                checks: vec!["simons".into()],
                tolerances: BTreeMap::new(),
                seed: 0,
            },
            version: "0.1.0".into(),
            checks: vec![CheckSummary {
                name: "simons".into(),
                status: CheckStatus::Pass,
                worst_residual: Some(3.1e-4),
                location: Some(vec![0.5, 0.5]),
                order: Some(1.9),
                blocked_by: None,
                message: None,
                details: BTreeMap::new(),
            }],
            points: None,
        }
    }

    #[test]
    fn machine_round_trip_is_byte_identical() {
        let report = sample_report();
        let text = report.to_machine_string().unwrap();
        let reread = Report::from_machine_str(&text).unwrap();
        assert_eq!(reread.to_machine_string().unwrap(), text);
    }

    #[test]
    fn table_rows_match_contract() {
        let mut report = sample_report();
        report.checks.push(CheckSummary::blocked("flatness", "pmc"));
        let table = report.to_table();
        assert!(table.contains("PASS simons worst=3.1e-4 order=1.9"));
        assert!(table.contains("BLOCKED(by=pmc) flatness"));
    }
}
