use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use yorlab_core::stats::TestReport;

use crate::config::ExperimentConfig;

/// Where a number came from. Exact computations have no seed or step size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub n_paths: Option<usize>,
}

impl Provenance {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn monte_carlo(seed: u64, dt: f64, n_paths: usize) -> Self {
        Self { seed: Some(seed), dt: Some(dt), n_paths: Some(n_paths) }
    }
}

/// One in-experiment pass/fail check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Human-readable acceptance rule, e.g. `"<= 1e-8"`.
    pub rule: String,
    #[serde(flatten)]
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<TestReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, value: f64, rule: impl Into<String>, provenance: Provenance) -> Self {
        Self { name: name.into(), passed, value, rule: rule.into(), provenance, test: None, note: None }
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, provenance: Provenance) -> Self {
        Self::new(name, value <= bound, value, format!("<= {bound:e}"), provenance)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, provenance: Provenance) -> Self {
        Self::new(name, value >= bound, value, format!(">= {bound}"), provenance)
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64, provenance: Provenance) -> Self {
        Self::new(name, (lo..=hi).contains(&value), value, format!("in [{lo}, {hi}]"), provenance)
    }

    /// Pass iff the statistical test passes (`expect_pass`) or rejects (`!expect_pass`).
    pub fn from_test(name: impl Into<String>, report: TestReport, expect_pass: bool, provenance: Provenance) -> Self {
        let rule = if expect_pass {
            format!("<= {} (must pass)", report.threshold)
        } else {
            format!("> {} (must reject)", report.threshold)
        };
        let mut c = Self::new(name, report.passed() == expect_pass, report.statistic, rule, provenance);
        c.test = Some(report);
        c
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A CSV table; provenance columns are appended on write.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub provenance: Provenance,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str], provenance: Provenance) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), provenance }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = self.columns.clone();
        header.extend(["seed", "dt", "n_paths"].map(String::from));
        w.write_record(&header)?;
        let prov = [opt(self.provenance.seed), opt(self.provenance.dt), opt(self.provenance.n_paths)];
        for row in &self.rows {
            w.write_record(row.iter().chain(prov.iter()))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Builds a CSV row from displayable cells.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

/// Result of one experiment run.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Resolved settings, echoed into the report.
    pub settings: Value,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn new(settings: impl Serialize) -> Self {
        Self { settings: serde_json::to_value(settings).expect("settings serialize"), checks: Vec::new(), tables: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn report_json(&self, config: &ExperimentConfig) -> Value {
        json!({
            "experiment": config.experiment,
            "config": config.params,
            "settings": self.settings,
            "passed": self.passed(),
            "checks": self.checks,
            "tables": self.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
        })
    }

    /// Writes `report.json` and one CSV per table into `config.out`.
    pub fn write(&self, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
        let mut written = Vec::new();
        let report = config.out.join("report.json");
        fs::write(&report, serde_json::to_string_pretty(&self.report_json(config))? + "\n")?;
        written.push(report);
        for t in &self.tables {
            let path = config.out.join(format!("{}.csv", t.name));
            t.write(&path).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{} {:<34} {:<14.6e} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.rule))
            .collect()
    }
}
