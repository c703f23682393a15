//! Report documents and their JSON and CSV encodings.

use std::io::Write;

use fbasis_core::relation_checks::ResidualReport;
use serde::Serialize;

use crate::config::{OutputFormat, RunError, Tolerances};

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// One residual, tagged with the section that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    /// Section name, for example `weights` or `factorization`.
    pub section: String,
    /// The residual itself.
    #[serde(flatten)]
    pub report: ResidualReport,
}

/// Outcome of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    /// Report layout version.
    pub schema: u32,
    /// Suite name.
    pub suite: String,
    /// Model name.
    pub model: String,
    /// Generator seed.
    pub seed: u64,
    /// Largest lattice length.
    pub lmax: usize,
    /// Thresholds in effect.
    pub tolerances: Tolerances,
    /// Number of residuals.
    pub checks: usize,
    /// Number of failing residuals.
    pub failures: usize,
    /// Sections that did not apply to the model, with the reason.
    pub skipped: Vec<String>,
    /// Every residual in evaluation order.
    pub entries: Vec<Entry>,
}

impl SuiteReport {
    /// Whether every residual passed.
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Failing entries in order.
    pub fn failing(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.report.pass)
    }

    /// Writes the report in `format`.
    pub fn write(&self, format: OutputFormat, out: &mut dyn Write) -> Result<(), RunError> {
        match format {
            OutputFormat::Json => {
                let s = serde_json::to_string_pretty(self).map_err(|e| RunError::Serialize(e.to_string()))?;
                writeln!(out, "{s}")?;
            }
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                let csv_err = |e: csv::Error| RunError::Serialize(e.to_string());
                w.write_record([
                    "schema",
                    "suite",
                    "section",
                    "relation",
                    "arguments",
                    "absolute",
                    "relative",
                    "pass",
                ])
                .map_err(csv_err)?;
                for e in &self.entries {
                    let r = &e.report;
                    w.write_record([
                        SCHEMA_VERSION.to_string(),
                        self.suite.clone(),
                        e.section.clone(),
                        r.relation.clone(),
                        r.arguments.join(" "),
                        format!("{:e}", r.absolute),
                        format!("{:e}", r.relative),
                        r.pass.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> SuiteReport {
        let ok = ResidualReport::from_values("unitarity.a", &[1], vec!["xi1".into(), "xi2".into()], 1e-17, 1.0, 1e-9);
        let bad = ResidualReport::from_values("yb.r1", &[1, 2], vec!["xi1".into()], 0.5, 1.0, 1e-9);
        let entries: Vec<Entry> = [ok, bad]
            .into_iter()
            .map(|report| Entry {
                section: "weights".into(),
                report,
            })
            .collect();
        SuiteReport {
            schema: SCHEMA_VERSION,
            suite: "weights-check".into(),
            model: "del-pezzo".into(),
            seed: 1,
            lmax: 2,
            tolerances: Tolerances::default(),
            checks: 2,
            failures: 1,
            skipped: vec![],
            entries,
        }
    }

    #[test]
    fn json_has_schema_and_flat_entries() {
        let mut buf = Vec::new();
        report().write(OutputFormat::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["entries"][1]["relation"], "yb.r1:{1,2}");
        assert_eq!(v["entries"][1]["section"], "weights");
    }

    #[test]
    fn csv_has_one_row_per_entry() {
        let mut buf = Vec::new();
        report().write(OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().ends_with("false"));
        assert_eq!(report().failing().count(), 1);
    }
}
