//! Per-sample diagnostics with pass/fail margins.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::holomap::CVector;
use crate::output::{fmt_f64, write_csv};

/// One inequality check: it passes iff `margin >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// Everything recorded at one sample point (or one parameter value).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SampleRecord {
    pub point: Option<CVector>,
    pub parameter: Option<f64>,
    pub values: Vec<NamedValue>,
    pub checks: Vec<Check>,
    pub note: Option<String>,
}

impl SampleRecord {
    pub fn at(point: &CVector) -> Self {
        Self {
            point: Some(point.clone()),
            ..Self::default()
        }
    }

    pub fn for_parameter(parameter: f64) -> Self {
        Self {
            parameter: Some(parameter),
            ..Self::default()
        }
    }

    pub fn with_parameter(mut self, parameter: f64) -> Self {
        self.parameter = Some(parameter);
        self
    }

    pub fn value(mut self, name: &str, value: f64) -> Self {
        self.values.push(NamedValue {
            name: name.to_owned(),
            value,
        });
        self
    }

    /// Adds a check; the pass flag is settled when the record joins a report.
    pub fn check(mut self, name: &str, margin: f64) -> Self {
        self.checks.push(Check {
            name: name.to_owned(),
            margin,
            passed: false,
        });
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Applicability {
    Applicable,
    /// A theorem precondition does not hold; nothing is asserted.
    NotApplicable(String),
    /// The bound degenerates (for example `β = 0`); checks pass trivially.
    Vacuous(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstMargin {
    pub check: String,
    pub margin: f64,
    pub record: usize,
}

/// A list of sample records sharing a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub title: String,
    pub tolerance: f64,
    pub applicability: Applicability,
    pub records: Vec<SampleRecord>,
}

/// JSON-sized digest of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub title: String,
    pub tolerance: f64,
    pub applicability: Applicability,
    pub samples: usize,
    pub failures: usize,
    pub passed: bool,
    pub worst_margins: Vec<WorstMargin>,
}

impl DiagnosticsReport {
    pub fn new(title: impl Into<String>, tolerance: f64) -> Self {
        Self {
            title: title.into(),
            tolerance,
            applicability: Applicability::Applicable,
            records: Vec::new(),
        }
    }

    pub fn not_applicable(
        title: impl Into<String>,
        tolerance: f64,
        reason: impl Into<String>,
    ) -> Self {
        Self {
            applicability: Applicability::NotApplicable(reason.into()),
            ..Self::new(title, tolerance)
        }
    }

    pub fn mark_vacuous(&mut self, reason: impl Into<String>) {
        self.applicability = Applicability::Vacuous(reason.into());
    }

    pub fn is_applicable(&self) -> bool {
        !matches!(self.applicability, Applicability::NotApplicable(_))
    }

    pub fn push(&mut self, mut record: SampleRecord) {
        for c in &mut record.checks {
            c.passed = c.margin >= -self.tolerance;
        }
        self.records.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = SampleRecord>) {
        for r in records {
            self.push(r);
        }
    }

    pub fn failures(&self) -> usize {
        self.records
            .iter()
            .flat_map(|r| &r.checks)
            .filter(|c| !c.passed)
            .count()
    }

    pub fn passed(&self) -> bool {
        match self.applicability {
            Applicability::Applicable => self.failures() == 0,
            Applicability::NotApplicable(_) | Applicability::Vacuous(_) => true,
        }
    }

    /// Smallest margin per check name, in order of first appearance.
    pub fn worst_margins(&self) -> Vec<WorstMargin> {
        let mut out: Vec<WorstMargin> = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            for c in &r.checks {
                match out.iter_mut().find(|w| w.check == c.name) {
                    Some(w) if c.margin < w.margin || c.margin.is_nan() => {
                        w.margin = c.margin;
                        w.record = i;
                    }
                    Some(_) => {}
                    None => out.push(WorstMargin {
                        check: c.name.clone(),
                        margin: c.margin,
                        record: i,
                    }),
                }
            }
        }
        out
    }

    pub fn worst_margin(&self, check: &str) -> Option<f64> {
        self.worst_margins()
            .into_iter()
            .find(|w| w.check == check)
            .map(|w| w.margin)
    }

    pub fn min_value(&self, name: &str) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.get(name))
            .reduce(f64::min)
    }

    pub fn max_value(&self, name: &str) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.get(name))
            .reduce(f64::max)
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            title: self.title.clone(),
            tolerance: self.tolerance,
            applicability: self.applicability.clone(),
            samples: self.records.len(),
            failures: self.failures(),
            passed: self.passed(),
            worst_margins: self.worst_margins(),
        }
    }

    /// One row per record: parameter, point coordinates, values, margins and flags.
    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let dim = self
            .records
            .iter()
            .filter_map(|r| r.point.as_ref().map(CVector::dim))
            .max()
            .unwrap_or(0);
        let mut value_names: Vec<&str> = Vec::new();
        let mut check_names: Vec<&str> = Vec::new();
        for r in &self.records {
            for v in &r.values {
                if !value_names.contains(&v.name.as_str()) {
                    value_names.push(&v.name);
                }
            }
            for c in &r.checks {
                if !check_names.contains(&c.name.as_str()) {
                    check_names.push(&c.name);
                }
            }
        }

        let mut header = vec!["index".to_owned(), "parameter".to_owned()];
        for k in 0..dim {
            header.push(format!("re_x{k}"));
            header.push(format!("im_x{k}"));
        }
        header.extend(value_names.iter().map(|n| n.to_string()));
        for n in &check_names {
            header.push(format!("margin_{n}"));
            header.push(format!("pass_{n}"));
        }
        header.push("note".to_owned());

        let rows = self
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = vec![i.to_string(), r.parameter.map(fmt_f64).unwrap_or_default()];
                for k in 0..dim {
                    match r.point.as_ref().filter(|p| k < p.dim()) {
                        Some(p) => {
                            row.push(fmt_f64(p[k].re));
                            row.push(fmt_f64(p[k].im));
                        }
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                for n in &value_names {
                    row.push(r.get(n).map(fmt_f64).unwrap_or_default());
                }
                for n in &check_names {
                    match r.checks.iter().find(|c| c.name == *n) {
                        Some(c) => {
                            row.push(fmt_f64(c.margin));
                            row.push(c.passed.to_string());
                        }
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                row.push(r.note.clone().unwrap_or_default());
                row
            })
            .collect();
        (header, rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let (header, rows) = self.csv_rows();
        write_csv(path, &header, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_tolerance() {
        let mut r = DiagnosticsReport::new("t", 1e-9);
        r.push(
            SampleRecord::for_parameter(1.0)
                .check("a", -5e-10)
                .check("b", 0.3),
        );
        r.push(SampleRecord::for_parameter(2.0).check("a", -2e-9));
        assert_eq!(r.failures(), 1);
        assert!(!r.passed());
        assert_eq!(r.worst_margin("a"), Some(-2e-9));
        assert_eq!(r.worst_margins()[0].record, 1);
    }

    #[test]
    fn nan_margin_fails() {
        let mut r = DiagnosticsReport::new("t", 1e-9);
        r.push(SampleRecord::default().check("a", f64::NAN));
        assert!(!r.passed());
    }

    #[test]
    fn not_applicable_reports_pass() {
        let r = DiagnosticsReport::not_applicable("t", 1e-3, "lambda below threshold");
        assert!(r.passed());
        assert!(!r.is_applicable());
    }

    #[test]
    fn csv_layout() {
        let mut r = DiagnosticsReport::new("t", 0.0);
        r.push(
            SampleRecord::at(&CVector::from_real(&[0.5]))
                .value("v", 1.0)
                .check("c", 0.0),
        );
        let (header, rows) = r.csv_rows();
        assert_eq!(
            header,
            [
                "index",
                "parameter",
                "re_x0",
                "im_x0",
                "v",
                "margin_c",
                "pass_c",
                "note"
            ]
        );
        assert_eq!(rows[0][2], "5.0000000000000000e-1");
        assert_eq!(rows[0][6], "true");
    }
}
