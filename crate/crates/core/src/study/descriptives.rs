use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::stats::{mean, quantile_type7, quartiles_median_exclusive};
use super::{Condition, StudyError, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum QuartileMethod {
    /// Linear interpolation between order statistics (R's default).
    #[default]
    Interpolated,
    /// Medians of the halves below and above the median.
    MedianExclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64], method: QuartileMethod) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let (q1, q3) = match method {
            QuartileMethod::Interpolated => (quantile_type7(&v, 0.25), quantile_type7(&v, 0.75)),
            QuartileMethod::MedianExclusive => quartiles_median_exclusive(&v),
        };
        Some(Summary {
            n: v.len(),
            min: v[0],
            q1,
            median: quantile_type7(&v, 0.5),
            mean: mean(&v),
            q3,
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DescriptiveRow {
    pub label: String,
    /// Absent when no values qualify, e.g. times when every trial was censored.
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DescriptiveTable {
    pub method: QuartileMethod,
    pub rows: Vec<DescriptiveRow>,
}

impl DescriptiveTable {
    pub fn row(&self, label: &str) -> Option<&DescriptiveRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(7).max(7);
        let mut out = format!("{:<width$}", "Measure");
        for h in ["Min", "Q1", "Median", "Mean", "Q3", "Max"] {
            let _ = write!(out, " {h:>8}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<width$}", r.label);
            match r.summary {
                Some(s) => {
                    for v in [s.min, s.q1, s.median, s.mean, s.q3, s.max] {
                        let _ = write!(out, " {:>8}", trim(v));
                    }
                }
                None => out.push_str("  (no data)"),
            }
            out.push('\n');
        }
        out
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Per-condition errors per child and seconds per phoneme, practice trials
/// excluded. Censored trials count towards errors but carry no time.
pub fn descriptives(records: &[TrialRecord], method: QuartileMethod) -> Result<DescriptiveTable, StudyError> {
    let tests: Vec<&TrialRecord> = records.iter().filter(|r| !r.is_practice()).collect();
    if tests.is_empty() {
        return Err(StudyError::Precondition("no test trials".into()));
    }
    let mut rows = Vec::with_capacity(4);
    for cond in [Condition::Letter, Condition::Creature] {
        let mut per_child: BTreeMap<&str, f64> = BTreeMap::new();
        for r in tests.iter().filter(|r| r.condition == cond) {
            *per_child.entry(r.child_id.as_str()).or_default() += f64::from(r.errors);
        }
        let errors: Vec<f64> = per_child.into_values().collect();
        rows.push(DescriptiveRow {
            label: format!("Errors per child ({cond})"),
            summary: Summary::of(&errors, method),
        });
    }
    for cond in [Condition::Letter, Condition::Creature] {
        let secs: Vec<f64> = tests
            .iter()
            .filter(|r| r.condition == cond)
            .filter_map(|r| r.seconds())
            .collect();
        rows.push(DescriptiveRow {
            label: format!("Sec. per phoneme ({cond})"),
            summary: Summary::of(&secs, method),
        });
    }
    Ok(DescriptiveTable { method, rows })
}
