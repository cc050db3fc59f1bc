use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIPPED",
        }
    }
}

/// Outcome of one check. `verdict` is `Pass` iff `margin ≥ -slack` and every
/// auxiliary condition recorded in `details` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub params: BTreeMap<String, String>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub samples: u64,
    pub slack: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    /// Report with `margin = rhs - lhs`.
    pub fn compare(check_id: &str, params: Params, lhs: f64, rhs: f64, slack: f64, samples: u64) -> Self {
        Self::with_margin(check_id, params, lhs, rhs, rhs - lhs, slack, samples)
    }

    pub fn with_margin(
        check_id: &str,
        params: Params,
        lhs: f64,
        rhs: f64,
        margin: f64,
        slack: f64,
        samples: u64,
    ) -> Self {
        let verdict = if margin >= -slack { Verdict::Pass } else { Verdict::Fail };
        CheckReport {
            check_id: check_id.to_string(),
            params: params.0,
            lhs,
            rhs,
            margin,
            verdict,
            samples,
            slack,
            details: BTreeMap::new(),
            note: None,
        }
    }

    pub fn skipped(check_id: &str, params: Params, reason: impl Into<String>) -> Self {
        CheckReport {
            check_id: check_id.to_string(),
            params: params.0,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            verdict: Verdict::Skipped,
            samples: 0,
            slack: 0.0,
            details: BTreeMap::new(),
            note: Some(reason.into()),
        }
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Forces a failure when an auxiliary condition does not hold.
    pub fn require(mut self, ok: bool, what: &str) -> Self {
        if !ok && self.verdict != Verdict::Skipped {
            self.verdict = Verdict::Fail;
            let msg = match self.note.take() {
                Some(n) => format!("{n}; {what}"),
                None => what.to_string(),
            };
            self.note = Some(msg);
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn params_string(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

/// Ordered check parameters.
#[derive(Debug, Clone, Default)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Params(BTreeMap::new())
    }

    pub fn num(mut self, key: &str, v: f64) -> Self {
        self.0.insert(key.to_string(), format_number(v));
        self
    }

    pub fn text(mut self, key: &str, v: impl Into<String>) -> Self {
        self.0.insert(key.to_string(), v.into());
        self
    }
}

/// Fixed 12-decimal rendering with trailing zeros trimmed (at least one
/// decimal kept); `inf`, `-inf` and `nan` for non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mut s = format!("{x:.12}");
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    if s == "-0.0" {
        s = "0.0".into();
    }
    s
}

/// Sorts by `(check_id, params)`; ties keep their input order.
pub fn merge_reports(mut reports: Vec<CheckReport>) -> Vec<CheckReport> {
    reports.sort_by(|a, b| a.check_id.cmp(&b.check_id).then_with(|| a.params.cmp(&b.params)));
    reports
}

pub fn to_jsonl(reports: &[CheckReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        let line = serde_json::to_string(r).map_err(|e| LabError::Internal(e.to_string()))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from("check_id,params,lhs,rhs,margin,verdict\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.check_id),
            csv_field(&r.params_string()),
            format_number(r.lhs),
            format_number(r.rhs),
            format_number(r.margin),
            r.verdict.as_str()
        );
    }
    out
}

/// Counts per verdict.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

pub fn summarize(reports: &[CheckReport]) -> Summary {
    let mut s = Summary::default();
    for r in reports {
        match r.verdict {
            Verdict::Pass => s.pass += 1,
            Verdict::Fail => s.fail += 1,
            Verdict::Skipped => s.skipped += 1,
        }
    }
    s
}
