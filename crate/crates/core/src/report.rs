//! Verification reports shared by the exact-sequence and identity checkers.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::series::{series_eq, BiSeries, EqReport, Mismatch};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    /// Outside the hypotheses of the statement; the report says why.
    #[serde(rename = "N/A")]
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// `Fail` dominates, then `Pass`; `NotApplicable` is neutral.
    pub fn and(self, o: Verdict) -> Verdict {
        match (self, o) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::NotApplicable, x) | (x, Verdict::NotApplicable) => x,
            _ => Verdict::Pass,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "N/A",
        })
    }
}

/// One series comparison inside a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub label: String,
    #[serde(flatten)]
    pub result: EqReport,
}

/// Bookkeeping for one bigraded piece of a short sequence `0 -> A -> B -> C -> 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceReport {
    pub charge: String,
    pub degree: String,
    /// `(dim A, dim B, dim C)`.
    pub dims: [u64; 3],
    /// Rank of the injection, when computed from matrices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_in: Option<u64>,
    /// Rank of the surjection, when computed from matrices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_out: Option<u64>,
    pub composite_zero: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub check: String,
    pub params: String,
    pub verdict: Verdict,
    /// How exactness was established, for exact sequences.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certification: Option<String>,
    pub window_limited: bool,
    pub notes: Vec<String>,
    pub comparisons: Vec<Comparison>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<PieceReport>,
}

impl Report {
    pub fn new(check: &str, params: String) -> Report {
        Report {
            check: check.to_string(),
            params,
            verdict: Verdict::Pass,
            certification: None,
            window_limited: false,
            notes: Vec::new(),
            comparisons: Vec::new(),
            pieces: Vec::new(),
        }
    }

    pub fn not_applicable(check: &str, params: String, why: String) -> Report {
        let mut r = Report::new(check, params);
        r.verdict = Verdict::NotApplicable;
        r.notes.push(why);
        r
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    /// Records a failed condition.
    pub fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.verdict = Verdict::Fail;
            self.notes.push(format!("failed: {}", what.into()));
        }
    }

    pub fn compare(&mut self, label: &str, left: &BiSeries, right: &BiSeries) -> Result<()> {
        let result = series_eq(left, right)?;
        if !result.equal {
            self.verdict = Verdict::Fail;
        }
        if result.z_window.is_some() {
            self.window_limited = true;
        }
        self.comparisons.push(Comparison { label: label.to_string(), result });
        Ok(())
    }

    pub fn first_mismatch(&self) -> Option<(&str, &Mismatch)> {
        self.comparisons.iter().find_map(|c| c.result.mismatch.as_ref().map(|m| (c.label.as_str(), m)))
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let mut s = format!("{} {} [{}]", self.verdict, self.check, self.params);
        if self.window_limited {
            s.push_str(" (window-limited)");
        }
        if let Some((label, m)) = self.first_mismatch() {
            s.push_str(&format!(" mismatch in {label} at z^{} q^{}: {} vs {}", m.z, m.q, m.left, m.right));
        } else if self.verdict != Verdict::Pass {
            if let Some(n) = self.notes.first() {
                s.push_str(&format!(" {n}"));
            }
        }
        s
    }
}
