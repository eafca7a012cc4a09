//! Run reports shared by the `check` and `corpus` commands.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

use crate::diagnostic::{Category, Diagnostic};
use crate::session::FileOutcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Status {
    pub fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

/// Result of checking one file.
#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    pub file: String,
    pub status: Status,
    pub declarations: usize,
    pub postulates: usize,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub millis: f64,
}

impl FileRecord {
    pub fn from_outcome(file: String, outcome: &FileOutcome, elapsed: Duration) -> FileRecord {
        FileRecord {
            file,
            status: Status::of(outcome.passed()),
            declarations: outcome.declared.len(),
            postulates: outcome.postulates,
            diagnostics: outcome.error.iter().cloned().collect(),
            note: None,
            millis: elapsed.as_secs_f64() * 1e3,
        }
    }

    /// A file that was not checked because a prerequisite failed.
    pub fn skipped(file: String, reason: String) -> FileRecord {
        FileRecord {
            file,
            status: Status::Fail,
            declarations: 0,
            postulates: 0,
            diagnostics: Vec::new(),
            note: Some(reason),
            millis: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Verification of one manifest row.
#[derive(Clone, Debug, Serialize)]
pub struct EntryRecord {
    pub result_id: String,
    pub file: String,
    pub theorems: Vec<String>,
    pub required_axioms: Vec<String>,
    pub found_axioms: Vec<String>,
    pub postulates: usize,
    pub status: Status,
    pub problems: Vec<String>,
}

/// A file that must be rejected with a given error category.
#[derive(Clone, Debug, Serialize)]
pub struct NegativeRecord {
    pub file: String,
    pub expected: Option<Category>,
    pub actual: Option<Category>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub files: Vec<FileRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<EntryRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub negatives: Vec<NegativeRecord>,
    pub postulate_tally: usize,
    pub status: Option<Status>,
    pub exit_code: i32,
}

impl RunReport {
    /// Fill in the tally, overall status and exit code from the records.
    pub fn finish(mut self) -> RunReport {
        self.postulate_tally = self.files.iter().map(|f| f.postulates).sum();
        let ok = self.files.iter().all(|f| f.passed())
            && self.entries.iter().all(|e| e.status == Status::Pass)
            && self.negatives.iter().all(|n| n.status == Status::Pass)
            && self.postulate_tally == 0;
        let status = Status::of(ok);
        self.status = Some(status);
        self.exit_code = if ok { 0 } else { 1 };
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Some(Status::Pass)
    }

    /// Human-readable report. Wall times are included unless `timings` is
    /// false, which makes the text deterministic.
    pub fn render(&self, timings: bool) -> String {
        let mut out = String::new();
        for f in &self.files {
            let _ = write!(out, "{} {} ({} decls", f.status.label(), f.file, f.declarations);
            if timings {
                let _ = write!(out, ", {:.1} ms", f.millis);
            }
            out.push(')');
            if let Some(n) = &f.note {
                let _ = write!(out, " {n}");
            }
            out.push('\n');
        }
        for e in &self.entries {
            let theorems = if e.theorems.is_empty() { "-".to_string() } else { e.theorems.join(",") };
            let _ = writeln!(
                out,
                "{} {} {} {} axioms: {}",
                e.status.label(),
                e.result_id,
                e.file,
                theorems,
                axiom_list(&e.found_axioms)
            );
            for p in &e.problems {
                let _ = writeln!(out, "    {p}");
            }
        }
        for n in &self.negatives {
            let show = |c: Option<Category>| c.map_or("accepted".to_string(), |c| c.to_string());
            let _ = writeln!(
                out,
                "{} {} rejected: {} (expected {})",
                n.status.label(),
                n.file,
                show(n.actual),
                n.expected.map_or("a category".to_string(), |c| c.to_string())
            );
        }
        let _ = writeln!(out, "postulates: {}", self.postulate_tally);
        let _ = writeln!(out, "overall: {}", self.status.unwrap_or(Status::Fail).label());
        out
    }
}

pub fn axiom_list(axioms: &[String]) -> String {
    if axioms.is_empty() {
        "none".to_string()
    } else {
        axioms.join(",")
    }
}
