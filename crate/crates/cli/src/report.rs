//! Report data and its three renderings: text, machine JSON, and CSV traces.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use whgvi_core::analysis::{CheckOptions, ConditionReport};
use whgvi_core::solvers::{EfeCertificate, GridBox, HomotopyParams, HomotopyTrace, SolutionCertificate, SolverParams, TraceOutcome};

use crate::pipeline::status_name;

/// Identifier of the machine-report layout; bumped on incompatible changes.
pub const SCHEMA: &str = "whgvi-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub provenance: Provenance,
    pub problems: Vec<ProblemReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    pub core_version: String,
    pub seed: u64,
    pub solver: SolverParams,
    pub homotopy: HomotopyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub tracker: String,
    pub outcome: TraceOutcome,
    pub steps: usize,
    pub final_t: f64,
    /// File name of the CSV trace, relative to the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub grid: GridBox,
    pub solutions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemReport {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    pub n: usize,
    pub solutions: Vec<SolutionCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<PathSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efe: Option<EfeCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<Enumeration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
}

impl Report {
    pub fn new(command: &str, provenance: Provenance) -> Self {
        Report { schema: SCHEMA.to_string(), command: command.to_string(), provenance, problems: Vec::new() }
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn mismatch_count(&self) -> usize {
        self.problems.iter().map(|p| p.mismatches.len()).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "{} {} ({}, seed {})", p.tool, self.command, self.schema, p.seed);
        if self.problems.is_empty() {
            out.push_str("no problems\n");
        }
        for pr in &self.problems {
            render_problem(&mut out, pr);
        }
        if self.problems.len() > 1 {
            let bad = self.problems.iter().filter(|p| !p.mismatches.is_empty()).count();
            let _ = writeln!(out, "\n{} problem(s), {} with mismatches", self.problems.len(), bad);
        }
        out
    }
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.10}")).collect();
    format!("({})", parts.join(", "))
}

fn render_problem(out: &mut String, pr: &ProblemReport) {
    let _ = write!(out, "\n{} (n = {}", pr.name, pr.n);
    if let Some(e) = &pr.example {
        let _ = write!(out, ", example {e}");
    }
    out.push_str(")\n");
    if pr.solutions.is_empty() {
        out.push_str("  no solution found\n");
    }
    for s in &pr.solutions {
        let _ = write!(out, "  solution {} via {}: natural residual {:.3e}", fmt_point(&s.point), s.method, s.residuals.natural_norm);
        if let Some(g) = s.residuals.vi_gap {
            let _ = write!(out, ", gap {g:.3e}");
        }
        out.push('\n');
    }
    for p in &pr.paths {
        let _ = writeln!(out, "  {} homotopy: {:?} after {} records (t = {})", p.tracker, p.outcome, p.steps, p.final_t);
    }
    if let Some(e) = &pr.efe {
        let last = e.growth.last().copied().unwrap_or(0.0);
        let _ = writeln!(out, "  exceptional family: {} validated points, final norm {last:.3e}", e.points.len());
    }
    if let Some(e) = &pr.enumeration {
        let _ = writeln!(out, "  enumeration: {} solution(s) on a {}-point grid", e.solutions.len(), e.grid.len());
        for s in &e.solutions {
            let _ = writeln!(out, "    {}", fmt_point(s));
        }
    }
    if let Some(c) = &pr.conditions {
        out.push_str("  conditions:\n");
        let width = c.verdicts.keys().map(String::len).max().unwrap_or(0);
        for (name, v) in &c.verdicts {
            let _ = write!(out, "    {name:width$}  {:21}  {:>6}", status_name(v.status), v.samples);
            if !v.notes.is_empty() {
                let _ = write!(out, "  {}", v.notes);
            }
            out.push('\n');
        }
        out.push_str("  theorems:\n");
        let width = c.theorem_conclusions.iter().map(|t| t.id.len()).max().unwrap_or(0);
        for t in &c.theorem_conclusions {
            if t.applies {
                let _ = writeln!(out, "    {:width$}  {}", t.id, t.conclusion);
            } else {
                let _ = writeln!(out, "    {:width$}  not applicable ({})", t.id, t.failed.join(", "));
            }
        }
    }
    if pr.mismatches.is_empty() {
        if pr.example.is_some() {
            out.push_str("  annotations: match\n");
        }
    } else {
        for m in &pr.mismatches {
            let _ = writeln!(out, "  MISMATCH {m}");
        }
    }
}

/// Writes the text and machine reports, plus one CSV per trace, into `dir`.
///
/// `traces[i]` belongs to the `i`-th path of the problems taken in order;
/// each path's `trace_file` is filled in before the machine report is written.
pub fn write_reports(report: &mut Report, traces: &[HomotopyTrace], dir: &Path, stem: &str) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut it = traces.iter();
    for pr in &mut report.problems {
        for p in &mut pr.paths {
            if let Some(t) = it.next() {
                let file = format!("{}.{}.csv", pr.name, p.tracker);
                let path = dir.join(&file);
                std::fs::write(&path, t.to_csv())?;
                written.push(path);
                p.trace_file = Some(file);
            }
        }
    }
    let machine = dir.join(format!("{stem}.json"));
    std::fs::write(&machine, report.to_machine())?;
    written.push(machine);
    let text = dir.join(format!("{stem}.txt"));
    std::fs::write(&text, report.to_text())?;
    written.push(text);
    Ok(written)
}
