//! The work behind each command, independent of argument parsing and output.

use whgvi_core::analysis::{analyze, CheckOptions, ConditionReport, Status};
use whgvi_core::linalg::dist;
use whgvi_core::problem::{Expected, ProblemSpec};
use whgvi_core::solvers::{
    efe_from_run, enumerate_solutions, solve_multistart, solve_newton, track_basic_homotopy, track_cone_homotopy,
    GridBox, HomotopyParams, HomotopyTrace, SolutionCertificate, SolverParams, TraceOutcome, DEDUP_DIST,
};
use whgvi_core::Result;

use crate::report::{Enumeration, PathSummary, ProblemReport};

/// Grid used by the enumerator when a problem names no search box.
pub fn default_grid(n: usize) -> GridBox {
    GridBox::cube(n, -2.0, 2.0, 41)
}

/// Coarse multistart grid tried after both homotopies.
fn fallback_grid(n: usize) -> GridBox {
    GridBox::cube(n, -2.0, 2.0, 5)
}

/// Distance within which a solution counts as matching another.
pub const MATCH_DIST: f64 = 1e-6;

pub struct Solved {
    pub solution: Option<SolutionCertificate>,
    pub paths: Vec<(PathSummary, HomotopyTrace)>,
    pub efe: Option<whgvi_core::solvers::EfeCertificate>,
}

fn summary(tracker: &str, trace: &HomotopyTrace) -> PathSummary {
    PathSummary {
        tracker: tracker.to_string(),
        outcome: trace.outcome,
        steps: trace.records.len(),
        final_t: trace.records.last().map_or(0.0, |r| r.t),
        trace_file: None,
    }
}

/// Basic homotopy from the anchor, then the cone homotopy, then multistart Newton.
pub fn solve(spec: &ProblemSpec, anchor: Option<&[f64]>, params: &SolverParams, hp: &HomotopyParams) -> Result<Solved> {
    let f = spec.f.extend();
    let g = spec.g.extend();
    let k = &spec.k;
    let zeros = vec![0.0; spec.n];
    let anchor = anchor.or(spec.probes.anchor.as_deref()).unwrap_or(&zeros).to_vec();
    let mut out = Solved { solution: None, paths: Vec::new(), efe: None };

    if let Ok(run) = track_basic_homotopy(&f, &g, k, &anchor, params, hp) {
        out.efe = efe_from_run(&f, &g, k, &anchor, &run)?;
        out.paths.push((summary("basic", &run.trace), run.trace.clone()));
        if run.solution.is_some() {
            out.solution = run.solution;
            return Ok(out);
        }
    }
    if let Ok(run) = track_cone_homotopy(&f, &g, k, params, hp) {
        out.paths.push((summary("cone", &run.trace), run.trace.clone()));
        if run.solution.is_some() {
            out.solution = run.solution;
            return Ok(out);
        }
    }
    if let Ok(cert) = solve_newton(&f, &g, k, &anchor, params) {
        out.solution = Some(cert);
        return Ok(out);
    }
    out.solution = solve_multistart(&f, &g, k, &fallback_grid(spec.n), params)?.into_iter().next();
    Ok(out)
}

pub fn enumerate(spec: &ProblemSpec, params: &SolverParams) -> Result<Enumeration> {
    let grid = spec.probes.search_box.clone().unwrap_or_else(|| default_grid(spec.n));
    let found = enumerate_solutions(&spec.f.extend(), &spec.g.extend(), &spec.k, &grid, true, params)?;
    Ok(Enumeration { grid, solutions: found.into_iter().map(|c| c.point).collect() })
}

pub fn check(spec: &ProblemSpec, known: &[Vec<f64>], opts: &CheckOptions) -> Result<ConditionReport> {
    analyze(spec, known, opts)
}

fn near_any(x: &[f64], set: &[Vec<f64>]) -> bool {
    set.iter().any(|y| dist(x, y) <= MATCH_DIST.max(DEDUP_DIST))
}

/// Differences between a finished run and the problem's annotations.
pub fn compare_expected(expected: &Expected, enumeration: Option<&Enumeration>, conditions: &ConditionReport) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(e) = enumeration {
        for s in &expected.solutions {
            if !near_any(s, &e.solutions) {
                out.push(format!("expected solution {s:?} not found"));
            }
        }
        if let Some(count) = expected.solution_count {
            if e.solutions.len() != count {
                out.push(format!("expected {count} solution(s), enumeration found {}", e.solutions.len()));
            }
        }
    }
    for (id, want) in &expected.theorems {
        match conditions.theorem_conclusions.iter().find(|c| &c.id == id) {
            Some(c) if c.applies == *want => {}
            Some(c) => out.push(format!("theorem {id}: expected applies = {want}, got {}", c.applies)),
            None => out.push(format!("theorem {id}: no such template")),
        }
    }
    for (name, want) in &expected.verdicts {
        match conditions.verdicts.get(name) {
            Some(v) if v.status == *want => {}
            Some(v) => out.push(format!("verdict {name}: expected {}, got {}", status_name(*want), status_name(v.status))),
            None => out.push(format!("verdict {name}: check not run")),
        }
    }
    out
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Falsified => "falsified",
        Status::Unfalsified => "unfalsified",
        Status::VerifiedStructurally => "verified_structurally",
    }
}

/// Solve, enumerate, check, and cross-validate one problem.
pub fn certify(spec: &ProblemSpec, params: &SolverParams, hp: &HomotopyParams, opts: &CheckOptions) -> Result<(ProblemReport, Vec<HomotopyTrace>)> {
    let solved = solve(spec, None, params, hp)?;
    let enumeration = enumerate(spec, params).ok();
    let mut known: Vec<Vec<f64>> = enumeration.as_ref().map(|e| e.solutions.clone()).unwrap_or_default();
    if let Some(s) = &solved.solution {
        if !near_any(&s.point, &known) {
            known.push(s.point.clone());
        }
    }
    let conditions = check(spec, &known, opts)?;

    let mut mismatches = Vec::new();
    if let (Some(s), Some(e)) = (&solved.solution, &enumeration) {
        if e.grid.contains(&s.point, 1e-9) && !near_any(&s.point, &e.solutions) {
            mismatches.push(format!("solver solution {:?} missing from the enumeration", s.point));
        }
    }
    if let Some(e) = &enumeration {
        for c in conditions.theorem_conclusions.iter().filter(|c| c.applies && c.id.ends_with("_unique")) {
            if e.solutions.len() != 1 {
                mismatches.push(format!("{} applies but enumeration found {} solutions", c.id, e.solutions.len()));
            }
        }
    }
    if let Some(exp) = &spec.expected {
        mismatches.extend(compare_expected(exp, enumeration.as_ref(), &conditions));
    }

    let (paths, traces): (Vec<PathSummary>, Vec<HomotopyTrace>) = solved.paths.into_iter().unzip();
    let report = ProblemReport {
        name: spec.name.clone(),
        example: spec.example_id().map(str::to_string),
        n: spec.n,
        solutions: solved.solution.into_iter().collect(),
        paths,
        efe: solved.efe,
        enumeration,
        conditions: Some(conditions),
        mismatches,
    };
    Ok((report, traces))
}

/// True when some path ran but none of them reached `t = 1`.
pub fn all_paths_failed(paths: &[PathSummary]) -> bool {
    !paths.is_empty() && paths.iter().all(|p| p.outcome != TraceOutcome::ReachedT1)
}
