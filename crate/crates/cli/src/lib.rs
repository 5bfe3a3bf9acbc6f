//! Command-line front end: problem files in, certificates and condition reports out.

pub mod pipeline;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use whgvi_core::analysis::CheckOptions;
use whgvi_core::problem::{parse_problem, ProblemSpec};
use whgvi_core::solvers::{HomotopyParams, HomotopyTrace, SolverParams};

use report::{ProblemReport, Provenance, Report};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WHGVI_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "whgvi", version, about = "Solve and analyse weakly homogeneous generalized variational inequalities")]
pub struct Cli {
    /// What to print on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Directory for report files and CSV traces (default: $WHGVI_OUT_DIR; none if unset).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a solution by homotopy continuation, falling back to Newton.
    Solve {
        file: PathBuf,
        /// Anchor x̂ of the basic homotopy, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        anchor: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        /// Residual tolerance for Newton solves.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run every hypothesis check and report which theorem templates apply.
    Check {
        file: PathBuf,
        /// Size of the pool of feasible points for pairwise checks.
        #[arg(long)]
        samples: Option<usize>,
        /// Number of unit-sphere directions.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve, enumerate and check, then cross-validate the results.
    Certify {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Certify every problem file in a directory against its annotations.
    Corpus {
        dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

struct Settings {
    solver: SolverParams,
    homotopy: HomotopyParams,
    checks: CheckOptions,
}

fn settings(seed: Option<u64>) -> Settings {
    let mut solver = SolverParams::default();
    let mut checks = CheckOptions::default();
    if let Some(s) = seed {
        solver.seed = s;
        checks.seed = s;
    }
    Settings { solver, homotopy: HomotopyParams::default(), checks }
}

fn provenance(s: &Settings, with_checks: bool) -> Provenance {
    Provenance {
        tool: "whgvi".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        core_version: whgvi_core::VERSION.into(),
        seed: s.solver.seed,
        solver: s.solver.clone(),
        homotopy: s.homotopy.clone(),
        checks: with_checks.then(|| s.checks.clone()),
    }
}

fn load(path: &Path, err: &mut dyn Write) -> Option<ProblemSpec> {
    match parse_problem(path) {
        Ok(p) => Some(p),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            None
        }
    }
}

/// Problem files in `dir`, sorted by name.
pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs one command, writing the report to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let out_dir = cli.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    let (mut report, traces, stem, mut code) = match &cli.command {
        Command::Solve { file, anchor, seed, tol } => {
            let Some(spec) = load(file, err) else { return EXIT_PARSE };
            let mut s = settings(*seed);
            if let Some(t) = tol {
                s.solver.residual_tol = *t;
            }
            if let Err(e) = s.solver.validate() {
                let _ = writeln!(err, "error: {e}");
                return EXIT_PARSE;
            }
            if anchor.as_ref().is_some_and(|a| a.len() != spec.n) {
                let _ = writeln!(err, "error: --anchor needs {} entries", spec.n);
                return EXIT_PARSE;
            }
            let mut report = Report::new("solve", provenance(&s, false));
            let solved = match pipeline::solve(&spec, anchor.as_deref(), &s.solver, &s.homotopy) {
                Ok(v) => v,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_SOLVER;
                }
            };
            let code = if solved.solution.is_some() { EXIT_OK } else { EXIT_SOLVER };
            let (paths, traces): (Vec<_>, Vec<HomotopyTrace>) = solved.paths.into_iter().unzip();
            report.problems.push(ProblemReport {
                name: spec.name.clone(),
                example: spec.example_id().map(str::to_string),
                n: spec.n,
                solutions: solved.solution.into_iter().collect(),
                paths,
                efe: solved.efe,
                enumeration: None,
                conditions: None,
                mismatches: Vec::new(),
            });
            (report, traces, format!("{}.solve", spec.name), code)
        }
        Command::Check { file, samples, grid, seed } => {
            let Some(spec) = load(file, err) else { return EXIT_PARSE };
            let mut s = settings(*seed);
            if let Some(v) = samples {
                s.checks.samples = *v;
            }
            if let Some(v) = grid {
                s.checks.density = *v;
            }
            let known = spec.expected.as_ref().map(|e| e.solutions.clone()).unwrap_or_default();
            let conditions = match pipeline::check(&spec, &known, &s.checks) {
                Ok(c) => c,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_SOLVER;
                }
            };
            let mut report = Report::new("check", provenance(&s, true));
            report.problems.push(ProblemReport {
                name: spec.name.clone(),
                example: spec.example_id().map(str::to_string),
                n: spec.n,
                solutions: Vec::new(),
                paths: Vec::new(),
                efe: None,
                enumeration: None,
                conditions: Some(conditions),
                mismatches: Vec::new(),
            });
            (report, Vec::new(), format!("{}.check", spec.name), EXIT_OK)
        }
        Command::Certify { file, seed } => {
            let Some(spec) = load(file, err) else { return EXIT_PARSE };
            let s = settings(*seed);
            let mut report = Report::new("certify", provenance(&s, true));
            let (pr, traces) = match pipeline::certify(&spec, &s.solver, &s.homotopy, &s.checks) {
                Ok(v) => v,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_SOLVER;
                }
            };
            let found = !pr.solutions.is_empty() || pr.enumeration.as_ref().is_some_and(|e| !e.solutions.is_empty());
            let code = if !pr.mismatches.is_empty() {
                EXIT_MISMATCH
            } else if !found {
                EXIT_SOLVER
            } else {
                EXIT_OK
            };
            report.problems.push(pr);
            (report, traces, format!("{}.certify", spec.name), code)
        }
        Command::Corpus { dir, seed } => {
            let files = match corpus_files(dir) {
                Ok(f) => f,
                Err(e) => {
                    let _ = writeln!(err, "error: {}: {e}", dir.display());
                    return EXIT_PARSE;
                }
            };
            let mut specs = Vec::with_capacity(files.len());
            for f in &files {
                let Some(spec) = load(f, err) else { return EXIT_PARSE };
                specs.push(spec);
            }
            let s = settings(*seed);
            let mut report = Report::new("corpus", provenance(&s, true));
            let mut traces = Vec::new();
            for spec in &specs {
                match pipeline::certify(spec, &s.solver, &s.homotopy, &s.checks) {
                    Ok((pr, t)) => {
                        report.problems.push(pr);
                        traces.extend(t);
                    }
                    Err(e) => report.problems.push(ProblemReport {
                        name: spec.name.clone(),
                        example: spec.example_id().map(str::to_string),
                        n: spec.n,
                        solutions: Vec::new(),
                        paths: Vec::new(),
                        efe: None,
                        enumeration: None,
                        conditions: None,
                        mismatches: vec![format!("run failed: {e}")],
                    }),
                }
            }
            let code = if report.mismatch_count() > 0 { EXIT_MISMATCH } else { EXIT_OK };
            (report, traces, "corpus".to_string(), code)
        }
    };
    if let Some(dir) = out_dir {
        if let Err(e) = report::write_reports(&mut report, &traces, &dir, &stem) {
            let _ = writeln!(err, "error: writing reports to {}: {e}", dir.display());
            code = code.max(EXIT_IO);
        }
    }
    let text = match cli.format {
        Format::Text => report.to_text(),
        Format::Machine => report.to_machine(),
    };
    if out.write_all(text.as_bytes()).is_err() {
        return code.max(EXIT_IO);
    }
    code
}
