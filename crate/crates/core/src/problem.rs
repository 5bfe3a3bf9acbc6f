//! Problem instances and their JSON file form.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{preimage_points, Status};
use crate::error::{Error, Result};
use crate::maps::{verify_decomposition, WeaklyHomogeneousMap};
use crate::sets::ConvexSet;
use crate::solvers::GridBox;

/// `λ` at which declared decompositions are verified when a problem is built.
pub const VALIDATION_LAMBDA_MAX: f64 = 1e15;
pub const VALIDATION_SAMPLES: usize = 16;

/// Annotations a corpus problem is compared against.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    /// Worked example this instance reproduces, e.g. `"4.1"`.
    pub example: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solutions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_count: Option<usize>,
    /// Template id → whether its hypotheses should all survive the checks.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub theorems: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub verdicts: BTreeMap<String, Status>,
}

/// Optional parameters for the checkers and the enumerator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_box: Option<GridBox>,
    /// Vector for the η-copositivity check; a grid of η values is probed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    /// Anchor `x̂` for the basic homotopy and the local strong-monotonicity probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec<f64>>,
}

impl Probes {
    pub fn is_empty(&self) -> bool {
        self == &Probes::default()
    }
}

/// A validated instance of `GVI(f, g, K)` with `f : C → ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub n: usize,
    pub c: ConvexSet,
    pub k: ConvexSet,
    pub f: WeaklyHomogeneousMap,
    pub g: WeaklyHomogeneousMap,
    pub expected: Option<Expected>,
    pub probes: Probes,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    name: String,
    n: usize,
    c: ConvexSet,
    k: ConvexSet,
    f: WeaklyHomogeneousMap,
    g: WeaklyHomogeneousMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected: Option<Expected>,
    #[serde(default, skip_serializing_if = "Probes::is_empty")]
    probes: Probes,
}

impl ProblemSpec {
    /// Builds and validates an instance; `f` gets `C` as its domain.
    pub fn new(
        name: impl Into<String>,
        c: ConvexSet,
        k: ConvexSet,
        mut f: WeaklyHomogeneousMap,
        g: WeaklyHomogeneousMap,
        expected: Option<Expected>,
        probes: Probes,
    ) -> Result<Self> {
        f.domain = Some(c.clone());
        let spec = ProblemSpec { name: name.into(), n: f.n, c, k, f, g, expected, probes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::invalid("n", "dimension must be positive"));
        }
        self.c.validate_at("c")?;
        self.k.validate_at("k")?;
        for (field, d) in [("c", self.c.dim()), ("k", self.k.dim()), ("f.n", self.f.n), ("g.n", self.g.n)] {
            if d != n {
                return Err(Error::shape(field, format!("dimension {d} differs from n = {n}")));
            }
        }
        self.f.validate_at("f")?;
        self.g.validate_at("g")?;
        for (field, map) in [("f", &self.f), ("g", &self.g)] {
            let report = verify_decomposition(map, VALIDATION_SAMPLES, VALIDATION_LAMBDA_MAX);
            if !report.pass {
                return Err(Error::invalid(
                    format!("{field}.leading_terms"),
                    format!("declared leading part fails the limit test (terminal gap {:e})", report.terminal_gap),
                ));
            }
        }
        for p in self.k.sample_members(0xc0de, VALIDATION_SAMPLES, 10.0)? {
            if !self.c.contains(&p, 1e-9) {
                return Err(Error::invalid("k", format!("K is not contained in C (witness {p:?})")));
            }
        }
        let g = self.g.extend();
        for x in preimage_points(&g, &self.k, VALIDATION_SAMPLES, 10.0, 0x9e7)? {
            if !self.c.contains(&x, 1e-6) {
                return Err(Error::invalid("g", format!("g⁻¹(K) is not contained in C (witness {x:?})")));
            }
        }
        if let Some(b) = &self.probes.search_box {
            b.validate()?;
            if b.lo.len() != n {
                return Err(Error::shape("probes.search_box", "dimension differs from n"));
            }
        }
        for (field, v) in [("probes.eta", &self.probes.eta), ("probes.anchor", &self.probes.anchor)] {
            if v.as_ref().is_some_and(|v| v.len() != n) {
                return Err(Error::shape(field, format!("expected {n} entries")));
            }
        }
        Ok(())
    }

    pub fn example_id(&self) -> Option<&str> {
        self.expected.as_ref().map(|e| e.example.as_str())
    }

    /// Serialises to the problem file format; `f`'s domain is implied by `c`.
    pub fn to_json(&self) -> String {
        let mut f = self.f.clone();
        f.domain = None;
        let file = ProblemFile {
            name: self.name.clone(),
            n: self.n,
            c: self.c.clone(),
            k: self.k.clone(),
            f,
            g: self.g.clone(),
            expected: self.expected.clone(),
            probes: self.probes.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("problem serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.f.domain.is_some() {
            return Err(Error::invalid("f.domain", "the domain of f is given by c"));
        }
        ProblemSpec::new(file.name, file.c, file.k, file.f, file.g, file.expected, file.probes).and_then(|s| {
            if s.n != file.n {
                Err(Error::shape("n", format!("maps have dimension {}, file says {}", s.n, file.n)))
            } else {
                Ok(s)
            }
        })
    }
}

pub fn parse_problem(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    ProblemSpec::from_json(&text)
}
