//! Numeric checkers for the hypotheses of the existence and uniqueness
//! theorems, and the combinator that turns their verdicts into conclusions.
//!
//! Sampling can only refute a hypothesis, so sampled checks report
//! `falsified` or `unfalsified`. Only facts read off the structure of the
//! problem (degrees, cone geometry) may be `verified_structurally`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    add, damped_newton, dist, dot, levenberg_marquardt, norm, normalized, orthogonal_complement, rank, scale, sub,
    unit, LmOptions, NewtonOptions, Termination,
};
use crate::lp;
use crate::maps::{ExtendedMap, FnMapping, Mapping, Term, WeaklyHomogeneousMap};
use crate::problem::ProblemSpec;
use crate::sets::{dual_cone, Cone, ConvexSet, Interval};

/// Points closer than this are treated as the same point.
pub const DISTINCT_DIST: f64 = 1e-6;
/// Threshold on the three complementarity parts for a cone-problem witness.
pub const CCP_TOL: f64 = 1e-6;
/// Relative threshold on `|⟨f∞(x), g∞(x)⟩|` in the leading-pairing check.
pub const PAIRING_TOL: f64 = 1e-8;
/// Two images closer than this (relative) count as equal in the injectivity check.
pub const INJECTIVITY_TOL: f64 = 1e-8;

const MEMBER_TOL: f64 = 1e-9;
const PRODUCT_TOL: f64 = 1e-12;
const LINE_STEPS: [f64; 9] = [0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Falsified,
    Unfalsified,
    VerifiedStructurally,
}

/// Replayable evidence: the points involved and the values computed at them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Witness {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
}

impl Verdict {
    pub fn falsified(points: Vec<Vec<f64>>, values: Vec<f64>, samples: usize, notes: impl Into<String>) -> Self {
        Verdict { status: Status::Falsified, witness: Some(Witness { points, values }), samples, notes: notes.into() }
    }

    pub fn unfalsified(samples: usize, notes: impl Into<String>) -> Self {
        Verdict { status: Status::Unfalsified, witness: None, samples, notes: notes.into() }
    }

    pub fn structural(notes: impl Into<String>) -> Self {
        Verdict { status: Status::VerifiedStructurally, witness: None, samples: 0, notes: notes.into() }
    }

    /// True unless the hypothesis was refuted.
    pub fn holds(&self) -> bool {
        self.status != Status::Falsified
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremConclusion {
    pub id: String,
    pub applies: bool,
    pub conclusion: String,
    /// Hypotheses that were falsified.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub problem: String,
    pub verdicts: BTreeMap<String, Verdict>,
    pub theorem_conclusions: Vec<TheoremConclusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Size of the pool of points with `g(x) ∈ K` used by the pairwise checks.
    pub samples: usize,
    /// Number of unit-sphere directions.
    pub density: usize,
    /// Random starts in the targeted injectivity search.
    pub injectivity_samples: usize,
    pub seed: u64,
    /// Shift vector for the `+d` variants; chosen automatically when absent.
    #[serde(default)]
    pub d: Option<Vec<f64>>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { samples: 150, density: 64, injectivity_samples: 400, seed: 7, d: None }
    }
}

/// A theorem as a list of hypothesis names and the conclusion they support.
#[derive(Debug, Clone, Copy)]
pub struct Template {
    pub id: &'static str,
    pub hypotheses: &'static [&'static str],
    pub conclusion: &'static str,
}

const UNIQUE: &str = "numerically supported: unique solution";
const COMPACT: &str = "numerically supported: nonempty compact solution set";
const COMPACT_INDEX: &str = "numerically supported: nonempty compact solution set (index condition assumed)";
const SHIFT: &[&str] = &[
    "recession_pointed",
    "dual_interior_nonempty",
    "g_preimage_c",
    "g_tail_in_c",
    "cone_sol_zero_plain",
    "cone_sol_zero_plus_d_on_f",
    "dist_probe_leading",
];
const INJECTIVE: &[&str] = &[
    "recession_pointed",
    "dual_interior_nonempty",
    "g_preimage_c",
    "g_tail_in_c",
    "cone_sol_zero_plain",
    "cone_sol_zero_plus_d_on_f",
    "injectivity_g_leading",
];
const REGULAR: &[&str] = &[
    "dual_recession_pointed",
    "g_preimage_c",
    "g_sphere_in_c",
    "er_condition",
    "recession_interior_nonempty",
    "equ10_x_as_f_d",
    "equ10_x_as_f_zero",
];

pub const TEMPLATES: &[Template] = &[
    Template {
        id: "efe_strict_unique",
        hypotheses: &["strict_monotonicity", "leading_pairing", "degree_proxy"],
        conclusion: UNIQUE,
    },
    Template {
        id: "injective_strict_unique",
        hypotheses: &["strict_monotonicity", "leading_pairing", "injectivity_g", "surjectivity_onto_k"],
        conclusion: UNIQUE,
    },
    Template {
        id: "monotone_at_point_compact",
        hypotheses: &["monotone_at_theta", "leading_pairing"],
        conclusion: COMPACT,
    },
    Template {
        id: "karamardian_compact",
        hypotheses: &["cone_sol_zero_plain", "g_preimage_c", "g_tail_in_c"],
        conclusion: COMPACT_INDEX,
    },
    Template { id: "karamardian_shift_compact", hypotheses: SHIFT, conclusion: COMPACT_INDEX },
    Template {
        id: "karamardian_shift_unique",
        hypotheses: &[
            "recession_pointed",
            "dual_interior_nonempty",
            "g_preimage_c",
            "g_tail_in_c",
            "cone_sol_zero_plain",
            "cone_sol_zero_plus_d_on_f",
            "dist_probe_leading",
            "strict_monotonicity",
        ],
        conclusion: UNIQUE,
    },
    Template { id: "karamardian_injective_compact", hypotheses: INJECTIVE, conclusion: COMPACT },
    Template {
        id: "karamardian_injective_unique",
        hypotheses: &[
            "recession_pointed",
            "dual_interior_nonempty",
            "g_preimage_c",
            "g_tail_in_c",
            "cone_sol_zero_plain",
            "cone_sol_zero_plus_d_on_f",
            "injectivity_g_leading",
            "strict_monotonicity",
        ],
        conclusion: UNIQUE,
    },
    Template { id: "exceptional_regularity_compact", hypotheses: REGULAR, conclusion: COMPACT },
    Template {
        id: "exceptional_regularity_unique",
        hypotheses: &[
            "dual_recession_pointed",
            "g_preimage_c",
            "g_sphere_in_c",
            "er_condition",
            "recession_interior_nonempty",
            "equ10_x_as_f_d",
            "equ10_x_as_f_zero",
            "strict_monotonicity",
        ],
        conclusion: UNIQUE,
    },
];

pub fn template(id: &str) -> Option<&'static Template> {
    TEMPLATES.iter().find(|t| t.id == id)
}

// ---------------------------------------------------------------------------
// samplers

/// `{−1, 0, 1}ⁿ` ordered by support size, origin first. For `n > 3` only the
/// origin, `±eᵢ` and `±𝟙`.
pub fn lattice_probes(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]];
    if n > 3 {
        for i in 0..n {
            out.push(unit(n, i));
            out.push(scale(-1.0, &unit(n, i)));
        }
        out.push(vec![1.0; n]);
        out.push(vec![-1.0; n]);
        return out;
    }
    for support in 1..=n {
        for mask in 0..(1usize << n) {
            if mask.count_ones() as usize != support {
                continue;
            }
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            for signs in 0..(1usize << support) {
                let mut p = vec![0.0; n];
                for (k, &i) in idx.iter().enumerate() {
                    p[i] = if signs & (1 << k) == 0 { 1.0 } else { -1.0 };
                }
                out.push(p);
            }
        }
    }
    // lexicographic masks put e₁ after e₂ for n ≥ 2; order by first nonzero index instead
    out[1..].sort_by_key(|p| {
        let support = p.iter().filter(|v| **v != 0.0).count();
        let key: Vec<i8> = p.iter().map(|v| if *v == 0.0 { 2 } else if *v > 0.0 { 0 } else { 1 }).collect();
        (support, key)
    });
    out
}

/// Unit vectors: normalised lattice directions, then a uniform angular grid
/// for `n ≤ 3` or seeded Gaussian directions for larger `n`.
pub fn sphere_points(n: usize, density: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let push = |p: Vec<f64>, out: &mut Vec<Vec<f64>>| {
        if let Some(u) = normalized(&p) {
            if !out.iter().any(|q| dist(q, &u) < 1e-12) {
                out.push(u);
            }
        }
    };
    for p in lattice_probes(n).into_iter().skip(1) {
        push(p, &mut out);
    }
    match n {
        1 => {}
        2 => {
            for i in 0..density {
                let a = 2.0 * std::f64::consts::PI * i as f64 / density as f64;
                push(vec![a.cos(), a.sin()], &mut out);
            }
        }
        3 => {
            let m = ((density as f64 / 2.0).sqrt().ceil() as usize).max(2);
            for i in 0..=m {
                let theta = std::f64::consts::PI * i as f64 / m as f64;
                for j in 0..2 * m {
                    let phi = std::f64::consts::PI * j as f64 / m as f64;
                    push(vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()], &mut out);
                }
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..density {
                push((0..n).map(|_| gaussian(&mut rng)).collect(), &mut out);
            }
        }
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Solves `g(x) = y` from each start in turn; `None` when every start fails.
pub fn solve_preimage(g: &dyn Mapping, y: &[f64], starts: &[Vec<f64>]) -> Option<Vec<f64>> {
    let tol = 1e-10 * (1.0 + norm(y));
    let opts = NewtonOptions { residual_tol: tol, max_iter: 100, ..NewtonOptions::default() };
    let fun = |x: &[f64]| sub(&g.apply(x), y);
    for s in starts {
        let out = damped_newton(&fun, s, &opts);
        if out.termination == Termination::Converged && out.residual <= tol {
            return Some(out.x);
        }
    }
    None
}

fn preimage_starts(y: &[f64], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = y.len();
    let mut starts = vec![vec![0.0; n], y.to_vec()];
    for _ in 0..2 {
        starts.push((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect());
    }
    starts
}

/// Points `x` with `g(x) ∈ K`, found by solving `g(x) = y` for sampled `y ∈ K`.
pub fn preimage_points(g: &dyn Mapping, k: &ConvexSet, count: usize, radius: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for batch in 0..8u64 {
        if out.len() >= count {
            break;
        }
        for y in k.sample_members(seed.wrapping_add(batch), count.max(1), radius)? {
            if out.len() >= count {
                break;
            }
            let starts = preimage_starts(&y, &mut rng);
            if let Some(x) = solve_preimage(g, &y, &starts) {
                if k.contains(&g.apply(&x), MEMBER_TOL) && !out.iter().any(|p| dist(p, &x) <= DISTINCT_DIST) {
                    out.push(x);
                }
            }
        }
    }
    Ok(out)
}

/// Pool for the pairwise checks: `seeds`, then feasible lattice probes, then
/// preimage samples, deduplicated and truncated to `count`.
pub fn feasible_pool(
    g: &dyn Mapping,
    k: &ConvexSet,
    seeds: &[Vec<f64>],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = g.dim();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let candidates = seeds.iter().cloned().chain(lattice_probes(n));
    for x in candidates {
        if k.contains(&g.apply(&x), MEMBER_TOL) && !out.iter().any(|p| dist(p, &x) <= DISTINCT_DIST) {
            out.push(x);
        }
    }
    let need = count.saturating_sub(out.len());
    for x in preimage_points(g, k, need, 10.0, seed)? {
        if !out.iter().any(|p| dist(p, &x) <= DISTINCT_DIST) {
            out.push(x);
        }
    }
    out.truncate(count);
    Ok(out)
}

fn product_tol(fx: &[f64], fy: &[f64], gx: &[f64], gy: &[f64]) -> f64 {
    PRODUCT_TOL * (1.0 + norm(fx) + norm(fy)) * (1.0 + norm(gx) + norm(gy))
}

fn fmt_vec(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

// ---------------------------------------------------------------------------
// monotonicity

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum MonotonicityMode {
    Monotone,
    Strict,
    /// Probes `c_probe·10⁻ᵏ` for `k = 0..=6`.
    Strong { c_probe: f64 },
}

/// Pairwise test of `⟨f(x) − f(y), g(x) − g(y)⟩` over a pool with `g(x) ∈ K`.
pub fn check_monotonicity(
    f: &dyn Mapping,
    g: &dyn Mapping,
    pool: &[Vec<f64>],
    mode: MonotonicityMode,
) -> Result<Verdict> {
    if pool.len() < 2 {
        return Err(Error::SamplerExhausted(format!("{} feasible points, need at least 2", pool.len())));
    }
    let fs: Vec<Vec<f64>> = pool.iter().map(|x| f.apply_variable(x)).collect();
    let gs: Vec<Vec<f64>> = pool.iter().map(|x| g.apply_variable(x)).collect();
    let mut pairs = 0;
    let mut worst: Option<(f64, usize, usize)> = None;
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let d = dist(&pool[i], &pool[j]);
            if d <= DISTINCT_DIST {
                continue;
            }
            pairs += 1;
            let prod = dot(&sub(&fs[i], &fs[j]), &sub(&gs[i], &gs[j]));
            let tol = product_tol(&fs[i], &fs[j], &gs[i], &gs[j]);
            match mode {
                MonotonicityMode::Monotone if prod < -tol => {
                    return Ok(Verdict::falsified(
                        vec![pool[i].clone(), pool[j].clone()],
                        vec![prod],
                        pairs,
                        "negative pairing",
                    ));
                }
                MonotonicityMode::Strict if prod <= tol => {
                    return Ok(Verdict::falsified(
                        vec![pool[i].clone(), pool[j].clone()],
                        vec![prod],
                        pairs,
                        "pairing not positive for distinct points",
                    ));
                }
                MonotonicityMode::Strong { .. } => {
                    let ratio = prod / (d * d);
                    if worst.is_none_or(|w| ratio < w.0) {
                        worst = Some((ratio, i, j));
                    }
                }
                _ => {}
            }
        }
    }
    if pairs == 0 {
        return Err(Error::SamplerExhausted("no distinct feasible pairs".into()));
    }
    if let (MonotonicityMode::Strong { c_probe }, Some((ratio, i, j))) = (mode, worst) {
        let grid: Vec<f64> = (0..=6).map(|k| c_probe * 10f64.powi(-k)).collect();
        let smallest = grid[grid.len() - 1];
        if ratio < smallest * (1.0 - 1e-9) {
            return Ok(Verdict::falsified(
                vec![pool[i].clone(), pool[j].clone()],
                vec![ratio],
                pairs,
                format!("ratio {ratio:e} below every probed constant down to {smallest:e}"),
            ));
        }
        let best = grid.iter().find(|c| ratio >= **c * (1.0 - 1e-9)).copied().unwrap_or(smallest);
        return Ok(Verdict::unfalsified(pairs, format!("largest probed constant satisfied: {best:e}")));
    }
    Ok(Verdict::unfalsified(pairs, ""))
}

/// Scaling test: for `δ₁ + δ₂ < 2` the ratio along a feasible ray decays.
pub fn falsify_strong_by_scaling(f: &ExtendedMap, g: &ExtendedMap, k: &ConvexSet, density: usize) -> Result<Verdict> {
    let (d1, d2) = (f.delta(), g.delta());
    if d1 + d2 >= 2.0 {
        return Ok(Verdict::unfalsified(0, format!("not applicable: δ₁ + δ₂ = {} ≥ 2", d1 + d2)));
    }
    let n = g.dim();
    let lambdas = [1e2, 1e4, 1e6];
    let mut tried = 0;
    for u in sphere_points(n, density, 11) {
        tried += 1;
        if !lambdas.iter().chain(&[1.0]).all(|l| k.contains(&g.apply(&scale(*l, &u)), MEMBER_TOL)) {
            continue;
        }
        let zero = vec![0.0; n];
        let y = if k.contains(&g.apply(&zero), MEMBER_TOL) { zero } else { u.clone() };
        let ratios: Vec<f64> = lambdas
            .iter()
            .map(|l| {
                let x = scale(*l, &u);
                let prod = dot(&sub(&f.apply_variable(&x), &f.apply_variable(&y)), &sub(&g.apply_variable(&x), &g.apply_variable(&y)));
                prod / dist(&x, &y).powi(2)
            })
            .collect();
        if ratios[0] > 0.0 && ratios[2] < 1e-3 * ratios[0] {
            return Ok(Verdict::falsified(
                vec![u, y],
                ratios,
                tried,
                "ratio along the ray λ·u (u = first point, y = second) at λ = 1e2, 1e4, 1e6",
            ));
        }
        return Ok(Verdict::unfalsified(tried, format!("ratios along {} do not decay: {ratios:?}", fmt_vec(&u))));
    }
    Ok(Verdict::unfalsified(tried, "no feasible ray found"))
}

/// Local test at `x̂`: the ratio `⟨Δf, Δg⟩/‖x − x̂‖²` along feasible directions
/// as `‖x − x̂‖` runs over `10⁻¹ … 10⁻⁶`.
pub fn falsify_strong_local(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    xhat: &[f64],
    density: usize,
) -> Result<Verdict> {
    let ghat = g.apply(xhat);
    let dk = k.distance(&ghat)?;
    if dk > MEMBER_TOL * (1.0 + norm(&ghat)) {
        return Err(Error::NotInK { distance: dk });
    }
    let steps: Vec<f64> = (1..=6).map(|e| 10f64.powi(-e)).collect();
    let fh = f.apply_variable(xhat);
    let gh = g.apply_variable(xhat);
    let mut fallback: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut feasible = 0;
    for u in sphere_points(xhat.len(), density, 13) {
        let pts: Vec<Vec<f64>> = steps.iter().map(|s| add(xhat, &scale(*s, &u))).collect();
        if !pts.iter().all(|x| k.contains(&g.apply(x), MEMBER_TOL)) {
            continue;
        }
        feasible += 1;
        let ratios: Vec<f64> = pts
            .iter()
            .zip(&steps)
            .map(|(x, s)| dot(&sub(&f.apply_variable(x), &fh), &sub(&g.apply_variable(x), &gh)) / (s * s))
            .collect();
        let decaying = ratios[0] > 0.0
            && ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
            && ratios[ratios.len() - 1] <= 1e-3 * ratios[0];
        if decaying {
            return Ok(Verdict::falsified(
                vec![xhat.to_vec(), u],
                ratios,
                feasible,
                "ratio along x̂ + s·u for s = 1e-1 … 1e-6 decays to zero",
            ));
        }
        if fallback.is_none() && ratios.iter().any(|r| *r <= 0.0) {
            fallback = Some((u, ratios));
        }
    }
    if let Some((u, ratios)) = fallback {
        return Ok(Verdict::falsified(
            vec![xhat.to_vec(), u],
            ratios,
            feasible,
            "nonpositive ratio along x̂ + s·u for s = 1e-1 … 1e-6",
        ));
    }
    if feasible == 0 {
        return Ok(Verdict::unfalsified(0, "no feasible direction at x̂"));
    }
    Ok(Verdict::unfalsified(feasible, ""))
}

/// Structural test on the smallest positive per-term degrees.
pub fn check_degree_gap(f: &WeaklyHomogeneousMap, g: &WeaklyHomogeneousMap, k: &ConvexSet) -> Result<Verdict> {
    let (df, f_all) = f.homogeneous_degrees();
    let (dg, g_all) = g.homogeneous_degrees();
    if !(f_all && g_all) {
        return Ok(Verdict::unfalsified(0, "not applicable: a positive-degree term is not homogeneous"));
    }
    let (Some(gamma), Some(beta)) = (df.first(), dg.first()) else {
        return Ok(Verdict::unfalsified(0, "not applicable: no positive-degree term"));
    };
    let g0 = g.extend().eval(&vec![0.0; g.n]);
    if !k.contains(&g0, MEMBER_TOL) {
        return Ok(Verdict::unfalsified(0, "not applicable: g(0) is not in K"));
    }
    if gamma + beta > 2.0 {
        Ok(Verdict::structural(format!("γ₁ + β₁ = {gamma} + {beta} > 2: not strongly monotone")))
    } else {
        Ok(Verdict::unfalsified(0, format!("γ₁ + β₁ = {gamma} + {beta} ≤ 2")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PMode {
    StrictP,
    Uniform { rho: f64 },
}

fn is_orthant(k: &ConvexSet) -> bool {
    match k {
        ConvexSet::Product { bounds } => bounds.iter().all(|b| *b == Interval::at_least(0.0)),
        _ => false,
    }
}

/// `max_i [fᵢ(x) − fᵢ(y)][gᵢ(x) − gᵢ(y)]` over pool pairs; `K` must be the orthant.
pub fn check_p_property(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    pool: &[Vec<f64>],
    mode: PMode,
) -> Result<Verdict> {
    if !is_orthant(k) {
        return Err(Error::UnsupportedSet("the P-property check needs K = ℝⁿ₊".into()));
    }
    if pool.len() < 2 {
        return Err(Error::SamplerExhausted(format!("{} feasible points, need at least 2", pool.len())));
    }
    let fs: Vec<Vec<f64>> = pool.iter().map(|x| f.apply_variable(x)).collect();
    let gs: Vec<Vec<f64>> = pool.iter().map(|x| g.apply_variable(x)).collect();
    let mut pairs = 0;
    let mut worst: Option<(f64, usize, usize)> = None;
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let d = dist(&pool[i], &pool[j]);
            if d <= DISTINCT_DIST {
                continue;
            }
            pairs += 1;
            let m = sub(&fs[i], &fs[j])
                .iter()
                .zip(&sub(&gs[i], &gs[j]))
                .map(|(a, b)| a * b)
                .fold(f64::NEG_INFINITY, f64::max);
            match mode {
                PMode::StrictP => {
                    if m <= product_tol(&fs[i], &fs[j], &gs[i], &gs[j]) {
                        return Ok(Verdict::falsified(
                            vec![pool[i].clone(), pool[j].clone()],
                            vec![m],
                            pairs,
                            "largest componentwise product not positive",
                        ));
                    }
                }
                PMode::Uniform { .. } => {
                    let ratio = m / (d * d);
                    if worst.is_none_or(|w| ratio < w.0) {
                        worst = Some((ratio, i, j));
                    }
                }
            }
        }
    }
    if pairs == 0 {
        return Err(Error::SamplerExhausted("no distinct feasible pairs".into()));
    }
    if let (PMode::Uniform { rho }, Some((ratio, i, j))) = (mode, worst) {
        let smallest = rho * 1e-6;
        if ratio < smallest * (1.0 - 1e-9) {
            return Ok(Verdict::falsified(
                vec![pool[i].clone(), pool[j].clone()],
                vec![ratio],
                pairs,
                format!("ratio {ratio:e} below every probed constant down to {smallest:e}"),
            ));
        }
    }
    Ok(Verdict::unfalsified(pairs, ""))
}

/// Ratio `‖g(x) − g(z)‖/‖x − z‖` over preimages of far points of `K`.
pub fn check_growth_bound(g: &dyn Mapping, k: &ConvexSet, z: &[f64], alpha: f64, seed: u64) -> Result<Verdict> {
    let gz = g.apply(z);
    let dk = k.distance(&gz)?;
    if dk > MEMBER_TOL * (1.0 + norm(&gz)) {
        return Err(Error::NotInK { distance: dk });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev: Option<Vec<f64>> = None;
    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut attempts = 0;
    for j in 1..=12 {
        let r = 10f64.powi(j);
        let targets = k.sample_members(seed.wrapping_add(j as u64), 6, r)?;
        let mut best: Option<Vec<f64>> = None;
        for y in targets.iter().filter(|y| norm(y) >= 0.3 * r) {
            attempts += 1;
            let mut starts = preimage_starts(y, &mut rng);
            if let Some(p) = &prev {
                starts.insert(0, p.clone());
            }
            if let Some(x) = solve_preimage(g, y, &starts) {
                if norm(&x) >= alpha && k.contains(&g.apply(&x), MEMBER_TOL) && best.as_ref().is_none_or(|b| norm(&x) > norm(b)) {
                    best = Some(x);
                }
            }
        }
        if let Some(x) = best {
            prev = Some(x.clone());
            if xs.last().is_none_or(|l| norm(&x) > norm(l) * (1.0 + 1e-6)) {
                xs.push(x);
            }
        }
    }
    if xs.len() < 2 {
        return Ok(Verdict::unfalsified(attempts, "preimage of K bounded or unreachable beyond alpha"));
    }
    let ratios: Vec<f64> = xs.iter().map(|x| dist(&g.apply(x), &gz) / dist(x, z)).collect();
    if ratios[ratios.len() - 1] > 1e3 * ratios[0] {
        let mut points = vec![z.to_vec()];
        points.extend(xs);
        return Ok(Verdict::falsified(points, ratios, attempts, "growth ratio at preimages of increasing norm (z first)"));
    }
    Ok(Verdict::unfalsified(attempts, format!("largest ratio {:e}", ratios.iter().cloned().fold(0.0, f64::max))))
}

// ---------------------------------------------------------------------------
// leading-part conditions

/// Unit vectors `x` with `g∞(x) ∈ K∞`: sphere samples plus normalised
/// preimages of sampled `K∞` points.
fn recession_directions(gh: &dyn Mapping, kinf: &Cone, density: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = gh.dim();
    let mut cands = sphere_points(n, density, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
    for y in kinf.sample_members(seed, 24, 1.0)? {
        if norm(&y) < 1e-6 {
            continue;
        }
        let starts = preimage_starts(&y, &mut rng);
        if let Some(x) = solve_preimage(gh, &y, &starts) {
            if let Some(u) = normalized(&x) {
                cands.push(u);
            }
        }
    }
    Ok(cands
        .into_iter()
        .filter(|x| {
            let v = gh.apply(x);
            kinf.contains(&v, 1e-8)
        })
        .collect())
}

/// `⟨f∞(x), g∞(x)⟩ ≠ 0` on the unit sphere where `g∞(x) ∈ K∞`.
pub fn check_leading_pairing(f: &ExtendedMap, g: &ExtendedMap, k: &ConvexSet, density: usize, seed: u64) -> Result<Verdict> {
    let kinf = k.recession_cone()?;
    let fh = f.leading();
    let gh = g.leading();
    let dirs = recession_directions(&gh, &kinf, density, seed)?;
    if dirs.is_empty() {
        return Ok(Verdict::unfalsified(0, "vacuous: no sampled unit vector has g∞(x) in K∞"));
    }
    let mut min_pair = f64::INFINITY;
    for x in &dirs {
        let fx = fh.apply(x);
        let gx = gh.apply(x);
        let p = dot(&fx, &gx);
        if p.abs() <= PAIRING_TOL * norm(&fx) * norm(&gx) {
            return Ok(Verdict::falsified(vec![x.clone()], vec![p], dirs.len(), "pairing vanishes on B ∩ R"));
        }
        min_pair = min_pair.min(p.abs());
    }
    Ok(Verdict::unfalsified(dirs.len(), format!("min |pairing| on B ∩ R: {min_pair:e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeVariant {
    /// `SOL(f∞, g∞, K∞)`
    Plain,
    /// `SOL(f∞ + d, g∞, K∞)`
    PlusDOnF,
    /// `SOL(f∞, g∞ + d, K∞)`
    PlusDOnG,
    /// `SOL(x, g∞ + d, K∞)`
    XAsF,
}

fn ccp_small(fx: &[f64], gx: &[f64], kinf: &Cone) -> Result<Option<[f64; 3]>> {
    let dp = kinf.distance(gx)?;
    let dd = kinf.dual_distance(fx)?;
    let pr = dot(fx, gx).abs();
    let ok = dp <= CCP_TOL * (1.0 + norm(gx))
        && dd <= CCP_TOL * (1.0 + norm(fx))
        && pr <= CCP_TOL * (1.0 + norm(fx) * norm(gx));
    Ok(ok.then_some([dp, dd, pr]))
}

/// Searches for a nonzero solution of the cone complementarity problem built
/// from the leading maps according to `variant`.
pub fn check_cone_sol_zero(
    fh: &dyn Mapping,
    gh: &dyn Mapping,
    kinf: &Cone,
    variant: ConeVariant,
    d: &[f64],
    density: usize,
    seed: u64,
) -> Result<Verdict> {
    let n = gh.dim();
    let big_f = |x: &[f64]| -> Vec<f64> {
        match variant {
            ConeVariant::PlusDOnF => add(&fh.apply(x), d),
            ConeVariant::XAsF => x.to_vec(),
            _ => fh.apply(x),
        }
    };
    let big_g = |x: &[f64]| -> Vec<f64> {
        match variant {
            ConeVariant::PlusDOnG | ConeVariant::XAsF => add(&gh.apply(x), d),
            _ => gh.apply(x),
        }
    };
    let natural = |x: &[f64]| -> Vec<f64> {
        let fx = big_f(x);
        let gx = big_g(x);
        let p = kinf.project(&sub(&gx, &fx)).unwrap_or_else(|_| vec![f64::NAN; gx.len()]);
        sub(&gx, &p)
    };
    let merit = |x: &[f64]| -> f64 {
        let fx = big_f(x);
        let gx = big_g(x);
        norm(&natural(x)) / (1.0 + norm(&fx) + norm(&gx))
    };
    let sphere = sphere_points(n, density, seed);
    let starts: Vec<Vec<f64>> = if variant == ConeVariant::Plain {
        sphere
    } else {
        let radii = [1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];
        sphere.iter().flat_map(|u| radii.iter().map(move |r| scale(*r, u))).collect()
    };
    let mut ranked: Vec<(f64, &Vec<f64>)> = starts.iter().map(|x| (merit(x), x)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lm = LmOptions { residual_tol: 1e-14, step_tol: 1e-15, max_iter: 100, fd_step: 1e-7 };
    for (_, x0) in ranked.iter().take(16) {
        let x = if variant == ConeVariant::Plain {
            let sys = |x: &[f64]| {
                let mut r = natural(x);
                r.push(dot(x, x) - 1.0);
                r
            };
            let out = levenberg_marquardt(&sys, x0, &lm);
            match normalized(&out.x) {
                Some(u) => u,
                None => continue,
            }
        } else {
            levenberg_marquardt(&natural, x0, &lm).x
        };
        if norm(&x) < 1e-3 {
            continue;
        }
        if let Some(parts) = ccp_small(&big_f(&x), &big_g(&x), kinf)? {
            return Ok(Verdict::falsified(
                vec![x],
                parts.to_vec(),
                starts.len(),
                "nonzero solution; values are dist(G, K∞), dist(F, (K∞)*), |⟨F, G⟩|",
            ));
        }
    }
    Ok(Verdict::unfalsified(starts.len(), ""))
}

/// Searches `(x, t)` on the unit sphere times `ℝ₊` for a violation of
/// exceptional regularity.
pub fn check_er_condition(fh: &dyn Mapping, gh: &dyn Mapping, kinf: &Cone, density: usize, seed: u64) -> Result<Verdict> {
    let dirs = recession_directions(gh, kinf, density, seed)?;
    let t_grid: Vec<f64> = std::iter::once(0.0).chain((-3..=3).map(|e| 10f64.powi(e))).collect();
    let lm = LmOptions { residual_tol: 1e-14, step_tol: 1e-15, max_iter: 100, fd_step: 1e-7 };
    for x in &dirs {
        let fx = fh.apply(x);
        let gx = gh.apply(x);
        let den = dot(x, &gx);
        let ts: Vec<f64> = if den.abs() > 1e-12 { vec![-dot(&fx, &gx) / den] } else { t_grid.clone() };
        for t in ts.into_iter().filter(|t| *t >= 0.0) {
            let u = add(&fx, &scale(t, x));
            if kinf.dual_distance(&u)? > 1e-2 * (1.0 + norm(&u)) {
                continue;
            }
            // polish (x, t) jointly, keeping ‖x‖ = 1
            let sys = |z: &[f64]| {
                let (xv, tv) = z.split_at(z.len() - 1);
                let g = gh.apply(xv);
                let u = add(&fh.apply(xv), &scale(tv[0], xv));
                let nan = || vec![f64::NAN; g.len()];
                let mut r = sub(&g, &kinf.project(&g).unwrap_or_else(|_| nan()));
                r.extend(sub(&u, &kinf.project_dual(&u).unwrap_or_else(|_| nan())));
                r.push(dot(&u, &g));
                r.push(dot(xv, xv) - 1.0);
                r
            };
            let mut z0 = x.clone();
            z0.push(t);
            let out = levenberg_marquardt(&sys, &z0, &lm);
            let (xv, tv) = out.x.split_at(out.x.len() - 1);
            let Some(xu) = normalized(xv) else { continue };
            let tt = tv[0].max(0.0);
            let fu = add(&fh.apply(&xu), &scale(tt, &xu));
            if let Some(parts) = ccp_small(&fu, &gh.apply(&xu), kinf)? {
                let mut vals = vec![tt];
                vals.extend(parts);
                return Ok(Verdict::falsified(
                    vec![xu],
                    vals,
                    dirs.len(),
                    "values are t, dist(g∞(x), K∞), dist(f∞(x) + t·x, (K∞)*), |pairing|",
                ));
            }
        }
    }
    if dirs.is_empty() {
        return Ok(Verdict::unfalsified(0, "vacuous: no sampled unit vector has g∞(x) in K∞"));
    }
    Ok(Verdict::unfalsified(dirs.len(), "t searched on [0, 1e3] where ⟨x, g∞(x)⟩ = 0"))
}

// ---------------------------------------------------------------------------
// copositivity

/// Feasible points along coordinate lines through `theta`.
fn line_probes(g: &dyn Mapping, k: &ConvexSet, theta: &[f64]) -> Vec<Vec<f64>> {
    let n = theta.len();
    let mut out = Vec::new();
    for i in 0..n {
        for s in LINE_STEPS.iter().flat_map(|s| [*s, -*s]) {
            let x = add(theta, &scale(s, &unit(n, i)));
            if k.contains(&g.apply(&x), MEMBER_TOL) {
                out.push(x);
            }
        }
    }
    out
}

/// `⟨f(x) − f(θ), g(x) − g(θ)⟩ ≥ 0` for sampled `x` with `g(x) ∈ K`.
pub fn check_copositivity_at_theta(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    theta: &[f64],
    pool: &[Vec<f64>],
) -> Result<Verdict> {
    let gt = g.apply(theta);
    let dk = k.distance(&gt)?;
    if dk > MEMBER_TOL * (1.0 + norm(&gt)) {
        return Err(Error::NotInK { distance: dk });
    }
    let ft = f.apply_variable(theta);
    let gtv = g.apply_variable(theta);
    let mut probes = pool.to_vec();
    probes.extend(line_probes(g, k, theta));
    for (idx, x) in probes.iter().enumerate() {
        let fx = f.apply_variable(x);
        let gx = g.apply_variable(x);
        let prod = dot(&sub(&fx, &ft), &sub(&gx, &gtv));
        if prod < -product_tol(&fx, &ft, &gx, &gtv) {
            return Ok(Verdict::falsified(vec![theta.to_vec(), x.clone()], vec![prod], idx + 1, "negative pairing against θ"));
        }
    }
    Ok(Verdict::unfalsified(probes.len(), format!("θ = {}", fmt_vec(theta))))
}

/// Monotonicity at some `θ`: tries each candidate until one survives.
pub fn check_monotone_at_some_theta(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    thetas: &[Vec<f64>],
    pool: &[Vec<f64>],
) -> Result<Verdict> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut samples = 0;
    for theta in thetas {
        let v = match check_copositivity_at_theta(f, g, k, theta, pool) {
            Err(Error::NotInK { .. }) => continue,
            other => other?,
        };
        samples += v.samples;
        match v.witness {
            Some(w) if v.status == Status::Falsified => {
                points.extend(w.points);
                values.extend(w.values);
            }
            _ => return Ok(Verdict::unfalsified(samples, v.notes)),
        }
    }
    if points.is_empty() {
        return Ok(Verdict::unfalsified(0, "no candidate θ with g(θ) in K"));
    }
    Ok(Verdict::falsified(points, values, samples, "every candidate θ fails; points are (θ, x) pairs"))
}

/// η-copositivity `⟨f̃(x) − η, x⟩ ≥ 0` on `K`, for the case `g = id`.
pub fn check_eta_copositivity(f: &ExtendedMap, k: &ConvexSet, eta: &[f64], points: &[Vec<f64>]) -> Result<Verdict> {
    for (idx, x) in points.iter().enumerate() {
        if !k.contains(x, MEMBER_TOL) {
            let d = k.distance(x)?;
            return Err(Error::NotInK { distance: d });
        }
        let v = dot(&sub(&f.eval_tilde(x), eta), x);
        let tol = PRODUCT_TOL * (1.0 + norm(&f.eval_tilde(x)) + norm(eta)) * (1.0 + norm(x));
        if v < -tol {
            return Ok(Verdict::falsified(vec![eta.to_vec(), x.clone()], vec![v], idx + 1, "negative ⟨f̃(x) − η, x⟩ (η first)"));
        }
    }
    Ok(Verdict::unfalsified(points.len(), format!("η = {}", fmt_vec(eta))))
}

/// η-copositivity over a grid of `η`, falsified only when every `η` fails.
pub fn check_eta_grid(f: &ExtendedMap, k: &ConvexSet, etas: &[Vec<f64>], points: &[Vec<f64>]) -> Result<Verdict> {
    let mut wp = Vec::new();
    let mut wv = Vec::new();
    let mut samples = 0;
    for eta in etas {
        let v = check_eta_copositivity(f, k, eta, points)?;
        samples += v.samples;
        match v.witness {
            Some(w) if v.status == Status::Falsified => {
                wp.extend(w.points);
                wv.extend(w.values);
            }
            _ => return Ok(Verdict::unfalsified(samples, v.notes)),
        }
    }
    Ok(Verdict::falsified(wp, wv, samples, format!("all {} probed η fail; points are (η, x) pairs", etas.len())))
}

/// Grid `[−2, 2]ⁿ` with 10 values per axis (capped at 100 vectors).
pub fn eta_grid(n: usize) -> Vec<Vec<f64>> {
    let vals: Vec<f64> = (0..10).map(|i| -2.0 + 4.0 * i as f64 / 9.0).collect();
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| vals.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
        if out.len() > 100 {
            out.truncate(100);
        }
    }
    out
}

/// Points of `K` for the η test: samples at two scales plus lattice probes.
pub fn eta_points(k: &ConvexSet, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = k.dim();
    let mut pts = k.sample_members(seed, count, 2.0)?;
    pts.extend(k.sample_members(seed ^ 1, count / 2, 0.1)?);
    for p in lattice_probes(n) {
        for s in [1.0, 0.1, 0.01] {
            let x = scale(s, &p);
            if k.contains(&x, MEMBER_TOL) {
                pts.push(x);
            }
        }
    }
    Ok(pts)
}

// ---------------------------------------------------------------------------
// injectivity, surjectivity and inclusions

/// Looks for `x ≠ y` with `g(x) = g(y)` among lattice probes and by solving
/// `g(y) = g(x)` from random starts in `[−radius, radius]ⁿ`.
pub fn check_injectivity(g: &dyn Mapping, radius: f64, samples: usize, seed: u64) -> Verdict {
    let n = g.dim();
    let coincide = |x: &[f64], y: &[f64]| -> Option<f64> {
        let gx = g.apply(x);
        let gap = dist(&gx, &g.apply(y));
        (dist(x, y) > DISTINCT_DIST && gap <= INJECTIVITY_TOL * (1.0 + norm(&gx))).then_some(gap)
    };
    let mut points = Vec::new();
    let mut values = Vec::new();
    let lattice: Vec<Vec<f64>> =
        lattice_probes(n).into_iter().map(|p| scale(radius.min(1.0), &p)).collect();
    for i in 0..lattice.len() {
        for j in i + 1..lattice.len() {
            if let Some(gap) = coincide(&lattice[i], &lattice[j]) {
                points.push(lattice[i].clone());
                points.push(lattice[j].clone());
                values.push(gap);
            }
        }
    }
    let mut tried = lattice.len() * (lattice.len() - 1) / 2;
    if points.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            tried += 1;
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
            let y0: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
            let target = g.apply(&x);
            if let Some(y) = solve_preimage(g, &target, &[y0]) {
                if let Some(gap) = coincide(&x, &y) {
                    points.push(x);
                    points.push(y);
                    values.push(gap);
                    break;
                }
            }
        }
    }
    if points.is_empty() {
        Verdict::unfalsified(tried, "")
    } else {
        Verdict::falsified(points, values, tried, "pairs (x, y) with g(x) = g(y); values are ‖g(x) − g(y)‖")
    }
}

/// Solves `g(x) = y` for sampled `y ∈ K`; falsified at the first target that fails.
pub fn check_surjectivity_onto_k(g: &dyn Mapping, k: &ConvexSet, count: usize, seed: u64) -> Result<Verdict> {
    let n = g.dim();
    let mut targets = k.sample_members(seed, count, 10.0)?;
    for p in lattice_probes(n) {
        targets.push(k.project(&scale(3.0, &p))?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (idx, y) in targets.iter().enumerate() {
        let starts = preimage_starts(y, &mut rng);
        if solve_preimage(g, y, &starts).is_none() {
            let r = starts.iter().map(|s| dist(&g.apply(s), y)).fold(f64::INFINITY, f64::min);
            return Ok(Verdict::falsified(vec![y.clone()], vec![r], idx + 1, "no preimage found for this y ∈ K"));
        }
    }
    Ok(Verdict::unfalsified(targets.len(), ""))
}

/// `g⁻¹(C) ⊆ C`: preimages of sampled points of `C` must lie in `C`.
pub fn check_g_preimage_c(g: &dyn Mapping, c: &ConvexSet, count: usize, seed: u64) -> Result<Verdict> {
    if c.inequalities().a.is_empty() {
        return Ok(Verdict::structural("C is the whole space"));
    }
    let n = g.dim();
    let mut pts = preimage_points(g, c, count, 10.0, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..=3.0)).collect();
        if c.contains(&g.apply(&x), MEMBER_TOL) {
            pts.push(x);
        }
    }
    pts.extend(lattice_probes(n).into_iter().filter(|x| c.contains(&g.apply(x), MEMBER_TOL)));
    for x in &pts {
        let d = c.distance(x)?;
        if d > 1e-6 * (1.0 + norm(x)) {
            return Ok(Verdict::falsified(vec![x.clone()], vec![d], pts.len(), "g(x) ∈ C but x ∉ C; value is dist(x, C)"));
        }
    }
    Ok(Verdict::unfalsified(pts.len(), ""))
}

fn lower_plus_constant(g: &ExtendedMap, x: &[f64]) -> Vec<f64> {
    add(&g.eval_lower(x), &g.map().constant)
}

fn check_gbar_in_c(g: &ExtendedMap, c: &ConvexSet, radii: &[f64], density: usize, what: &str) -> Result<Verdict> {
    if c.inequalities().a.is_empty() {
        return Ok(Verdict::structural("C is the whole space"));
    }
    let dirs = sphere_points(g.dim(), density, 17);
    let mut count = 0;
    for u in &dirs {
        for r in radii {
            count += 1;
            let x = scale(*r, u);
            let v = lower_plus_constant(g, &x);
            let d = c.distance(&v)?;
            if d > MEMBER_TOL * (1.0 + norm(&v)) {
                return Ok(Verdict::falsified(vec![x], vec![d], count, format!("ḡ(x) + q ∉ C {what}; value is the distance")));
            }
        }
    }
    Ok(Verdict::unfalsified(count, ""))
}

/// `ḡ(x) + q ∈ C` for large `‖x‖`, sampled at `‖x‖ ∈ {10⁴, 10⁶}`.
pub fn check_g_tail_in_c(g: &ExtendedMap, c: &ConvexSet, density: usize) -> Result<Verdict> {
    check_gbar_in_c(g, c, &[1e4, 1e6], density, "at large ‖x‖")
}

/// `ḡ(x) + q ∈ C` on the unit sphere.
pub fn check_g_sphere_in_c(g: &ExtendedMap, c: &ConvexSet, density: usize) -> Result<Verdict> {
    check_gbar_in_c(g, c, &[1.0], density, "on the unit sphere")
}

// ---------------------------------------------------------------------------
// cone geometry

/// A point of `int(cone)`: `𝟙` when interior, else the Chebyshev centre of
/// the cone cut by the unit box.
pub fn cone_interior_point(cone: &Cone) -> Result<Option<Vec<f64>>> {
    let n = cone.dim();
    let h = cone.inequalities();
    if h.a.is_empty() {
        return Ok(Some(vec![1.0; n]));
    }
    let ones = vec![1.0; n];
    if h.a.iter().zip(&h.b).all(|(a, b)| dot(a, &ones) < b - 1e-9 * norm(a)) {
        return Ok(Some(ones));
    }
    // maximise s subject to a·u + s‖a‖ ≤ b, u ∈ [−1, 1]ⁿ, s ∈ [0, 1]
    let rows: Vec<Vec<f64>> = h.a.iter().map(|a| [a.clone(), vec![norm(a)]].concat()).collect();
    let mut c = vec![0.0; n + 1];
    c[n] = -1.0;
    let mut lo = vec![-1.0; n + 1];
    lo[n] = 0.0;
    let hi = vec![1.0; n + 1];
    let sol = lp::minimize_boxed(&c, &rows, &h.b, &lo, &hi)
        .map_err(|e| Error::UnsupportedSet(format!("interior LP failed: {e:?}")))?;
    if sol.x[n] > 1e-9 {
        Ok(Some(sol.x[..n].to_vec()))
    } else {
        Ok(None)
    }
}

/// Distance from an interior point to the boundary of a polyhedral cone.
pub fn boundary_distance(cone: &Cone, d: &[f64]) -> f64 {
    let h = cone.inequalities();
    h.a.iter()
        .zip(&h.b)
        .map(|(a, b)| (b - dot(a, d)) / norm(a))
        .fold(f64::INFINITY, f64::min)
}

fn lineality_witness(cone: &Cone) -> Option<Vec<f64>> {
    orthogonal_complement(&cone.inequalities().a, cone.dim()).into_iter().next()
}

/// Pointedness by the rank of the inequality rows.
pub fn check_pointed(cone: &Cone) -> Verdict {
    let rows = cone.inequalities().a;
    if rank(&rows) == cone.dim() {
        Verdict::structural("inequality rows have full rank")
    } else {
        let v = lineality_witness(cone).unwrap_or_default();
        Verdict::falsified(vec![v], vec![], 0, "the cone contains the line through this vector")
    }
}

/// Nonempty interior by the Chebyshev LP.
pub fn check_interior_nonempty(cone: &Cone) -> Result<Verdict> {
    match cone_interior_point(cone)? {
        Some(p) => Ok(Verdict::structural(format!("interior point {}", fmt_vec(&p)))),
        None => {
            // the cone lies in a hyperplane: a normal direction u with ±u in the dual
            let v = orthogonal_complement(&cone_span(cone), cone.dim()).into_iter().next().unwrap_or_default();
            Ok(Verdict::falsified(vec![v], vec![], 0, "the cone lies in the hyperplane orthogonal to this vector"))
        }
    }
}

fn cone_span(cone: &Cone) -> Vec<Vec<f64>> {
    cone.sample_members(0x5a, 4 * cone.dim() + 4, 1.0).unwrap_or_default()
}

/// Tests `dist(F∞(x), g∞(x)) < dist(d, ∂D)` on balls around the origin.
pub fn dist_probe_leading(fh: &dyn Mapping, gh: &dyn Mapping, dual: &Cone, d: &[f64], density: usize) -> Verdict {
    let n = gh.dim();
    let bound = boundary_distance(dual, d);
    let dirs = sphere_points(n, density, 19);
    let mut worst = (0.0, vec![0.0; n]);
    let mut count = 0;
    for rho in [1.0, 1e-1, 1e-2, 1e-3] {
        worst = (0.0, vec![0.0; n]);
        for u in &dirs {
            for frac in [1.0, 0.5, 0.25] {
                count += 1;
                let x = scale(rho * frac, u);
                let v = dist(&fh.apply(&x), &gh.apply(&x));
                if v > worst.0 {
                    worst = (v, x);
                }
            }
        }
        if worst.0 < bound {
            return Verdict::unfalsified(
                count,
                format!("Ω = ball of radius {rho:e}; max distance {:e} < {bound:e}; degree of g∞ on Ω assumed nonzero", worst.0),
            );
        }
    }
    Verdict::falsified(vec![d.to_vec(), worst.1], vec![worst.0, bound], count, "distance exceeds dist(d, ∂(K∞)*) on every probed ball")
}

// ---------------------------------------------------------------------------
// running everything

fn is_identity_map(m: &WeaklyHomogeneousMap) -> bool {
    if m.domain.is_some() || !m.lower_terms.is_empty() || m.constant.iter().any(|c| *c != 0.0) || m.delta() != 1.0 {
        return false;
    }
    if m.leading_terms.iter().any(|t| matches!(t, Term::Primitive { .. }) || t.degree() != 1.0 || !t.is_homogeneous()) {
        return false;
    }
    (0..m.n).all(|i| m.eval_leading(&unit(m.n, i)).is_ok_and(|v| v == unit(m.n, i)))
}

/// The shift `d` for the `+d` variants: the user's choice or an interior point.
fn pick_shift(cone: &Cone, user: &Option<Vec<f64>>) -> Result<Option<Vec<f64>>> {
    match user {
        Some(d) => Ok(Some(d.clone())),
        None => cone_interior_point(cone),
    }
}

fn missing_shift(what: &str, cone: &Cone) -> Verdict {
    let v = lineality_witness(cone).unwrap_or_default();
    Verdict::falsified(vec![v], vec![], 0, format!("no d in the interior of {what}"))
}

/// Runs every check for `problem`; `known` are solutions used as `θ` candidates.
pub fn run_checks(problem: &ProblemSpec, known: &[Vec<f64>], opts: &CheckOptions) -> Result<BTreeMap<String, Verdict>> {
    let n = problem.n;
    let f = problem.f.extend();
    let g = problem.g.extend();
    let k = &problem.k;
    let seed = opts.seed;
    let mut out = BTreeMap::new();

    let pool = feasible_pool(&g, k, known, opts.samples, seed)?;
    let strict = check_monotonicity(&f, &g, &pool, MonotonicityMode::Strict)?;
    out.insert("strict_monotonicity".into(), strict);
    out.insert("strong_by_scaling".into(), falsify_strong_by_scaling(&f, &g, k, opts.density)?);
    let anchor = problem
        .probes
        .anchor
        .clone()
        .into_iter()
        .chain(known.iter().cloned())
        .chain(std::iter::once(vec![0.0; n]))
        .find(|x| k.contains(&g.apply(x), MEMBER_TOL))
        .or_else(|| pool.first().cloned());
    if let Some(xhat) = &anchor {
        out.insert("strong_local".into(), falsify_strong_local(&f, &g, k, xhat, opts.density)?);
        out.insert("growth_bound".into(), check_growth_bound(&g, k, xhat, 1.0, seed)?);
    }
    out.insert("degree_gap".into(), check_degree_gap(&problem.f, &problem.g, k)?);
    if is_orthant(k) {
        out.insert("p_property".into(), check_p_property(&f, &g, k, &pool, PMode::StrictP)?);
    }
    out.insert("leading_pairing".into(), check_leading_pairing(&f, &g, k, opts.density, seed)?);

    let inj = check_injectivity(&g, 2.0, opts.injectivity_samples, seed);
    let proxy = if inj.holds() {
        Verdict::unfalsified(inj.samples, "g injective on probes: local degree ±1 assumed")
    } else {
        Verdict::unfalsified(0, "degree condition assumed")
    };
    out.insert("degree_proxy".into(), proxy);
    out.insert("injectivity_g".into(), inj);
    out.insert("surjectivity_onto_k".into(), check_surjectivity_onto_k(&g, k, 24, seed)?);

    let mut thetas: Vec<Vec<f64>> = known.to_vec();
    thetas.extend(lattice_probes(n));
    thetas.extend(pool.iter().take(16).cloned());
    out.insert("monotone_at_theta".into(), check_monotone_at_some_theta(&f, &g, k, &thetas, &pool)?);
    if is_identity_map(&problem.g) {
        let pts = eta_points(k, opts.samples, seed)?;
        let v = match &problem.probes.eta {
            Some(eta) => check_eta_copositivity(&f, k, eta, &pts)?,
            None => check_eta_grid(&f, k, &eta_grid(n), &pts)?,
        };
        out.insert("eta_copositivity".into(), v);
    }

    let kinf = k.recession_cone()?;
    let dual = dual_cone(&kinf)?;
    out.insert("recession_pointed".into(), check_pointed(&kinf));
    out.insert("dual_recession_pointed".into(), check_pointed(&dual));
    out.insert("dual_interior_nonempty".into(), check_interior_nonempty(&dual)?);
    out.insert("recession_interior_nonempty".into(), check_interior_nonempty(&kinf)?);
    out.insert("g_preimage_c".into(), check_g_preimage_c(&g, &problem.c, opts.samples.min(64), seed)?);
    out.insert("g_tail_in_c".into(), check_g_tail_in_c(&g, &problem.c, opts.density)?);
    out.insert("g_sphere_in_c".into(), check_g_sphere_in_c(&g, &problem.c, opts.density)?);

    let fh = f.leading();
    let gh = g.leading();
    let zero = vec![0.0; n];
    out.insert(
        "cone_sol_zero_plain".into(),
        check_cone_sol_zero(&fh, &gh, &kinf, ConeVariant::Plain, &zero, opts.density, seed)?,
    );
    match pick_shift(&dual, &opts.d)? {
        Some(d) => {
            out.insert(
                "cone_sol_zero_plus_d_on_f".into(),
                check_cone_sol_zero(&fh, &gh, &kinf, ConeVariant::PlusDOnF, &d, opts.density, seed)?,
            );
            out.insert("dist_probe_leading".into(), dist_probe_leading(&fh, &gh, &dual, &d, opts.density));
        }
        None => {
            out.insert("cone_sol_zero_plus_d_on_f".into(), missing_shift("(K∞)*", &kinf));
            out.insert("dist_probe_leading".into(), missing_shift("(K∞)*", &kinf));
        }
    }
    out.insert("injectivity_g_leading".into(), check_injectivity(&gh, 2.0, opts.injectivity_samples, seed));
    out.insert("er_condition".into(), check_er_condition(&fh, &gh, &kinf, opts.density, seed)?);
    let xmap = FnMapping::new(n, |x: &[f64]| x.to_vec());
    match pick_shift(&kinf, &opts.d)? {
        Some(d) => {
            out.insert(
                "equ10_x_as_f_d".into(),
                check_cone_sol_zero(&xmap, &gh, &kinf, ConeVariant::XAsF, &d, opts.density, seed)?,
            );
        }
        None => {
            out.insert("equ10_x_as_f_d".into(), missing_shift("K∞", &dual));
        }
    }
    out.insert(
        "equ10_x_as_f_zero".into(),
        check_cone_sol_zero(&xmap, &gh, &kinf, ConeVariant::XAsF, &zero, opts.density, seed)?,
    );
    Ok(out)
}

/// Combines verdicts into theorem conclusions. A template applies only when
/// none of its hypotheses was falsified.
pub fn assemble_verdict(problem: &ProblemSpec, reports: &BTreeMap<String, Verdict>) -> Result<ConditionReport> {
    let mut conclusions = Vec::new();
    for t in TEMPLATES {
        let mut failed = Vec::new();
        for h in t.hypotheses {
            let v = reports.get(*h).ok_or_else(|| Error::MissingCheck((*h).to_string()))?;
            if !v.holds() {
                failed.push((*h).to_string());
            }
        }
        let applies = failed.is_empty();
        let conclusion = if applies { t.conclusion.to_string() } else { "not applicable".to_string() };
        conclusions.push(TheoremConclusion { id: t.id.to_string(), applies, conclusion, failed });
    }
    Ok(ConditionReport { problem: problem.name.clone(), verdicts: reports.clone(), theorem_conclusions: conclusions })
}

/// [`run_checks`] followed by [`assemble_verdict`].
pub fn analyze(problem: &ProblemSpec, known: &[Vec<f64>], opts: &CheckOptions) -> Result<ConditionReport> {
    let reports = run_checks(problem, known, opts)?;
    assemble_verdict(problem, &reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Identity;

    #[test]
    fn lattice_order_starts_with_axes() {
        let p = lattice_probes(2);
        assert_eq!(p[0], vec![0.0, 0.0]);
        assert_eq!(p[1], vec![1.0, 0.0]);
        assert_eq!(p[2], vec![-1.0, 0.0]);
        assert_eq!(p.len(), 9);
    }

    #[test]
    fn identity_is_strongly_monotone_at_one() {
        let pool = lattice_probes(2);
        let v = check_monotonicity(&Identity(2), &Identity(2), &pool, MonotonicityMode::Strong { c_probe: 1.0 }).unwrap();
        assert_eq!(v.status, Status::Unfalsified);
    }

    #[test]
    fn rotation_fails_pairing() {
        let fh = FnMapping::new(2, |x: &[f64]| vec![-x[1], x[0]]);
        let v = check_cone_sol_zero(&fh, &Identity(2), &Cone::orthant(2), ConeVariant::Plain, &[0.0, 0.0], 32, 1).unwrap();
        assert_eq!(v.status, Status::Falsified);
    }

    #[test]
    fn interior_of_a_line_is_empty() {
        let line = Cone::new(ConvexSet::line(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap()).unwrap();
        assert!(cone_interior_point(&line).unwrap().is_none());
        assert_eq!(cone_interior_point(&Cone::orthant(2)).unwrap(), Some(vec![1.0, 1.0]));
    }
}
