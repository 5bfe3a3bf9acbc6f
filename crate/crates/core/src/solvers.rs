//! Solution finders: natural-map Newton with multistart, the two homotopy path
//! trackers, exceptional-family detection, grid enumeration and bisection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{damped_newton, dist, norm, sub, NewtonOptions, Termination};
use crate::maps::{ExtendedMap, Mapping};
use crate::residuals::{natural_residual, residual_report, ResidualReport, SOLUTION_TOL};
use crate::sets::{interpolated_project, normal_cone_contains, Cone, ConvexSet};

/// Largest dimension accepted by [`enumerate_solutions`].
pub const ENUMERATION_MAX_DIM: usize = 3;
/// Solutions closer than this are merged.
pub const DEDUP_DIST: f64 = 1e-6;
/// Minimum number of consecutive validated points in an exceptional family.
pub const EFE_MIN_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub step_tol: f64,
    pub residual_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub contraction: f64,
    pub sufficient_decrease: f64,
    /// Perturbed restarts after a stalled Newton run.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            step_tol: 1e-10,
            residual_tol: SOLUTION_TOL,
            max_iter: 200,
            fd_step: 1e-7,
            contraction: 0.5,
            sufficient_decrease: 1e-4,
            restarts: 5,
            seed: 0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_tol > 0.0 && self.residual_tol > 0.0) {
            return Err(Error::invalid("params.tol", "tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("params.max_iter", "must be at least 1"));
        }
        Ok(())
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            residual_tol: self.residual_tol,
            step_tol: self.step_tol,
            max_iter: self.max_iter,
            fd_step: self.fd_step,
            contraction: self.contraction,
            sufficient_decrease: self.sufficient_decrease,
            ..NewtonOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCertificate {
    pub point: Vec<f64>,
    pub method: String,
    pub iterations: usize,
    pub residuals: ResidualReport,
}

fn certify(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    x: Vec<f64>,
    method: &str,
    iterations: usize,
) -> Result<SolutionCertificate> {
    let residuals = residual_report(f, g, k, &x)?;
    Ok(SolutionCertificate { point: x, method: method.to_string(), iterations, residuals })
}

/// Damped Newton on the natural residual with seeded perturbed restarts.
pub fn solve_newton(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    x0: &[f64],
    params: &SolverParams,
) -> Result<SolutionCertificate> {
    params.validate()?;
    if x0.len() != g.dim() {
        return Err(Error::shape("x0", format!("expected length {}", g.dim())));
    }
    let opts = params.newton_options();
    let fun = |x: &[f64]| natural_residual(f, g, k, x).unwrap_or_else(|_| vec![f64::NAN; x.len()]);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut start = x0.to_vec();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut total = 0;
    for attempt in 0..=params.restarts {
        let out = damped_newton(&fun, &start, &opts);
        total += out.iterations;
        if out.termination == Termination::Converged {
            return certify(f, g, k, out.x, "newton", total);
        }
        if best.as_ref().is_none_or(|b| out.residual < b.1) {
            best = Some((out.x.clone(), out.residual));
        }
        if out.termination == Termination::MaxIter || attempt == params.restarts {
            let (x, r) = best.expect("at least one attempt");
            return Err(if out.termination == Termination::MaxIter {
                Error::MaxIter { best: x, residual: r }
            } else {
                Error::Stalled { best: x, residual: r }
            });
        }
        let base = best.as_ref().expect("set above").0.clone();
        let radius = 1e-2 * (1.0 + norm(&base));
        start = base.iter().map(|v| v + radius * rng.gen_range(-1.0..=1.0)).collect();
    }
    unreachable!("loop returns on the last attempt")
}

/// Axis-aligned box with a per-axis grid resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridBox {
    pub fn cube(n: usize, lo: f64, hi: f64, count: usize) -> Self {
        GridBox { lo: vec![lo; n], hi: vec![hi; n], counts: vec![count; n] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lo.len();
        if self.hi.len() != n || self.counts.len() != n {
            return Err(Error::shape("grid", "lo, hi and counts must have equal length"));
        }
        for i in 0..n {
            if !(self.lo[i] <= self.hi[i]) || self.counts[i] == 0 {
                return Err(Error::invalid(format!("grid[{i}]"), "need lo ≤ hi and a positive count"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        let c = self.counts[axis];
        if c == 1 {
            0.5 * (self.lo[axis] + self.hi[axis])
        } else {
            self.lo[axis] + (self.hi[axis] - self.lo[axis]) * i as f64 / (c - 1) as f64
        }
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.counts.len()];
        for axis in (0..self.counts.len()).rev() {
            idx[axis] = flat % self.counts[axis];
            flat /= self.counts[axis];
        }
        idx
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (i, c)| acc * c + i)
    }

    /// The grid point with row-major flat index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().enumerate().map(|(axis, &i)| self.coord(axis, i)).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    fn neighbours(&self, flat: usize) -> Vec<usize> {
        let idx = self.multi_index(flat);
        let n = idx.len();
        let mut out = Vec::new();
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let mut nb = idx.clone();
            let mut ok = true;
            let mut moved = false;
            for (axis, v) in nb.iter_mut().enumerate() {
                let step = (c % 3) as i64 - 1;
                c /= 3;
                let j = *v as i64 + step;
                if j < 0 || j >= self.counts[axis] as i64 {
                    ok = false;
                    break;
                }
                moved |= step != 0;
                *v = j as usize;
            }
            if ok && moved {
                out.push(self.flat_index(&nb));
            }
        }
        out
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= l - slack && *v <= h + slack)
    }
}

fn merge_solution(found: &mut Vec<SolutionCertificate>, cert: SolutionCertificate) {
    if let Some(existing) = found.iter_mut().find(|c| dist(&c.point, &cert.point) <= DEDUP_DIST) {
        if cert.residuals.natural_norm < existing.residuals.natural_norm {
            *existing = cert;
        }
    } else {
        found.push(cert);
    }
}

/// Newton from every point of `grid`, merged in start order.
pub fn solve_multistart(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    grid: &GridBox,
    params: &SolverParams,
) -> Result<Vec<SolutionCertificate>> {
    grid.validate()?;
    let mut found = Vec::new();
    for (i, x0) in grid.points().into_iter().enumerate() {
        let p = SolverParams { seed: params.seed.wrapping_add(i as u64), ..params.clone() };
        if let Ok(cert) = solve_newton(f, g, k, &x0, &p) {
            merge_solution(&mut found, cert);
        }
    }
    Ok(found)
}

/// Grid search for every solution inside `grid`.
///
/// Grid cells that are local minima of the natural-residual norm are grouped
/// into connected clusters; with `refine` set, Newton runs from the best cell of
/// each cluster, otherwise only cells that already solve are reported.
pub fn enumerate_solutions(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    grid: &GridBox,
    refine: bool,
    params: &SolverParams,
) -> Result<Vec<SolutionCertificate>> {
    let n = grid.lo.len();
    if n > ENUMERATION_MAX_DIM {
        return Err(Error::DimensionTooLarge { n, max: ENUMERATION_MAX_DIM });
    }
    grid.validate()?;
    let values: Vec<f64> = (0..grid.len())
        .map(|i| natural_residual(f, g, k, &grid.point(i)).map(|r| norm(&r)))
        .collect::<Result<_>>()?;
    let is_min: Vec<bool> =
        (0..grid.len()).map(|i| grid.neighbours(i).iter().all(|&j| values[i] <= values[j])).collect();
    let mut seen = vec![false; grid.len()];
    let mut found = Vec::new();
    for start in 0..grid.len() {
        if !is_min[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut best = start;
        while let Some(i) = stack.pop() {
            if values[i] < values[best] || (values[i] == values[best] && i < best) {
                best = i;
            }
            for j in grid.neighbours(i) {
                if is_min[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        let x0 = grid.point(best);
        let cert = if refine {
            let p = SolverParams { seed: params.seed.wrapping_add(best as u64), ..params.clone() };
            match solve_newton(f, g, k, &x0, &p) {
                Ok(c) => c,
                Err(_) => continue,
            }
        } else if values[best] <= params.residual_tol {
            certify(f, g, k, x0, "grid", 0)?
        } else {
            continue;
        };
        if grid.contains(&cert.point, 1e-9) {
            merge_solution(&mut found, cert);
        }
    }
    Ok(found)
}

/// Bisection on a sign change, stopping when the bracket is no wider than `tol`.
pub fn scalar_root<F: Fn(f64) -> f64>(fun: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (fun(a), fun(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 || !(fa * fb).is_finite() {
        return Err(Error::NoBracket { lo, hi });
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = fun(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOutcome {
    ReachedT1,
    Diverged,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub residual: f64,
    pub g_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyTrace {
    pub records: Vec<TraceRecord>,
    pub outcome: TraceOutcome,
}

impl HomotopyTrace {
    /// CSV with columns `t, x_1..x_n, residual, g_norm`.
    pub fn to_csv(&self) -> String {
        let n = self.records.first().map_or(0, |r| r.x.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x_{i}"));
        }
        out.push_str(",residual,g_norm\n");
        for r in &self.records {
            out.push_str(&r.t.to_string());
            for v in &r.x {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push_str(&format!(",{},{}\n", r.residual, r.g_norm));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyParams {
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_init: f64,
    pub grow: f64,
    pub shrink: f64,
    /// Corrector tolerance, relative to `1 + ‖g(x)‖`.
    pub corrector_tol: f64,
    pub corrector_max_iter: usize,
    /// Divergence is declared once `‖g(x)‖ > divergence_factor·(1 + ‖Π_K(x̂)‖)`.
    pub divergence_factor: f64,
    pub max_steps: usize,
}

impl Default for HomotopyParams {
    fn default() -> Self {
        HomotopyParams {
            dt_min: 1e-5,
            dt_max: 0.1,
            dt_init: 0.01,
            grow: 1.5,
            shrink: 0.5,
            corrector_tol: 1e-10,
            corrector_max_iter: 50,
            divergence_factor: 1e6,
            max_steps: 20_000,
        }
    }
}

/// Predictor–corrector continuation of `H(x, t) = 0` from `(x0, 0)` towards `t = 1`.
///
/// Near `t = 1` the step floor shrinks with the remaining interval, so a path
/// escaping to infinity as `t → t̄ ≤ 1` can still be followed to the divergence radius.
pub fn track_path(
    h: &dyn Fn(&[f64], f64) -> Vec<f64>,
    g: &dyn Mapping,
    x0: &[f64],
    divergence_radius: f64,
    hp: &HomotopyParams,
) -> HomotopyTrace {
    let record = |t: f64, x: &[f64]| TraceRecord {
        t,
        x: x.to_vec(),
        residual: norm(&h(x, t)),
        g_norm: norm(&g.apply(x)),
    };
    let mut records = vec![record(0.0, x0)];
    let mut t = 0.0;
    let mut x = x0.to_vec();
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut dt = hp.dt_init;
    for _ in 0..hp.max_steps {
        if t >= 1.0 {
            return HomotopyTrace { records, outcome: TraceOutcome::ReachedT1 };
        }
        let t_new = (t + dt).min(1.0);
        let secant = prev.as_ref().map(|(tp, xp)| {
            let w = (t_new - t) / (t - tp);
            x.iter().zip(xp).map(|(a, b)| a + w * (a - b)).collect::<Vec<f64>>()
        });
        let mut predictors = Vec::with_capacity(2);
        let have_secant = secant.is_some();
        if let Some(s) = secant {
            predictors.push(s);
        }
        predictors.push(x.clone());
        if !have_secant {
            // Leaving a point where the Jacobian degenerates (a homogeneous
            // root, say) needs a nudge off it.
            let rho = dt.sqrt() * (1.0 + norm(&x));
            for u in kick_directions(x.len()) {
                predictors.push(x.iter().zip(&u).map(|(a, b)| a + rho * b).collect());
            }
        }
        let mut accepted = None;
        for pred in predictors {
            let tol = hp.corrector_tol * (1.0 + norm(&g.apply(&pred)));
            let opts = NewtonOptions {
                residual_tol: tol,
                max_iter: hp.corrector_max_iter,
                polish: false,
                ..NewtonOptions::default()
            };
            let fun = |y: &[f64]| h(y, t_new);
            let out = damped_newton(&fun, &pred, &opts);
            let jump = dist(&out.x, &x);
            let tol_here = hp.corrector_tol * (1.0 + norm(&g.apply(&out.x)));
            if out.termination == Termination::Converged
                && out.residual <= tol_here
                && jump <= 1.0 + 10.0 * norm(&x)
            {
                accepted = Some(out.x);
                break;
            }
        }
        match accepted {
            Some(xn) => {
                prev = Some((t, std::mem::replace(&mut x, xn)));
                t = t_new;
                let rec = record(t, &x);
                let diverged = rec.g_norm > divergence_radius;
                records.push(rec);
                if diverged {
                    return HomotopyTrace { records, outcome: TraceOutcome::Diverged };
                }
                dt = (dt * hp.grow).min(hp.dt_max);
            }
            None => {
                dt *= hp.shrink;
                let floor = hp.dt_min.min(0.1 * (1.0 - t));
                if dt < floor || dt < 1e-15 {
                    return HomotopyTrace { records, outcome: TraceOutcome::Stalled };
                }
            }
        }
    }
    HomotopyTrace { records, outcome: TraceOutcome::Stalled }
}

fn kick_directions(n: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b1c);
    let mut dirs = vec![vec![1.0; n], vec![-1.0; n]];
    for _ in 0..4 {
        dirs.push((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect());
    }
    dirs
}

/// `H(x, t) = g(x) − Π_K{t[g(x) − f(x)] + (1 − t)x̂}`.
pub fn basic_homotopy_map(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    anchor: &[f64],
    x: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let gx = g.apply(x);
    let fx = f.apply(x);
    let z: Vec<f64> = gx.iter().zip(&fx).zip(anchor).map(|((gi, fi), a)| t * (gi - fi) + (1.0 - t) * a).collect();
    Ok(sub(&gx, &k.project(&z)?))
}

/// `H(x, t) = G_t(x) − Π_{tK + K∞}(G_t(x) − F_t(x))` with `G_t = (1−t)g∞ + tg`
/// and `F_t = (1−t)F∞ + tF`.
pub fn cone_homotopy_map(
    f: &ExtendedMap,
    g: &ExtendedMap,
    k: &ConvexSet,
    kinf: &Cone,
    x: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let gt: Vec<f64> = g.eval_leading(x).iter().zip(g.eval(x)).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    let ft: Vec<f64> = f.eval_leading(x).iter().zip(f.eval(x)).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    let p = interpolated_project(k, kinf, t, &sub(&gt, &ft))?;
    Ok(sub(&gt, &p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfeCandidate {
    pub r: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyRun {
    pub trace: HomotopyTrace,
    pub solution: Option<SolutionCertificate>,
    /// Filled when the path diverged: `α_r = (1 − t_r)/t_r` at each record with `t_r ∈ (0, 1)`.
    pub candidates: Vec<EfeCandidate>,
}

fn nan_guard(v: Result<Vec<f64>>, n: usize) -> Vec<f64> {
    v.unwrap_or_else(|_| vec![f64::NAN; n])
}

/// Finds `x₀` with `g(x₀) = target` by Newton from a few deterministic starts.
fn solve_g_equals(g: &dyn Mapping, target: &[f64], starts: &[Vec<f64>], params: &SolverParams) -> Option<Vec<f64>> {
    let fun = |x: &[f64]| sub(&g.apply(x), target);
    let opts = params.newton_options();
    for s in starts {
        let out = damped_newton(&fun, s, &opts);
        if out.residual <= 1e-10 * (1.0 + norm(target)) {
            return Some(out.x);
        }
    }
    None
}

fn default_starts(n: usize, extra: &[f64], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![extra.to_vec(), vec![0.0; n], vec![1.0; n]];
    for _ in 0..8 {
        starts.push((0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect());
    }
    starts
}

/// Tracks the basic homotopy from a root of `g(x) = Π_K(x̂)` at `t = 0`.
pub fn track_basic_homotopy(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    anchor: &[f64],
    params: &SolverParams,
    hp: &HomotopyParams,
) -> Result<HomotopyRun> {
    let n = g.dim();
    if anchor.len() != n {
        return Err(Error::shape("anchor", format!("expected length {n}")));
    }
    let target = k.project(anchor)?;
    let x0 = solve_g_equals(g, &target, &default_starts(n, anchor, params.seed), params)
        .ok_or_else(|| Error::NoStart("no root of g(x) = Π_K(x̂) found".into()))?;
    let h = |x: &[f64], t: f64| nan_guard(basic_homotopy_map(f, g, k, anchor, x, t), n);
    let radius = hp.divergence_factor * (1.0 + norm(&target));
    let trace = track_path(&h, g, &x0, radius, hp);
    finish_run(f, g, k, trace, params)
}

fn finish_run(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    trace: HomotopyTrace,
    params: &SolverParams,
) -> Result<HomotopyRun> {
    let mut solution = None;
    let mut candidates = Vec::new();
    match trace.outcome {
        TraceOutcome::ReachedT1 => {
            let end = &trace.records.last().expect("trace has records").x;
            solution = match solve_newton(f, g, k, end, params) {
                Ok(mut c) => {
                    c.method = "homotopy".into();
                    Some(c)
                }
                Err(_) => None,
            };
        }
        TraceOutcome::Diverged => {
            for (r, rec) in trace.records.iter().enumerate() {
                if rec.t > 0.0 && rec.t < 1.0 {
                    candidates.push(EfeCandidate { r, t: rec.t, x: rec.x.clone(), alpha: (1.0 - rec.t) / rec.t });
                }
            }
        }
        TraceOutcome::Stalled => {}
    }
    Ok(HomotopyRun { trace, solution, candidates })
}

/// Tracks the cone-interpolated homotopy from a root of the leading-term cone problem.
pub fn track_cone_homotopy(
    f: &ExtendedMap,
    g: &ExtendedMap,
    k: &ConvexSet,
    params: &SolverParams,
    hp: &HomotopyParams,
) -> Result<HomotopyRun> {
    let n = g.dim();
    let kinf = k.recession_cone()?;
    let h = |x: &[f64], t: f64| nan_guard(cone_homotopy_map(f, g, k, &kinf, x, t), n);
    let zero = vec![0.0; n];
    let x0 = if norm(&h(&zero, 0.0)) <= params.residual_tol {
        zero.clone()
    } else {
        let fun = |x: &[f64]| h(x, 0.0);
        let opts = params.newton_options();
        default_starts(n, &zero, params.seed)
            .iter()
            .map(|s| damped_newton(&fun, s, &opts))
            .find(|o| o.termination == Termination::Converged)
            .map(|o| o.x)
            .ok_or_else(|| Error::NoStart("no root of the leading-term cone problem found".into()))?
    };
    let radius = hp.divergence_factor * (1.0 + norm(&k.project(&zero)?));
    let trace = track_path(&h, g, &x0, radius, hp);
    let mut run = finish_run(f, g, k, trace, params)?;
    run.candidates.clear();
    if let Some(c) = run.solution.as_mut() {
        c.method = "cone_homotopy".into();
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfePoint {
    pub r: usize,
    pub x: Vec<f64>,
    pub alpha: f64,
    /// `g(x^r) ∈ K`
    pub in_k: bool,
    /// `−[f(x^r) + α_r(g(x^r) − x̂)] ∈ N_K(g(x^r))`
    pub in_normal_cone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfeCertificate {
    pub anchor: Vec<f64>,
    pub points: Vec<EfePoint>,
    /// `‖x^r‖` along the stored points.
    pub growth: Vec<f64>,
}

/// Checks the membership conditions of an exceptional family at one point.
pub fn validate_efe_point(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    anchor: &[f64],
    x: &[f64],
    alpha: f64,
) -> Result<(bool, bool)> {
    let gx = g.apply(x);
    let fx = f.apply(x);
    let shift = sub(&gx, anchor);
    let v: Vec<f64> = fx.iter().zip(&shift).map(|(a, b)| -(a + alpha * b)).collect();
    let tol = 1e-6 * (1.0 + norm(&fx) + alpha * norm(&shift));
    let in_k = k.contains(&gx, 1e-8);
    let in_nc = in_k && normal_cone_contains(k, &gx, &v, tol)?;
    Ok((in_k, in_nc))
}

/// Runs the basic homotopy and, if it diverges, certifies an exceptional family
/// from the longest final run of validated candidates with growing norms.
pub fn detect_efe(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    anchor: &[f64],
    params: &SolverParams,
    hp: &HomotopyParams,
) -> Result<Option<EfeCertificate>> {
    let run = track_basic_homotopy(f, g, k, anchor, params, hp)?;
    efe_from_run(f, g, k, anchor, &run)
}

/// Validates the candidates of a diverged basic-homotopy run as an exceptional family.
pub fn efe_from_run(
    f: &dyn Mapping,
    g: &dyn Mapping,
    k: &ConvexSet,
    anchor: &[f64],
    run: &HomotopyRun,
) -> Result<Option<EfeCertificate>> {
    if run.trace.outcome != TraceOutcome::Diverged {
        return Ok(None);
    }
    let mut points: Vec<EfePoint> = Vec::new();
    for c in &run.candidates {
        let (in_k, in_nc) = validate_efe_point(f, g, k, anchor, &c.x, c.alpha)?;
        let growing = points.last().is_none_or(|p| norm(&c.x) > norm(&p.x));
        if !(in_k && in_nc && c.alpha > 0.0 && growing) {
            points.clear();
            if !(in_k && in_nc && c.alpha > 0.0) {
                continue;
            }
        }
        points.push(EfePoint { r: c.r, x: c.x.clone(), alpha: c.alpha, in_k, in_normal_cone: in_nc });
    }
    if points.len() < EFE_MIN_POINTS {
        return Ok(None);
    }
    let growth = points.iter().map(|p| norm(&p.x)).collect();
    Ok(Some(EfeCertificate { anchor: anchor.to_vec(), points, growth }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{FnMapping, Identity};

    #[test]
    fn bisection_examples() {
        let r = scalar_root(|u| u * u * u + u - 1.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.6823278).abs() < 1e-7);
        assert_eq!(scalar_root(|u| u, -1.0, 1.0, 1e-12).unwrap(), 0.0);
        assert!(matches!(scalar_root(|u| u * u + 1.0, -1.0, 1.0, 1e-12), Err(Error::NoBracket { .. })));
    }

    #[test]
    fn identity_cp_solves_to_origin() {
        let id = Identity(3);
        let cert = solve_newton(&id, &id, &ConvexSet::orthant(3), &[0.7, -2.0, 5.0], &SolverParams::default()).unwrap();
        assert!(norm(&cert.point) < 1e-8);
        assert!(cert.residuals.is_solution());
    }

    #[test]
    fn identity_on_whole_space_tracks_to_origin() {
        let id = Identity(2);
        let run = track_basic_homotopy(
            &id,
            &id,
            &ConvexSet::whole(2),
            &[0.0, 0.0],
            &SolverParams::default(),
            &HomotopyParams::default(),
        )
        .unwrap();
        assert_eq!(run.trace.outcome, TraceOutcome::ReachedT1);
        assert!(norm(&run.solution.unwrap().point) < 1e-8);
    }

    #[test]
    fn infeasible_cp_yields_exceptional_family() {
        let f = FnMapping::new(2, |_: &[f64]| vec![-1.0, 0.0]);
        let id = Identity(2);
        let k = ConvexSet::orthant(2);
        let cert = detect_efe(&f, &id, &k, &[0.0, 0.0], &SolverParams::default(), &HomotopyParams::default())
            .unwrap()
            .expect("path diverges");
        assert!(cert.points.len() >= EFE_MIN_POINTS);
        assert!(cert.growth.windows(2).all(|w| w[1] > w[0]));
        assert!(*cert.growth.last().unwrap() > 1e6);
    }

    #[test]
    fn grid_neighbours_and_indexing() {
        let grid = GridBox::cube(2, -1.0, 1.0, 3);
        assert_eq!(grid.point(0), vec![-1.0, -1.0]);
        assert_eq!(grid.point(5), vec![0.0, 1.0]);
        assert_eq!(grid.neighbours(4).len(), 8);
        assert_eq!(grid.neighbours(0).len(), 3);
    }
}
