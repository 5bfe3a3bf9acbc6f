//! Small dense vector helpers plus the Newton and Levenberg–Marquardt kernels
//! shared by the solvers and the checkers.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let r = norm(a);
    if r > 0.0 && r.is_finite() {
        Some(scale(1.0 / r, a))
    } else {
        None
    }
}

/// Orthonormal basis of the orthogonal complement of span(`rows`).
pub fn orthogonal_complement(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        if let Some(v) = gram_schmidt_step(&basis, r) {
            basis.push(v);
        }
    }
    let span = basis.len();
    for i in 0..n {
        if let Some(v) = gram_schmidt_step(&basis, &unit(n, i)) {
            basis.push(v);
        }
    }
    basis.split_off(span)
}

fn gram_schmidt_step(basis: &[Vec<f64>], v: &[f64]) -> Option<Vec<f64>> {
    let scale_ref = norm(v);
    if scale_ref == 0.0 {
        return None;
    }
    let mut w = v.to_vec();
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let c = dot(&w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
    }
    let r = norm(&w);
    if r <= 1e-10 * scale_ref {
        None
    } else {
        Some(scale(1.0 / r, &w))
    }
}

/// Numerical rank of a row set, via the same Gram–Schmidt sweep.
pub fn rank(rows: &[Vec<f64>]) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        if let Some(v) = gram_schmidt_step(&basis, r) {
            basis.push(v);
        }
    }
    basis.len()
}

pub fn to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Solves the square system `m x = rhs`, returning `None` when it is singular.
pub fn solve_square(m: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let lu = m.clone().lu();
    let x = lu.solve(&DVector::from_column_slice(rhs))?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

/// Forward-difference Jacobian with step `h·max(1, |x_j|)`.
pub fn fd_jacobian<F>(fun: &F, x: &[f64], fx: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64> + ?Sized,
{
    let n = x.len();
    let m = fx.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let step = h * x[j].abs().max(1.0);
        xp[j] = x[j] + step;
        let actual = xp[j] - x[j];
        let fp = fun(&xp);
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fx[i]) / actual;
        }
        xp[j] = x[j];
    }
    jac
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Converged,
    Stalled,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct RootOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Success threshold on the residual norm.
    pub residual_tol: f64,
    /// Relative step length below which iteration stops.
    pub step_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub contraction: f64,
    pub sufficient_decrease: f64,
    /// Keep iterating past `residual_tol` until the step stagnates.
    pub polish: bool,
    /// Steps longer than `max_step·(1 + ‖x‖)` are shortened to that length.
    pub max_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            residual_tol: 1e-8,
            step_tol: 1e-10,
            max_iter: 200,
            fd_step: 1e-7,
            contraction: 0.5,
            sufficient_decrease: 1e-4,
            polish: true,
            max_step: 10.0,
        }
    }
}

/// Damped Newton for a square system with an Armijo search on `½‖r‖²`.
///
/// Falls back to a Levenberg–Marquardt direction whenever the finite
/// difference Jacobian is singular or the Newton direction fails to descend.
pub fn damped_newton<F>(fun: &F, x0: &[f64], opts: &NewtonOptions) -> RootOutcome
where
    F: Fn(&[f64]) -> Vec<f64> + ?Sized,
{
    let mut x = x0.to_vec();
    let mut r = fun(&x);
    let mut nr = norm(&r);
    let mut best = (x.clone(), nr);
    for it in 0..opts.max_iter {
        if !nr.is_finite() {
            break;
        }
        if nr == 0.0 || (!opts.polish && nr <= opts.residual_tol) {
            return RootOutcome { x, residual: nr, iterations: it, termination: Termination::Converged };
        }
        let jac = fd_jacobian(fun, &x, &r, opts.fd_step);
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let grad = jac.transpose() * DVector::from_column_slice(&r);
        let mut dir = solve_square(&jac, &neg_r);
        if let Some(d) = &dir {
            let slope: f64 = grad.iter().zip(d).map(|(g, di)| g * di).sum();
            if !(slope < 0.0) || norm(d) > 1e8 * (1.0 + norm(&x)) {
                dir = None;
            }
        }
        let mut d = match dir {
            Some(d) => d,
            None => lm_direction(&jac, &r),
        };
        let cap = opts.max_step * (1.0 + norm(&x));
        let len = norm(&d);
        if len > cap {
            d = scale(cap / len, &d);
        }
        let phi0 = 0.5 * nr * nr;
        let slope: f64 = grad.iter().zip(&d).map(|(g, di)| g * di).sum();
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-12 {
            let trial = axpy(&x, step, &d);
            let rt = fun(&trial);
            let nt = norm(&rt);
            let phi = 0.5 * nt * nt;
            if nt.is_finite() && (phi <= phi0 + opts.sufficient_decrease * step * slope.min(0.0) && nt < nr) {
                accepted = Some((trial, rt, nt));
                break;
            }
            step *= opts.contraction;
        }
        match accepted {
            Some((xt, rt, nt)) => {
                let moved = dist(&xt, &x);
                x = xt;
                r = rt;
                nr = nt;
                if nr < best.1 {
                    best = (x.clone(), nr);
                }
                if moved <= opts.step_tol * (1.0 + norm(&x)) && nr <= opts.residual_tol {
                    return RootOutcome { x, residual: nr, iterations: it + 1, termination: Termination::Converged };
                }
            }
            None => {
                let termination =
                    if best.1 <= opts.residual_tol { Termination::Converged } else { Termination::Stalled };
                return RootOutcome { x: best.0, residual: best.1, iterations: it + 1, termination };
            }
        }
    }
    let termination = if best.1 <= opts.residual_tol { Termination::Converged } else { Termination::MaxIter };
    RootOutcome { x: best.0, residual: best.1, iterations: opts.max_iter, termination }
}

fn lm_direction(jac: &DMatrix<f64>, r: &[f64]) -> Vec<f64> {
    let jt = jac.transpose();
    let mut jtj = &jt * jac;
    let g = &jt * DVector::from_column_slice(r);
    let diag_max = (0..jtj.nrows()).map(|i| jtj[(i, i)]).fold(0.0_f64, f64::max);
    let mu = 1e-8 * diag_max.max(1e-12);
    for i in 0..jtj.nrows() {
        jtj[(i, i)] += mu;
    }
    let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
    solve_square(&jtj, &neg_g).unwrap_or(neg_g)
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub residual_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { residual_tol: 1e-12, step_tol: 1e-14, max_iter: 200, fd_step: 1e-7 }
    }
}

/// Levenberg–Marquardt minimisation of `‖fun(x)‖²`; `fun` may be non-square.
pub fn levenberg_marquardt<F>(fun: &F, x0: &[f64], opts: &LmOptions) -> RootOutcome
where
    F: Fn(&[f64]) -> Vec<f64> + ?Sized,
{
    let mut x = x0.to_vec();
    let mut r = fun(&x);
    let mut nr = norm(&r);
    let mut mu = 1e-3;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        if !nr.is_finite() || nr <= opts.residual_tol {
            break;
        }
        let jac = fd_jacobian(fun, &x, &r, opts.fd_step);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += mu * (1.0 + jtj[(i, i)]);
            }
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(d) = solve_square(&a, &neg_g) else {
                mu *= 10.0;
                continue;
            };
            let trial = add(&x, &d);
            let rt = fun(&trial);
            let nt = norm(&rt);
            if nt.is_finite() && nt < nr {
                let moved = norm(&d);
                x = trial;
                r = rt;
                nr = nt;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                if moved <= opts.step_tol * (1.0 + norm(&x)) {
                    it = opts.max_iter;
                }
                break;
            }
            mu *= 4.0;
            if mu > 1e16 {
                break;
            }
        }
        if !improved {
            let termination = if nr <= opts.residual_tol { Termination::Converged } else { Termination::Stalled };
            return RootOutcome { x, residual: nr, iterations: it, termination };
        }
    }
    let termination = if nr <= opts.residual_tol { Termination::Converged } else { Termination::MaxIter };
    RootOutcome { x, residual: nr, iterations: it, termination }
}
