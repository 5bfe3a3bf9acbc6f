//! Dense two-phase simplex for the small box-bounded LPs that appear in gap
//! evaluation and interior-point searches.

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpError {
    Infeasible,
    IterationLimit,
}

/// Minimise `cᵀx` subject to `A x ≤ b` and `lo ≤ x ≤ hi` with finite bounds.
pub fn minimize_boxed(
    c: &[f64],
    a: &[Vec<f64>],
    b: &[f64],
    lo: &[f64],
    hi: &[f64],
) -> Result<LpSolution, LpError> {
    let n = c.len();
    // substitute x = lo + y with 0 ≤ y ≤ hi - lo
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(a.len() + n);
    let mut rhs: Vec<f64> = Vec::with_capacity(a.len() + n);
    for (ai, bi) in a.iter().zip(b) {
        let shift: f64 = ai.iter().zip(lo).map(|(p, q)| p * q).sum();
        rows.push(ai.clone());
        rhs.push(bi - shift);
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push(e);
        rhs.push(hi[j] - lo[j]);
    }
    let y = simplex_leq(c, &rows, &rhs)?;
    let x: Vec<f64> = y.iter().zip(lo).map(|(yi, l)| yi + l).collect();
    let objective = c.iter().zip(&x).map(|(p, q)| p * q).sum();
    Ok(LpSolution { x, objective })
}

/// Minimise `cᵀy` over `{y ≥ 0 : R y ≤ r}`, assuming the feasible set is bounded.
fn simplex_leq(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>, LpError> {
    let n = c.len();
    let m = rows.len();
    let mut n_art = 0;
    for &r in rhs {
        if r < 0.0 {
            n_art += 1;
        }
    }
    // columns: y (n), slacks (m), artificials (n_art), rhs
    let width = n + m + n_art + 1;
    let mut tab = vec![vec![0.0; width]; m];
    let mut basis = vec![0usize; m];
    let mut art = 0;
    for i in 0..m {
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[i][j] = sign * rows[i][j];
        }
        tab[i][n + i] = sign;
        tab[i][width - 1] = sign * rhs[i];
        if sign < 0.0 {
            tab[i][n + m + art] = 1.0;
            basis[i] = n + m + art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let art_start = n + m;
    if n_art > 0 {
        let mut cost = vec![0.0; width - 1];
        for c in cost.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        run_simplex(&mut tab, &mut basis, &cost, width - 1)?;
        let infeas: f64 = (0..m).filter(|&i| basis[i] >= art_start).map(|i| tab[i][width - 1]).sum();
        if infeas > FEAS_EPS * (1.0 + rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()))) {
            return Err(LpError::Infeasible);
        }
        // drive remaining artificials out of the basis
        let mut i = 0;
        while i < tab.len() {
            if basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tab[i][j].abs() > PIVOT_EPS) {
                    pivot(&mut tab, &mut basis, i, j);
                    i += 1;
                } else {
                    tab.remove(i);
                    basis.remove(i);
                }
            } else {
                i += 1;
            }
        }
        for row in tab.iter_mut() {
            row.drain(art_start..art_start + n_art);
        }
    }
    let ncols = n + m;
    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(c);
    run_simplex(&mut tab, &mut basis, &cost, ncols)?;
    let mut y = vec![0.0; n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            y[bj] = tab[i][ncols].max(0.0);
        }
    }
    Ok(y)
}

fn run_simplex(tab: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], ncols: usize) -> Result<(), LpError> {
    let m = tab.len();
    let max_iter = 50 * (m + ncols) + 1000;
    for _ in 0..max_iter {
        // reduced costs: c_j - c_Bᵀ B⁻¹ a_j, with the tableau already holding B⁻¹ A
        let mut entering = None;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = cost[j];
            for i in 0..m {
                rc -= cost[basis[i]] * tab[i][j];
            }
            if rc < -1e-10 {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else {
            return Ok(());
        };
        let rhs_col = tab[0].len() - 1;
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if tab[i][j] > PIVOT_EPS {
                let ratio = tab[i][rhs_col] / tab[i][j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[i] < basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
        }
        let Some((i, _)) = leave else {
            // unbounded direction; callers always supply bounded problems
            return Err(LpError::IterationLimit);
        };
        pivot(tab, basis, i, j);
    }
    Err(LpError::IterationLimit)
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = tab[r][c];
    for v in tab[r].iter_mut() {
        *v /= p;
    }
    let prow = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[c];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
        }
    }
    basis[r] = c;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_textbook_lp() {
        // max x + y s.t. x + 2y ≤ 4, 3x + y ≤ 6, 0 ≤ x, y ≤ 10 → (1.6, 1.2)
        let sol = minimize_boxed(
            &[-1.0, -1.0],
            &[vec![1.0, 2.0], vec![3.0, 1.0]],
            &[4.0, 6.0],
            &[0.0, 0.0],
            &[10.0, 10.0],
        )
        .unwrap();
        assert!((sol.x[0] - 1.6).abs() < 1e-12 && (sol.x[1] - 1.2).abs() < 1e-12);
        assert!((sol.objective + 2.8).abs() < 1e-12);
    }

    #[test]
    fn negative_bounds_use_phase_one() {
        // min x over x ≥ 2 (written -x ≤ -2) inside [-5, 5]
        let sol = minimize_boxed(&[1.0], &[vec![-1.0]], &[-2.0], &[-5.0], &[5.0]).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasibility() {
        let err = minimize_boxed(&[1.0], &[vec![1.0], vec![-1.0]], &[0.0, -1.0], &[-5.0], &[5.0]);
        assert_eq!(err, Err(LpError::Infeasible));
    }

    #[test]
    fn degenerate_vertex_terminates() {
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![1.0, 0.0]];
        let sol = minimize_boxed(&[-1.0, -2.0], &a, &[0.0, 0.0, 0.0, 0.0], &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert!(sol.objective.abs() < 1e-12);
        assert!(sol.x[0].abs() < 1e-12 && sol.x[1].abs() < 1e-12);
    }
}
