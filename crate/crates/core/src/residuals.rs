//! Merit functions that decide whether a point solves `GVI(f, g, K)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};
use crate::lp;
use crate::maps::Mapping;
use crate::sets::{Cone, ConvexSet};

/// Natural-residual norm at or below which a point counts as a solution.
pub const SOLUTION_TOL: f64 = 1e-8;
/// Largest acceptable direct gap for a reported solution.
pub const GAP_TOL: f64 = 1e-6;
/// Radius of the ball used by [`vi_gap`] in reports.
pub const REPORT_GAP_RADIUS: f64 = 1e3;

/// `g(x) − Π_K[g(x) − f(x)]`, zero exactly at solutions.
pub fn natural_residual(f: &dyn Mapping, g: &dyn Mapping, k: &ConvexSet, x: &[f64]) -> Result<Vec<f64>> {
    let gx = g.apply(x);
    let fx = f.apply(x);
    let p = k.project(&sub(&gx, &fx))?;
    Ok(sub(&gx, &p))
}

pub fn natural_norm(f: &dyn Mapping, g: &dyn Mapping, k: &ConvexSet, x: &[f64]) -> Result<f64> {
    Ok(norm(&natural_residual(f, g, k, x)?))
}

/// Direct gap `max(0, sup_{y ∈ K, ‖y‖∞ ≤ radius} ⟨f(x), g(x) − y⟩)`, by LP.
///
/// A recession direction `d` with `⟨f(x), d⟩ < 0` makes the true gap infinite;
/// the returned value is then at least `−min ⟨f(x), d⟩` over unit-box directions.
pub fn vi_gap(f: &dyn Mapping, g: &dyn Mapping, k: &ConvexSet, x: &[f64], radius: f64) -> Result<f64> {
    let gx = g.apply(x);
    let fx = f.apply(x);
    let member_tol = SOLUTION_TOL;
    let d = k.distance(&gx)?;
    if d > member_tol * (1.0 + norm(&gx)) {
        return Err(Error::NotInK { distance: d });
    }
    let h = k.inequalities();
    let n = gx.len();
    let lo = vec![-radius; n];
    let hi = vec![radius; n];
    // sup ⟨f, g − y⟩ = ⟨f, g⟩ − inf ⟨f, y⟩
    let inner = lp::minimize_boxed(&fx, &h.a, &h.b, &lo, &hi)
        .map_err(|e| Error::UnsupportedSet(format!("gap LP failed: {e:?}")))?;
    let mut gap = (dot(&fx, &gx) - inner.objective).max(0.0);
    let zeros = vec![0.0; h.a.len()];
    let unit_lo = vec![-1.0; n];
    let unit_hi = vec![1.0; n];
    let rec = lp::minimize_boxed(&fx, &h.a, &zeros, &unit_lo, &unit_hi)
        .map_err(|e| Error::UnsupportedSet(format!("recession LP failed: {e:?}")))?;
    if rec.objective < -SOLUTION_TOL * (1.0 + norm(&fx)) {
        gap = gap.max(-rec.objective);
    }
    Ok(gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcpParts {
    pub dist_primal: f64,
    pub dist_dual: f64,
    pub pairing: f64,
}

impl CcpParts {
    pub fn max(&self) -> f64 {
        self.dist_primal.max(self.dist_dual).max(self.pairing)
    }
}

/// `(dist(g(x), C), dist(f(x), C*), |⟨f(x), g(x)⟩|)` for the cone problem.
pub fn ccp_residual(f: &dyn Mapping, g: &dyn Mapping, c: &Cone, x: &[f64]) -> Result<CcpParts> {
    let gx = g.apply(x);
    let fx = f.apply(x);
    Ok(CcpParts {
        dist_primal: c.distance(&gx)?,
        dist_dual: c.dual_distance(&fx)?,
        pairing: dot(&fx, &gx).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub point: Vec<f64>,
    pub natural_norm: f64,
    /// `None` when `g(x) ∉ K`, which already rules the point out.
    pub vi_gap: Option<f64>,
    /// Present when `K` is a cone.
    pub ccp_parts: Option<CcpParts>,
    pub tol: f64,
}

impl ResidualReport {
    pub fn is_solution(&self) -> bool {
        self.natural_norm <= self.tol
    }
}

/// Evaluates every applicable merit function at `x`.
pub fn residual_report(f: &dyn Mapping, g: &dyn Mapping, k: &ConvexSet, x: &[f64]) -> Result<ResidualReport> {
    let natural_norm = natural_norm(f, g, k, x)?;
    let vi_gap = match vi_gap(f, g, k, x, REPORT_GAP_RADIUS) {
        Ok(v) => Some(v),
        Err(Error::NotInK { .. }) => None,
        Err(e) => return Err(e),
    };
    let ccp_parts = match Cone::new(k.clone()) {
        Ok(c) => Some(ccp_residual(f, g, &c, x)?),
        Err(_) => None,
    };
    Ok(ResidualReport { point: x.to_vec(), natural_norm, vi_gap, ccp_parts, tol: SOLUTION_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{FnMapping, Identity};
    use crate::sets::Interval;

    #[test]
    fn whole_space_residual_is_f() {
        let f = FnMapping::new(2, |x: &[f64]| vec![x[0] * x[0] + 1.0, -x[1]]);
        let r = natural_residual(&f, &Identity(2), &ConvexSet::whole(2), &[3.0, 2.0]).unwrap();
        assert_eq!(r, vec![10.0, -2.0]);
    }

    #[test]
    fn pairing_violation_only() {
        let f = FnMapping::new(2, |_: &[f64]| vec![1.0, 0.0]);
        let g = FnMapping::new(2, |_: &[f64]| vec![1.0, 1.0]);
        let parts = ccp_residual(&f, &g, &Cone::orthant(2), &[0.0, 0.0]).unwrap();
        assert_eq!(parts, CcpParts { dist_primal: 0.0, dist_dual: 0.0, pairing: 1.0 });
    }

    #[test]
    fn zero_f_has_zero_gap() {
        let f = FnMapping::new(2, |_: &[f64]| vec![0.0, 0.0]);
        let k = ConvexSet::product(vec![Interval::at_least(0.0), Interval::new(-1.0, 1.0)]).unwrap();
        assert_eq!(vi_gap(&f, &Identity(2), &k, &[4.0, 0.5], 1e6).unwrap(), 0.0);
        assert!(matches!(vi_gap(&f, &Identity(2), &k, &[-4.0, 0.5], 1e6), Err(Error::NotInK { .. })));
    }

    #[test]
    fn descent_along_recession_direction_is_positive_gap() {
        // f = (−1, 0) on the orthant: y = (s, 0) with s → ∞ drives ⟨f, g − y⟩ up
        let f = FnMapping::new(2, |_: &[f64]| vec![-1.0, 0.0]);
        let gap = vi_gap(&f, &Identity(2), &ConvexSet::orthant(2), &[0.0, 0.0], 1.0).unwrap();
        assert!(gap >= 1.0);
    }
}
