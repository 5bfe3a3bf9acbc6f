//! Convex set algebra: products of intervals, polyhedra, rays, lines, affine
//! shifts and finite intersections, with exact projections, recession and dual
//! cones, normal-cone membership and the interpolated family `tK + K∞`.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dist, dot, norm, orthogonal_complement, rank, scale, sub, to_matrix};

/// Default membership and projection tolerance.
pub const SET_TOL: f64 = 1e-10;
/// Above this many constraints a polyhedral projection switches to Dykstra.
pub const ACTIVE_SET_MAX_ROWS: usize = 32;
pub const DYKSTRA_MAX_SWEEPS: usize = 10_000;
pub const DYKSTRA_GAP_TOL: f64 = 1e-12;

/// One factor of a product set. `None` stands for an infinite endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Interval {
    /// Builds an interval, mapping infinite endpoints to `None`.
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval {
            lo: if lo == f64::NEG_INFINITY { None } else { Some(lo) },
            hi: if hi == f64::INFINITY { None } else { Some(hi) },
        }
    }

    pub fn free() -> Self {
        Interval { lo: None, hi: None }
    }

    pub fn at_least(lo: f64) -> Self {
        Interval { lo: Some(lo), hi: None }
    }

    pub fn at_most(hi: f64) -> Self {
        Interval { lo: None, hi: Some(hi) }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: Some(v), hi: Some(v) }
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.unwrap_or(f64::INFINITY)
    }

    fn clamp(&self, v: f64) -> f64 {
        let mut out = v;
        if let Some(lo) = self.lo {
            out = out.max(lo);
        }
        if let Some(hi) = self.hi {
            out = out.min(hi);
        }
        out
    }

    fn recession(&self) -> Interval {
        Interval {
            lo: self.lo.map(|_| 0.0),
            hi: self.hi.map(|_| 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexSet {
    Product {
        bounds: Vec<Interval>,
    },
    /// `{x : A x ≤ b}`
    Polyhedron {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    /// `{anchor + s·direction : s ≥ 0}`
    #[serde(rename = "cone_ray")]
    Ray {
        anchor: Vec<f64>,
        direction: Vec<f64>,
    },
    /// `{anchor + s·direction : s ∈ ℝ}`
    Line {
        anchor: Vec<f64>,
        direction: Vec<f64>,
    },
    /// `{shift + y : y ∈ base}`
    AffineShift {
        shift: Vec<f64>,
        base: Box<ConvexSet>,
    },
    Intersection {
        members: Vec<ConvexSet>,
    },
}

/// Inequality description `{x : A x ≤ b}` of a polyhedral set.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspaces {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl ConvexSet {
    pub fn whole(n: usize) -> Self {
        ConvexSet::Product { bounds: vec![Interval::free(); n] }
    }

    pub fn orthant(n: usize) -> Self {
        ConvexSet::Product { bounds: vec![Interval::at_least(0.0); n] }
    }

    pub fn product(bounds: Vec<Interval>) -> Result<Self> {
        Self::checked(ConvexSet::Product { bounds })
    }

    pub fn polyhedron(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        Self::checked(ConvexSet::Polyhedron { a, b })
    }

    pub fn ray(anchor: Vec<f64>, direction: Vec<f64>) -> Result<Self> {
        Self::checked(ConvexSet::Ray { anchor, direction })
    }

    pub fn line(anchor: Vec<f64>, direction: Vec<f64>) -> Result<Self> {
        Self::checked(ConvexSet::Line { anchor, direction })
    }

    pub fn shifted(shift: Vec<f64>, base: ConvexSet) -> Result<Self> {
        Self::checked(ConvexSet::AffineShift { shift, base: Box::new(base) })
    }

    pub fn intersection(members: Vec<ConvexSet>) -> Result<Self> {
        Self::checked(ConvexSet::Intersection { members })
    }

    fn checked(set: ConvexSet) -> Result<Self> {
        set.validate()?;
        Ok(set)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConvexSet::Product { .. } => "product",
            ConvexSet::Polyhedron { .. } => "polyhedron",
            ConvexSet::Ray { .. } => "cone_ray",
            ConvexSet::Line { .. } => "line",
            ConvexSet::AffineShift { .. } => "affine_shift",
            ConvexSet::Intersection { .. } => "intersection",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Product { bounds } => bounds.len(),
            ConvexSet::Polyhedron { a, .. } => a.first().map_or(0, Vec::len),
            ConvexSet::Ray { anchor, .. } | ConvexSet::Line { anchor, .. } => anchor.len(),
            ConvexSet::AffineShift { shift, .. } => shift.len(),
            ConvexSet::Intersection { members } => members.first().map_or(0, ConvexSet::dim),
        }
    }

    /// Checks shapes, finiteness and nonemptiness.
    pub fn validate(&self) -> Result<()> {
        self.validate_at("set")
    }

    pub(crate) fn validate_at(&self, path: &str) -> Result<()> {
        self.validate_shape(path)?;
        match self {
            ConvexSet::Polyhedron { .. } | ConvexSet::Intersection { .. } => {
                let h = self.inequalities();
                project_polyhedron(&h.a, &h.b, &vec![0.0; self.dim()]).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    fn validate_shape(&self, path: &str) -> Result<()> {
        let finite = |v: &[f64], field: &str| -> Result<()> {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{path}.{field}"), "entries must be finite"))
            }
        };
        match self {
            ConvexSet::Product { bounds } => {
                if bounds.is_empty() {
                    return Err(Error::shape(format!("{path}.bounds"), "product needs at least one factor"));
                }
                for (i, iv) in bounds.iter().enumerate() {
                    let bad = iv.lo.is_some_and(|v| !v.is_finite()) || iv.hi.is_some_and(|v| !v.is_finite());
                    if bad {
                        return Err(Error::invalid(format!("{path}.bounds[{i}]"), "use null for infinite endpoints"));
                    }
                    if iv.lo_f64() > iv.hi_f64() {
                        return Err(Error::InfeasibleSet(format!("{path}.bounds[{i}]: lo exceeds hi")));
                    }
                }
            }
            ConvexSet::Polyhedron { a, b } => {
                if a.is_empty() {
                    return Err(Error::shape(format!("{path}.a"), "polyhedron needs at least one row"));
                }
                if a.len() != b.len() {
                    return Err(Error::shape(
                        format!("{path}.b"),
                        format!("{} rows in a but {} entries in b", a.len(), b.len()),
                    ));
                }
                let n = a[0].len();
                if n == 0 {
                    return Err(Error::shape(format!("{path}.a[0]"), "rows must be nonempty"));
                }
                for (i, row) in a.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::shape(format!("{path}.a[{i}]"), format!("expected {n} columns")));
                    }
                    finite(row, &format!("a[{i}]"))?;
                }
                finite(b, "b")?;
            }
            ConvexSet::Ray { anchor, direction } | ConvexSet::Line { anchor, direction } => {
                if anchor.is_empty() || anchor.len() != direction.len() {
                    return Err(Error::shape(format!("{path}.direction"), "anchor and direction lengths differ"));
                }
                finite(anchor, "anchor")?;
                finite(direction, "direction")?;
                if norm(direction) == 0.0 {
                    return Err(Error::invalid(format!("{path}.direction"), "direction must be nonzero"));
                }
            }
            ConvexSet::AffineShift { shift, base } => {
                finite(shift, "shift")?;
                base.validate_shape(&format!("{path}.base"))?;
                if base.dim() != shift.len() {
                    return Err(Error::shape(format!("{path}.shift"), "shift and base dimensions differ"));
                }
            }
            ConvexSet::Intersection { members } => {
                if members.is_empty() {
                    return Err(Error::shape(format!("{path}.members"), "intersection needs a member"));
                }
                let n = members[0].dim();
                for (i, m) in members.iter().enumerate() {
                    m.validate_shape(&format!("{path}.members[{i}]"))?;
                    if m.dim() != n {
                        return Err(Error::shape(format!("{path}.members[{i}]"), "member dimensions differ"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Inequality form `{A x ≤ b}`. Every kind in the algebra is polyhedral.
    pub fn inequalities(&self) -> Halfspaces {
        let n = self.dim();
        match self {
            ConvexSet::Product { bounds } => {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for (i, iv) in bounds.iter().enumerate() {
                    if let Some(hi) = iv.hi {
                        let mut row = vec![0.0; n];
                        row[i] = 1.0;
                        a.push(row);
                        b.push(hi);
                    }
                    if let Some(lo) = iv.lo {
                        let mut row = vec![0.0; n];
                        row[i] = -1.0;
                        a.push(row);
                        b.push(-lo);
                    }
                }
                Halfspaces { a, b }
            }
            ConvexSet::Polyhedron { a, b } => Halfspaces { a: a.clone(), b: b.clone() },
            ConvexSet::Ray { anchor, direction } | ConvexSet::Line { anchor, direction } => {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for w in orthogonal_complement(std::slice::from_ref(direction), n) {
                    let c = dot(&w, anchor);
                    a.push(scale(-1.0, &w));
                    b.push(-c);
                    a.push(w);
                    b.push(c);
                }
                if matches!(self, ConvexSet::Ray { .. }) {
                    let u = scale(1.0 / norm(direction), direction);
                    b.push(-dot(&u, anchor));
                    a.push(scale(-1.0, &u));
                }
                Halfspaces { a, b }
            }
            ConvexSet::AffineShift { shift, base } => {
                let h = base.inequalities();
                let b = h.a.iter().zip(&h.b).map(|(row, bi)| bi + dot(row, shift)).collect();
                Halfspaces { a: h.a, b }
            }
            ConvexSet::Intersection { members } => {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for m in members {
                    let h = m.inequalities();
                    a.extend(h.a);
                    b.extend(h.b);
                }
                Halfspaces { a, b }
            }
        }
    }

    /// Euclidean projection of `z` onto the set.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::shape("z", format!("expected length {}, got {}", self.dim(), z.len())));
        }
        match self {
            ConvexSet::Product { bounds } => Ok(bounds.iter().zip(z).map(|(iv, v)| iv.clamp(*v)).collect()),
            ConvexSet::Ray { anchor, direction } => {
                let s = (dot(direction, &sub(z, anchor)) / dot(direction, direction)).max(0.0);
                Ok(axpy(anchor, s, direction))
            }
            ConvexSet::Line { anchor, direction } => {
                let s = dot(direction, &sub(z, anchor)) / dot(direction, direction);
                Ok(axpy(anchor, s, direction))
            }
            ConvexSet::AffineShift { shift, base } => {
                let y = base.project(&sub(z, shift))?;
                Ok(y.iter().zip(shift).map(|(a, b)| a + b).collect())
            }
            ConvexSet::Polyhedron { a, b } => project_polyhedron(a, b, z),
            ConvexSet::Intersection { members } => {
                let h = self.inequalities();
                if h.a.len() <= ACTIVE_SET_MAX_ROWS {
                    return project_polyhedron(&h.a, &h.b, z);
                }
                let projectors: Vec<Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + '_>> =
                    members.iter().map(|m| Box::new(move |v: &[f64]| m.project(v)) as Box<_>).collect();
                dykstra(&projectors, z)
            }
        }
    }

    /// Distance from `z` to the set.
    pub fn distance(&self, z: &[f64]) -> Result<f64> {
        Ok(dist(&self.project(z)?, z))
    }

    /// Membership with a scale-aware tolerance `tol·(1 + ‖z‖)`.
    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        match self.project(z) {
            Ok(p) => dist(&p, z) <= tol * (1.0 + norm(z)),
            Err(_) => false,
        }
    }

    /// Recession cone `K∞`.
    pub fn recession_cone(&self) -> Result<Cone> {
        let n = self.dim();
        let set = match self {
            ConvexSet::Product { bounds } => ConvexSet::Product { bounds: bounds.iter().map(Interval::recession).collect() },
            ConvexSet::Polyhedron { a, .. } => ConvexSet::Polyhedron { a: a.clone(), b: vec![0.0; a.len()] },
            ConvexSet::Ray { direction, .. } => ConvexSet::Ray { anchor: vec![0.0; n], direction: direction.clone() },
            ConvexSet::Line { direction, .. } => ConvexSet::Line { anchor: vec![0.0; n], direction: direction.clone() },
            ConvexSet::AffineShift { base, .. } => return base.recession_cone(),
            ConvexSet::Intersection { members } => {
                let cones = members.iter().map(|m| m.recession_cone().map(Cone::into_set)).collect::<Result<Vec<_>>>()?;
                ConvexSet::Intersection { members: cones }
            }
        };
        Cone::new(set)
    }

    /// True when the recession cone is `{0}`.
    pub fn is_bounded(&self) -> Result<bool> {
        let rc = self.recession_cone()?;
        let h = rc.inequalities();
        // {d : A d ≤ 0} = {0} iff the rows positively span ℝⁿ, checked by projecting the
        // coordinate directions and their negatives
        let n = self.dim();
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                if norm(&project_polyhedron(&h.a, &h.b, &e)?) > 1e-9 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Points of the set obtained by projecting uniform samples from `[-radius, radius]ⁿ`.
    pub fn sample_members(&self, seed: u64, count: usize, radius: f64) -> Result<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        (0..count)
            .map(|_| {
                let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
                self.project(&z)
            })
            .collect()
    }
}

/// A convex set that is closed under positive scaling and contains the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cone(ConvexSet);

impl Cone {
    /// Validates the cone property on the origin and on sampled members.
    pub fn new(set: ConvexSet) -> Result<Self> {
        set.validate()?;
        let n = set.dim();
        if !set.contains(&vec![0.0; n], SET_TOL) {
            return Err(Error::invalid("cone", "the origin is not a member"));
        }
        for p in set.sample_members(0x5eed, 16, 10.0)? {
            for s in [0.5, 2.0, 10.0] {
                if !set.contains(&scale(s, &p), 1e-9) {
                    return Err(Error::invalid("cone", "membership is not invariant under positive scaling"));
                }
            }
        }
        Ok(Cone(set))
    }

    pub fn orthant(n: usize) -> Self {
        Cone(ConvexSet::orthant(n))
    }

    pub fn whole(n: usize) -> Self {
        Cone(ConvexSet::whole(n))
    }

    pub fn set(&self) -> &ConvexSet {
        &self.0
    }

    pub fn into_set(self) -> ConvexSet {
        self.0
    }

    /// Distance to the dual cone via Moreau: `dist(u, C*) = ‖Π_C(−u)‖`.
    pub fn dual_distance(&self, u: &[f64]) -> Result<f64> {
        Ok(norm(&self.0.project(&scale(-1.0, u))?))
    }

    /// Projection onto the dual cone via Moreau: `Π_{C*}(u) = u + Π_C(−u)`.
    pub fn project_dual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let p = self.0.project(&scale(-1.0, u))?;
        Ok(u.iter().zip(&p).map(|(a, b)| a + b).collect())
    }
}

impl Deref for Cone {
    type Target = ConvexSet;

    fn deref(&self) -> &ConvexSet {
        &self.0
    }
}

pub fn project(k: &ConvexSet, z: &[f64]) -> Result<Vec<f64>> {
    k.project(z)
}

pub fn recession_cone(k: &ConvexSet) -> Result<Cone> {
    k.recession_cone()
}

/// Symbolic dual cone `C* = {u : ⟨u, x⟩ ≥ 0 ∀x ∈ C}`.
pub fn dual_cone(c: &Cone) -> Result<Cone> {
    let n = c.dim();
    let dual = match c.set() {
        ConvexSet::Product { bounds } => {
            let mut out = Vec::with_capacity(n);
            for iv in bounds {
                let d = match (iv.lo, iv.hi) {
                    (Some(lo), None) if lo == 0.0 => Interval::at_least(0.0),
                    (None, Some(hi)) if hi == 0.0 => Interval::at_most(0.0),
                    (Some(lo), Some(hi)) if lo == 0.0 && hi == 0.0 => Interval::free(),
                    (None, None) => Interval::point(0.0),
                    _ => return Err(Error::UnsupportedSet("product factor is not a cone".into())),
                };
                out.push(d);
            }
            ConvexSet::Product { bounds: out }
        }
        ConvexSet::Ray { anchor, direction } if norm(anchor) == 0.0 => {
            ConvexSet::Polyhedron { a: vec![scale(-1.0, direction)], b: vec![0.0] }
        }
        ConvexSet::Line { anchor, direction } if norm(anchor) == 0.0 => ConvexSet::Polyhedron {
            a: vec![direction.clone(), scale(-1.0, direction)],
            b: vec![0.0, 0.0],
        },
        other => polyhedral_dual(&other.inequalities(), n)?,
    };
    let dual = Cone::new(dual)?;
    validate_duality(c, &dual)?;
    Ok(dual)
}

fn polyhedral_dual(h: &Halfspaces, n: usize) -> Result<ConvexSet> {
    // for a cone the right-hand side can be replaced by zero
    let rows: Vec<Vec<f64>> = h.a.iter().filter(|r| norm(r) > 0.0).cloned().collect();
    let mut used = vec![false; rows.len()];
    let mut eq: Vec<Vec<f64>> = Vec::new();
    for i in 0..rows.len() {
        if used[i] {
            continue;
        }
        for j in i + 1..rows.len() {
            if used[j] {
                continue;
            }
            let s = norm(&rows[i]) + norm(&rows[j]);
            if norm(&rows[i].iter().zip(&rows[j]).map(|(a, b)| a + b).collect::<Vec<_>>()) <= 1e-12 * s {
                used[i] = true;
                used[j] = true;
                eq.push(rows[i].clone());
                break;
            }
        }
    }
    let ineq: Vec<Vec<f64>> = rows.iter().zip(&used).filter(|(_, u)| !**u).map(|(r, _)| r.clone()).collect();
    let mut m_rows = eq.clone();
    m_rows.extend(ineq.iter().cloned());
    if m_rows.is_empty() {
        return Ok(ConvexSet::Product { bounds: vec![Interval::point(0.0); n] });
    }
    if rank(&m_rows) < m_rows.len() {
        let mut gens: Vec<Vec<f64>> = ineq.iter().map(|r| scale(-1.0, r)).collect();
        for e in &eq {
            gens.push(e.clone());
            gens.push(scale(-1.0, e));
        }
        return generated_cone(&gens, n);
    }
    // C* = {Eᵀμ − Aᵀλ : λ ≥ 0}; with M = [E; A] of full row rank the coefficients are
    // recovered as (M Mᵀ)⁻¹ M u and the A-block must be nonpositive
    let m = to_matrix(&m_rows, n);
    let gram = &m * m.transpose();
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::UnsupportedSet("singular constraint Gram matrix".into()))?;
    let coef = gram_inv * &m;
    let mut a = Vec::new();
    for i in eq.len()..m_rows.len() {
        a.push((0..n).map(|j| coef[(i, j)]).collect::<Vec<f64>>());
    }
    for w in orthogonal_complement(&m_rows, n) {
        a.push(scale(-1.0, &w));
        a.push(w);
    }
    if a.is_empty() {
        return Ok(ConvexSet::whole(n));
    }
    let b = vec![0.0; a.len()];
    Ok(ConvexSet::Polyhedron { a, b })
}

/// Largest number of generator subsets examined by [`generated_cone`].
const FACET_SEARCH_LIMIT: usize = 200_000;

fn for_each_subset(m: usize, k: usize, visit: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, m, k, &mut Vec::with_capacity(k), visit);
}

fn binomial(m: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(m - i) / (i + 1))
}

/// Inequality form of `cone(gens)`: facet normals are the directions inside the
/// span that are orthogonal to `r − 1` independent generators and nonnegative on all.
fn generated_cone(gens: &[Vec<f64>], n: usize) -> Result<ConvexSet> {
    let perp = orthogonal_complement(gens, n);
    let r = n - perp.len();
    let mut a: Vec<Vec<f64>> = Vec::new();
    if r > 0 {
        let k = r - 1;
        if binomial(gens.len(), k) > FACET_SEARCH_LIMIT {
            return Err(Error::UnsupportedSet("too many generators for facet enumeration".into()));
        }
        let mut facets: Vec<Vec<f64>> = Vec::new();
        for_each_subset(gens.len(), k, &mut |idx: &[usize]| {
            let mut rows: Vec<Vec<f64>> = idx.iter().map(|&i| gens[i].clone()).collect();
            if rank(&rows) < k {
                return;
            }
            rows.extend(perp.iter().cloned());
            let comp = orthogonal_complement(&rows, n);
            if comp.len() != 1 {
                return;
            }
            let w = &comp[0];
            let tol = |g: &[f64]| 1e-10 * (1.0 + norm(g));
            let pos = gens.iter().all(|g| dot(w, g) >= -tol(g));
            let neg = gens.iter().all(|g| dot(w, g) <= tol(g));
            let w = match (pos, neg) {
                (true, _) => w.clone(),
                (false, true) => scale(-1.0, w),
                _ => return,
            };
            if !facets.iter().any(|f| dist(f, &w) <= 1e-9) {
                facets.push(w);
            }
        });
        a.extend(facets.iter().map(|w| scale(-1.0, w)));
    }
    for p in perp {
        a.push(scale(-1.0, &p));
        a.push(p);
    }
    if a.is_empty() {
        return Ok(ConvexSet::whole(n));
    }
    let b = vec![0.0; a.len()];
    Ok(ConvexSet::Polyhedron { a, b })
}

fn validate_duality(c: &Cone, dual: &Cone) -> Result<()> {
    let us = dual.sample_members(0xd0a1, 100, 10.0)?;
    let xs = c.sample_members(0x0c0e, 100, 10.0)?;
    for (u, x) in us.iter().zip(&xs) {
        if dot(u, x) < -1e-10 * (1.0 + norm(u) * norm(x)) {
            return Err(Error::UnsupportedSet("computed dual failed the pairing check".into()));
        }
    }
    Ok(())
}

/// Whether `v ∈ N_K(z)`, decided as `‖Π_{T_K(z)}(v)‖ ≤ tol` with `T_K(z)` the
/// tangent cone spanned by the constraints active at `z`.
pub fn normal_cone_contains(k: &ConvexSet, z: &[f64], v: &[f64], tol: f64) -> Result<bool> {
    if !k.contains(z, tol) {
        return Ok(false);
    }
    let h = k.inequalities();
    let zn = norm(z);
    let mut active_a = Vec::new();
    for (row, bi) in h.a.iter().zip(&h.b) {
        let slack = bi - dot(row, z);
        if slack <= 1e-8 * (1.0 + bi.abs() + norm(row) * zn) {
            active_a.push(row.clone());
        }
    }
    if active_a.is_empty() {
        return Ok(norm(v) <= tol);
    }
    let zeros = vec![0.0; active_a.len()];
    let tangent_part = project_polyhedron(&active_a, &zeros, v)?;
    Ok(norm(&tangent_part) <= tol)
}

/// Projection onto `𝒦(t) = tK + K∞`.
pub fn interpolated_project(k: &ConvexSet, kinf: &Cone, t: f64, z: &[f64]) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid("t", "must lie in [0, 1]"));
    }
    if t == 0.0 {
        kinf.project(z)
    } else {
        Ok(scale(t, &k.project(&scale(1.0 / t, z))?))
    }
}

/// Projection onto `{y : A y ≤ b}`: dual active set for small systems, Dykstra otherwise.
pub fn project_polyhedron(a: &[Vec<f64>], b: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    if a.len() <= ACTIVE_SET_MAX_ROWS {
        match active_set_projection(a, b, z) {
            Ok(y) => return Ok(y),
            Err(ActiveSetFailure::Infeasible) => {
                return Err(Error::InfeasibleSet("no point satisfies the constraints".into()))
            }
            Err(ActiveSetFailure::NoProgress) => {}
        }
    }
    let projectors: Vec<Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + '_>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| Box::new(move |v: &[f64]| Ok(project_halfspace(row, *bi, v))) as Box<_>)
        .collect();
    dykstra(&projectors, z)
}

fn project_halfspace(a: &[f64], b: f64, z: &[f64]) -> Vec<f64> {
    let nn = dot(a, a);
    let excess = dot(a, z) - b;
    if excess <= 0.0 || nn == 0.0 {
        z.to_vec()
    } else {
        axpy(z, -excess / nn, a)
    }
}

#[derive(Debug)]
enum ActiveSetFailure {
    Infeasible,
    NoProgress,
}

/// Dual active-set method (Goldfarb–Idnani with identity Hessian) for
/// `min ½‖y − z‖²` subject to `A y ≤ b`.
fn active_set_projection(a: &[Vec<f64>], b: &[f64], z: &[f64]) -> std::result::Result<Vec<f64>, ActiveSetFailure> {
    let n = z.len();
    let norms: Vec<f64> = a.iter().map(|r| norm(r)).collect();
    for (i, &nr) in norms.iter().enumerate() {
        if nr == 0.0 && b[i] < 0.0 {
            return Err(ActiveSetFailure::Infeasible);
        }
    }
    let mut y = z.to_vec();
    let mut active: Vec<usize> = Vec::new();
    let mut mult: Vec<f64> = Vec::new();
    let max_outer = 20 * (a.len() + n) + 100;
    let zn = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for _ in 0..max_outer {
        // rounding scales with the largest iterate seen, which is O(‖z‖)
        let yn = y.iter().fold(zn, |m, v| m.max(v.abs()));
        let mut pick = None;
        let mut worst = 0.0;
        for i in 0..a.len() {
            if norms[i] == 0.0 || active.contains(&i) {
                continue;
            }
            let s = (b[i] - dot(&a[i], &y)) / norms[i];
            let tol = 1e-13 * (1.0 + yn + b[i].abs() / norms[i]);
            if s < -tol && s < worst {
                worst = s;
                pick = Some(i);
            }
        }
        let Some(p) = pick else {
            return Ok(y);
        };
        // constraints are handled in the ≥ form n·y ≥ c with n = −a, c = −b
        let np = scale(-1.0, &a[p]);
        let mut u_plus = mult.clone();
        u_plus.push(0.0);
        loop {
            let (zdir, r) = gi_directions(a, &active, &np, n).ok_or(ActiveSetFailure::NoProgress)?;
            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for (idx, &rj) in r.iter().enumerate() {
                if rj > 1e-14 {
                    let ratio = u_plus[idx] / rj;
                    if ratio < t1 {
                        t1 = ratio;
                        drop = Some(idx);
                    }
                }
            }
            let zz = dot(&zdir, &np);
            let slack = b[p] - dot(&a[p], &y);
            let t2 = if norm(&zdir) > 1e-12 * norms[p] && zz > 0.0 { (-slack / zz).max(0.0) } else { f64::INFINITY };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(ActiveSetFailure::Infeasible);
            }
            for (u, rj) in u_plus.iter_mut().zip(&r) {
                *u -= t * rj;
            }
            *u_plus.last_mut().expect("candidate multiplier") += t;
            if t2 <= t1 {
                y = axpy(&y, t2, &zdir);
                active.push(p);
                mult = u_plus;
                break;
            }
            if t2.is_finite() {
                y = axpy(&y, t1, &zdir);
            }
            let k = drop.expect("partial step drops a constraint");
            active.remove(k);
            u_plus.remove(k);
        }
    }
    Err(ActiveSetFailure::NoProgress)
}

/// Primal direction `(I − N(NᵀN)⁻¹Nᵀ) n_p` and dual direction `(NᵀN)⁻¹Nᵀ n_p`
/// for the active normals `N = [−a_j]`.
fn gi_directions(a: &[Vec<f64>], active: &[usize], np: &[f64], n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let q = active.len();
    if q == 0 {
        return Some((np.to_vec(), Vec::new()));
    }
    let cols: Vec<Vec<f64>> = active.iter().map(|&j| scale(-1.0, &a[j])).collect();
    let gram = nalgebra::DMatrix::from_fn(q, q, |i, j| dot(&cols[i], &cols[j]));
    let rhs: Vec<f64> = cols.iter().map(|c| dot(c, np)).collect();
    let r = crate::linalg::solve_square(&gram, &rhs)?;
    let mut zdir = np.to_vec();
    for (c, rj) in cols.iter().zip(&r) {
        for i in 0..n {
            zdir[i] -= rj * c[i];
        }
    }
    Some((zdir, r))
}

/// Dykstra's alternating projections onto the intersection of closed convex sets.
pub fn dykstra(projectors: &[Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + '_>], z: &[f64]) -> Result<Vec<f64>> {
    let mut x = z.to_vec();
    let mut incr = vec![vec![0.0; z.len()]; projectors.len()];
    for _ in 0..DYKSTRA_MAX_SWEEPS {
        let prev = x.clone();
        for (p, inc) in projectors.iter().zip(incr.iter_mut()) {
            let shifted: Vec<f64> = x.iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
            let y = p(&shifted)?;
            for i in 0..x.len() {
                inc[i] = shifted[i] - y[i];
            }
            x = y;
        }
        if dist(&x, &prev) <= DYKSTRA_GAP_TOL * (1.0 + norm(&x)) {
            return Ok(x);
        }
    }
    Err(Error::UnsupportedSet("Dykstra iteration did not converge".into()))
}
