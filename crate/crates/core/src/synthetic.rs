//! Random affine variational inequalities with a planted solution.
//!
//! Each generator draws a polyhedral `K` of one set kind with at most six
//! inequality rows, picks a point `x*` of the oracle grid inside `K`, and sets
//! `f(x) = Mx + q` with `M` positive definite and `q = −Mx* − v` for a random
//! `v ∈ N_K(x*)`. With `g` the identity, `x*` is then the only solution.
//! All set data are multiples of one half so grid points land on faces exactly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::maps::{Degree, Exponent, Term, WeaklyHomogeneousMap};
use crate::problem::{Expected, ProblemSpec, Probes};
use crate::sets::{ConvexSet, Interval};
use crate::solvers::GridBox;

/// Largest number of inequality rows a generated `K` may have.
pub const MAX_FACETS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Product,
    Polyhedron,
    Ray,
    Line,
    Shift,
    Intersection,
}

impl Generator {
    pub const ALL: [Generator; 6] = [
        Generator::Product,
        Generator::Polyhedron,
        Generator::Ray,
        Generator::Line,
        Generator::Shift,
        Generator::Intersection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Product => "product",
            Generator::Polyhedron => "polyhedron",
            Generator::Ray => "cone_ray",
            Generator::Line => "line",
            Generator::Shift => "affine_shift",
            Generator::Intersection => "intersection",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Generator::ALL.into_iter().find(|g| g.name() == name)
    }
}

/// The grid on which the planted solution lies: `[−2, 2]ⁿ` with spacing ½.
pub fn oracle_grid(n: usize) -> GridBox {
    GridBox::cube(n, -2.0, 2.0, 9)
}

fn half(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    0.5 * f64::from(rng.gen_range(2 * lo..=2 * hi))
}

fn grid_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| half(rng, -2, 2)).collect()
}

fn integer_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-2..=2))).collect();
        if v.iter().any(|x| *x != 0.0) {
            return v;
        }
    }
}

/// Rows `a` with `a·c ≤ b` and slack a multiple of ½, so `c ∈ K`.
fn halfspaces_through(rng: &mut ChaCha8Rng, c: &[f64], rows: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = Vec::with_capacity(rows);
    let mut b = Vec::with_capacity(rows);
    for _ in 0..rows {
        let row = integer_vector(rng, c.len());
        b.push(dot(&row, c) + half(rng, 0, 1));
        a.push(row);
    }
    (a, b)
}

fn random_set(kind: Generator, n: usize, rng: &mut ChaCha8Rng) -> Result<ConvexSet> {
    match kind {
        Generator::Product => {
            let bounds = (0..n)
                .map(|_| match rng.gen_range(0..4) {
                    0 => Interval::free(),
                    1 => Interval::at_least(half(rng, -2, 1)),
                    2 => Interval::at_most(half(rng, -1, 2)),
                    _ => {
                        let lo = half(rng, -2, 1);
                        Interval::new(lo, lo + half(rng, 0, 2).max(0.5))
                    }
                })
                .collect();
            ConvexSet::product(bounds)
        }
        Generator::Polyhedron => {
            let c = grid_point(rng, n);
            let rows = rng.gen_range(n..=MAX_FACETS);
            let (a, b) = halfspaces_through(rng, &c, rows);
            ConvexSet::polyhedron(a, b)
        }
        Generator::Ray => ConvexSet::ray(grid_point(rng, n), integer_vector(rng, n)),
        Generator::Line => ConvexSet::line(grid_point(rng, n), integer_vector(rng, n)),
        Generator::Shift => {
            let rows = rng.gen_range(1..=n.min(MAX_FACETS));
            let (a, _) = halfspaces_through(rng, &vec![0.0; n], rows);
            let cone = ConvexSet::polyhedron(a.clone(), vec![0.0; a.len()])?;
            ConvexSet::shifted(grid_point(rng, n), cone)
        }
        Generator::Intersection => {
            let c = grid_point(rng, n);
            let orthant = ConvexSet::product(c.iter().map(|v| Interval::at_least(v - half(rng, 0, 1))).collect())?;
            let rows = rng.gen_range(1..=2);
            let (a, b) = halfspaces_through(rng, &c, rows);
            ConvexSet::intersection(vec![orthant, ConvexSet::polyhedron(a, b)?])
        }
    }
}

/// `BBᵀ + S + ½I` with `S` skew, so `xᵀMx ≥ ½‖x‖²`.
fn strongly_monotone_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = dot(&b[i], &b[j]);
        }
        m[i][i] += 0.5;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let s = rng.gen_range(-1.0..=1.0);
            m[i][j] += s;
            m[j][i] -= s;
        }
    }
    m
}

fn affine_map(m: &[Vec<f64>], q: Vec<f64>) -> Result<WeaklyHomogeneousMap> {
    let n = m.len();
    let coeffs = m.iter().flatten().copied().collect();
    WeaklyHomogeneousMap::new(n, Degree::Rational(Exponent::int(1)), vec![Term::tensor(2, coeffs)], vec![], q, None)
}

fn identity_map(n: usize) -> Result<WeaklyHomogeneousMap> {
    let m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    affine_map(&m, vec![0.0; n])
}

/// One instance from `kind` in dimension `n ∈ {2, 3}`.
pub fn generate(kind: Generator, n: usize, seed: u64) -> Result<ProblemSpec> {
    if !(2..=3).contains(&n) {
        return Err(Error::invalid("n", "synthetic problems have dimension 2 or 3"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = random_set(kind, n, &mut rng)?;
    let h = k.inequalities();
    if h.a.len() > MAX_FACETS {
        return Err(Error::invalid("k", format!("{} rows exceed the facet budget", h.a.len())));
    }
    let members: Vec<Vec<f64>> = oracle_grid(n).points().into_iter().filter(|p| k.contains(p, 1e-12)).collect();
    let active = |p: &[f64]| -> Vec<usize> {
        (0..h.a.len()).filter(|&i| (dot(&h.a[i], p) - h.b[i]).abs() <= 1e-12).collect()
    };
    let boundary: Vec<&Vec<f64>> = members.iter().filter(|p| !active(p).is_empty()).collect();
    let xstar = if !boundary.is_empty() && rng.gen_bool(2.0 / 3.0) {
        (*boundary.choose(&mut rng).expect("nonempty")).clone()
    } else {
        members
            .choose(&mut rng)
            .ok_or_else(|| Error::SamplerExhausted("no grid point lies in K".into()))?
            .clone()
    };
    let mut v = vec![0.0; n];
    for i in active(&xstar) {
        let mu = rng.gen_range(0.0..=2.0);
        for (vj, aij) in v.iter_mut().zip(&h.a[i]) {
            *vj += mu * aij;
        }
    }
    let m = strongly_monotone_matrix(&mut rng, n);
    let q: Vec<f64> = (0..n).map(|i| -dot(&m[i], &xstar) - v[i]).collect();
    let expected = Expected {
        example: format!("synthetic/{}", kind.name()),
        solutions: vec![xstar],
        solution_count: Some(1),
        ..Expected::default()
    };
    let probes = Probes { search_box: Some(oracle_grid(n)), ..Probes::default() };
    ProblemSpec::new(
        format!("synthetic_{}_{seed}", kind.name()),
        ConvexSet::whole(n),
        k,
        affine_map(&m, q)?,
        identity_map(n)?,
        Some(expected),
        probes,
    )
}

/// `count` instances cycling through the generators, dimensions drawn from `{2, 3}`.
pub fn batch(count: usize, seed: u64) -> Result<Vec<ProblemSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let kind = Generator::ALL[i % Generator::ALL.len()];
            let n = rng.gen_range(2..=3);
            generate(kind, n, rng.gen())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residuals::natural_norm;

    #[test]
    fn planted_point_solves() {
        for kind in Generator::ALL {
            for seed in 0..5 {
                let p = generate(kind, 3, seed).unwrap();
                let x = &p.expected.as_ref().unwrap().solutions[0];
                let r = natural_norm(&p.f.extend(), &p.g.extend(), &p.k, x).unwrap();
                assert!(r <= 1e-12, "{} seed {seed}: residual {r:e}", kind.name());
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in Generator::ALL {
            assert_eq!(Generator::from_name(kind.name()), Some(kind));
        }
    }
}
