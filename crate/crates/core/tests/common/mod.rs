#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use whgvi_core::sets::{ConvexSet, Interval};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-r..=r)).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One set of every kind in the algebra, in three dimensions.
pub fn every_kind() -> Vec<(&'static str, ConvexSet)> {
    let product = ConvexSet::product(vec![Interval::at_least(0.0), Interval::new(-1.0, 2.0), Interval::free()]).unwrap();
    let polyhedron = ConvexSet::polyhedron(
        vec![vec![1.0, 1.0, 1.0], vec![-1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![1.0, -2.0, 0.5]],
        vec![3.0, 0.0, 1.0, 2.0],
    )
    .unwrap();
    let ray = ConvexSet::ray(vec![1.0, 0.0, -1.0], vec![1.0, 2.0, 0.5]).unwrap();
    let line = ConvexSet::line(vec![0.0, 1.0, 0.0], vec![-1.0, 1.0, 3.0]).unwrap();
    let shift = ConvexSet::shifted(vec![2.0, -1.0, 0.5], ConvexSet::orthant(3)).unwrap();
    let intersection = ConvexSet::intersection(vec![
        ConvexSet::orthant(3),
        ConvexSet::polyhedron(vec![vec![1.0, 2.0, -1.0]], vec![4.0]).unwrap(),
        ConvexSet::product(vec![Interval::free(), Interval::at_most(3.0), Interval::new(-5.0, 5.0)]).unwrap(),
    ])
    .unwrap();
    vec![
        ("product", product),
        ("polyhedron", polyhedron),
        ("cone_ray", ray),
        ("line", line),
        ("affine_shift", shift),
        ("intersection", intersection),
    ]
}

/// Plain bisection on a sign change, run to the floating-point limit.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) * f(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) == 0.0 {
            return mid;
        }
        if (f(mid) < 0.0) == (f(lo) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
