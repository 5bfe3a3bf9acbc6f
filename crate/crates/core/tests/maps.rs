mod common;

use std::sync::OnceLock;

use common::{dist, rng, uniform};
use proptest::prelude::*;
use rand::Rng;
use whgvi_core::corpus;
use whgvi_core::error::Error;
use whgvi_core::maps::{
    extend_via_projection, tensor_apply, verify_decomposition, Degree, Exponent, Term, WeaklyHomogeneousMap,
};
use whgvi_core::problem::ProblemSpec;
use whgvi_core::sets::ConvexSet;

fn examples() -> &'static [ProblemSpec] {
    static ALL: OnceLock<Vec<ProblemSpec>> = OnceLock::new();
    ALL.get_or_init(|| corpus::all_examples().unwrap())
}

fn r(p: i64, q: i64) -> Degree {
    Degree::Rational(Exponent::new(p, q))
}

/// Sum over all index tuples, written out without contraction.
fn brute_force_tensor(order: usize, n: usize, coeffs: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (flat, a) in coeffs.iter().enumerate() {
        let mut idx = Vec::with_capacity(order);
        let mut rest = flat;
        for _ in 0..order {
            idx.push(rest % n);
            rest /= n;
        }
        idx.reverse();
        let prod: f64 = idx[1..].iter().map(|&j| x[j]).product();
        out[idx[0]] += a * prod;
    }
    out
}

#[test]
fn eval_examples() {
    let p41 = corpus::example_4_1().unwrap();
    assert_eq!(p41.f.eval(&[0.0, 0.0]).unwrap(), vec![2.0, 1.0]);
    // (1, 1) lies off the ray C, so read the leading formula on all of ℝ²
    let mut free = p41.f.clone();
    free.domain = None;
    assert_eq!(free.eval_leading(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);

    let p61 = corpus::example_6_1().unwrap();
    assert_eq!(p61.g.eval(&[1.0, 1.0]).unwrap(), vec![2.0, 1.0]);

    let p32 = corpus::example_3_2().unwrap();
    assert_eq!(p32.g.eval_leading(&[1.0, 2.0]).unwrap(), vec![1.0, 16.0]);
}

#[test]
fn leading_part_vanishes_at_origin() {
    for p in examples() {
        for (name, m) in [("f", &p.f), ("g", &p.g)] {
            let z = vec![0.0; p.n];
            assert!(m.eval_leading(&z).unwrap().iter().all(|v| *v == 0.0), "{} {name}", p.name);
        }
    }
}

#[test]
fn constant_map_is_constant() {
    let m = WeaklyHomogeneousMap::new(2, r(1, 1), vec![Term::tensor(2, vec![0.0; 4])], vec![], vec![3.0, -1.0], None)
        .unwrap();
    let mut g = rng(10);
    for _ in 0..20 {
        assert_eq!(m.eval(&uniform(&mut g, 2, 100.0)).unwrap(), vec![3.0, -1.0]);
    }
}

#[test]
fn tensor_apply_examples() {
    assert_eq!(tensor_apply(2, &[1.0, 0.0, 0.0, 1.0], &[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
    assert_eq!(tensor_apply(3, &[2.0], &[3.0]).unwrap(), vec![18.0]);
    let mut a = vec![0.0; 8];
    a[0] = 1.0; // a₁₁₁
    a[3] = 1.0; // a₁₂₂
    assert_eq!(tensor_apply(3, &a, &[2.0, 3.0]).unwrap(), vec![13.0, 0.0]);
    assert_eq!(brute_force_tensor(3, 2, &a, &[2.0, 3.0]), vec![13.0, 0.0]);
}

#[test]
fn tensor_apply_rejects_bad_shapes() {
    assert!(matches!(tensor_apply(3, &[1.0; 7], &[1.0, 2.0]), Err(Error::ShapeMismatch { .. })));
    assert!(matches!(tensor_apply(1, &[1.0, 2.0], &[1.0, 2.0]), Err(Error::ShapeMismatch { .. })));
}

proptest! {
    #[test]
    fn tensor_apply_matches_brute_force(order in 2usize..=4, n in 1usize..=3, seed in any::<u64>()) {
        let mut g = rng(seed);
        let coeffs: Vec<f64> = (0..n.pow(order as u32)).map(|_| g.gen_range(-2.0..2.0)).collect();
        let x = uniform(&mut g, n, 2.0);
        let got = tensor_apply(order, &coeffs, &x).unwrap();
        let want = brute_force_tensor(order, n, &coeffs, &x);
        prop_assert!(dist(&got, &want) <= 1e-12 * (1.0 + want.iter().map(|v| v.abs()).sum::<f64>()));
    }

    #[test]
    fn leading_part_is_homogeneous(idx in 0usize..9, lam in 0.1f64..20.0, seed in any::<u64>()) {
        let p = &examples()[idx];
        let mut g = rng(seed);
        for m in [&p.f, &p.g] {
            let f = m.extend();
            let x = m.domain().project(&uniform(&mut g, p.n, 2.0)).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| lam * v).collect();
            let lhs = f.eval_leading(&scaled);
            let rhs: Vec<f64> = f.eval_leading(&x).iter().map(|v| lam.powf(m.delta()) * v).collect();
            let size = 1.0 + rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
            prop_assert!(dist(&lhs, &rhs) <= 1e-9 * size, "{}", p.name);
        }
    }
}

#[test]
fn decomposition_passes_on_corpus() {
    for p in examples() {
        for (name, m) in [("f", &p.f), ("g", &p.g)] {
            let lambda_max = if p.name == "example_3_1" { 1e15 } else { 1e6 };
            let rep = verify_decomposition(m, 16, lambda_max);
            assert!(rep.pass, "{} {name}: {:?}", p.name, rep.gaps);
        }
    }
}

#[test]
fn decomposition_of_example_4_1() {
    let p = corpus::example_4_1().unwrap();
    assert!(verify_decomposition(&p.f, 16, 1e6).pass);
}

#[test]
fn decomposition_of_example_3_1_tracks_constant_decay() {
    let p = corpus::example_3_1().unwrap();
    // the constant (2, 0) divided by λ^{1/2} is the whole gap, so 10⁶ is too
    // early for the 1e-4 threshold and 10¹⁵ is not
    let early = verify_decomposition(&p.f, 16, 1e6);
    let late = verify_decomposition(&p.f, 16, 1e15);
    for rep in [&early, &late] {
        for (lam, gap) in rep.lambdas.iter().zip(&rep.gaps) {
            assert!((gap - 2.0 / lam.sqrt()).abs() <= 1e-9 * gap.max(1.0), "λ = {lam}: {gap}");
        }
    }
    assert!(!early.pass && (early.terminal_gap - 2e-3).abs() <= 1e-12);
    assert!(late.pass);

    // g has degree 1/3 and a unit constant, so its gap is λ^{-1/3}
    let g = verify_decomposition(&p.g, 16, 1e6);
    for (lam, gap) in g.lambdas.iter().zip(&g.gaps) {
        assert!((gap - lam.powf(-1.0 / 3.0)).abs() <= 1e-9, "λ = {lam}: {gap}");
    }
    assert!(!g.pass);
}

#[test]
fn misdeclared_leading_term_fails() {
    // x² declared as the leading part of degree 3
    let m = WeaklyHomogeneousMap {
        n: 1,
        delta: r(3, 1),
        leading_terms: vec![Term::power(0, 1.0, 0, Exponent::int(2))],
        lower_terms: vec![],
        constant: vec![0.0],
        domain: None,
    };
    assert!(!verify_decomposition(&m, 4, 1e6).pass);
}

#[test]
fn extension_clamps_into_domain() {
    let p = corpus::example_3_1().unwrap();
    let f = extend_via_projection(&p.f);
    assert_eq!(f.eval(&[-1.0, 4.0]), vec![2.0, 2.0]);
    assert_eq!(f.eval(&[-1.0, 4.0]), p.f.eval(&[0.0, 4.0]).unwrap());
    assert!(matches!(p.f.eval(&[-1.0, 4.0]), Err(Error::DomainViolation(_))));

    let mut g = rng(11);
    for _ in 0..50 {
        let x = p.c.project(&uniform(&mut g, 2, 5.0)).unwrap();
        assert_eq!(f.eval(&x), p.f.eval(&x).unwrap());
    }
}

#[test]
fn extension_over_whole_space_is_identity() {
    let p = corpus::example_4_2().unwrap();
    let f = p.f.extend();
    let mut g = rng(12);
    for _ in 0..50 {
        let x = uniform(&mut g, 2, 2.0);
        assert_eq!(f.eval(&x), p.f.eval(&x).unwrap());
    }
}

#[test]
fn invariants_hold_on_corpus() {
    for p in examples() {
        p.f.check_invariants(1, 8).unwrap();
        p.g.check_invariants(1, 8).unwrap();
    }
}

fn example_json() -> serde_json::Value {
    serde_json::from_str(&corpus::example_4_1().unwrap().to_json()).unwrap()
}

#[test]
fn wrong_tensor_shape_names_the_field() {
    let mut v = example_json();
    v["f"]["leading_terms"][0] = serde_json::json!({"kind": "tensor", "order": 3, "coeffs": [1.0, 2.0, 3.0]});
    let err = ProblemSpec::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("f.leading_terms[0]"), "{err}");
}

#[test]
fn nonpositive_degree_is_rejected() {
    let mut v = example_json();
    v["g"]["delta"] = serde_json::json!([0, 1]);
    let err = ProblemSpec::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("g.delta"), "{err}");
}

#[test]
fn even_root_needs_nonnegative_domain() {
    let root = vec![Term::power(0, 1.0, 0, Exponent::new(1, 2))];
    assert!(WeaklyHomogeneousMap::new(1, r(1, 2), root.clone(), vec![], vec![0.0], None).is_err());
    let half_line = ConvexSet::orthant(1);
    assert!(WeaklyHomogeneousMap::new(1, r(1, 2), root, vec![], vec![0.0], Some(half_line)).is_ok());
}
