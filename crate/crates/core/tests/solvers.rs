mod common;

use std::f64::consts::PI;

use common::{bisect, dist, rng, uniform};
use whgvi_core::corpus;
use whgvi_core::maps::{FnMapping, Identity};
use whgvi_core::residuals::{ccp_residual, natural_norm, natural_residual};
use whgvi_core::sets::ConvexSet;
use whgvi_core::solvers::{
    basic_homotopy_map, cone_homotopy_map, detect_efe, enumerate_solutions, scalar_root, solve_multistart,
    solve_newton, track_basic_homotopy, track_cone_homotopy, validate_efe_point, GridBox, HomotopyParams,
    SolverParams, TraceOutcome, EFE_MIN_POINTS,
};

fn params() -> SolverParams {
    SolverParams::default()
}

fn grid41() -> GridBox {
    GridBox::cube(2, -2.0, 2.0, 41)
}

#[test]
fn newton_on_example_4_1() {
    let p = corpus::example_4_1().unwrap();
    let cert = solve_newton(&p.f.extend(), &p.g.extend(), &p.k, &[1.0, 1.0], &params()).unwrap();
    assert!(cert.residuals.natural_norm <= 1e-8);
    // the residual is flat near the solution, so only a loose distance follows
    assert!(dist(&cert.point, &[0.0, 0.0]) <= 1e-3, "{:?}", cert.point);
}

#[test]
fn newton_on_example_6_1() {
    let p = corpus::example_6_1().unwrap();
    let cert = solve_newton(&p.f.extend(), &p.g.extend(), &p.k, &[1.0, 1.0], &params()).unwrap();
    let r = cert.point[0];
    assert!((r * r * r + r - 1.0).abs() <= 1e-8);
    // g₂ = x₂³ is flat at 0, so a small residual leaves x₂ only near 0
    assert!(cert.point[1].abs() <= 1e-3);
    assert!((r - bisect(|u| u * u * u + u - 1.0, 0.0, 1.0)).abs() <= 1e-6);
}

#[test]
fn newton_rejects_wrong_start_length() {
    let p = corpus::example_4_1().unwrap();
    assert!(solve_newton(&p.f.extend(), &p.g.extend(), &p.k, &[1.0], &params()).is_err());
}

#[test]
fn scalar_root_examples() {
    let r = scalar_root(|u| u * u - 2.0, 0.0, 2.0, 1e-14).unwrap();
    assert!((r - 2f64.sqrt()).abs() <= 1e-13);
    assert!(scalar_root(|u| u * u + 1.0, -1.0, 1.0, 1e-12).is_err());
    let h = |u: f64| u.powi(3) + (-PI * u / 2.0).sin() - 2.0;
    let r = scalar_root(h, 1.0, 2.0, 1e-14).unwrap();
    assert!((r - bisect(h, 1.0, 2.0)).abs() <= 1e-12);
    assert!((r - corpus::example_5_1_root().unwrap()).abs() <= 1e-12);
}

#[test]
fn basic_homotopy_on_example_4_1() {
    let p = corpus::example_4_1().unwrap();
    let run = track_basic_homotopy(&p.f.extend(), &p.g.extend(), &p.k, &[0.0, 0.0], &params(), &HomotopyParams::default())
        .unwrap();
    assert_eq!(run.trace.outcome, TraceOutcome::ReachedT1);
    assert_eq!(run.trace.records.last().unwrap().t, 1.0);
    let sol = run.solution.unwrap();
    assert!(sol.residuals.natural_norm <= 1e-8);
    assert!(dist(&sol.point, &[0.0, 0.0]) <= 1e-3);
}

#[test]
fn basic_homotopy_on_example_4_2_ends_at_a_solution() {
    let p = corpus::example_4_2().unwrap();
    let run = track_basic_homotopy(&p.f.extend(), &p.g.extend(), &p.k, &[0.0, 0.0], &params(), &HomotopyParams::default())
        .unwrap();
    assert_eq!(run.trace.outcome, TraceOutcome::ReachedT1);
    let x = run.solution.unwrap().point;
    assert!(dist(&x, &[0.0, 0.0]) <= 1e-6 || dist(&x, &[1.0, 0.0]) <= 1e-6, "{x:?}");
}

#[test]
fn trace_t_is_nondecreasing() {
    let p = corpus::example_4_1().unwrap();
    let run = track_basic_homotopy(&p.f.extend(), &p.g.extend(), &p.k, &[0.0, 0.0], &params(), &HomotopyParams::default())
        .unwrap();
    assert!(run.trace.records.windows(2).all(|w| w[1].t >= w[0].t));
    let csv = run.trace.to_csv();
    let ts: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ts.len(), run.trace.records.len());
    assert!(ts.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn cone_homotopy_on_example_5_1() {
    let p = corpus::example_5_1().unwrap();
    let (f, g) = (p.f.extend(), p.g.extend());
    let run = track_cone_homotopy(&f, &g, &p.k, &params(), &HomotopyParams::default()).unwrap();
    assert_eq!(run.trace.outcome, TraceOutcome::ReachedT1);
    let x = run.solution.unwrap().point;
    let h = |u: f64| u.powi(3) + (-PI * u / 2.0).sin() - 2.0;
    let oracle = bisect(h, 1.0, 2.0);
    assert!((x[2] - PI).abs() <= 1e-8, "{x:?}");
    for xi in &x[..2] {
        assert!(h(*xi).abs() <= 1e-8);
        assert!((xi - oracle).abs() <= 1e-6);
    }
}

#[test]
fn zero_solves_leading_cone_problem_of_example_5_1() {
    let p = corpus::example_5_1().unwrap();
    let (f, g) = (p.f.extend(), p.g.extend());
    let kinf = p.k.recession_cone().unwrap();
    let parts = ccp_residual(&f.leading(), &g.leading(), &kinf, &[0.0; 3]).unwrap();
    assert_eq!(parts.max(), 0.0);
}

#[test]
fn homotopy_maps_at_t1_are_the_natural_residual() {
    for p in corpus::all_examples().unwrap() {
        let (f, g) = (p.f.extend(), p.g.extend());
        let kinf = p.k.recession_cone().unwrap();
        let anchor = vec![0.0; p.n];
        let mut r = rng(30);
        for _ in 0..100 {
            let x = uniform(&mut r, p.n, 3.0);
            let nat = natural_residual(&f, &g, &p.k, &x).unwrap();
            let basic = basic_homotopy_map(&f, &g, &p.k, &anchor, &x, 1.0).unwrap();
            let cone = cone_homotopy_map(&f, &g, &p.k, &kinf, &x, 1.0).unwrap();
            assert!(dist(&basic, &nat) <= 1e-12, "{}", p.name);
            assert!(dist(&cone, &nat) <= 1e-12, "{}", p.name);
        }
    }
}

#[test]
fn enumeration_examples() {
    let p = corpus::example_4_2().unwrap();
    let found = enumerate_solutions(&p.f.extend(), &p.g.extend(), &p.k, &grid41(), true, &params()).unwrap();
    let mut pts: Vec<Vec<f64>> = found.iter().map(|c| c.point.clone()).collect();
    pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    assert_eq!(pts.len(), 2);
    assert!(dist(&pts[0], &[0.0, 0.0]) <= 1e-6 && dist(&pts[1], &[1.0, 0.0]) <= 1e-6, "{pts:?}");

    let p = corpus::example_4_1().unwrap();
    let found = enumerate_solutions(&p.f.extend(), &p.g.extend(), &p.k, &grid41(), true, &params()).unwrap();
    assert_eq!(found.len(), 1);
    assert!(dist(&found[0].point, &[0.0, 0.0]) <= 1e-6);

    let p = corpus::example_6_1().unwrap();
    let found = enumerate_solutions(&p.f.extend(), &p.g.extend(), &p.k, &grid41(), true, &params()).unwrap();
    let r = bisect(|u| u * u * u + u - 1.0, 0.0, 1.0);
    assert_eq!(found.len(), 1);
    assert!(dist(&found[0].point, &[r, 0.0]) <= 1e-6);
}

#[test]
fn enumeration_without_refinement_keeps_exact_grid_solutions() {
    let p = corpus::example_4_2().unwrap();
    let found = enumerate_solutions(&p.f.extend(), &p.g.extend(), &p.k, &grid41(), false, &params()).unwrap();
    assert_eq!(found.len(), 2);
}

#[test]
fn enumeration_refuses_high_dimension() {
    let k = ConvexSet::orthant(4);
    let f = Identity(4);
    let grid = GridBox::cube(4, -1.0, 1.0, 3);
    assert!(enumerate_solutions(&f, &Identity(4), &k, &grid, true, &params()).is_err());
}

#[test]
fn multistart_finds_both_solutions_of_example_4_2() {
    let p = corpus::example_4_2().unwrap();
    let found = solve_multistart(&p.f.extend(), &p.g.extend(), &p.k, &GridBox::cube(2, -2.0, 2.0, 5), &params()).unwrap();
    assert!(found.iter().any(|c| dist(&c.point, &[0.0, 0.0]) <= 1e-6));
    assert!(found.iter().any(|c| dist(&c.point, &[1.0, 0.0]) <= 1e-6));
}

#[test]
fn efe_on_infeasible_complementarity_problem() {
    let f = FnMapping::new(2, |_: &[f64]| vec![-1.0, 0.0]);
    let g = Identity(2);
    let k = ConvexSet::orthant(2);
    let anchor = [0.0, 0.0];
    let cert = detect_efe(&f, &g, &k, &anchor, &params(), &HomotopyParams::default()).unwrap().unwrap();
    assert!(cert.points.len() >= EFE_MIN_POINTS);
    assert!(cert.growth.windows(2).all(|w| w[1] > w[0]));
    for pt in &cert.points {
        assert!(pt.alpha > 0.0);
        // re-check membership from scratch: x ∈ ℝ²₊ and −(f + αx) ∈ N(x)
        let v = [1.0 - pt.alpha * pt.x[0], -pt.alpha * pt.x[1]];
        assert!(pt.x.iter().all(|xi| *xi >= -1e-8));
        for i in 0..2 {
            let scale = 1e-6 * (1.0 + pt.alpha * pt.x[i].abs());
            assert!(v[i] <= scale && (pt.x[i] * v[i]).abs() <= scale * (1.0 + pt.x[i].abs()), "{pt:?}");
        }
        assert_eq!(validate_efe_point(&f, &g, &k, &anchor, &pt.x, pt.alpha).unwrap(), (true, true));
    }
}

#[test]
fn no_efe_for_example_4_1() {
    let p = corpus::example_4_1().unwrap();
    let got = detect_efe(&p.f.extend(), &p.g.extend(), &p.k, &[0.0, 0.0], &params(), &HomotopyParams::default()).unwrap();
    assert!(got.is_none());
}

#[test]
fn solvers_are_deterministic() {
    let p = corpus::example_5_1().unwrap();
    let (f, g) = (p.f.extend(), p.g.extend());
    let a = track_cone_homotopy(&f, &g, &p.k, &params(), &HomotopyParams::default()).unwrap();
    let b = track_cone_homotopy(&f, &g, &p.k, &params(), &HomotopyParams::default()).unwrap();
    assert_eq!(a, b);
    let p = corpus::example_4_2().unwrap();
    let grid = GridBox::cube(2, -2.0, 2.0, 5);
    let a = solve_multistart(&p.f.extend(), &p.g.extend(), &p.k, &grid, &params()).unwrap();
    let b = solve_multistart(&p.f.extend(), &p.g.extend(), &p.k, &grid, &params()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn synthetic_planted_solutions_are_enumerated() {
    for p in whgvi_core::synthetic::batch(12, 3).unwrap() {
        let grid = p.probes.search_box.clone().unwrap();
        let found = enumerate_solutions(&p.f.extend(), &p.g.extend(), &p.k, &grid, true, &params()).unwrap();
        let want = &p.expected.as_ref().unwrap().solutions[0];
        assert_eq!(found.len(), 1, "{}", p.name);
        assert!(dist(&found[0].point, want) <= 1e-6, "{}", p.name);
        assert!(natural_norm(&p.f.extend(), &p.g.extend(), &p.k, want).unwrap() <= 1e-12);
    }
}
