//! The worked examples as ready-made problems.
//!
//! Roots that have no closed form are computed by bisection when the problem
//! is built, so the stored solutions carry full double precision.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::analysis::Status;
use crate::error::Result;
use crate::maps::{Degree, Exponent, Primitive, Term, WeaklyHomogeneousMap};
use crate::problem::{Expected, ProblemSpec, Probes};
use crate::sets::{ConvexSet, Interval};
use crate::solvers::{scalar_root, GridBox};

pub const EXAMPLE_IDS: [&str; 9] = ["3.1", "3.2", "4.1", "4.2", "5.1", "6.1", "7.1", "7.2", "7.3"];

/// `"4.1"` → `"example_4_1"`.
pub fn problem_name(id: &str) -> String {
    format!("example_{}", id.replace('.', "_"))
}

pub fn file_name(id: &str) -> String {
    format!("{}.json", problem_name(id))
}

pub fn example(id: &str) -> Result<ProblemSpec> {
    match id {
        "3.1" => example_3_1(),
        "3.2" => example_3_2(),
        "4.1" => example_4_1(),
        "4.2" => example_4_2(),
        "5.1" => example_5_1(),
        "6.1" => example_6_1(),
        "7.1" => example_7_1(),
        "7.2" => example_7_2(),
        "7.3" => example_7_3(),
        other => Err(crate::Error::invalid("example", format!("unknown example id `{other}`"))),
    }
}

pub fn all_examples() -> Result<Vec<ProblemSpec>> {
    EXAMPLE_IDS.iter().map(|id| example(id)).collect()
}

fn r(p: i64, q: i64) -> Exponent {
    Exponent::new(p, q)
}

fn int(p: i64) -> Exponent {
    Exponent::int(p)
}

/// `x_i^e` in component `i` for every `i`.
fn diagonal_power(n: usize, e: Exponent) -> Vec<Term> {
    (0..n).map(|i| Term::power(i, 1.0, i, e)).collect()
}

fn map(n: usize, delta: Degree, lead: Vec<Term>, lower: Vec<Term>, constant: Vec<f64>) -> Result<WeaklyHomogeneousMap> {
    WeaklyHomogeneousMap::new(n, delta, lead, lower, constant, None)
}

fn theorems(pairs: &[(&str, bool)]) -> BTreeMap<String, bool> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn verdicts(pairs: &[(&str, Status)]) -> BTreeMap<String, Status> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn expected(
    id: &str,
    solutions: Vec<Vec<f64>>,
    count: Option<usize>,
    th: &[(&str, bool)],
    vd: &[(&str, Status)],
) -> Option<Expected> {
    Some(Expected {
        example: id.to_string(),
        solutions,
        solution_count: count,
        theorems: theorems(th),
        verdicts: verdicts(vd),
    })
}

use Status::{Falsified as F, Unfalsified as U, VerifiedStructurally as S};

pub fn example_3_1() -> Result<ProblemSpec> {
    let c = ConvexSet::orthant(2);
    let k = ConvexSet::product(vec![Interval::at_least(0.0), Interval::at_least(1.0)])?;
    let f = WeaklyHomogeneousMap::new(
        2,
        Degree::Rational(r(1, 2)),
        diagonal_power(2, r(1, 2)),
        vec![],
        vec![2.0, 0.0],
        Some(c.clone()),
    )?;
    let g = map(2, Degree::Rational(r(1, 3)), diagonal_power(2, r(1, 3)), vec![], vec![0.0, 1.0])?;
    let exp = expected("3.1", vec![vec![0.0, 0.0]], Some(1), &[], &[("strong_by_scaling", F)]);
    ProblemSpec::new(problem_name("3.1"), c, k, f, g, exp, Probes::default())
}

pub fn example_3_2() -> Result<ProblemSpec> {
    let c = ConvexSet::whole(2);
    let k = ConvexSet::orthant(2);
    let f = map(2, Degree::Rational(int(3)), diagonal_power(2, int(3)), vec![], vec![3.0, 6.0])?;
    let g = map(
        2,
        Degree::Rational(int(4)),
        diagonal_power(2, int(4)),
        vec![Term::primitive(0, 1.0, Primitive::Cos, 0, 1.0, 0.0)],
        vec![1.0, 2.0],
    )?;
    let sol = vec![-(3.0f64.cbrt()), -(6.0f64.cbrt())];
    let exp = expected(
        "3.2",
        vec![sol],
        Some(1),
        &[],
        &[("strong_local", F), ("degree_gap", S)],
    );
    let probes = Probes { anchor: Some(vec![0.0, 0.0]), ..Probes::default() };
    ProblemSpec::new(problem_name("3.2"), c, k, f, g, exp, probes)
}

pub fn example_4_1() -> Result<ProblemSpec> {
    let c = ConvexSet::ray(vec![0.0, 0.0], vec![1.0, 0.0])?;
    let k = ConvexSet::ray(vec![2.0, 0.0], vec![1.0, 0.0])?;
    let f = map(
        2,
        Degree::Rational(r(17, 3)),
        diagonal_power(2, r(17, 3)),
        vec![
            Term::monomial(0, 1.0, vec![(0, r(8, 3)), (1, r(5, 3))]),
            Term::monomial(1, 1.0, vec![(0, r(4, 3)), (1, int(1))]),
        ],
        vec![2.0, 1.0],
    )?;
    let g = map(
        2,
        Degree::Rational(int(3)),
        diagonal_power(2, int(3)),
        vec![Term::primitive(0, 1.0, Primitive::RationalDecay, 1, 1.0, 0.0)],
        vec![1.0, 0.0],
    )?;
    let exp = expected(
        "4.1",
        vec![vec![0.0, 0.0]],
        Some(1),
        &[
            ("efe_strict_unique", true),
            ("injective_strict_unique", true),
            ("karamardian_compact", false),
            ("karamardian_injective_compact", false),
        ],
        &[
            ("strict_monotonicity", U),
            ("leading_pairing", U),
            ("injectivity_g", U),
            ("growth_bound", F),
            ("strong_local", F),
            ("strong_by_scaling", U),
            ("g_preimage_c", F),
        ],
    );
    ProblemSpec::new(problem_name("4.1"), c, k, f, g, exp, Probes::default())
}

fn example_4_2_f() -> Result<WeaklyHomogeneousMap> {
    map(
        2,
        Degree::Rational(int(3)),
        diagonal_power(2, int(3)),
        vec![Term::power(0, -1.0, 0, int(2)), Term::power(1, 1.0, 1, int(1))],
        vec![0.0, 0.0],
    )
}

pub fn example_4_2() -> Result<ProblemSpec> {
    let c = ConvexSet::whole(2);
    let k = ConvexSet::ray(vec![-1.0, 0.0], vec![1.0, 0.0])?;
    let g = map(2, Degree::Rational(int(3)), diagonal_power(2, int(3)), vec![], vec![0.0, 0.0])?;
    let exp = expected(
        "4.2",
        vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        Some(2),
        &[("monotone_at_point_compact", true), ("efe_strict_unique", false), ("injective_strict_unique", false)],
        &[("strict_monotonicity", F), ("leading_pairing", U), ("monotone_at_theta", U)],
    );
    ProblemSpec::new(problem_name("4.2"), c, k, example_4_2_f()?, g, exp, Probes::default())
}

/// The `r > 1` with `r³ + sin(−πr/2) = 2`.
pub fn example_5_1_root() -> Result<f64> {
    scalar_root(|r| r.powi(3) + (-PI / 2.0 * r).sin() - 2.0, 1.0, 2.0, 1e-15)
}

pub fn example_5_1() -> Result<ProblemSpec> {
    let c = ConvexSet::product(vec![Interval::free(), Interval::free(), Interval::at_least(0.0)])?;
    let k = ConvexSet::ray(vec![3.0, 3.0, PI.powi(3)], vec![1.0, 1.0, 0.0])?;
    let f_lower = (0..2)
        .map(|i| Term::Primitive {
            out: i,
            coeff: 1.0,
            factors: vec![crate::maps::Factor { var: i, exp: int(1) }],
            func: Primitive::Sin,
            arg: crate::maps::Argument { var: 2, scale: 1.0, offset: 0.0 },
        })
        .collect();
    let f = map(3, Degree::Rational(int(3)), diagonal_power(3, int(3)), f_lower, vec![1.0, 1.0, 0.0])?;
    let g_lower = (0..2).map(|i| Term::primitive(i, 1.0, Primitive::Sin, i, -PI / 2.0, 0.0)).collect();
    let g = map(3, Degree::Rational(int(3)), diagonal_power(3, int(3)), g_lower, vec![1.0, 1.0, 0.0])?;
    let root = example_5_1_root()?;
    let exp = expected(
        "5.1",
        vec![vec![root, root, PI]],
        Some(1),
        &[
            ("karamardian_injective_compact", true),
            ("karamardian_injective_unique", true),
            ("injective_strict_unique", false),
        ],
        &[
            ("injectivity_g", F),
            ("injectivity_g_leading", U),
            ("cone_sol_zero_plain", U),
            ("cone_sol_zero_plus_d_on_f", U),
            ("g_preimage_c", U),
            ("g_tail_in_c", U),
            ("strict_monotonicity", U),
        ],
    );
    let probes = Probes { search_box: Some(GridBox::cube(3, 0.0, 4.0, 21)), ..Probes::default() };
    ProblemSpec::new(problem_name("5.1"), c, k, f, g, exp, probes)
}

/// The real root of `r³ + r − 1`.
pub fn example_6_1_root() -> Result<f64> {
    scalar_root(|r| r.powi(3) + r - 1.0, 0.0, 1.0, 1e-15)
}

pub fn example_6_1() -> Result<ProblemSpec> {
    let c = ConvexSet::whole(2);
    let k = ConvexSet::product(vec![Interval::at_least(1.0), Interval::at_least(0.0)])?;
    let f = map(
        2,
        Degree::Rational(int(5)),
        diagonal_power(2, int(5)),
        diagonal_power(2, int(1)),
        vec![1.0, 1.0],
    )?;
    let g = map(
        2,
        Degree::Rational(int(3)),
        diagonal_power(2, int(3)),
        vec![Term::power(0, 1.0, 0, int(1))],
        vec![0.0, 0.0],
    )?;
    let exp = expected(
        "6.1",
        vec![vec![example_6_1_root()?, 0.0]],
        Some(1),
        &[("exceptional_regularity_compact", true), ("exceptional_regularity_unique", true)],
        &[
            ("er_condition", U),
            ("equ10_x_as_f_d", U),
            ("equ10_x_as_f_zero", U),
            ("g_preimage_c", S),
            ("g_sphere_in_c", S),
            ("strict_monotonicity", U),
        ],
    );
    ProblemSpec::new(problem_name("6.1"), c, k, f, g, exp, Probes::default())
}

fn identity(n: usize) -> Result<WeaklyHomogeneousMap> {
    let mut coeffs = vec![0.0; n * n];
    for i in 0..n {
        coeffs[i * n + i] = 1.0;
    }
    map(n, Degree::Rational(int(1)), vec![Term::tensor(2, coeffs)], vec![], vec![0.0; n])
}

pub fn example_7_1() -> Result<ProblemSpec> {
    let c = ConvexSet::whole(2);
    let k = ConvexSet::product(vec![Interval::at_least(-1.0), Interval::at_least(0.0)])?;
    let exp = expected(
        "7.1",
        vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        Some(2),
        &[("monotone_at_point_compact", true)],
        &[("monotone_at_theta", U), ("leading_pairing", U), ("eta_copositivity", F)],
    );
    ProblemSpec::new(problem_name("7.1"), c, k, example_4_2_f()?, identity(2)?, exp, Probes::default())
}

pub fn example_7_2() -> Result<ProblemSpec> {
    let c = ConvexSet::orthant(2);
    let k = ConvexSet::product(vec![Interval::at_least(0.0), Interval::new(0.0, 2.0 * PI)])?;
    let f = map(
        2,
        Degree::Rational(int(1)),
        vec![Term::power(0, 1.0, 0, int(1))],
        vec![
            Term::primitive(0, 1.0, Primitive::Sin, 0, 1.0, 0.0),
            Term::primitive(1, 1.0, Primitive::Sin, 1, 1.0, 0.0),
        ],
        vec![1.0, 2.0],
    )?;
    let exp = expected(
        "7.2",
        vec![vec![0.0, 0.0]],
        Some(1),
        &[("monotone_at_point_compact", false)],
        &[("eta_copositivity", U), ("monotone_at_theta", F)],
    );
    let probes = Probes { eta: Some(vec![-1.0, -1.0]), ..Probes::default() };
    ProblemSpec::new(problem_name("7.2"), c, k, f, identity(2)?, exp, probes)
}

/// The root of `u³ + 16(u + 1)³ + 3` on `(−2, −1)`.
pub fn example_7_3_root() -> Result<f64> {
    scalar_root(|u| u.powi(3) + 16.0 * (u + 1.0).powi(3) + 3.0, -2.0, -1.0, 1e-15)
}

pub fn example_7_3() -> Result<ProblemSpec> {
    let c = ConvexSet::whole(2);
    let k = ConvexSet::line(vec![0.0, 0.0], vec![1.0, 2.0])?;
    let f = map(2, Degree::Rational(int(3)), diagonal_power(2, int(3)), vec![], vec![1.0, 1.0])?;
    let g = map(2, Degree::Rational(int(1)), diagonal_power(2, int(1)), vec![], vec![1.0, 0.0])?;
    let u = example_7_3_root()?;
    let exp = expected(
        "7.3",
        vec![vec![u, 2.0 * (u + 1.0)]],
        Some(1),
        &[("efe_strict_unique", true), ("karamardian_shift_compact", false)],
        &[
            ("strict_monotonicity", U),
            ("leading_pairing", U),
            ("dual_interior_nonempty", F),
        ],
    );
    ProblemSpec::new(problem_name("7.3"), c, k, f, g, exp, Probes::default())
}
