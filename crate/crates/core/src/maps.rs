//! Weakly homogeneous mappings `f = f∞ + f̄ + p` built from a closed term
//! library: tensor actions `𝒜x^{m−1}`, monomials with rational exponents, and
//! monomials multiplied by a bounded or affine primitive of one coordinate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, normalized, scale, sub};
use crate::lp;
use crate::sets::ConvexSet;

/// Rational exponent `p/q`, serialised as the integer pair `[p, q]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Exponent {
    pub p: i64,
    pub q: i64,
}

impl From<[i64; 2]> for Exponent {
    fn from(v: [i64; 2]) -> Self {
        Exponent { p: v[0], q: v[1] }
    }
}

impl From<Exponent> for [i64; 2] {
    fn from(e: Exponent) -> Self {
        [e.p, e.q]
    }
}

impl Exponent {
    pub fn new(p: i64, q: i64) -> Self {
        Exponent { p, q }
    }

    pub fn int(p: i64) -> Self {
        Exponent { p, q: 1 }
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn even_denominator(&self) -> bool {
        self.q % 2 == 0
    }

    /// Signed real power. `None` when the base is negative and `q` is even.
    pub fn apply(&self, x: f64) -> Option<f64> {
        if self.p == 0 {
            return Some(1.0);
        }
        if self.q == 1 {
            return Some(x.powi(self.p as i32));
        }
        if x == 0.0 {
            return Some(0.0);
        }
        if x > 0.0 {
            return Some(positive_power(x, *self));
        }
        if self.even_denominator() {
            return None;
        }
        let mag = positive_power(-x, *self);
        Some(if self.p % 2 == 0 { mag } else { -mag })
    }
}

fn positive_power(x: f64, e: Exponent) -> f64 {
    if e.q == 3 {
        x.cbrt().powi(e.p as i32)
    } else if e.q == 2 {
        x.sqrt().powi(e.p as i32)
    } else {
        x.powf(e.value())
    }
}

/// Leading degree, either rational `[p, q]` or a plain real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Degree {
    Rational(Exponent),
    Real(f64),
}

impl Degree {
    pub fn value(&self) -> f64 {
        match self {
            Degree::Rational(e) => e.value(),
            Degree::Real(v) => *v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub var: usize,
    pub exp: Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    Sin,
    Cos,
    /// `u ↦ 1/(1 + u²)`
    RationalDecay,
    /// `u ↦ u`
    Affine,
}

/// Scalar argument `scale·x_var + offset` of a primitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Argument {
    pub var: usize,
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    /// `𝒜x^{m−1}` with coefficients stored flat in row-major order.
    Tensor { order: usize, coeffs: Vec<f64> },
    /// `coeff · Π x_var^{p/q}` placed in component `out`.
    Power {
        out: usize,
        coeff: f64,
        factors: Vec<Factor>,
    },
    /// `coeff · Π x_var^{p/q} · φ(scale·x_k + offset)` placed in component `out`.
    Primitive {
        out: usize,
        coeff: f64,
        #[serde(default)]
        factors: Vec<Factor>,
        func: Primitive,
        arg: Argument,
    },
}

impl Term {
    pub fn tensor(order: usize, coeffs: Vec<f64>) -> Self {
        Term::Tensor { order, coeffs }
    }

    /// `coeff · x_var^{p/q}` in component `out`.
    pub fn power(out: usize, coeff: f64, var: usize, exp: Exponent) -> Self {
        Term::Power { out, coeff, factors: vec![Factor { var, exp }] }
    }

    pub fn monomial(out: usize, coeff: f64, factors: Vec<(usize, Exponent)>) -> Self {
        Term::Power {
            out,
            coeff,
            factors: factors.into_iter().map(|(var, exp)| Factor { var, exp }).collect(),
        }
    }

    /// `coeff · φ(scale·x_var + offset)` in component `out`.
    pub fn primitive(out: usize, coeff: f64, func: Primitive, var: usize, scale: f64, offset: f64) -> Self {
        Term::Primitive { out, coeff, factors: Vec::new(), func, arg: Argument { var, scale, offset } }
    }

    /// Growth order: the homogeneity degree for homogeneous terms, otherwise
    /// the exponent `d` with `‖term(x)‖ = O(‖x‖^d)`.
    pub fn degree(&self) -> f64 {
        match self {
            Term::Tensor { order, .. } => *order as f64 - 1.0,
            Term::Power { factors, .. } => monomial_degree(factors),
            Term::Primitive { factors, func, .. } => {
                monomial_degree(factors) + if *func == Primitive::Affine { 1.0 } else { 0.0 }
            }
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self {
            Term::Tensor { .. } | Term::Power { .. } => true,
            Term::Primitive { func, arg, .. } => *func == Primitive::Affine && arg.offset == 0.0,
        }
    }

    fn validate(&self, n: usize, path: &str) -> Result<()> {
        let check_factors = |factors: &[Factor]| -> Result<()> {
            for (i, f) in factors.iter().enumerate() {
                if f.var >= n {
                    return Err(Error::shape(format!("{path}.factors[{i}].var"), format!("index must be below {n}")));
                }
                if f.exp.q < 1 || f.exp.p < 0 {
                    return Err(Error::invalid(format!("{path}.factors[{i}].exp"), "need p ≥ 0 and q ≥ 1"));
                }
            }
            Ok(())
        };
        match self {
            Term::Tensor { order, coeffs } => {
                if *order < 2 {
                    return Err(Error::invalid(format!("{path}.order"), "tensor order must be at least 2"));
                }
                let expected = n.checked_pow(*order as u32).unwrap_or(usize::MAX);
                if coeffs.len() != expected {
                    return Err(Error::shape(
                        path.to_string(),
                        format!("order {order} tensor in dimension {n} needs {expected} coefficients, got {}", coeffs.len()),
                    ));
                }
                if !coeffs.iter().all(|c| c.is_finite()) {
                    return Err(Error::invalid(format!("{path}.coeffs"), "entries must be finite"));
                }
            }
            Term::Power { out, coeff, factors } => {
                if *out >= n {
                    return Err(Error::shape(format!("{path}.out"), format!("index must be below {n}")));
                }
                if !coeff.is_finite() {
                    return Err(Error::invalid(format!("{path}.coeff"), "must be finite"));
                }
                check_factors(factors)?;
            }
            Term::Primitive { out, coeff, factors, arg, .. } => {
                if *out >= n {
                    return Err(Error::shape(format!("{path}.out"), format!("index must be below {n}")));
                }
                if arg.var >= n {
                    return Err(Error::shape(format!("{path}.arg.var"), format!("index must be below {n}")));
                }
                if !(coeff.is_finite() && arg.scale.is_finite() && arg.offset.is_finite()) {
                    return Err(Error::invalid(path.to_string(), "coefficients must be finite"));
                }
                check_factors(factors)?;
            }
        }
        Ok(())
    }

    fn factors(&self) -> &[Factor] {
        match self {
            Term::Tensor { .. } => &[],
            Term::Power { factors, .. } | Term::Primitive { factors, .. } => factors,
        }
    }

    /// Adds the term's value at `x` into `out`. With `clamp` set, negative bases
    /// under even roots are read as zero instead of raising an error.
    fn accumulate(&self, x: &[f64], out: &mut [f64], clamp: bool) -> Result<()> {
        match self {
            Term::Tensor { order, coeffs } => {
                let v = tensor_contract(*order, coeffs, x);
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += vi;
                }
            }
            Term::Power { out: i, coeff, factors } => {
                out[*i] += coeff * monomial(factors, x, clamp)?;
            }
            Term::Primitive { out: i, coeff, factors, func, arg } => {
                let u = arg.scale * x[arg.var] + arg.offset;
                let phi = match func {
                    Primitive::Sin => u.sin(),
                    Primitive::Cos => u.cos(),
                    Primitive::RationalDecay => 1.0 / (1.0 + u * u),
                    Primitive::Affine => u,
                };
                out[*i] += coeff * monomial(factors, x, clamp)? * phi;
            }
        }
        Ok(())
    }
}

fn monomial_degree(factors: &[Factor]) -> f64 {
    factors.iter().map(|f| f.exp.value()).sum()
}

fn monomial(factors: &[Factor], x: &[f64], clamp: bool) -> Result<f64> {
    let mut v = 1.0;
    for f in factors {
        let base = x[f.var];
        let base = if clamp && base < 0.0 && f.exp.even_denominator() { 0.0 } else { base };
        match f.exp.apply(base) {
            Some(p) => v *= p,
            None => {
                return Err(Error::DomainViolation(format!(
                    "x[{}] = {base} is negative under the exponent {}/{}",
                    f.var, f.exp.p, f.exp.q
                )))
            }
        }
    }
    Ok(v)
}

fn tensor_contract(order: usize, coeffs: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut cur = coeffs.to_vec();
    // contract the trailing index m−1 times
    for _ in 1..order {
        let len = cur.len() / n;
        let mut next = vec![0.0; len];
        for (i, nv) in next.iter_mut().enumerate() {
            let base = i * n;
            *nv = cur[base..base + n].iter().zip(x).map(|(a, b)| a * b).sum();
        }
        cur = next;
    }
    cur
}

/// `(𝒜x^{m−1})_i = Σ a_{i i₂…i_m} x_{i₂}⋯x_{i_m}` for a flat row-major array.
pub fn tensor_apply(order: usize, coeffs: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if order < 2 {
        return Err(Error::shape("tensor", "order must be at least 2"));
    }
    let expected = n.checked_pow(order as u32).unwrap_or(usize::MAX);
    if coeffs.len() != expected {
        return Err(Error::shape("tensor", format!("expected {expected} coefficients, got {}", coeffs.len())));
    }
    Ok(tensor_contract(order, coeffs, x))
}

/// A mapping `ℝⁿ → ℝⁿ` evaluated by solvers and checkers.
pub trait Mapping {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    /// `apply` up to an additive constant. Differences `f(x) − f(y)` taken through
    /// this method avoid cancelling a large constant part.
    fn apply_variable(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
    }
}

impl<M: Mapping + ?Sized> Mapping for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }

    fn apply_variable(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply_variable(x)
    }
}

/// A closure lifted into a [`Mapping`].
pub struct FnMapping<F> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnMapping<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnMapping { n, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> Mapping for FnMapping<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl Mapping for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// `x ↦ inner(x) + d`
pub struct Shifted<M> {
    pub inner: M,
    pub d: Vec<f64>,
}

impl<M: Mapping> Mapping for Shifted<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.inner.apply(x).iter().zip(&self.d).map(|(a, b)| a + b).collect()
    }

    fn apply_variable(&self, x: &[f64]) -> Vec<f64> {
        self.inner.apply_variable(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeaklyHomogeneousMap {
    pub n: usize,
    pub delta: Degree,
    pub leading_terms: Vec<Term>,
    #[serde(default)]
    pub lower_terms: Vec<Term>,
    pub constant: Vec<f64>,
    /// The set `C` the map is defined on; `None` means all of `ℝⁿ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<ConvexSet>,
}

impl WeaklyHomogeneousMap {
    pub fn new(
        n: usize,
        delta: Degree,
        leading_terms: Vec<Term>,
        lower_terms: Vec<Term>,
        constant: Vec<f64>,
        domain: Option<ConvexSet>,
    ) -> Result<Self> {
        let map = WeaklyHomogeneousMap { n, delta, leading_terms, lower_terms, constant, domain };
        map.validate_at("map")?;
        Ok(map)
    }

    pub fn delta(&self) -> f64 {
        self.delta.value()
    }

    pub fn domain(&self) -> ConvexSet {
        self.domain.clone().unwrap_or_else(|| ConvexSet::whole(self.n))
    }

    /// Structural validation with error paths rooted at `path`.
    pub fn validate_at(&self, path: &str) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::invalid(format!("{path}.n"), "dimension must be positive"));
        }
        let delta = self.delta();
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("{path}.delta"), format!("leading degree must be positive, got {delta}")));
        }
        if let Degree::Rational(e) = self.delta {
            if e.q < 1 {
                return Err(Error::invalid(format!("{path}.delta"), "denominator must be positive"));
            }
        }
        if self.leading_terms.is_empty() {
            return Err(Error::invalid(format!("{path}.leading_terms"), "at least one leading term is required"));
        }
        if self.constant.len() != n {
            return Err(Error::shape(format!("{path}.constant"), format!("expected {n} entries, got {}", self.constant.len())));
        }
        if !self.constant.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid(format!("{path}.constant"), "entries must be finite"));
        }
        if let Some(d) = &self.domain {
            d.validate_at(&format!("{path}.domain"))?;
            if d.dim() != n {
                return Err(Error::shape(format!("{path}.domain"), "dimension differs from n"));
            }
        }
        for (i, t) in self.leading_terms.iter().enumerate() {
            let tp = format!("{path}.leading_terms[{i}]");
            t.validate(n, &tp)?;
            if !t.is_homogeneous() {
                return Err(Error::invalid(tp, "leading terms must be positively homogeneous"));
            }
            if (t.degree() - delta).abs() > 1e-12 * delta.max(1.0) {
                return Err(Error::invalid(tp, format!("term degree {} differs from delta {delta}", t.degree())));
            }
        }
        for (i, t) in self.lower_terms.iter().enumerate() {
            let tp = format!("{path}.lower_terms[{i}]");
            t.validate(n, &tp)?;
            if t.degree() >= delta - 1e-12 {
                return Err(Error::invalid(tp, format!("growth order {} is not below delta {delta}", t.degree())));
            }
        }
        let domain = self.domain();
        for (i, t) in self.leading_terms.iter().chain(&self.lower_terms).enumerate() {
            for f in t.factors() {
                if f.exp.even_denominator() && !domain_nonnegative_in(&domain, f.var) {
                    return Err(Error::invalid(
                        format!("{path}.terms[{i}]"),
                        format!("even root of x[{}] requires the domain to keep that coordinate nonnegative", f.var),
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::shape("x", format!("expected length {}, got {}", self.n, x.len())));
        }
        if let Some(d) = &self.domain {
            if !d.contains(x, 1e-9) {
                return Err(Error::DomainViolation(format!("{x:?} lies outside the domain")));
            }
        }
        Ok(())
    }

    fn sum_terms(&self, terms: &[Term], x: &[f64], clamp: bool) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        for t in terms {
            t.accumulate(x, &mut out, clamp)?;
        }
        Ok(out)
    }

    /// `f(x) = f∞(x) + f̄(x) + p` on the domain.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.eval_parts(x, false).map(|(lead, low)| combine(&lead, &low, &self.constant))
    }

    /// The declared leading part `f∞(x)`.
    pub fn eval_leading(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.sum_terms(&self.leading_terms, x, true)
    }

    /// The declared lower-order part `f̄(x)` (without the constant).
    pub fn eval_lower(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.sum_terms(&self.lower_terms, x, true)
    }

    fn eval_parts(&self, x: &[f64], strict: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        let clamp = !strict;
        Ok((self.sum_terms(&self.leading_terms, x, clamp)?, self.sum_terms(&self.lower_terms, x, clamp)?))
    }

    /// Continuous extension `F = f ∘ Π_C` to all of `ℝⁿ`.
    pub fn extend(&self) -> ExtendedMap {
        ExtendedMap { map: self.clone(), domain: self.domain() }
    }

    /// Growth orders of the homogeneous terms with positive degree, plus a flag
    /// telling whether every positive-order term is homogeneous.
    pub fn homogeneous_degrees(&self) -> (Vec<f64>, bool) {
        let mut degrees = Vec::new();
        let mut all_homogeneous = true;
        for t in self.leading_terms.iter().chain(&self.lower_terms) {
            let d = t.degree();
            if d <= 0.0 {
                continue;
            }
            if t.is_homogeneous() {
                degrees.push(d);
            } else {
                all_homogeneous = false;
            }
        }
        degrees.sort_by(|a, b| a.partial_cmp(b).expect("finite degrees"));
        (degrees, all_homogeneous)
    }

    /// Sampled checks of the defining properties: homogeneity of the leading
    /// part, `f∞(0) = 0`, and decay of `‖f̄(λx)‖/λ^δ`.
    pub fn check_invariants(&self, seed: u64, samples: usize) -> Result<()> {
        let delta = self.delta();
        let f = self.extend();
        let zero = vec![0.0; self.n];
        if norm(&f.eval_leading(&zero)) != 0.0 {
            return Err(Error::invalid("leading_terms", "the leading part does not vanish at the origin"));
        }
        for x in unit_samples(&self.domain(), seed, samples) {
            let base = f.eval_leading(&x);
            for lam in [2.0, 5.0, 10.0] {
                let scaled = f.eval_leading(&scale(lam, &x));
                let expect = scale(lam.powf(delta), &base);
                let err = norm(&sub(&scaled, &expect));
                if err > 1e-8 * (norm(&expect) + 1e-300) && err > 1e-12 {
                    return Err(Error::invalid(
                        "leading_terms",
                        format!("homogeneity of degree {delta} fails at λ = {lam} (error {err:e})"),
                    ));
                }
            }
            let ratios: Vec<f64> = [1e2, 1e4, 1e6]
                .iter()
                .map(|&lam: &f64| norm(&f.eval_lower(&scale(lam, &x))) / lam.powf(delta))
                .collect();
            if ratios[2] > ratios[0] && ratios[2] > 1e-12 {
                return Err(Error::invalid("lower_terms", "lower-order part does not decay relative to λ^δ"));
            }
        }
        Ok(())
    }
}

fn combine(lead: &[f64], low: &[f64], constant: &[f64]) -> Vec<f64> {
    lead.iter().zip(low).zip(constant).map(|((a, b), c)| a + b + c).collect()
}

/// Whether `min {x_var : x ∈ domain}` is nonnegative, decided by an LP over a large box.
fn domain_nonnegative_in(domain: &ConvexSet, var: usize) -> bool {
    let n = domain.dim();
    let h = domain.inequalities();
    let mut c = vec![0.0; n];
    c[var] = 1.0;
    let lo = vec![-1e6; n];
    let hi = vec![1e6; n];
    match lp::minimize_boxed(&c, &h.a, &h.b, &lo, &hi) {
        Ok(sol) => sol.objective >= -1e-12,
        Err(_) => true,
    }
}

/// Unit vectors of the domain obtained by normalising projected random points.
fn unit_samples(domain: &ConvexSet, seed: u64, samples: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = domain.dim();
    let mut out = Vec::with_capacity(samples);
    let mut attempts = 0;
    while out.len() < samples && attempts < 100 * samples.max(1) {
        attempts += 1;
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let Ok(p) = domain.project(&z) else { continue };
        if norm(&p) < 1e-3 {
            continue;
        }
        if let Some(u) = normalized(&p) {
            out.push(u);
        }
    }
    out
}

/// `F = f ∘ Π_C`, defined on all of `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedMap {
    map: WeaklyHomogeneousMap,
    domain: ConvexSet,
}

impl ExtendedMap {
    pub fn map(&self) -> &WeaklyHomogeneousMap {
        &self.map
    }

    pub fn delta(&self) -> f64 {
        self.map.delta()
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        match &self.map.domain {
            None => x.to_vec(),
            Some(_) => self.domain.project(x).expect("validated domain projects"),
        }
    }

    fn terms(&self, terms: &[Term], x: &[f64]) -> Vec<f64> {
        self.map.sum_terms(terms, &self.project(x), true).expect("clamped evaluation cannot fail")
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let y = self.project(x);
        let (lead, low) = self.map.eval_parts(&y, false).expect("clamped evaluation cannot fail");
        combine(&lead, &low, &self.map.constant)
    }

    pub fn eval_leading(&self, x: &[f64]) -> Vec<f64> {
        self.terms(&self.map.leading_terms, x)
    }

    pub fn eval_lower(&self, x: &[f64]) -> Vec<f64> {
        self.terms(&self.map.lower_terms, x)
    }

    /// `f̃(x) = f∞(x) + f̄(x) − f̄(0)`, the constant-free part.
    pub fn eval_tilde(&self, x: &[f64]) -> Vec<f64> {
        let zero = vec![0.0; self.map.n];
        let low0 = self.eval_lower(&zero);
        let lead = self.eval_leading(x);
        let low = self.eval_lower(x);
        lead.iter().zip(&low).zip(&low0).map(|((a, b), c)| a + b - c).collect()
    }

    /// The leading part as a [`Mapping`].
    pub fn leading(&self) -> Leading<'_> {
        Leading(self)
    }
}

impl Mapping for ExtendedMap {
    fn dim(&self) -> usize {
        self.map.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.eval(x)
    }

    fn apply_variable(&self, x: &[f64]) -> Vec<f64> {
        let y = self.project(x);
        let (lead, low) = self.map.eval_parts(&y, false).expect("clamped evaluation cannot fail");
        lead.iter().zip(&low).map(|(a, b)| a + b).collect()
    }
}

pub struct Leading<'a>(&'a ExtendedMap);

impl Mapping for Leading<'_> {
    fn dim(&self) -> usize {
        self.0.map.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.eval_leading(x)
    }
}

pub fn extend_via_projection(f: &WeaklyHomogeneousMap) -> ExtendedMap {
    f.extend()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub lambdas: Vec<f64>,
    pub gaps: Vec<f64>,
    pub terminal_gap: f64,
    pub pass: bool,
}

/// Gaps at or below this level are rounding noise and count as converged.
pub const DECOMPOSITION_NOISE_FLOOR: f64 = 1e-12;
pub const DECOMPOSITION_TOL: f64 = 1e-4;

/// Compares `f(λx)/λ^δ` with `f∞(x)` on random unit `x` along `λ = 10, 100, …, lambda_max`.
pub fn verify_decomposition(f: &WeaklyHomogeneousMap, samples: usize, lambda_max: f64) -> DecompositionReport {
    verify_decomposition_seeded(f, samples, lambda_max, 0xdec0)
}

pub fn verify_decomposition_seeded(
    f: &WeaklyHomogeneousMap,
    samples: usize,
    lambda_max: f64,
    seed: u64,
) -> DecompositionReport {
    let ext = f.extend();
    let delta = f.delta();
    let mut lambdas = Vec::new();
    let mut lam = 10.0;
    while lam < lambda_max * (1.0 - 1e-12) {
        lambdas.push(lam);
        lam *= 10.0;
    }
    lambdas.push(lambda_max);
    let xs = unit_samples(&f.domain(), seed, samples.max(1));
    let gaps: Vec<f64> = lambdas
        .iter()
        .map(|&lam| {
            xs.iter()
                .map(|x| {
                    let scaled = scale(lam.powf(-delta), &ext.eval(&scale(lam, x)));
                    norm(&sub(&scaled, &ext.eval_leading(x)))
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let terminal_gap = *gaps.last().expect("grid is nonempty");
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    let trend = tail.len() == 3
        && tail
            .windows(2)
            .all(|w| w[1] < w[0] || (w[0] <= DECOMPOSITION_NOISE_FLOOR && w[1] <= DECOMPOSITION_NOISE_FLOOR));
    DecompositionReport { lambdas, gaps, terminal_gap, pass: terminal_gap <= DECOMPOSITION_TOL && trend }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: i64, q: i64) -> Exponent {
        Exponent::new(p, q)
    }

    #[test]
    fn tensor_apply_examples() {
        assert_eq!(tensor_apply(2, &[1.0, 0.0, 0.0, 1.0], &[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
        assert_eq!(tensor_apply(3, &[2.0], &[3.0]).unwrap(), vec![18.0]);
        let mut a = vec![0.0; 8];
        a[0] = 1.0; // a_111
        a[3] = 1.0; // a_122
        // brute force: (A x²)_i = Σ_{j,k} a_ijk x_j x_k
        let x = [2.0, 3.0];
        let mut brute = [0.0; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    brute[i] += a[i * 4 + j * 2 + k] * x[j] * x[k];
                }
            }
        }
        assert_eq!(brute, [13.0, 0.0]);
        assert_eq!(tensor_apply(3, &a, &x).unwrap(), brute.to_vec());
        assert!(matches!(tensor_apply(3, &[1.0; 7], &x), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn signed_rational_powers() {
        assert_eq!(e(1, 3).apply(-8.0), Some(-2.0));
        assert_eq!(e(2, 3).apply(-8.0), Some(4.0));
        assert_eq!(e(1, 2).apply(-1.0), None);
        assert_eq!(e(1, 2).apply(0.0), Some(0.0));
        assert_eq!(e(3, 1).apply(-2.0), Some(-8.0));
    }

    #[test]
    fn constant_only_map_evaluates_to_constant() {
        // the leading part must be nonempty, so use a zero tensor
        let f = WeaklyHomogeneousMap::new(
            2,
            Degree::Real(1.0),
            vec![Term::tensor(2, vec![0.0; 4])],
            vec![],
            vec![3.5, -1.0],
            None,
        )
        .unwrap();
        assert_eq!(f.eval(&[10.0, -7.0]).unwrap(), vec![3.5, -1.0]);
        assert_eq!(f.eval_leading(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_wrong_tensor_shape_and_bad_delta() {
        let err = WeaklyHomogeneousMap::new(2, Degree::Real(1.0), vec![Term::tensor(2, vec![1.0; 3])], vec![], vec![0.0; 2], None)
            .unwrap_err();
        match err {
            Error::ShapeMismatch { field, .. } => assert_eq!(field, "map.leading_terms[0]"),
            other => panic!("unexpected {other:?}"),
        }
        let err = WeaklyHomogeneousMap::new(1, Degree::Real(0.0), vec![Term::tensor(2, vec![1.0])], vec![], vec![0.0], None)
            .unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn even_root_requires_nonnegative_domain() {
        let lead = vec![Term::power(0, 1.0, 0, e(1, 2))];
        assert!(WeaklyHomogeneousMap::new(1, Degree::Rational(e(1, 2)), lead.clone(), vec![], vec![0.0], None).is_err());
        let f = WeaklyHomogeneousMap::new(1, Degree::Rational(e(1, 2)), lead, vec![], vec![0.0], Some(ConvexSet::orthant(1)))
            .unwrap();
        assert!(matches!(f.eval(&[-1.0]), Err(Error::DomainViolation(_))));
        assert_eq!(f.extend().eval(&[-1.0]), vec![0.0]);
    }

    #[test]
    fn misdeclared_leading_term_fails_verification() {
        // x² declared as the leading part of degree 3, bypassing the constructor
        let f = WeaklyHomogeneousMap {
            n: 1,
            delta: Degree::Real(3.0),
            leading_terms: vec![Term::power(0, 1.0, 0, e(2, 1))],
            lower_terms: vec![],
            constant: vec![0.0],
            domain: None,
        };
        assert!(!verify_decomposition(&f, 8, 1e6).pass);
    }

    #[test]
    fn primitives_evaluate() {
        let f = WeaklyHomogeneousMap::new(
            2,
            Degree::Real(3.0),
            vec![Term::power(0, 1.0, 0, e(3, 1)), Term::power(1, 1.0, 1, e(3, 1))],
            vec![
                Term::primitive(0, 1.0, Primitive::RationalDecay, 1, 1.0, 0.0),
                Term::Primitive {
                    out: 1,
                    coeff: 2.0,
                    factors: vec![Factor { var: 0, exp: e(1, 1) }],
                    func: Primitive::Sin,
                    arg: Argument { var: 1, scale: 0.5, offset: 0.0 },
                },
            ],
            vec![1.0, 0.0],
            None,
        )
        .unwrap();
        let v = f.eval(&[2.0, 1.0]).unwrap();
        assert!((v[0] - (8.0 + 0.5 + 1.0)).abs() < 1e-15);
        assert!((v[1] - (1.0 + 4.0 * 0.5f64.sin())).abs() < 1e-15);
        f.check_invariants(1, 16).unwrap();
    }
}
