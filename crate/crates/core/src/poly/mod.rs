//! Sparse multivariate polynomials over exact rationals or complex floats.
//!
//! Variable lists are kept sorted and duplicate-free, so two polynomials built
//! from the same names always agree on coordinate order.

mod parse;
mod system;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use parse::parse_polynomial;
pub use system::{CompiledPolynomial, CompiledSystem, PolynomialSystem};

use crate::error::PolyError;

/// Coefficient field of a [`Polynomial`].
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    fn from_u64(v: u64) -> Self;
    fn to_complex(&self) -> Complex64;
}

impl Coefficient for BigRational {
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
}

impl Coefficient for Complex64 {
    fn from_u64(v: u64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Nearest double to an exact rational.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational equal to a finite double, going through its shortest
/// decimal representation (so `0.1` becomes `1/10`).
pub fn rational_from_f64(v: f64) -> Option<BigRational> {
    if !v.is_finite() {
        return None;
    }
    parse::parse_decimal(&format!("{v}"))
}

/// Exponent vector, one entry per variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

#[derive(Clone, PartialEq)]
pub struct Polynomial<C> {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, C>,
}

pub type RationalPolynomial = Polynomial<BigRational>;
pub type ComplexPolynomial = Polynomial<Complex64>;

fn normalize_vars<S: AsRef<str>>(vars: &[S]) -> Vec<String> {
    let mut v: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
    v.sort();
    v.dedup();
    v
}

impl<C: Coefficient> Polynomial<C> {
    /// The zero polynomial over the given variables.
    pub fn zero<S: AsRef<str>>(vars: &[S]) -> Self {
        Polynomial {
            vars: normalize_vars(vars),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant<S: AsRef<str>>(vars: &[S], c: C) -> Self {
        let mut p = Self::zero(vars);
        let n = p.vars.len();
        p.add_term(Monomial::one(n), c);
        p
    }

    /// The polynomial consisting of the single variable `name`.
    pub fn variable<S: AsRef<str>>(vars: &[S], name: &str) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars);
        let idx = p.var_index(name)?;
        let mut e = vec![0; p.vars.len()];
        e[idx] = 1;
        p.add_term(Monomial(e), C::one());
        Ok(p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; exponents are
    /// indexed by the sorted variable list.
    pub fn from_terms<S: AsRef<str>>(
        vars: &[S],
        terms: impl IntoIterator<Item = (Vec<u32>, C)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != p.vars.len() {
                return Err(PolyError::DimensionMismatch {
                    expected: p.vars.len(),
                    got: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> C {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn var_index(&self, name: &str) -> Result<usize, PolyError> {
        self.vars
            .binary_search_by(|v| v.as_str().cmp(name))
            .map_err(|_| PolyError::UnknownVariable(name.to_string()))
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: &str) -> Result<u32, PolyError> {
        let i = self.var_index(var)?;
        Ok(self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0))
    }

    /// Re-expresses the polynomial over a superset of its variables.
    pub fn align<S: AsRef<str>>(&self, vars: &[S]) -> Result<Self, PolyError> {
        let target = normalize_vars(vars);
        let mut map = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let j = target
                .binary_search(v)
                .map_err(|_| PolyError::UnknownVariable(v.clone()))?;
            map.push(j);
        }
        let mut out = Self::zero(&target);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (i, &j) in map.iter().enumerate() {
                e[j] = m.0[i];
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Drops variables that do not occur in any term.
    pub fn trim_vars(&self) -> Self {
        let used: Vec<usize> = (0..self.vars.len())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect();
        let vars: Vec<String> = used.iter().map(|&i| self.vars[i].clone()).collect();
        let mut out = Self::zero(&vars);
        for (m, c) in &self.terms {
            out.add_term(Monomial(used.iter().map(|&i| m.0[i]).collect()), c.clone());
        }
        out
    }

    fn check_same_vars(&self, other: &Self) -> Result<(), PolyError> {
        if self.vars != other.vars {
            return Err(PolyError::VariableMismatch {
                left: self.vars.clone(),
                right: other.vars.clone(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same_vars(other)?;
        let mut out = Self::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    /// Arithmetic after aligning both operands to the union of their variables.
    pub fn add_aligned(&self, other: &Self) -> Self {
        let (a, b) = self.aligned_pair(other);
        a.try_add(&b).expect("aligned")
    }

    pub fn sub_aligned(&self, other: &Self) -> Self {
        let (a, b) = self.aligned_pair(other);
        a.try_sub(&b).expect("aligned")
    }

    pub fn mul_aligned(&self, other: &Self) -> Self {
        let (a, b) = self.aligned_pair(other);
        a.try_mul(&b).expect("aligned")
    }

    fn aligned_pair(&self, other: &Self) -> (Self, Self) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let mut union = self.vars.clone();
        union.extend(other.vars.iter().cloned());
        let union = normalize_vars(&union);
        (
            self.align(&union).expect("superset"),
            other.align(&union).expect("superset"),
        )
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(&self.vars);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(&self.vars, C::one());
        for _ in 0..k {
            acc = acc.try_mul(self).expect("same vars");
        }
        acc
    }

    /// Term-wise power-rule derivative.
    pub fn partial_derivative(&self, var: &str) -> Result<Self, PolyError> {
        let i = self.var_index(var)?;
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let k = m.0[i];
            if k == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[i] -= 1;
            out.add_term(Monomial(e), c.clone() * C::from_u64(u64::from(k)));
        }
        Ok(out)
    }

    /// Composition `p(var := replacement)`, fully expanded. The result lives on
    /// the union of the remaining variables and those of the replacement.
    pub fn substitute(&self, var: &str, replacement: &Self) -> Result<Self, PolyError> {
        let i = match self.var_index(var) {
            Ok(i) => i,
            Err(_) => {
                if self.vars.is_empty() && self.terms.is_empty() {
                    return Ok(self.clone());
                }
                return Err(PolyError::UnknownVariable(var.to_string()));
            }
        };
        let mut vars: Vec<String> = self
            .vars
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.clone())
            .collect();
        vars.extend(replacement.vars.iter().cloned());
        let vars = normalize_vars(&vars);
        let repl = replacement.align(&vars)?;
        let max_pow = self.degree_in(var)?;
        let mut powers = vec![Self::constant(&vars, C::one())];
        for k in 1..=max_pow as usize {
            let next = powers[k - 1].try_mul(&repl)?;
            powers.push(next);
        }
        let mut out = Self::zero(&vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (j, name) in self.vars.iter().enumerate() {
                if j != i {
                    let k = vars.binary_search(name).expect("kept variable");
                    e[k] += m.0[j];
                }
            }
            let rest = Monomial(e);
            for (pm, pc) in &powers[m.0[i] as usize].terms {
                out.add_term(rest.mul(pm), c.clone() * pc.clone());
            }
        }
        Ok(out)
    }

    /// Like [`Polynomial::substitute`] but leaves the polynomial unchanged when
    /// `var` does not occur in its variable list.
    pub fn substitute_if_present(&self, var: &str, replacement: &Self) -> Result<Self, PolyError> {
        if self.var_index(var).is_err() {
            return Ok(self.clone());
        }
        self.substitute(var, replacement)
    }

    pub fn evaluate(&self, point: &[Complex64]) -> Result<Complex64, PolyError> {
        self.check_dim(point.len())?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_complex();
            for (x, &k) in point.iter().zip(&m.0) {
                if k > 0 {
                    t *= x.powu(k);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn evaluate_real(&self, point: &[f64]) -> Result<f64, PolyError> {
        self.check_dim(point.len())?;
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_complex().re;
            for (x, &k) in point.iter().zip(&m.0) {
                if k > 0 {
                    t *= x.powi(k as i32);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    fn check_dim(&self, n: usize) -> Result<(), PolyError> {
        if n != self.vars.len() {
            return Err(PolyError::DimensionMismatch {
                expected: self.vars.len(),
                got: n,
            });
        }
        Ok(())
    }

    /// Monomial content `x^k` (componentwise minimum exponent) and the
    /// polynomial with that content divided out.
    pub fn split_monomial_content(&self) -> (Monomial, Self) {
        let n = self.vars.len();
        if self.terms.is_empty() {
            return (Monomial::one(n), self.clone());
        }
        let mut content = vec![u32::MAX; n];
        for m in self.terms.keys() {
            for (c, &e) in content.iter_mut().zip(&m.0) {
                *c = (*c).min(e);
            }
        }
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0.iter().zip(&content).map(|(a, b)| a - b).collect();
            out.add_term(Monomial(e), c.clone());
        }
        (Monomial(content), out)
    }

    /// Replaces every repeated single-variable factor `x^k` (k > 1) by `x`,
    /// keeping the zero set while removing the trivial multiplicity.
    pub fn reduce_monomial_content(&self) -> Self {
        let (content, rest) = self.split_monomial_content();
        if content.0.iter().all(|&k| k <= 1) {
            return self.clone();
        }
        let e = content.0.iter().map(|&k| k.min(1)).collect();
        let m = Self::from_terms(&self.vars, [(e, C::one())]).expect("dims");
        rest.try_mul(&m).expect("same vars")
    }

    /// Terms ordered by descending total degree, then descending exponents.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &C)> {
        let mut t: Vec<_> = self.terms.iter().collect();
        t.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| b.0.cmp(a.0)));
        t
    }
}

impl RationalPolynomial {
    pub fn from_integer_constant<S: AsRef<str>>(vars: &[S], v: i64) -> Self {
        Self::constant(vars, BigRational::from_integer(BigInt::from(v)))
    }

    /// Term-wise antiderivative with zero constant of integration.
    pub fn antiderivative(&self, var: &str) -> Result<Self, PolyError> {
        let i = self.var_index(var)?;
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            e[i] += 1;
            let k = BigRational::from_integer(BigInt::from(e[i]));
            out.add_term(Monomial(e), c / k);
        }
        Ok(out)
    }

    pub fn evaluate_exact(&self, point: &[BigRational]) -> Result<BigRational, PolyError> {
        self.check_dim(point.len())?;
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(&m.0) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Complex-float copy of the polynomial.
    pub fn to_numeric(&self) -> ComplexPolynomial {
        ComplexPolynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.to_complex()))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Scales to coprime integer coefficients with a positive leading term.
    /// Returns the scaled polynomial and the factor applied.
    pub fn integer_normalized(&self) -> (Self, BigRational) {
        if self.terms.is_empty() {
            return (self.clone(), BigRational::one());
        }
        let lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut factor = BigRational::from_integer(lcm);
        let cleared: Vec<BigInt> = self
            .terms
            .values()
            .map(|c| (c * &factor).to_integer())
            .collect();
        let content = cleared.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        factor /= BigRational::from_integer(content);
        let (_, lead) = self.sorted_terms()[0];
        if lead.is_negative() {
            factor = -factor;
        }
        (self.scale(&factor), factor)
    }
}

impl<C: Coefficient> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]", self.vars.join(","))?;
        f.debug_map().entries(self.sorted_terms().into_iter().map(|(m, c)| (&m.0, c))).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn p(s: &str) -> RationalPolynomial {
        parse_polynomial(s).unwrap()
    }

    #[test]
    fn product_expands() {
        let a = p("x");
        let b = p("1 - x");
        assert_eq!(a.try_mul(&b).unwrap(), p("x - x^2"));
    }

    #[test]
    fn cancellation_gives_empty_term_map() {
        let a = p("p1 + p2");
        let d = a.try_sub(&a).unwrap();
        assert!(d.is_zero());
        assert_eq!(d.num_terms(), 0);
        assert_eq!(p("x^2 - x^4").try_add(&p("x^4")).unwrap(), p("x^2"));
    }

    #[test]
    fn mismatched_variables_are_rejected() {
        let err = p("x").try_add(&p("y")).unwrap_err();
        assert!(matches!(err, PolyError::VariableMismatch { .. }));
        assert_eq!(p("x").add_aligned(&p("y")), p("x + y"));
    }

    #[test]
    fn derivatives() {
        let f = p("p1^2*p2");
        assert_eq!(f.partial_derivative("p1").unwrap(), p("2*p1*p2"));
        assert_eq!(p("x^2 - x^4").partial_derivative("x").unwrap(), p("2*x - 4*x^3"));
        let g = p("x^2 - x^4").align(&["p2", "x"]).unwrap();
        assert!(g.partial_derivative("p2").unwrap().is_zero());
        assert!(matches!(
            f.partial_derivative("z"),
            Err(PolyError::UnknownVariable(_))
        ));
    }

    #[test]
    fn antiderivatives() {
        assert_eq!(p("x*(1-x)").antiderivative("x").unwrap(), p("x^2/2 - x^3/3"));
        assert_eq!(p("x^2 - x^4").antiderivative("x").unwrap(), p("x^3/3 - x^5/5"));
        let z = RationalPolynomial::zero(&["x"]);
        assert!(z.antiderivative("x").unwrap().is_zero());
    }

    #[test]
    fn substitution() {
        let b2 = p("b^2");
        let mid = p("(p1 + p2)/2");
        let got = b2.substitute("b", &mid).unwrap();
        assert_eq!(got, p("(p1^2 + 2*p1*p2 + p2^2)/4"));
        assert_eq!(got.vars(), &["p1".to_string(), "p2".to_string()]);
        let x = p("x^2 + 1");
        assert_eq!(x.substitute_if_present("y", &mid).unwrap(), x);
        assert!(x.substitute("y", &mid).is_err());
    }

    #[test]
    fn evaluation() {
        let f = p("x*(1-x)");
        assert_eq!(f.evaluate_real(&[0.5]).unwrap(), 0.25);
        let z = f.evaluate(&[Complex64::new(1.0, 1.0)]).unwrap();
        assert!((z - Complex64::new(1.0, -1.0)).norm() < 1e-15);
        assert!(matches!(
            f.evaluate(&[]),
            Err(PolyError::DimensionMismatch { expected: 1, got: 0 })
        ));
    }

    #[test]
    fn numeric_conversion() {
        let f = p("x^2/2 - x^3/3").to_numeric();
        assert_eq!(f.coefficient(&[2]).re, 0.5);
        assert!((f.coefficient(&[3]).re + 1.0 / 3.0).abs() <= f64::EPSILON);
        assert!(RationalPolynomial::zero(&["x"]).to_numeric().is_zero());
        assert_eq!(p("x/3").to_numeric().coefficient(&[1]).re, 1.0 / 3.0);
    }

    #[test]
    fn integer_normalization() {
        let (n, factor) = p("-x^2/4 + x/6").integer_normalized();
        assert_eq!(n, p("3*x^2 - 2*x"));
        assert_eq!(factor, q(-12, 1));
    }

    #[test]
    fn monomial_content_reduction() {
        let f = p("x^3*y^2 + x^2*y^3");
        assert_eq!(f.reduce_monomial_content(), p("x^2*y + x*y^2"));
        let g = p("x*y + 1");
        assert_eq!(g.reduce_monomial_content(), g);
    }

    #[test]
    fn exact_evaluation() {
        let f = p("x^2/2 - x^3/3");
        assert_eq!(f.evaluate_exact(&[q(1, 1)]).unwrap(), q(1, 6));
    }
}
