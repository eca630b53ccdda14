use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use super::{Coefficient, ComplexPolynomial, Polynomial};
use crate::error::PolyError;

/// A list of equations over one shared, sorted variable list.
#[derive(Clone, PartialEq)]
pub struct PolynomialSystem<C> {
    vars: Vec<String>,
    equations: Vec<Polynomial<C>>,
    degrees: Vec<u32>,
}

impl<C: Coefficient> std::fmt::Debug for PolynomialSystem<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolynomialSystem")
            .field("vars", &self.vars)
            .field("equations", &self.equations)
            .finish()
    }
}

impl<C: Coefficient> PolynomialSystem<C>
where
    Polynomial<C>: std::fmt::Display,
{
    /// Aligns every equation to `vars` (which must cover all of them).
    pub fn new<S: AsRef<str>>(vars: &[S], equations: Vec<Polynomial<C>>) -> Result<Self, PolyError> {
        let equations = equations
            .iter()
            .map(|e| e.align(vars))
            .collect::<Result<Vec<_>, _>>()?;
        let vars = match equations.first() {
            Some(e) => e.vars().to_vec(),
            None => Polynomial::<C>::zero(vars).vars().to_vec(),
        };
        let degrees = equations.iter().map(Polynomial::total_degree).collect();
        Ok(PolynomialSystem {
            vars,
            equations,
            degrees,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn equations(&self) -> &[Polynomial<C>] {
        &self.equations
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.equations.len() == self.vars.len()
    }

    /// Classical Bezout bound: the product of the equations' total degrees.
    pub fn bezout_bound(&self) -> Result<u64, PolyError> {
        if !self.is_square() {
            return Err(PolyError::NotSquare {
                equations: self.equations.len(),
                variables: self.vars.len(),
            });
        }
        Ok(self.degrees.iter().map(|&d| u64::from(d)).product())
    }

    pub fn evaluate(&self, point: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
        self.equations.iter().map(|e| e.evaluate(point)).collect()
    }

    /// Max-abs residual at `point`.
    pub fn residual(&self, point: &[Complex64]) -> Result<f64, PolyError> {
        Ok(self
            .evaluate(point)?
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max))
    }

    pub fn render(&self) -> String {
        let mut s = format!("variables: {}\n", self.vars.join(", "));
        for (i, e) in self.equations.iter().enumerate() {
            s.push_str(&format!("  [{}] (degree {}) {} = 0\n", i + 1, self.degrees[i], e));
        }
        s
    }
}

impl PolynomialSystem<BigRational> {
    pub fn to_numeric(&self) -> PolynomialSystem<Complex64> {
        PolynomialSystem {
            vars: self.vars.clone(),
            equations: self.equations.iter().map(|e| e.to_numeric()).collect(),
            degrees: self.degrees.clone(),
        }
    }
}

/// Flat term list for fast repeated evaluation of a polynomial and its gradient.
#[derive(Clone, Debug, Serialize)]
pub struct CompiledPolynomial {
    nvars: usize,
    coeffs: Vec<Complex64>,
    exps: Vec<Vec<u32>>,
    max_exp: u32,
}

impl CompiledPolynomial {
    pub fn new(p: &ComplexPolynomial) -> Self {
        Self::from_terms(p.nvars(), p.terms().map(|(m, c)| (*c, m.0.clone())))
    }

    /// Homogenizes to degree `degree` with the extra coordinate placed first.
    pub fn homogenized(p: &ComplexPolynomial, degree: u32) -> Self {
        Self::from_terms(
            p.nvars() + 1,
            p.terms().map(|(m, c)| {
                let mut e = Vec::with_capacity(m.0.len() + 1);
                e.push(degree - m.degree());
                e.extend_from_slice(&m.0);
                (*c, e)
            }),
        )
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Complex64, Vec<u32>)>) -> Self {
        let mut coeffs = Vec::new();
        let mut exps = Vec::new();
        for (c, e) in terms {
            debug_assert_eq!(e.len(), nvars);
            coeffs.push(c);
            exps.push(e);
        }
        let max_exp = exps.iter().flatten().copied().max().unwrap_or(0);
        CompiledPolynomial {
            nvars,
            coeffs,
            exps,
            max_exp,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    fn powers(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        x.iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(self.max_exp as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=self.max_exp {
                    row.push(acc);
                    acc *= xi;
                }
                row
            })
            .collect()
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        let pw = self.powers(x);
        self.coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, e)| {
                e.iter()
                    .enumerate()
                    .fold(*c, |acc, (k, &ek)| acc * pw[k][ek as usize])
            })
            .sum()
    }

    /// `sum |c| |x|^e`, the magnitude the value is computed from.
    pub fn eval_term_magnitude(&self, x: &[Complex64]) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, e)| {
                e.iter()
                    .enumerate()
                    .fold(c.norm(), |acc, (k, &ek)| acc * x[k].norm().powi(ek as i32))
            })
            .sum()
    }

    /// Value and gradient, writing the gradient into `grad`.
    pub fn eval_with_gradient(&self, x: &[Complex64], grad: &mut [Complex64]) -> Complex64 {
        let pw = self.powers(x);
        grad.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        let mut value = Complex64::new(0.0, 0.0);
        for (c, e) in self.coeffs.iter().zip(&self.exps) {
            let mut term = *c;
            for (k, &ek) in e.iter().enumerate() {
                term *= pw[k][ek as usize];
            }
            value += term;
            for (j, &ej) in e.iter().enumerate() {
                if ej == 0 {
                    continue;
                }
                let mut d = *c * f64::from(ej) * pw[j][ej as usize - 1];
                for (k, &ek) in e.iter().enumerate() {
                    if k != j {
                        d *= pw[k][ek as usize];
                    }
                }
                grad[j] += d;
            }
        }
        value
    }
}

/// Compiled square (or rectangular) system: values and Jacobian.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    nvars: usize,
    equations: Vec<CompiledPolynomial>,
}

impl CompiledSystem {
    pub fn new(sys: &PolynomialSystem<Complex64>) -> Self {
        CompiledSystem {
            nvars: sys.vars().len(),
            equations: sys.equations().iter().map(CompiledPolynomial::new).collect(),
        }
    }

    pub fn from_equations(nvars: usize, equations: Vec<CompiledPolynomial>) -> Self {
        debug_assert!(equations.iter().all(|e| e.nvars() == nvars));
        CompiledSystem { nvars, equations }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn eval(&self, x: &[Complex64]) -> DVector<Complex64> {
        DVector::from_iterator(self.equations.len(), self.equations.iter().map(|e| e.eval(x)))
    }

    /// Largest `|f_i(x)| / (1 + sum |c| |x|^e)`: the residual relative to the
    /// size of the terms that cancel in it.
    pub fn scaled_residual(&self, x: &[Complex64]) -> f64 {
        self.equations
            .iter()
            .map(|e| e.eval(x).norm() / (1.0 + e.eval_term_magnitude(x)))
            .fold(0.0, f64::max)
    }

    pub fn eval_with_jacobian(&self, x: &[Complex64]) -> (DVector<Complex64>, DMatrix<Complex64>) {
        let n = self.equations.len();
        let mut values = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, self.nvars);
        let mut grad = vec![Complex64::new(0.0, 0.0); self.nvars];
        for (i, e) in self.equations.iter().enumerate() {
            values[i] = e.eval_with_gradient(x, &mut grad);
            for (j, g) in grad.iter().enumerate() {
                jac[(i, j)] = *g;
            }
        }
        (values, jac)
    }
}
