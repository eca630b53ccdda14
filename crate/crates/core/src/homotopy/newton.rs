use num_complex::Complex64;
use serde::Serialize;

use super::linalg::{max_abs, solve_linear};
use crate::poly::CompiledSystem;

#[derive(Clone, Debug, Serialize)]
pub struct NewtonOutcome {
    pub point: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
    /// Update norm reached `tol` with quadratic (not linear) contraction.
    pub converged: bool,
}

/// Newton's method on a square system.
///
/// Linear contraction in the asymptotic regime marks a singular root; such a
/// run is reported as not converged even if the updates eventually get small.
pub fn refine_newton(sys: &CompiledSystem, start: &[Complex64], tol: f64, max_iters: usize) -> NewtonOutcome {
    let mut x = start.to_vec();
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut linear = false;
    let mut iterations = 0;
    for _ in 0..max_iters {
        let (f, jac) = sys.eval_with_jacobian(&x);
        if max_abs(f.as_slice()) == 0.0 {
            converged = !linear;
            break;
        }
        let Some(dx) = solve_linear(jac, -f) else {
            break;
        };
        iterations += 1;
        let step = max_abs(dx.as_slice());
        for (xi, d) in x.iter_mut().zip(dx.iter()) {
            *xi += d;
        }
        if prev < 1e-4 && step > 0.1 * prev {
            linear = true;
        }
        if step <= tol * (1.0 + max_abs(&x)) {
            converged = !linear;
            break;
        }
        prev = step;
    }
    let residual = max_abs(sys.eval(&x).as_slice());
    NewtonOutcome {
        point: x,
        residual,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, PolynomialSystem};

    fn compile(eqs: &[&str], vars: &[&str]) -> CompiledSystem {
        let polys = eqs.iter().map(|s| parse_polynomial(s).unwrap()).collect();
        CompiledSystem::new(&PolynomialSystem::new(vars, polys).unwrap().to_numeric())
    }

    #[test]
    fn sqrt_two_converges_quadratically() {
        let sys = compile(&["p^2 - 2"], &["p"]);
        let out = refine_newton(&sys, &[Complex64::new(1.4, 0.0)], 1e-14, 20);
        assert!(out.converged);
        assert!(out.iterations <= 5);
        assert!((out.point[0].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_root_needs_no_iterations() {
        let sys = compile(&["p - 3"], &["p"]);
        let out = refine_newton(&sys, &[Complex64::new(3.0, 0.0)], 1e-14, 20);
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn double_root_is_flagged() {
        let sys = compile(&["p^2"], &["p"]);
        let out = refine_newton(&sys, &[Complex64::new(0.1, 0.0)], 1e-14, 100);
        assert!(!out.converged);
        assert!(out.point[0].norm() < 1e-3);
    }
}
