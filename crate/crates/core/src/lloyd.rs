//! Lloyd-style descent: all vehicles take a synchronous gradient step sized
//! by a projected Armijo backtracking search.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ProblemError;
use crate::problem::{Configuration, CoverageProblem};

/// Steps below this count as stagnation.
pub const STEP_UNDERFLOW: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LloydOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub shrink_rho: f64,
    pub initial_step: f64,
    /// Clamp trial positions to `[A, B]`.
    pub clamp: bool,
}

impl Default for LloydOptions {
    fn default() -> Self {
        LloydOptions {
            max_iters: 10_000,
            grad_tol: 1e-9,
            armijo_c: 1e-4,
            shrink_rho: 0.5,
            initial_step: 1.0,
            clamp: true,
        }
    }
}

impl LloydOptions {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err("armijo_c must lie in (0, 1)".into());
        }
        if !(self.shrink_rho > 0.0 && self.shrink_rho < 1.0) {
            return Err("shrink_rho must lie in (0, 1)".into());
        }
        if !(self.grad_tol > 0.0) || !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err("grad_tol and initial_step must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientTol,
    MaxIters,
    StepUnderflow,
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::GradientTol => "gradient-tol",
            Termination::MaxIters => "max-iters",
            Termination::StepUnderflow => "step-underflow",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LloydIterate {
    pub positions: Vec<f64>,
    pub objective: f64,
    /// Euclidean norm of the gradient at `positions`.
    pub grad_norm: f64,
    /// Step that produced this iterate; 0 for the initial one.
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LloydTrace {
    pub iterates: Vec<LloydIterate>,
    pub terminated_by: Termination,
}

impl LloydTrace {
    pub fn last(&self) -> &LloydIterate {
        self.iterates.last().expect("trace holds the initial iterate")
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One synchronous descent step. Returns the new positions and the step
/// length used, or `None` when the step underflows or moves nothing.
///
/// The trial point is `clamp(p - alpha g)`; it is accepted once it is ordered
/// and satisfies `C(p') <= C(p) - c g . (p - p')`, which is the usual Armijo
/// rule whenever the clamp is inactive.
pub fn lloyd_step(
    problem: &CoverageProblem,
    p: &[f64],
    opts: &LloydOptions,
) -> Result<Option<(Vec<f64>, f64)>, ProblemError> {
    let f0 = problem.objective(p)?;
    let g = problem.gradient(p)?;
    if g.iter().all(|&v| v == 0.0) {
        return Ok(Some((p.to_vec(), 0.0)));
    }
    let (a, b) = (problem.a(), problem.b());
    let mut alpha = opts.initial_step;
    while alpha >= STEP_UNDERFLOW {
        let trial: Vec<f64> = p
            .iter()
            .zip(&g)
            .map(|(x, d)| {
                let y = x - alpha * d;
                if opts.clamp {
                    y.clamp(a, b)
                } else {
                    y
                }
            })
            .collect();
        if let Ok(f1) = problem.objective(&trial) {
            let decrease: f64 = g.iter().zip(p.iter().zip(&trial)).map(|(d, (x, y))| d * (x - y)).sum();
            if f1 <= f0 - opts.armijo_c * decrease {
                // at the rounding floor the accepted step can leave every
                // position unchanged; that is stagnation, not progress
                if trial == p {
                    return Ok(None);
                }
                return Ok(Some((trial, alpha)));
            }
        }
        alpha *= opts.shrink_rho;
    }
    Ok(None)
}

/// Iterates [`lloyd_step`] from `initial` until the gradient is small, the
/// iteration budget runs out, or the line search stalls.
pub fn lloyd_run(
    problem: &CoverageProblem,
    initial: &[f64],
    opts: &LloydOptions,
) -> Result<LloydTrace, ProblemError> {
    let mut p = Configuration::new(initial.to_vec(), problem.a(), problem.b())?.into_inner();
    let mut iterates = vec![LloydIterate {
        objective: problem.objective(&p)?,
        grad_norm: norm(&problem.gradient(&p)?),
        positions: p.clone(),
        step: 0.0,
    }];
    let mut terminated_by = Termination::MaxIters;
    for _ in 0..opts.max_iters {
        if iterates.last().expect("nonempty").grad_norm < opts.grad_tol {
            terminated_by = Termination::GradientTol;
            break;
        }
        match lloyd_step(problem, &p, opts)? {
            Some((next, step)) => {
                p = next;
                iterates.push(LloydIterate {
                    objective: problem.objective(&p)?,
                    grad_norm: norm(&problem.gradient(&p)?),
                    positions: p.clone(),
                    step,
                });
            }
            None => {
                terminated_by = Termination::StepUnderflow;
                break;
            }
        }
    }
    if terminated_by == Termination::MaxIters && iterates.last().expect("nonempty").grad_norm < opts.grad_tol {
        terminated_by = Termination::GradientTol;
    }
    Ok(LloydTrace {
        iterates,
        terminated_by,
    })
}

/// Uniformly random ordered configuration, by rejection of tuples whose
/// sorted gaps fall below the coincidence tolerance.
pub fn random_configuration(problem: &CoverageProblem, rng: &mut impl Rng) -> Vec<f64> {
    let (a, b) = (problem.a(), problem.b());
    loop {
        let mut p: Vec<f64> = (0..problem.vehicles()).map(|_| rng.random_range(a..b)).collect();
        p.sort_by(f64::total_cmp);
        if Configuration::new(p.clone(), a, b).is_ok() {
            return p;
        }
    }
}

/// Positions spread evenly over `[c - half_width, c + half_width]` around the
/// interval midpoint `c`; for three vehicles this is `(c - a, c, c + a)`.
pub fn symmetric_configuration(problem: &CoverageProblem, half_width: f64) -> Vec<f64> {
    let c = 0.5 * (problem.a() + problem.b());
    let m = problem.vehicles();
    if m == 1 {
        return vec![c];
    }
    (0..m)
        .map(|i| c - half_width + 2.0 * half_width * i as f64 / (m - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> CoverageProblem {
        CoverageProblem::parse(0.0, 1.0, 3, "x*(1-x)", "s").unwrap()
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let p = CoverageProblem::parse(0.0, 1.0, 1, "1", "s").unwrap();
        let (q, step) = lloyd_step(&p, &[0.5], &LloydOptions::default()).unwrap().unwrap();
        assert_eq!(q, vec![0.5]);
        assert_eq!(step, 0.0);
        let t = lloyd_run(&p, &[0.5], &LloydOptions::default()).unwrap();
        assert_eq!(t.terminated_by, Termination::GradientTol);
        assert_eq!(t.iterates.len(), 1);
    }

    #[test]
    fn single_step_decreases() {
        let p = ex1();
        let x = [0.1, 0.5, 0.9];
        let (q, _) = lloyd_step(&p, &x, &LloydOptions::default()).unwrap().unwrap();
        assert!(p.objective(&q).unwrap() < p.objective(&x).unwrap());
    }

    #[test]
    fn zero_budget_returns_initial() {
        let opts = LloydOptions {
            max_iters: 0,
            ..Default::default()
        };
        let t = lloyd_run(&ex1(), &[0.1, 0.5, 0.9], &opts).unwrap();
        assert_eq!(t.last().positions, vec![0.1, 0.5, 0.9]);
        assert_eq!(t.terminated_by, Termination::MaxIters);
    }

    #[test]
    fn invalid_initial_rejected() {
        assert!(lloyd_run(&ex1(), &[0.5, 0.1, 0.9], &LloydOptions::default()).is_err());
    }

    #[test]
    fn symmetric_starts() {
        let p = CoverageProblem::parse(-1.0, 1.0, 3, "x^2 - x^4", "s").unwrap();
        assert_eq!(symmetric_configuration(&p, 0.5), vec![-0.5, 0.0, 0.5]);
    }
}
