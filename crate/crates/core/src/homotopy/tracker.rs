//! Straight-line homotopies and the predictor-corrector path tracker.
//!
//! Paths are followed in projective coordinates `y = (y0, y1, .., yn)` on a
//! random affine patch `a . y = 1`, so solutions at infinity stay bounded and
//! show up as `y0 -> 0`. Affine points are `x = y[1..] / y0`.
//!
//! Below `endgame_t` the tracker switches to a Cauchy endgame: it loops
//! around `|t| = r` in the complex plane until the path closes up (after `w`
//! turns, the winding number) and averages the samples. The average is the
//! Cauchy integral for `y(0)`, which stays accurate for singular roots where
//! tracking straight into `t = 0` would lose precision.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{is_well_conditioned, max_abs, solve_linear};
use super::TrackerOptions;
use crate::error::{PolyError, SolverError};
use crate::poly::{CompiledPolynomial, CompiledSystem, PolynomialSystem};

/// `H(p, t) = (1 - t) F(p) + gamma t G(p)`.
#[derive(Clone, Debug)]
pub struct Homotopy {
    n: usize,
    target_affine: CompiledSystem,
    start_affine: CompiledSystem,
    target: CompiledSystem,
    start: CompiledSystem,
    gamma: Complex64,
    patch: Vec<Complex64>,
}

/// Affine homotopy evaluation: value, Jacobian in `p`, derivative in `t`.
pub struct HomotopyValue {
    pub value: DVector<Complex64>,
    pub jacobian: DMatrix<Complex64>,
    pub dt: DVector<Complex64>,
}

type Projective = (DVector<Complex64>, DMatrix<Complex64>, DVector<Complex64>);

impl Homotopy {
    /// `patch` must have one more entry than there are variables.
    pub fn new(
        target: &PolynomialSystem<Complex64>,
        start: &PolynomialSystem<Complex64>,
        gamma: Complex64,
        patch: Vec<Complex64>,
    ) -> Result<Self, SolverError> {
        let n = target.vars().len();
        if !target.is_square() || start.len() != target.len() || start.vars() != target.vars() {
            return Err(PolyError::DimensionMismatch {
                expected: target.len(),
                got: start.len(),
            }
            .into());
        }
        if patch.len() != n + 1 {
            return Err(PolyError::DimensionMismatch {
                expected: n + 1,
                got: patch.len(),
            }
            .into());
        }
        let mut t_h = Vec::with_capacity(n);
        let mut s_h = Vec::with_capacity(n);
        for (f, g) in target.equations().iter().zip(start.equations()) {
            let d = f.total_degree().max(g.total_degree());
            t_h.push(CompiledPolynomial::homogenized(f, d));
            s_h.push(CompiledPolynomial::homogenized(g, d));
        }
        Ok(Homotopy {
            n,
            target_affine: CompiledSystem::new(target),
            start_affine: CompiledSystem::new(start),
            target: CompiledSystem::from_equations(n + 1, t_h),
            start: CompiledSystem::from_equations(n + 1, s_h),
            gamma,
            patch,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn evaluate(&self, p: &[Complex64], t: f64) -> HomotopyValue {
        let (f, jf) = self.target_affine.eval_with_jacobian(p);
        let (g, jg) = self.start_affine.eval_with_jacobian(p);
        let s = 1.0 - t;
        HomotopyValue {
            value: &f * Complex64::from(s) + &g * (self.gamma * t),
            jacobian: &jf * Complex64::from(s) + &jg * (self.gamma * t),
            dt: &g * self.gamma - &f,
        }
    }

    /// Lifts an affine point onto the patch.
    pub fn lift(&self, x: &[Complex64]) -> DVector<Complex64> {
        let mut y = DVector::from_element(self.n + 1, Complex64::new(1.0, 0.0));
        for (i, v) in x.iter().enumerate() {
            y[i + 1] = *v;
        }
        let s: Complex64 = self.patch.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        y / s
    }

    pub fn project(y: &DVector<Complex64>) -> Vec<Complex64> {
        (1..y.len()).map(|i| y[i] / y[0]).collect()
    }

    /// Largest affine coordinate magnitude of a projective point.
    pub fn affine_magnitude(y: &DVector<Complex64>) -> f64 {
        let top = (1..y.len()).map(|i| y[i].norm()).fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        top / y[0].norm()
    }

    /// Projective value, Jacobian and `t`-derivative, with the patch row last.
    fn eval_projective(&self, y: &DVector<Complex64>, t: Complex64) -> Projective {
        let n = self.n;
        let ys = y.as_slice();
        let (f, jf) = self.target.eval_with_jacobian(ys);
        let (g, jg) = self.start.eval_with_jacobian(ys);
        let s = 1.0 - t;
        let gt = self.gamma * t;
        let mut h = DVector::zeros(n + 1);
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let mut dt = DVector::zeros(n + 1);
        for i in 0..n {
            h[i] = f[i] * s + g[i] * gt;
            dt[i] = g[i] * self.gamma - f[i];
            for j in 0..=n {
                jac[(i, j)] = jf[(i, j)] * s + jg[(i, j)] * gt;
            }
        }
        h[n] = self.patch.iter().zip(ys).map(|(a, b)| a * b).sum::<Complex64>() - 1.0;
        for j in 0..=n {
            jac[(n, j)] = self.patch[j];
        }
        (h, jac, dt)
    }

    /// Residual of the target system at an affine point.
    pub fn target_residual(&self, x: &[Complex64]) -> f64 {
        max_abs(self.target_affine.eval(x).as_slice())
    }

    pub(crate) fn target_affine(&self) -> &CompiledSystem {
        &self.target_affine
    }

    /// Newton on `H(., t) = 0` in projective coordinates. Fails when an update
    /// shrinks by less than `contraction` or `tol` is not met in time.
    fn correct(
        &self,
        mut y: DVector<Complex64>,
        t: Complex64,
        tol: f64,
        max_iters: usize,
        contraction: f64,
    ) -> Option<(DVector<Complex64>, usize)> {
        let mut prev = f64::INFINITY;
        for it in 0..max_iters {
            let (h, jac, _) = self.eval_projective(&y, t);
            let dy = solve_linear(jac, -h)?;
            let step = max_abs(dy.as_slice());
            y += dy;
            let scale = 1.0 + max_abs(y.as_slice());
            if step <= tol * scale {
                return Some((y, it + 1));
            }
            if it > 0 && step > contraction * prev {
                return None;
            }
            prev = step;
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Converged,
    Diverged,
    StepFailure,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathResult {
    pub status: PathStatus,
    /// Affine endpoint (meaningless for diverged paths).
    pub endpoint: Vec<Complex64>,
    /// Endpoint on the projective patch.
    #[serde(skip)]
    pub projective: DVector<Complex64>,
    pub t_reached: f64,
    pub residual: f64,
    pub corrector_iters_total: usize,
    pub steps: usize,
    /// Number of loops around `t = 0` before the path closed up.
    pub winding: usize,
    /// Newton at `t = 0` did not converge quadratically from the endgame
    /// estimate, so the endpoint is the estimate itself.
    pub singular: bool,
}

/// A piece of the `t` contour, parametrized by a real `s`.
#[derive(Clone, Copy)]
enum Contour {
    /// `t = s`.
    Real,
    /// `t = r e^{i s}`.
    Circle(f64),
}

impl Contour {
    fn t(self, s: f64) -> Complex64 {
        match self {
            Contour::Real => Complex64::new(s, 0.0),
            Contour::Circle(r) => Complex64::from_polar(r, s),
        }
    }
}

struct Walker<'a> {
    h: &'a Homotopy,
    opts: &'a TrackerOptions,
    y: DVector<Complex64>,
    iters: usize,
    steps: usize,
}

impl Walker<'_> {
    /// Moves `y` along `contour` from `s0` to `s1` with steps of at most
    /// `cap(s)`; fails once a rejected step drops below `floor(s)`.
    /// `step` carries the adaptive step size in and out.
    fn advance(
        &mut self,
        contour: Contour,
        (s0, s1): (f64, f64),
        step: &mut f64,
        cap: impl Fn(f64) -> f64,
        floor: impl Fn(f64) -> f64,
    ) -> Result<(), PathStatus> {
        let opts = self.opts;
        let dir = (s1 - s0).signum();
        let mut s = s0;
        let mut streak = 0;
        while (s1 - s) * dir > 0.0 {
            let left = (s1 - s) * dir;
            let ds = step.min(cap(s)).min(left);
            // a short final piece says nothing about the step size that works
            let clipped = ds < step.min(cap(s));
            let s_next = if ds >= left { s1 } else { s + dir * ds };
            let t_next = contour.t(s_next);
            // Euler predictor: dy = -Hy^{-1} Ht dt
            let (_, jac, ht) = self.h.eval_projective(&self.y, contour.t(s));
            let predicted = solve_linear(jac, -ht * (t_next - contour.t(s))).map(|d| &self.y + d);
            let corrected = predicted.and_then(|p| {
                self.h
                    .correct(p, t_next, opts.corrector_tol, opts.max_corrector_iters, 0.5)
            });
            match corrected {
                Some((c, it)) => {
                    self.iters += it;
                    self.steps += 1;
                    self.y = c;
                    s = s_next;
                    // projective coordinates stay bounded, so only give up on
                    // a path once it is far beyond the reporting radius
                    if Homotopy::affine_magnitude(&self.y) > opts.divergence_radius.powi(2) {
                        return Err(PathStatus::Diverged);
                    }
                    streak += 1;
                    if streak >= opts.grow_after {
                        *step = step.min(cap(s)) * opts.grow;
                        streak = 0;
                    }
                }
                None => {
                    streak = 0;
                    if !clipped || ds * opts.shrink < *step {
                        *step = ds * opts.shrink;
                    }
                    if *step < floor(s) {
                        return Err(PathStatus::StepFailure);
                    }
                }
            }
        }
        Ok(())
    }

    /// Loops around `|t| = r` until the path closes; returns the sample
    /// average and the winding number.
    fn cauchy_loop(&mut self, r: f64) -> Result<(DVector<Complex64>, usize), PathStatus> {
        let opts = self.opts;
        let n = opts.cauchy_samples;
        let arc = std::f64::consts::TAU / n as f64;
        let start = self.y.clone();
        let mut sum = DVector::zeros(self.y.len());
        let mut count = 0usize;
        let mut step = arc;
        for w in 1..=opts.max_winding {
            for k in 0..n {
                sum += &self.y;
                count += 1;
                let s0 = arc * ((w - 1) * n + k) as f64;
                self.advance(Contour::Circle(r), (s0, s0 + arc), &mut step, |_| arc, |_| opts.min_step)?;
            }
            let gap = max_abs((&self.y - &start).as_slice());
            if gap <= opts.loop_closure_tol * (1.0 + max_abs(start.as_slice())) {
                // snap back so the next descent starts on the same branch
                self.y = start;
                return Ok((sum / Complex64::from(count as f64), w));
            }
        }
        Err(PathStatus::StepFailure)
    }
}

/// Follows one solution path of `h` from `t = 1` down to `t = 0`.
pub fn track_path(h: &Homotopy, start: &[Complex64], opts: &TrackerOptions) -> PathResult {
    let mut walker = Walker {
        h,
        opts,
        y: h.lift(start),
        iters: 0,
        steps: 0,
    };
    let fail = |w: Walker<'_>, t: f64, status: PathStatus| PathResult {
        status,
        endpoint: Homotopy::project(&w.y),
        projective: w.y,
        t_reached: t,
        residual: f64::NAN,
        corrector_iters_total: w.iters,
        steps: w.steps,
        winding: 0,
        singular: false,
    };

    let one = Complex64::new(1.0, 0.0);
    match h.correct(walker.y.clone(), one, opts.corrector_tol, opts.max_corrector_iters + 2, 0.5) {
        Some((c, it)) => {
            walker.y = c;
            walker.iters += it;
        }
        None => return fail(walker, 1.0, PathStatus::StepFailure),
    }

    let mut step = opts.initial_step;
    if let Err(status) = walker.advance(
        Contour::Real,
        (1.0, opts.endgame_t),
        &mut step,
        |_| opts.max_step,
        |t| opts.min_step * t,
    ) {
        return fail(walker, opts.endgame_t, status);
    }

    // Cauchy endgame on shrinking circles until two estimates agree
    let mut r = opts.endgame_t;
    let mut prev: Option<DVector<Complex64>> = None;
    let (estimate, winding) = loop {
        let (est, w) = match walker.cauchy_loop(r) {
            Ok(v) => v,
            Err(status) => return fail(walker, r, status),
        };
        // Two close regular roots look like a cycle until the circle is
        // inside their branch point, and the average of the cycle is then
        // stable without being a root. So agreement only counts at a root.
        let agreed = prev.as_ref().is_some_and(|p| {
            max_abs((p - &est).as_slice()) <= opts.endgame_tol * (1.0 + max_abs(est.as_slice()))
        }) && (w == 1
            || h.target_affine().scaled_residual(&Homotopy::project(&est)) <= opts.singular_accept_tol);
        let next = r * opts.endgame_ratio;
        let at_infinity = Homotopy::affine_magnitude(&est) > opts.divergence_radius;
        if agreed || at_infinity || next < opts.final_t {
            break (est, w);
        }
        prev = Some(est);
        let mut step = r;
        if let Err(status) = walker.advance(
            Contour::Real,
            (r, next),
            &mut step,
            |t| t * (1.0 - opts.endgame_ratio),
            |t| opts.min_step * t,
        ) {
            return fail(walker, r, status);
        }
        r = next;
    };

    // final solve at t = 0: quadratic convergence means a regular root
    let zero = Complex64::new(0.0, 0.0);
    let refined = h
        .correct(estimate.clone(), zero, opts.endpoint_tol, 8, 0.1)
        .filter(|(c, _)| is_well_conditioned(h.target_affine(), &Homotopy::project(c)));
    let singular = refined.is_none();
    let end = match refined {
        Some((c, it)) => {
            walker.iters += it;
            c
        }
        None => estimate,
    };
    let endpoint = Homotopy::project(&end);
    // An endgame estimate that is not a root to working precision comes from a
    // cycle too ill-conditioned to resolve; in practice these head to infinity.
    let unresolved = singular && !(h.target_affine().scaled_residual(&endpoint) <= opts.singular_accept_tol);
    let status = if unresolved || Homotopy::affine_magnitude(&end) > opts.divergence_radius {
        PathStatus::Diverged
    } else {
        PathStatus::Converged
    };
    let residual = if status == PathStatus::Converged {
        h.target_residual(&endpoint)
    } else {
        f64::NAN
    };
    PathResult {
        status,
        endpoint,
        projective: end,
        t_reached: 0.0,
        residual,
        corrector_iters_total: walker.iters,
        steps: walker.steps,
        winding,
        singular,
    }
}
