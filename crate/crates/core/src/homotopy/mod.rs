//! Total-degree homotopy continuation for square polynomial systems.

mod endpoints;
mod linalg;
mod newton;
mod tracker;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{PolyError, SolverError};
use crate::poly::{ComplexPolynomial, Polynomial, PolynomialSystem};

pub use endpoints::{collect_solutions, PathSummary, SolutionPoint, SolutionSet};
pub use linalg::jacobian_rcond;
pub use newton::{refine_newton, NewtonOutcome};
pub use tracker::{track_path, Homotopy, HomotopyValue, PathResult, PathStatus};

/// Path tracker and endpoint settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerOptions {
    pub initial_step: f64,
    /// Smallest step, relative to the current `t`, before a path is abandoned.
    pub min_step: f64,
    pub max_step: f64,
    pub corrector_tol: f64,
    pub max_corrector_iters: usize,
    pub divergence_radius: f64,
    pub shrink: f64,
    pub grow: f64,
    pub grow_after: usize,
    /// Radius of the first endgame loop around `t = 0`.
    pub endgame_t: f64,
    /// Factor between successive endgame radii.
    pub endgame_ratio: f64,
    /// Smallest endgame radius tried.
    pub final_t: f64,
    /// Samples per loop of the Cauchy endgame.
    pub cauchy_samples: usize,
    pub max_winding: usize,
    /// Relative gap below which a loop counts as closed.
    pub loop_closure_tol: f64,
    /// Relative agreement of successive endgame estimates.
    pub endgame_tol: f64,
    pub endpoint_tol: f64,
    /// Largest scaled residual at which a singular endgame estimate still
    /// counts as a finite root.
    pub singular_accept_tol: f64,
    /// Singular endpoints closer than this (projective max-norm) form one cluster.
    pub cluster_tol: f64,
    pub dedup_tol: f64,
    pub real_tol: f64,
    pub seed: u64,
    /// Worker threads for path tracking; 0 picks automatically.
    pub threads: usize,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        TrackerOptions {
            initial_step: 0.05,
            min_step: 1e-7,
            max_step: 0.1,
            corrector_tol: 1e-10,
            max_corrector_iters: 3,
            divergence_radius: 1e8,
            shrink: 0.5,
            grow: 2.0,
            grow_after: 5,
            endgame_t: 1e-2,
            endgame_ratio: 0.1,
            final_t: 1e-8,
            cauchy_samples: 16,
            max_winding: 64,
            loop_closure_tol: 1e-6,
            endgame_tol: 1e-10,
            endpoint_tol: 1e-13,
            singular_accept_tol: 1e-10,
            cluster_tol: 1e-6,
            dedup_tol: 1e-8,
            real_tol: 1e-8,
            seed: 0,
            threads: 0,
        }
    }
}

impl TrackerOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidOptions(m.to_string()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if ![
            self.initial_step,
            self.min_step,
            self.max_step,
            self.corrector_tol,
            self.endgame_t,
            self.final_t,
            self.endpoint_tol,
            self.singular_accept_tol,
            self.loop_closure_tol,
            self.endgame_tol,
            self.cluster_tol,
            self.dedup_tol,
            self.real_tol,
        ]
        .into_iter()
        .all(pos)
        {
            return bad("step sizes and tolerances must be positive and finite");
        }
        if !(self.min_step <= self.initial_step && self.initial_step <= self.max_step && self.max_step <= 1.0) {
            return bad("need min_step <= initial_step <= max_step <= 1");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) || !(self.grow >= 1.0 && self.grow.is_finite()) {
            return bad("need 0 < shrink < 1 and grow >= 1");
        }
        if !(self.endgame_ratio > 0.0 && self.endgame_ratio < 1.0) {
            return bad("need 0 < endgame_ratio < 1");
        }
        if self.final_t > self.endgame_t || self.endgame_t >= 1.0 {
            return bad("need final_t <= endgame_t < 1");
        }
        if !(self.divergence_radius > 1.0 && self.divergence_radius.is_finite()) {
            return bad("divergence_radius must exceed 1");
        }
        if self.max_corrector_iters == 0 || self.grow_after == 0 || self.max_winding == 0 || self.cauchy_samples < 4 {
            return bad("iteration counts must be at least 1 and cauchy_samples at least 4");
        }
        Ok(())
    }

    pub(crate) fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// A random unit-modulus `gamma = e^{i theta}` and a random patch of length `n + 1`.
pub fn gamma_and_patch(rng: &mut impl Rng, n: usize) -> (f64, Vec<Complex64>) {
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    let patch = (0..=n).map(|_| random_complex(rng)).collect();
    (theta, patch)
}

/// Start system `p_i^{d_i} - 1` and its roots-of-unity solutions in
/// lexicographic order of the root indices.
pub fn total_degree_start(
    sys: &PolynomialSystem<Complex64>,
) -> Result<(PolynomialSystem<Complex64>, Vec<Vec<Complex64>>), SolverError> {
    if !sys.is_square() {
        return Err(PolyError::NotSquare {
            equations: sys.len(),
            variables: sys.vars().len(),
        }
        .into());
    }
    let n = sys.vars().len();
    let degrees = sys.degrees().to_vec();
    if let Some(i) = degrees.iter().position(|&d| d == 0) {
        return Err(PolyError::ConstantEquation(i).into());
    }
    let eqs = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut e = vec![0; n];
            e[i] = d;
            ComplexPolynomial::from_terms(
                sys.vars(),
                [
                    (e, Complex64::new(1.0, 0.0)),
                    (vec![0; n], Complex64::new(-1.0, 0.0)),
                ],
            )
        })
        .collect::<Result<Vec<Polynomial<Complex64>>, _>>()?;
    let start = PolynomialSystem::new(sys.vars(), eqs)?;

    let mut points = vec![Vec::new()];
    for &d in &degrees {
        let roots: Vec<Complex64> = (0..d)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * f64::from(k) / f64::from(d)))
            .collect();
        points = points
            .into_iter()
            .flat_map(|p: Vec<Complex64>| {
                roots.iter().map(move |r| {
                    let mut q = p.clone();
                    q.push(*r);
                    q
                })
            })
            .collect();
    }
    Ok((start, points))
}

/// `H(p, t) = (1 - t) F(p) + e^{i theta} t G(p)` on a patch drawn from `seed`.
pub fn make_homotopy(
    target: &PolynomialSystem<Complex64>,
    start: &PolynomialSystem<Complex64>,
    theta: f64,
    seed: u64,
) -> Result<Homotopy, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patch = (0..=target.vars().len()).map(|_| random_complex(&mut rng)).collect();
    Homotopy::new(target, start, Complex64::from_polar(1.0, theta), patch)
}

/// Tracks every start point of `h`; results are in start-point order.
pub fn track_all(h: &Homotopy, starts: &[Vec<Complex64>], opts: &TrackerOptions) -> Vec<PathResult> {
    crate::parallel::ordered_map(starts, opts.threads, |s| track_path(h, s, opts))
}

/// Finds all isolated complex solutions of a square system with a
/// total-degree homotopy.
pub fn solve_total_degree(
    sys: &PolynomialSystem<Complex64>,
    opts: &TrackerOptions,
) -> Result<SolutionSet, SolverError> {
    opts.validate()?;
    let (start, starts) = total_degree_start(sys)?;
    let mut rng = opts.rng(0);
    let (theta, patch) = gamma_and_patch(&mut rng, sys.vars().len());
    let h = Homotopy::new(sys, &start, Complex64::from_polar(1.0, theta), patch)?;
    let paths = track_all(&h, &starts, opts);
    let mut set = collect_solutions(&h, &paths, sys.vars(), opts);
    set.theta = theta;
    Ok(set)
}
