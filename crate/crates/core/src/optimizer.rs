//! Candidate enumeration and global-minimum certification.
//!
//! Every pin pattern's stationarity system is solved, its real ordered
//! solutions become candidates, and the exact objective picks the winner.

use std::cmp::Ordering;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ProblemError, SolverError};
use crate::homotopy::{solve_total_degree, PathSummary, SolutionSet, TrackerOptions};
use crate::problem::{BoundaryPin, CoverageProblem, StationarityInstance};
use crate::regeneration::regenerate;

/// Which homotopy solves the stationarity systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    TotalDegree,
    Regeneration,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::TotalDegree => "total-degree",
            Method::Regeneration => "regeneration",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "total-degree" => Ok(Method::TotalDegree),
            "regeneration" => Ok(Method::Regeneration),
            other => Err(format!("unknown method `{other}` (expected total-degree or regeneration)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HessianClass {
    PositiveDefinite,
    Indefinite,
    NegativeDefinite,
    NearSingular,
    /// No free coordinates, or the stencil would leave the ordered region.
    NotApplicable,
}

impl HessianClass {
    pub fn label(&self) -> &'static str {
        match self {
            HessianClass::PositiveDefinite => "positive-definite",
            HessianClass::Indefinite => "indefinite",
            HessianClass::NegativeDefinite => "negative-definite",
            HessianClass::NearSingular => "near-singular",
            HessianClass::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateSource {
    TotalDegree,
    Regeneration,
    /// A zero-equation instance: every vehicle sits on an endpoint.
    EndpointEnumeration,
}

impl CandidateSource {
    pub fn label(&self) -> &'static str {
        match self {
            CandidateSource::TotalDegree => "total-degree",
            CandidateSource::Regeneration => "regeneration",
            CandidateSource::EndpointEnumeration => "endpoint-enumeration",
        }
    }
}

impl From<Method> for CandidateSource {
    fn from(m: Method) -> Self {
        match m {
            Method::TotalDegree => CandidateSource::TotalDegree,
            Method::Regeneration => CandidateSource::Regeneration,
        }
    }
}

/// Below this ratio of smallest to largest |eigenvalue| a Hessian is near-singular.
pub const NEAR_SINGULAR_RATIO: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub positions: Vec<f64>,
    pub objective: f64,
    pub pin: BoundaryPin,
    pub hessian: HessianClass,
    pub source: CandidateSource,
    /// Max-abs gradient over the free coordinates.
    pub gradient_norm: f64,
}

/// Distinct solutions of some set of instances, embedded in `C^m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub complex: usize,
    pub real: usize,
    pub feasible: usize,
}

/// One solved stationarity instance.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceReport {
    pub pin: BoundaryPin,
    pub variables: Vec<String>,
    pub bezout: u64,
    pub paths: PathSummary,
    /// Gamma angle of the total-degree homotopy (0 for regeneration).
    pub theta: f64,
    pub complex: usize,
    pub real: usize,
    pub feasible: usize,
    /// Solutions embedded as full position vectors.
    pub solutions: Vec<EmbeddedSolution>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddedSolution {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub residual: f64,
    pub singular: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateSearch {
    pub method: Method,
    pub seed: u64,
    pub instances: Vec<InstanceReport>,
    /// Feasible candidates, merged across instances and sorted by objective.
    pub candidates: Vec<Candidate>,
}

impl CandidateSearch {
    pub fn failed_paths(&self) -> usize {
        self.instances.iter().map(|i| i.paths.failed).sum()
    }

    /// Distinct solutions over the instances with the listed pins.
    pub fn census(&self, pins: &[BoundaryPin], real_tol: f64, dedup_tol: f64) -> Census {
        let mut points: Vec<&EmbeddedSolution> = Vec::new();
        for inst in self.instances.iter().filter(|i| pins.contains(&i.pin)) {
            for s in &inst.solutions {
                let dup = points.iter().any(|q| {
                    q.re.iter()
                        .zip(&q.im)
                        .zip(s.re.iter().zip(&s.im))
                        .all(|((a, b), (c, d))| Complex64::new(a - c, b - d).norm() <= dedup_tol)
                });
                if !dup {
                    points.push(s);
                }
            }
        }
        let real = points.iter().filter(|s| s.im.iter().all(|v| v.abs() < real_tol)).count();
        let feasible = self
            .candidates
            .iter()
            .filter(|c| pins.contains(&c.pin))
            .count();
        Census {
            complex: points.len(),
            real,
            feasible,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalResult {
    pub winner: Candidate,
    pub search: CandidateSearch,
    /// Counts over every enumerated instance.
    pub counts: Census,
}

impl GlobalResult {
    /// Picks the winner of a finished search; counts cover every instance.
    pub fn from_search(search: CandidateSearch, opts: &TrackerOptions) -> Result<Self, ProblemError> {
        let pins: Vec<BoundaryPin> = search.instances.iter().map(|i| i.pin).collect();
        let counts = search.census(&pins, opts.real_tol, opts.dedup_tol);
        let winner = search.candidates.first().cloned().ok_or(ProblemError::NoCandidates)?;
        Ok(GlobalResult { winner, search, counts })
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.search.candidates
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Hessian class over the free coordinates, from a central-difference
/// Hessian whose stencil stays inside the ordered region.
pub fn hessian_class(problem: &CoverageProblem, p: &[f64], free: &[usize]) -> HessianClass {
    if free.is_empty() {
        return HessianClass::NotApplicable;
    }
    let (a, b) = (problem.a(), problem.b());
    let mut room = b - a;
    for &i in free {
        let lo = if i == 0 { a } else { p[i - 1] };
        let hi = if i + 1 == p.len() { b } else { p[i + 1] };
        room = room.min(p[i] - lo).min(hi - p[i]);
    }
    // both neighbours may move toward each other
    let h = (1e-4 * (b - a)).min(0.2 * room);
    if h <= problem.coincidence_tolerance() {
        return HessianClass::NotApplicable;
    }
    let Ok(hess) = problem.hessian_fd_free(p, free, h) else {
        return HessianClass::NotApplicable;
    };
    let eig = SymmetricEigen::new(hess).eigenvalues;
    let big = eig.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let small = eig.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if big == 0.0 || small < NEAR_SINGULAR_RATIO * big {
        HessianClass::NearSingular
    } else if eig.iter().all(|&v| v > 0.0) {
        HessianClass::PositiveDefinite
    } else if eig.iter().all(|&v| v < 0.0) {
        HessianClass::NegativeDefinite
    } else {
        HessianClass::Indefinite
    }
}

/// Real solutions of one instance as feasible configurations.
///
/// A point is real when every imaginary part is below `real_tol`; it is then
/// re-embedded with its pinned coordinates and kept when it lies in `[A, B]`
/// (up to rounding) and is strictly ascending with non-coincident vehicles.
pub fn classify(
    problem: &CoverageProblem,
    instance: &StationarityInstance,
    solutions: &SolutionSet,
    real_tol: f64,
) -> Vec<Vec<f64>> {
    solutions
        .solutions
        .iter()
        .filter(|s| s.is_real(real_tol))
        .filter_map(|s| feasible(problem, instance.embed(&s.real_part())))
        .collect()
}

fn feasible(problem: &CoverageProblem, mut p: Vec<f64>) -> Option<Vec<f64>> {
    let (a, b) = (problem.a(), problem.b());
    let slack = 1e-12 * (b - a);
    for v in p.iter_mut() {
        if *v < a - slack || *v > b + slack {
            return None;
        }
        *v = v.clamp(a, b);
    }
    crate::problem::Configuration::new(p, a, b).ok().map(|c| c.into_inner())
}

fn make_candidate(
    problem: &CoverageProblem,
    instance: &StationarityInstance,
    positions: Vec<f64>,
    source: CandidateSource,
) -> Result<Candidate, ProblemError> {
    let objective = problem.objective(&positions)?;
    let grad = problem.gradient(&positions)?;
    let gradient_norm = instance
        .free_vehicles
        .iter()
        .map(|&i| grad[i].abs())
        .fold(0.0, f64::max);
    Ok(Candidate {
        hessian: hessian_class(problem, &positions, &instance.free_vehicles),
        positions,
        objective,
        pin: instance.pin,
        source,
        gradient_norm,
    })
}

fn solve_instance(
    instance: &StationarityInstance,
    method: Method,
    opts: &TrackerOptions,
) -> Result<SolutionSet, SolverError> {
    let sys = instance.system.to_numeric();
    match method {
        Method::TotalDegree => solve_total_degree(&sys, opts),
        Method::Regeneration => regenerate(&sys, opts).map(|r| r.solutions),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OptimizerError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Solves every pin pattern and collects the feasible stationary configurations.
pub fn find_candidates(
    problem: &CoverageProblem,
    method: Method,
    opts: &TrackerOptions,
) -> Result<CandidateSearch, OptimizerError> {
    let mut instances = Vec::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    for instance in problem.enumerate_instances()? {
        let report = if instance.system.is_empty() {
            let p = instance.embed::<f64>(&[]);
            let kept = feasible(problem, p.clone());
            if let Some(p) = kept.clone() {
                candidates.push(make_candidate(
                    problem,
                    &instance,
                    p,
                    CandidateSource::EndpointEnumeration,
                )?);
            }
            InstanceReport {
                pin: instance.pin,
                variables: Vec::new(),
                bezout: 1,
                paths: PathSummary::default(),
                theta: 0.0,
                complex: 1,
                real: 1,
                feasible: usize::from(kept.is_some()),
                solutions: vec![EmbeddedSolution {
                    im: vec![0.0; p.len()],
                    re: p,
                    residual: 0.0,
                    singular: false,
                }],
            }
        } else {
            let set = solve_instance(&instance, method, opts)?;
            let real = classify(problem, &instance, &set, opts.real_tol);
            let feasible_count = real.len();
            for p in real {
                candidates.push(make_candidate(problem, &instance, p, method.into())?);
            }
            InstanceReport {
                pin: instance.pin,
                variables: set.vars.clone(),
                bezout: instance.system.bezout_bound().map_err(ProblemError::from)?,
                paths: set.paths.clone(),
                theta: set.theta,
                complex: set.len(),
                real: set.real_count(opts.real_tol),
                feasible: feasible_count,
                solutions: set
                    .solutions
                    .iter()
                    .map(|s| {
                        let z = instance.embed(&s.coords);
                        EmbeddedSolution {
                            re: z.iter().map(|c| c.re).collect(),
                            im: z.iter().map(|c| c.im).collect(),
                            residual: s.residual,
                            singular: s.singular,
                        }
                    })
                    .collect(),
            }
        };
        instances.push(report);
    }

    // a pinned solution can coincide with an interior one; keep the first
    let mut merged: Vec<Candidate> = Vec::new();
    for c in candidates {
        if !merged.iter().any(|q| max_dist(&q.positions, &c.positions) <= opts.dedup_tol) {
            merged.push(c);
        }
    }
    merged.sort_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then_with(|| lex_cmp(&a.positions, &b.positions))
    });
    Ok(CandidateSearch {
        method,
        seed: opts.seed,
        instances,
        candidates: merged,
    })
}

/// The candidate of least objective; ties go to the lexicographically
/// smallest configuration.
pub fn global_minimum(
    problem: &CoverageProblem,
    method: Method,
    opts: &TrackerOptions,
) -> Result<GlobalResult, OptimizerError> {
    let search = find_candidates(problem, method, opts)?;
    Ok(GlobalResult::from_search(search, opts)?)
}

/// Largest number of grid configurations `brute_force_check` evaluates.
pub const MAX_GRID_CONFIGS: u128 = 50_000_000;

/// Exhaustive search over ordered tuples of the grid `A + k * step`.
pub fn brute_force_check(problem: &CoverageProblem, grid_step: f64) -> Result<Vec<f64>, ProblemError> {
    let (a, b) = (problem.a(), problem.b());
    let m = problem.vehicles();
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(ProblemError::StencilDegenerate(grid_step));
    }
    let n = ((b - a) / grid_step + 1e-9).floor() as usize + 1;
    // strictly ascending m-tuples out of n points
    let mut size: u128 = 1;
    for k in 0..m as u128 {
        size = size * (n as u128).saturating_sub(k) / (k + 1);
        if size > MAX_GRID_CONFIGS {
            return Err(ProblemError::GridTooLarge(size));
        }
    }
    if size == 0 {
        return Err(ProblemError::NoCandidates);
    }
    let grid: Vec<f64> = (0..n).map(|k| (a + k as f64 * grid_step).min(b)).collect();
    let mut idx: Vec<usize> = (0..m).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        let p: Vec<f64> = idx.iter().map(|&k| grid[k]).collect();
        if let Ok(v) = problem.objective(&p) {
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, p));
            }
        }
        // next combination in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return best.map(|(_, p)| p).ok_or(ProblemError::NoCandidates);
            }
            i -= 1;
            if idx[i] < n - m + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
