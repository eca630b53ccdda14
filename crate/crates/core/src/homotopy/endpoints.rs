//! Turning raw path endpoints into a deduplicated solution list.
//!
//! Regular endpoints are already Newton-refined at `t = 0`. Singular ones are
//! endgame estimates; every path of a cycle produces nearly the same estimate,
//! so they are grouped with the looser `cluster_tol` and the group centroid is
//! reported once.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::linalg::max_abs;
use super::tracker::{Homotopy, PathResult, PathStatus};
use super::TrackerOptions;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionPoint {
    pub coords: Vec<Complex64>,
    /// Max-abs residual of the target system.
    pub residual: f64,
    /// Residual relative to the magnitude of the cancelling terms.
    pub scaled_residual: f64,
    pub singular: bool,
    /// Number of paths that ended here.
    pub paths: usize,
}

impl SolutionPoint {
    pub fn is_real(&self, real_tol: f64) -> bool {
        self.coords.iter().all(|z| z.im.abs() <= real_tol)
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.coords.iter().map(|z| z.re).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PathSummary {
    pub total: usize,
    pub converged: usize,
    pub diverged: usize,
    pub failed: usize,
    /// Converged paths whose endpoint is a singular root.
    pub singular: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSet {
    pub vars: Vec<String>,
    pub solutions: Vec<SolutionPoint>,
    pub paths: PathSummary,
    pub theta: f64,
    pub dedup_tol: f64,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn real_solutions(&self, real_tol: f64) -> Vec<Vec<f64>> {
        self.solutions
            .iter()
            .filter(|s| s.is_real(real_tol))
            .map(SolutionPoint::real_part)
            .collect()
    }

    pub fn real_count(&self, real_tol: f64) -> usize {
        self.solutions.iter().filter(|s| s.is_real(real_tol)).count()
    }
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

/// Groups paths into distinct solutions. Deterministic in the input.
pub fn collect_solutions(
    h: &Homotopy,
    paths: &[PathResult],
    vars: &[String],
    opts: &TrackerOptions,
) -> SolutionSet {
    let mut summary = PathSummary {
        total: paths.len(),
        ..PathSummary::default()
    };
    let mut points: Vec<SolutionPoint> = Vec::new();
    let mut singular: Vec<&DVector<Complex64>> = Vec::new();

    for p in paths {
        match p.status {
            PathStatus::StepFailure => summary.failed += 1,
            PathStatus::Diverged => summary.diverged += 1,
            PathStatus::Converged if p.singular => singular.push(&p.projective),
            PathStatus::Converged => {
                summary.converged += 1;
                points.push(SolutionPoint {
                    scaled_residual: h.target_affine().scaled_residual(&p.endpoint),
                    coords: p.endpoint.clone(),
                    residual: p.residual,
                    singular: false,
                    paths: 1,
                });
            }
        }
    }

    // single-linkage clusters of singular endpoints
    singular.sort_by(|a, b| lex_cmp(a.as_slice(), b.as_slice()));
    let k = singular.len();
    let mut parent: Vec<usize> = (0..k).collect();
    for i in 0..k {
        for j in i + 1..k {
            if dist(singular[i].as_slice(), singular[j].as_slice()) <= opts.cluster_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; k];
    for i in 0..k {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    for g in groups {
        let mut c = DVector::zeros(singular[g[0]].len());
        for &i in &g {
            c += singular[i];
        }
        c /= Complex64::from(g.len() as f64);
        if Homotopy::affine_magnitude(&c) > opts.divergence_radius {
            summary.diverged += g.len();
            continue;
        }
        summary.converged += g.len();
        summary.singular += g.len();
        let x = polish_singular(h, Homotopy::project(&c));
        points.push(SolutionPoint {
            residual: h.target_residual(&x),
            scaled_residual: h.target_affine().scaled_residual(&x),
            coords: x,
            singular: true,
            paths: g.len(),
        });
    }

    points.sort_by(|a, b| lex_cmp(&a.coords, &b.coords));
    let mut out: Vec<SolutionPoint> = Vec::new();
    for p in points {
        match out.iter_mut().find(|q| dist(&q.coords, &p.coords) <= opts.dedup_tol) {
            Some(q) => {
                q.paths += p.paths;
                q.singular |= p.singular;
                if p.residual < q.residual {
                    q.coords = p.coords;
                    q.residual = p.residual;
                    q.scaled_residual = p.scaled_residual;
                }
            }
            None => out.push(p),
        }
    }

    SolutionSet {
        vars: vars.to_vec(),
        solutions: out,
        paths: summary,
        theta: 0.0,
        dedup_tol: opts.dedup_tol,
    }
}

/// A few damped Newton steps on a cluster centroid, kept only while they
/// lower the residual.
fn polish_singular(h: &Homotopy, mut x: Vec<Complex64>) -> Vec<Complex64> {
    let sys = h.target_affine();
    let mut r = max_abs(sys.eval(&x).as_slice());
    for _ in 0..4 {
        let (f, jac) = sys.eval_with_jacobian(&x);
        let Some(dx) = super::linalg::solve_linear(jac, -f) else {
            break;
        };
        let y: Vec<Complex64> = x.iter().zip(dx.iter()).map(|(a, d)| a + d).collect();
        let ry = max_abs(sys.eval(&y).as_slice());
        if !(ry < r) || dist(&x, &y) > 1e-6 * (1.0 + max_abs(&x)) {
            break;
        }
        x = y;
        r = ry;
    }
    x
}
