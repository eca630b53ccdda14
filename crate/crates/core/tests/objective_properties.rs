//! Objective, gradient and Hessian against independent numeric oracles.

use coverage_core::lloyd::random_configuration;
use coverage_core::CoverageProblem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Example {
    name: &'static str,
    problem: CoverageProblem,
    phi: fn(f64) -> f64,
    cost: fn(f64) -> f64,
}

fn examples() -> Vec<Example> {
    vec![
        Example {
            name: "ex1",
            problem: CoverageProblem::parse(0.0, 1.0, 3, "x*(1-x)", "s").unwrap(),
            phi: |x| x * (1.0 - x),
            cost: |s| s,
        },
        Example {
            name: "ex2",
            problem: CoverageProblem::parse(-1.0, 1.0, 3, "x^2 - x^4", "s").unwrap(),
            phi: |x| x * x - x.powi(4),
            cost: |s| s,
        },
        Example {
            name: "quartic cost",
            problem: CoverageProblem::parse(0.0, 2.0, 4, "1 + x", "s + 3*s^2").unwrap(),
            phi: |x| 1.0 + x,
            cost: |s| s + 3.0 * s * s,
        },
    ]
}

/// Random ordered configurations with gaps wide enough for a 1e-6 stencil.
fn configurations(problem: &CoverageProblem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_gap = 1e-4 * (problem.b() - problem.a());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = random_configuration(problem, &mut rng);
        let spaced = p.windows(2).all(|w| w[1] - w[0] > min_gap)
            && p[0] - problem.a() > min_gap
            && problem.b() - p[p.len() - 1] > min_gap;
        if spaced {
            out.push(p);
        }
    }
    out
}

/// Expected cost by adaptive quadrature: every target is charged to its
/// nearest vehicle, with the integration split at the nearest-vehicle switches.
fn quadrature_objective(ex: &Example, p: &[f64]) -> f64 {
    let (a, b) = (ex.problem.a(), ex.problem.b());
    let mut cuts = vec![a];
    cuts.extend(p.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    cuts.push(b);
    let integrand = |x: f64| {
        let d = p.iter().map(|q| (q - x).abs()).fold(f64::INFINITY, f64::min);
        0.5 * (ex.cost)(d * d) * (ex.phi)(x)
    };
    cuts.windows(2)
        .map(|w| quadrature::integrate(integrand, w[0], w[1], 1e-14).integral)
        .sum()
}

#[test]
fn objective_matches_quadrature_on_random_configurations() {
    for ex in examples() {
        for p in configurations(&ex.problem, 50, 7) {
            let exact = ex.problem.objective(&p).unwrap();
            let numeric = quadrature_objective(&ex, &p);
            assert!(
                (exact - numeric).abs() <= 1e-9,
                "{}: {p:?} exact {exact} quadrature {numeric}",
                ex.name
            );
        }
    }
}

#[test]
fn objective_matches_quadrature_at_fixed_points() {
    let exs = examples();
    for (ex, p) in [
        (&exs[0], vec![0.235, 0.5, 0.765]),
        (&exs[0], vec![0.25, 0.5, 0.75]),
        (&exs[1], vec![-0.626, 0.431, 0.762]),
        (&exs[1], vec![-0.66, 0.0, 0.66]),
    ] {
        let exact = ex.problem.objective(&p).unwrap();
        assert!((exact - quadrature_objective(ex, &p)).abs() <= 1e-12, "{p:?}");
    }
    let ex1 = &exs[0].problem;
    assert!(ex1.objective(&[0.235, 0.5, 0.765]).unwrap() < ex1.objective(&[0.25, 0.5, 0.75]).unwrap());
}

/// Central difference of the exact objective along coordinate `i`.
fn central_difference(problem: &CoverageProblem, p: &[f64], i: usize, h: f64) -> f64 {
    let mut up = p.to_vec();
    let mut down = p.to_vec();
    up[i] += h;
    down[i] -= h;
    (problem.objective(&up).unwrap() - problem.objective(&down).unwrap()) / (2.0 * h)
}

#[test]
fn gradient_matches_central_differences() {
    for ex in examples() {
        for p in configurations(&ex.problem, 100, 11) {
            let g = ex.problem.gradient(&p).unwrap();
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (i, gi) in g.iter().enumerate() {
                let fd = central_difference(&ex.problem, &p, i, 1e-6);
                // relative to the larger of the component and the gradient
                // norm, so components that happen to be near zero do not
                // divide the rounding error of the difference quotient
                let rel = (gi - fd).abs() / gi.abs().max(scale);
                assert!(rel < 1e-6, "{}: {p:?} component {i}: {gi} vs {fd}", ex.name);
            }
        }
    }
}

#[test]
fn translation_leaves_objective_unchanged() {
    let base = CoverageProblem::parse(0.0, 1.0, 3, "x*(1-x)", "s").unwrap();
    let shifted = CoverageProblem::parse(1.0, 2.0, 3, "(x-1)*(2-x)", "s").unwrap();
    for p in configurations(&base, 30, 3) {
        let q: Vec<f64> = p.iter().map(|x| x + 1.0).collect();
        let (u, v) = (base.objective(&p).unwrap(), shifted.objective(&q).unwrap());
        assert!((u - v).abs() <= 1e-12, "{p:?}: {u} vs {v}");
        let gu = base.gradient(&p).unwrap();
        let gv = shifted.gradient(&q).unwrap();
        for (x, y) in gu.iter().zip(&gv) {
            assert!((x - y).abs() <= 1e-11);
        }
    }
}

#[test]
fn symmetric_density_gives_mirror_symmetric_objective() {
    for (problem, centre) in [
        (CoverageProblem::parse(0.0, 1.0, 3, "x*(1-x)", "s").unwrap(), 0.5),
        (CoverageProblem::parse(-1.0, 1.0, 3, "x^2 - x^4", "s").unwrap(), 0.0),
    ] {
        for p in configurations(&problem, 30, 5) {
            let mirrored: Vec<f64> = p.iter().rev().map(|x| 2.0 * centre - x).collect();
            let (u, v) = (problem.objective(&p).unwrap(), problem.objective(&mirrored).unwrap());
            assert!((u - v).abs() <= 1e-13, "{p:?}: {u} vs {v}");
        }
    }
}

#[test]
fn objective_is_nonnegative() {
    for ex in examples() {
        for p in configurations(&ex.problem, 50, 13) {
            assert!(ex.problem.objective(&p).unwrap() >= 0.0);
        }
    }
}

#[test]
fn hessian_of_single_vehicle_uniform_density() {
    // objective is ½∫(p - x)² dx on [0, 1], whose second derivative is 1
    let p = CoverageProblem::parse(0.0, 1.0, 1, "1", "s").unwrap();
    let h = p.hessian_fd(&[0.5], 1e-4).unwrap();
    assert!((h[(0, 0)] - 1.0).abs() < 1e-6, "{h}");
}

#[test]
fn symmetric_ex2_stationary_point_is_a_saddle() {
    // Independent eigen-decomposition of the finite-difference Hessian at the
    // refined stationary point (-0.65975, 0, 0.65975) gives eigenvalues of
    // roughly -0.0139, 0.106 and 0.110; the objective decreases along the
    // negative eigenvector, which moves the middle vehicle off the centre.
    let problem = CoverageProblem::parse(-1.0, 1.0, 3, "x^2 - x^4", "s").unwrap();
    let p = [-0.6597487116814755, 0.0, 0.6597487116814755];
    let h = problem.hessian_fd(&p, 1e-4).unwrap();
    let eig = h.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(min < -1e-3 && max > 1e-3, "{}", eig.eigenvalues);
    let k = eig.eigenvalues.iter().position(|&v| v == min).unwrap();
    let dir = eig.eigenvectors.column(k);
    let f0 = problem.objective(&p).unwrap();
    let q: Vec<f64> = p.iter().zip(dir.iter()).map(|(x, d)| x + 1e-2 * d).collect();
    assert!(problem.objective(&q).unwrap() < f0);
}
