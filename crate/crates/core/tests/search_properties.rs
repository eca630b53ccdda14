//! Candidate search and Lloyd descent on the two reference examples.

use std::sync::OnceLock;

use coverage_core::homotopy::TrackerOptions;
use coverage_core::lloyd::{lloyd_run, random_configuration, symmetric_configuration, LloydOptions, Termination};
use coverage_core::optimizer::{global_minimum, GlobalResult, Method};
use coverage_core::CoverageProblem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ex1() -> CoverageProblem {
    CoverageProblem::parse(0.0, 1.0, 3, "x*(1-x)", "s").unwrap()
}

fn ex2() -> CoverageProblem {
    CoverageProblem::parse(-1.0, 1.0, 3, "x^2 - x^4", "s").unwrap()
}

fn solved(which: usize) -> &'static GlobalResult {
    static CELLS: [OnceLock<GlobalResult>; 2] = [OnceLock::new(), OnceLock::new()];
    CELLS[which].get_or_init(|| {
        let p = if which == 0 { ex1() } else { ex2() };
        global_minimum(&p, Method::TotalDegree, &TrackerOptions::default()).unwrap()
    })
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn candidates_are_stationary_on_free_coordinates() {
    for (which, problem) in [(0, ex1()), (1, ex2())] {
        let r = solved(which);
        assert!(!r.candidates().is_empty());
        for c in r.candidates() {
            let g = problem.gradient(&c.positions).unwrap();
            let m = g.len();
            for (i, gi) in g.iter().enumerate() {
                let pinned = (i == 0 && c.pin.left) || (i + 1 == m && c.pin.right);
                if !pinned {
                    assert!(gi.abs() < 1e-8, "{:?} component {i}: {gi}", c.positions);
                }
            }
            let exact = problem.objective(&c.positions).unwrap();
            assert!((exact - c.objective).abs() <= 1e-12);
        }
    }
}

#[test]
fn candidates_are_sorted_and_winner_is_first() {
    for which in 0..2 {
        let r = solved(which);
        let objs: Vec<f64> = r.candidates().iter().map(|c| c.objective).collect();
        assert!(objs.windows(2).all(|w| w[0] <= w[1]), "{objs:?}");
        assert_eq!(r.winner, r.candidates()[0]);
    }
}

#[test]
fn path_accounting_matches_bezout_counts() {
    for which in 0..2 {
        for inst in &solved(which).search.instances {
            let s = &inst.paths;
            assert_eq!(s.total as u64, inst.bezout, "{}", inst.pin);
            assert_eq!(s.converged + s.diverged + s.failed, s.total, "{}", inst.pin);
            assert_eq!(s.failed, 0, "{}", inst.pin);
        }
    }
}

#[test]
fn lloyd_descent_is_monotone() {
    let opts = LloydOptions::default();
    for problem in [ex1(), ex2()] {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = random_configuration(&problem, &mut rng);
            let trace = lloyd_run(&problem, &start, &opts).unwrap();
            for w in trace.iterates.windows(2) {
                assert!(w[1].objective <= w[0].objective, "seed {seed}: objective rose");
                assert!(w[1].step > 0.0);
            }
            for it in &trace.iterates {
                assert!(it.positions.windows(2).all(|w| w[0] < w[1]));
                assert!(it.positions.iter().all(|&x| x >= problem.a() && x <= problem.b()));
            }
        }
    }
}

#[test]
fn lloyd_preserves_symmetry_on_symmetric_density() {
    let problem = ex2();
    for a in [0.2, 0.5, 0.8] {
        let trace = lloyd_run(&problem, &symmetric_configuration(&problem, a), &LloydOptions::default()).unwrap();
        for it in &trace.iterates {
            let p = &it.positions;
            assert!(p[1].abs() < 1e-12, "a = {a}: middle vehicle left the centre: {p:?}");
            assert!((p[0] + p[2]).abs() < 1e-12, "a = {a}: {p:?}");
        }
    }
}

#[test]
fn lloyd_endpoints_are_candidates() {
    for (which, problem) in [(0, ex1()), (1, ex2())] {
        let cands = solved(which).candidates();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let start = random_configuration(&problem, &mut rng);
            let trace = lloyd_run(&problem, &start, &LloydOptions::default()).unwrap();
            assert_ne!(trace.terminated_by, Termination::MaxIters, "seed {seed}");
            let end = &trace.last().positions;
            let nearest = cands.iter().map(|c| max_dist(&c.positions, end)).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-3, "seed {seed}: endpoint {end:?} is {nearest} from every candidate");
        }
    }
}
