//! Equation-by-equation solving by regeneration.
//!
//! Level `s` holds the solutions of the first `s` equations cut by `n - s`
//! linear slices. One more equation is brought in with two homotopies: stage
//! one moves the slice for that equation through each of its `D` copies,
//! stage two deforms the product of those copies into the equation itself.
//!
//! Run directly on systems with repeated factors, the intermediate solutions
//! are singular and cannot serve as start points. So the levels are built for
//! `F + c` with small generic constants `c`, whose intermediate solutions are
//! all regular, and a last parameter homotopy `F + t c` carries them to `F`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{PolyError, SolverError};
use crate::homotopy::{
    collect_solutions, gamma_and_patch, random_complex, track_all, Homotopy, PathSummary, SolutionSet,
    TrackerOptions,
};
use crate::poly::{ComplexPolynomial, PolynomialSystem};

/// Path statistics for bringing in one equation.
#[derive(Clone, Debug, Serialize)]
pub struct RegenerationLevel {
    /// Number of target equations satisfied after this level.
    pub level: usize,
    pub degree: u32,
    pub start_solutions: usize,
    /// `#S_u` for each slice copy `u = 1..D`.
    pub stage_one_counts: Vec<usize>,
    pub stage_one_paths: usize,
    pub stage_two_paths: usize,
    pub stage_two: PathSummary,
    pub solutions: usize,
    /// The `D` slices `c0 + c . x` for this equation.
    pub slices: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Regeneration {
    pub solutions: SolutionSet,
    pub levels: Vec<RegenerationLevel>,
    /// Constants added to each equation while regenerating.
    pub perturbation: Vec<Complex64>,
    /// Paths of the final `F + t c` homotopy.
    pub final_paths: PathSummary,
}

fn linear_form(vars: &[String], coeffs: &[Complex64]) -> Result<ComplexPolynomial, PolyError> {
    let n = vars.len();
    let terms = coeffs.iter().enumerate().map(|(k, c)| {
        let mut e = vec![0; n];
        if k > 0 {
            e[k - 1] = 1;
        }
        (e, *c)
    });
    ComplexPolynomial::from_terms(vars, terms)
}

fn random_slice(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..=n).map(|_| random_complex(rng)).collect()
}

/// Solves `c0 + C x = 0` for the rows given.
fn solve_linear_slices(rows: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    let n = rows.len();
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j + 1]);
    let b = DVector::from_fn(n, |i, _| -rows[i][0]);
    let x = a.lu().solve(&b)?;
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then(|| x.iter().copied().collect())
}

/// Regenerative solve of a square system; same solution semantics as the
/// total-degree solver.
pub fn regenerate(sys: &PolynomialSystem<Complex64>, opts: &TrackerOptions) -> Result<Regeneration, SolverError> {
    opts.validate()?;
    if !sys.is_square() {
        return Err(PolyError::NotSquare {
            equations: sys.len(),
            variables: sys.vars().len(),
        }
        .into());
    }
    let vars = sys.vars().to_vec();
    let n = vars.len();
    let eqs: Vec<ComplexPolynomial> = sys.equations().iter().map(|e| e.reduce_monomial_content()).collect();
    if let Some(i) = eqs.iter().position(|e| e.total_degree() == 0) {
        return Err(PolyError::ConstantEquation(i).into());
    }

    let mut rng = opts.rng(1);
    let perturbation: Vec<Complex64> = eqs
        .iter()
        .map(|e| {
            let scale = e.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
            random_complex(&mut rng) * (scale * 1e-2)
        })
        .collect();
    let perturbed: Vec<ComplexPolynomial> = eqs
        .iter()
        .zip(&perturbation)
        .map(|(e, c)| e.add_aligned(&ComplexPolynomial::constant(&vars, *c)))
        .collect();

    let degrees: Vec<u32> = eqs.iter().map(|e| e.total_degree()).collect();
    let slices: Vec<Vec<Vec<Complex64>>> = degrees
        .iter()
        .map(|&d| (0..d).map(|_| random_slice(&mut rng, n)).collect())
        .collect();

    let (levels, points) = run_levels(&vars, &perturbed, &slices, n, opts, &mut rng)?;

    // carry the regular roots of F + c to F
    let target = PolynomialSystem::new(&vars, eqs)?;
    let start = PolynomialSystem::new(&vars, perturbed)?;
    let (_, patch) = gamma_and_patch(&mut rng, n);
    let h = Homotopy::new(&target, &start, Complex64::new(1.0, 0.0), patch)?;
    let paths = track_all(&h, &points, opts);
    let solutions = collect_solutions(&h, &paths, &vars, opts);
    Ok(Regeneration {
        final_paths: solutions.paths.clone(),
        solutions,
        levels,
        perturbation,
    })
}

/// Solutions of the first `s` equations of `prefix` cut by the first slice of
/// each remaining equation: `[q_1, .., q_s, l_{s+1,1}, .., l_{n,1}]`.
pub fn slice_solutions(
    vars: &[String],
    prefix: &[ComplexPolynomial],
    slices: &[Vec<Vec<Complex64>>],
    opts: &TrackerOptions,
) -> Result<(Vec<RegenerationLevel>, Vec<Vec<Complex64>>), SolverError> {
    let mut rng = opts.rng(2);
    run_levels(vars, prefix, slices, prefix.len(), opts, &mut rng)
}

fn run_levels(
    vars: &[String],
    eqs: &[ComplexPolynomial],
    slices: &[Vec<Vec<Complex64>>],
    upto: usize,
    opts: &TrackerOptions,
    rng: &mut impl Rng,
) -> Result<(Vec<RegenerationLevel>, Vec<Vec<Complex64>>), SolverError> {
    let n = vars.len();
    if slices.len() != n || slices.iter().any(Vec::is_empty) {
        return Err(PolyError::DimensionMismatch {
            expected: n,
            got: slices.len(),
        }
        .into());
    }
    let first: Vec<Vec<Complex64>> = slices.iter().map(|s| s[0].clone()).collect();
    let level0 = solve_linear_slices(&first).ok_or(SolverError::Singular("level-0 slices"))?;
    let mut current = vec![level0];
    let mut levels = Vec::with_capacity(upto);

    // row i of G^s is q_i for i < s and the first slice of equation i otherwise
    let rows = |s: usize, row_s: ComplexPolynomial| -> Result<Vec<ComplexPolynomial>, PolyError> {
        (0..n)
            .map(|i| {
                if i < s {
                    Ok(eqs[i].clone())
                } else if i == s {
                    Ok(row_s.clone())
                } else {
                    linear_form(vars, &slices[i][0])
                }
            })
            .collect()
    };

    for s in 0..upto {
        let d = slices[s].len();
        let start_count = current.len();
        let mut level = RegenerationLevel {
            level: s + 1,
            degree: d as u32,
            start_solutions: start_count,
            stage_one_counts: vec![start_count],
            stage_one_paths: 0,
            stage_two_paths: 0,
            stage_two: PathSummary::default(),
            solutions: 0,
            slices: slices[s].clone(),
        };
        if current.is_empty() {
            // nothing at this level means nothing at any deeper level
            levels.push(level);
            continue;
        }

        // stage one: move l_{s+1,1} to each l_{s+1,u}
        let g1 = PolynomialSystem::new(vars, rows(s, linear_form(vars, &slices[s][0])?)?)?;
        let mut gathered = current.clone();
        for u in 1..d {
            let gu = PolynomialSystem::new(vars, rows(s, linear_form(vars, &slices[s][u])?)?)?;
            let (_, patch) = gamma_and_patch(rng, n);
            let h = Homotopy::new(&gu, &g1, Complex64::new(1.0, 0.0), patch)?;
            let paths = track_all(&h, &current, opts);
            level.stage_one_paths += paths.len();
            let set = collect_solutions(&h, &paths, vars, opts);
            level.stage_one_counts.push(set.len());
            gathered.extend(set.solutions.into_iter().map(|p| p.coords));
        }

        // stage two: product of the slices to q_{s+1}
        let mut product = linear_form(vars, &slices[s][0])?;
        for u in 1..d {
            product = product.mul_aligned(&linear_form(vars, &slices[s][u])?);
        }
        let k = PolynomialSystem::new(vars, rows(s, product)?)?;
        let g_next = PolynomialSystem::new(vars, rows(s, eqs[s].clone())?)?;
        let (_, patch) = gamma_and_patch(rng, n);
        let h = Homotopy::new(&g_next, &k, Complex64::new(1.0, 0.0), patch)?;
        let paths = track_all(&h, &gathered, opts);
        level.stage_two_paths = paths.len();
        let set = collect_solutions(&h, &paths, vars, opts);
        level.stage_two = set.paths.clone();
        level.solutions = set.len();
        current = set.solutions.into_iter().map(|p| p.coords).collect();
        levels.push(level);
    }
    Ok((levels, current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn system(eqs: &[&str], vars: &[&str]) -> PolynomialSystem<Complex64> {
        let polys = eqs.iter().map(|s| parse_polynomial(s).unwrap()).collect();
        PolynomialSystem::new(vars, polys).unwrap().to_numeric()
    }

    #[test]
    fn univariate_quadratic() {
        let r = regenerate(&system(&["p^2 - 3*p + 2"], &["p"]), &TrackerOptions::default()).unwrap();
        let mut v: Vec<f64> = r.solutions.real_solutions(1e-8).iter().map(|p| p[0]).collect();
        v.sort_by(f64::total_cmp);
        assert_eq!(v.len(), 2);
        assert!((v[0] - 1.0).abs() < 1e-10 && (v[1] - 2.0).abs() < 1e-10);
        assert_eq!(r.levels[0].stage_one_counts, vec![1, 1]);
    }

    #[test]
    fn linear_system_skips_stage_one() {
        let r = regenerate(&system(&["x + y - 3", "x - y - 1"], &["x", "y"]), &TrackerOptions::default()).unwrap();
        assert!(r.levels.iter().all(|l| l.stage_one_paths == 0));
        assert_eq!(r.solutions.len(), 1);
        let s = &r.solutions.solutions[0].coords;
        assert!((s[0].re - 2.0).abs() < 1e-10 && (s[1].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_circles() {
        let r = regenerate(
            &system(&["x^2 + y^2 - 4", "(x - 1)^2 + y^2 - 4"], &["x", "y"]),
            &TrackerOptions::default(),
        )
        .unwrap();
        let mut v = r.solutions.real_solutions(1e-8);
        v.sort_by(|a, b| a[1].total_cmp(&b[1]));
        assert_eq!(v.len(), 2);
        let y = (4.0f64 - 0.25).sqrt();
        assert!((v[0][0] - 0.5).abs() < 1e-10 && (v[0][1] + y).abs() < 1e-10);
        // level monotonicity
        for w in r.levels.windows(2) {
            assert_eq!(w[1].stage_two_paths, w[1].degree as usize * w[0].solutions);
        }
    }

    #[test]
    fn double_root_survives_the_perturbation() {
        let r = regenerate(&system(&["(p - 1)^2"], &["p"]), &TrackerOptions::default()).unwrap();
        assert_eq!(r.solutions.len(), 1);
        assert!(r.solutions.solutions[0].singular);
        assert!((r.solutions.solutions[0].coords[0].re - 1.0).abs() < 1e-8);
    }
}
