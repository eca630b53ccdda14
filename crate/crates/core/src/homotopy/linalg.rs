use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::poly::CompiledSystem;

pub(crate) fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// LU solve; `None` when the matrix is numerically singular.
pub(crate) fn solve_linear(
    m: DMatrix<Complex64>,
    rhs: DVector<Complex64>,
) -> Option<DVector<Complex64>> {
    let x = m.lu().solve(&rhs)?;
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
}

/// Ratio of smallest to largest singular value of the system's Jacobian,
/// after scaling each row to unit max-norm so that equations with large
/// integer coefficients do not swamp the rest.
pub fn jacobian_rcond(sys: &CompiledSystem, x: &[Complex64]) -> f64 {
    let (_, mut jac) = sys.eval_with_jacobian(x);
    for mut row in jac.row_iter_mut() {
        let m = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 0.0 {
            row /= Complex64::from(m);
        }
    }
    let sv = jac.singular_values();
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if hi == 0.0 || !hi.is_finite() {
        0.0
    } else {
        lo / hi
    }
}

pub(crate) const SINGULAR_RCOND: f64 = 1e-8;

pub(crate) fn is_well_conditioned(sys: &CompiledSystem, x: &[Complex64]) -> bool {
    jacobian_rcond(sys, x) > SINGULAR_RCOND
}
