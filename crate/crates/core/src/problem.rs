//! The 1-D coverage problem: density, cost kernel, Voronoi cells, the exact
//! expected cost and its gradient, and the stationarity systems whose real
//! ordered solutions are the candidate optima.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::ProblemError;
use crate::poly::{
    parse_polynomial, rational_to_f64, PolynomialSystem, RationalPolynomial,
};

/// Relative gap (times `B - A`) below which two vehicles count as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-8;

/// Grid used for the sampled density/cost sanity checks.
const ASSUMPTION_SAMPLES: usize = 1001;

/// Real-coefficient copy of a polynomial for fast `f64` evaluation.
#[derive(Clone, Debug)]
struct RealPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl RealPoly {
    fn new(p: &RationalPolynomial) -> Self {
        RealPoly {
            terms: p
                .terms()
                .map(|(m, c)| (rational_to_f64(c), m.0.clone()))
                .collect(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) })
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundaryPin {
    /// `p_1 = A`
    pub left: bool,
    /// `p_m = B`
    pub right: bool,
}

impl BoundaryPin {
    pub const NONE: BoundaryPin = BoundaryPin { left: false, right: false };
    pub const LEFT: BoundaryPin = BoundaryPin { left: true, right: false };
    pub const RIGHT: BoundaryPin = BoundaryPin { left: false, right: true };
    pub const BOTH: BoundaryPin = BoundaryPin { left: true, right: true };

    pub fn label(&self) -> &'static str {
        match (self.left, self.right) {
            (false, false) => "interior",
            (true, false) => "left",
            (false, true) => "right",
            (true, true) => "both",
        }
    }
}

impl fmt::Display for BoundaryPin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Strictly ascending vehicle positions inside `[A, B]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    positions: Vec<f64>,
}

impl Configuration {
    pub fn new(positions: Vec<f64>, a: f64, b: f64) -> Result<Self, ProblemError> {
        check_ordering(&positions, a, b)?;
        Ok(Configuration { positions })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.positions
    }
}

fn check_ordering(p: &[f64], a: f64, b: f64) -> Result<(), ProblemError> {
    let tol = COINCIDENCE_TOL * (b - a);
    for (i, &v) in p.iter().enumerate() {
        if !(a..=b).contains(&v) {
            return Err(ProblemError::OutOfDomain { index: i, value: v, a, b });
        }
        if i > 0 && v - p[i - 1] <= tol {
            return Err(ProblemError::Ordering { index: i, tolerance: tol });
        }
    }
    Ok(())
}

/// Voronoi cells of an ordered configuration on `[a, b]`; they tile the interval.
pub fn voronoi_cells(p: &[f64], a: f64, b: f64) -> Result<Vec<(f64, f64)>, ProblemError> {
    check_ordering(p, a, b)?;
    let m = p.len();
    Ok((0..m)
        .map(|i| {
            let lo = if i == 0 { a } else { 0.5 * (p[i - 1] + p[i]) };
            let hi = if i + 1 == m { b } else { 0.5 * (p[i] + p[i + 1]) };
            (lo, hi)
        })
        .collect())
}

/// One boundary-pin pattern's stationarity system.
#[derive(Clone, Debug)]
pub struct StationarityInstance {
    pub pin: BoundaryPin,
    /// Zero-based indices of the vehicles whose positions are unknowns.
    pub free_vehicles: Vec<usize>,
    pub system: PolynomialSystem<BigRational>,
    vehicle_count: usize,
    a: f64,
    b: f64,
}

impl StationarityInstance {
    /// Index into the system's (sorted) variable list for each free vehicle.
    pub fn variable_slots(&self) -> Vec<usize> {
        self.free_vehicles
            .iter()
            .map(|&i| {
                let name = vehicle_var(i);
                self.system
                    .vars()
                    .iter()
                    .position(|v| *v == name)
                    .expect("free vehicle variable")
            })
            .collect()
    }

    /// Full position vector from a point in the system's variable order.
    pub fn embed<T: Copy + From<f64>>(&self, point: &[T]) -> Vec<T> {
        let mut out = vec![T::from(0.0); self.vehicle_count];
        if self.pin.left {
            out[0] = T::from(self.a);
        }
        if self.pin.right {
            out[self.vehicle_count - 1] = T::from(self.b);
        }
        for (&veh, slot) in self.free_vehicles.iter().zip(self.variable_slots()) {
            out[veh] = point[slot];
        }
        out
    }
}

pub fn vehicle_var(i: usize) -> String {
    format!("p{}", i + 1)
}

#[derive(Clone, Debug)]
pub struct CoverageProblem {
    a: BigRational,
    b: BigRational,
    m: usize,
    phi: RationalPolynomial,
    cost: RationalPolynomial,
    kernel: RationalPolynomial,
    kernel_num: RealPoly,
    cell_cost_num: RealPoly,
    phi_num: RealPoly,
}

impl CoverageProblem {
    /// `phi` must be a polynomial in `x`, `cost` (the kernel `f`) a polynomial in `s`.
    pub fn new(
        a: BigRational,
        b: BigRational,
        m: usize,
        phi: RationalPolynomial,
        cost: RationalPolynomial,
    ) -> Result<Self, ProblemError> {
        if a >= b {
            return Err(ProblemError::EmptyInterval {
                a: rational_to_f64(&a),
                b: rational_to_f64(&b),
            });
        }
        if m == 0 {
            return Err(ProblemError::NoVehicles);
        }
        let phi = phi
            .align(&["x"])
            .map_err(|_| ProblemError::BadDensity(phi.vars().to_vec()))?;
        let cost = cost
            .align(&["s"])
            .map_err(|_| ProblemError::BadCost(cost.vars().to_vec()))?;

        let kernel = build_kernel(&phi, &cost)?;
        let cell_cost = build_cell_cost(&phi, &cost)?;
        Ok(CoverageProblem {
            kernel_num: RealPoly::new(&kernel),
            cell_cost_num: RealPoly::new(&cell_cost),
            phi_num: RealPoly::new(&phi),
            a,
            b,
            m,
            phi,
            cost,
            kernel,
        })
    }

    /// Convenience constructor from text.
    pub fn parse(a: f64, b: f64, m: usize, phi: &str, cost: &str) -> Result<Self, ProblemError> {
        let to_q = |v: f64| {
            crate::poly::rational_from_f64(v).ok_or(ProblemError::EmptyInterval { a, b })
        };
        Self::new(to_q(a)?, to_q(b)?, m, parse_polynomial(phi)?, parse_polynomial(cost)?)
    }

    pub fn a(&self) -> f64 {
        rational_to_f64(&self.a)
    }

    pub fn b(&self) -> f64 {
        rational_to_f64(&self.b)
    }

    pub fn a_exact(&self) -> &BigRational {
        &self.a
    }

    pub fn b_exact(&self) -> &BigRational {
        &self.b
    }

    pub fn vehicles(&self) -> usize {
        self.m
    }

    pub fn density(&self) -> &RationalPolynomial {
        &self.phi
    }

    pub fn cost(&self) -> &RationalPolynomial {
        &self.cost
    }

    /// `F(p, b, a) = ∫_a^b f'((p-x)^2) (p-x) φ(x) dx` over variables `(a, b, p)`.
    pub fn kernel(&self) -> &RationalPolynomial {
        &self.kernel
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.phi_num.eval(&[x])
    }

    pub fn coincidence_tolerance(&self) -> f64 {
        COINCIDENCE_TOL * (self.b() - self.a())
    }

    /// Sampled checks of `φ >= 0` on `[A, B]` and of `f >= 0`, `f' >= 0` on
    /// `[0, (B-A)^2]`. Violations are reported, not enforced.
    pub fn assumption_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (a, b) = (self.a(), self.b());
        let n = ASSUMPTION_SAMPLES - 1;
        if let Some(x) = (0..=n)
            .map(|k| a + (b - a) * k as f64 / n as f64)
            .find(|&x| self.density_at(x) < -1e-12)
        {
            out.push(format!("density is negative at x = {x}"));
        }
        let f = RealPoly::new(&self.cost);
        let df = RealPoly::new(&self.cost.partial_derivative("s").expect("s"));
        let smax = (b - a) * (b - a);
        for k in 0..=n {
            let s = smax * k as f64 / n as f64;
            if f.eval(&[s]) < -1e-12 {
                out.push(format!("cost kernel f is negative at s = {s}"));
                break;
            }
            if df.eval(&[s]) < -1e-12 {
                out.push(format!("cost kernel f is decreasing at s = {s}"));
                break;
            }
        }
        out
    }

    fn kernel_at(&self, p: f64, upper: f64, lower: f64) -> f64 {
        // kernel variables sort as (a, b, p)
        self.kernel_num.eval(&[lower, upper, p])
    }

    /// Expected cost, integrating each cell with the exact antiderivative.
    pub fn objective(&self, p: &[f64]) -> Result<f64, ProblemError> {
        self.check_count(p)?;
        let cells = voronoi_cells(p, self.a(), self.b())?;
        Ok(p
            .iter()
            .zip(&cells)
            .map(|(&pi, &(lo, hi))| {
                self.cell_cost_num.eval(&[pi, hi]) - self.cell_cost_num.eval(&[pi, lo])
            })
            .sum())
    }

    /// Gradient of the expected cost: component `i` is `F(p_i, upper_i, lower_i)`.
    pub fn gradient(&self, p: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_count(p)?;
        let cells = voronoi_cells(p, self.a(), self.b())?;
        Ok(p
            .iter()
            .zip(&cells)
            .map(|(&pi, &(lo, hi))| self.kernel_at(pi, hi, lo))
            .collect())
    }

    /// Symmetrized central-difference Hessian of the objective.
    pub fn hessian_fd(&self, p: &[f64], h: f64) -> Result<DMatrix<f64>, ProblemError> {
        let all: Vec<usize> = (0..p.len()).collect();
        self.hessian_fd_free(p, &all, h)
    }

    /// Hessian restricted to the listed coordinates; the rest stay fixed.
    pub fn hessian_fd_free(
        &self,
        p: &[f64],
        free: &[usize],
        h: f64,
    ) -> Result<DMatrix<f64>, ProblemError> {
        self.check_count(p)?;
        check_ordering(p, self.a(), self.b())?;
        if h <= 0.0 {
            return Err(ProblemError::StencilDegenerate(h));
        }
        let k = free.len();
        let eval = |di: (usize, f64), dj: (usize, f64)| -> Result<f64, ProblemError> {
            let mut q = p.to_vec();
            q[di.0] += di.1;
            q[dj.0] += dj.1;
            self.objective(&q)
                .map_err(|_| ProblemError::StencilDegenerate(h))
        };
        let mut hess = DMatrix::zeros(k, k);
        for (r, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate().skip(r) {
                let v = (eval((i, h), (j, h))? - eval((i, h), (j, -h))?
                    - eval((i, -h), (j, h))?
                    + eval((i, -h), (j, -h))?)
                    / (4.0 * h * h);
                hess[(r, c)] = v;
                hess[(c, r)] = v;
            }
        }
        Ok((&hess + hess.transpose()) * 0.5)
    }

    fn check_count(&self, p: &[f64]) -> Result<(), ProblemError> {
        if p.len() != self.m {
            return Err(ProblemError::WrongVehicleCount {
                expected: self.m,
                got: p.len(),
            });
        }
        Ok(())
    }

    /// The stationarity system for one pin pattern, integer-normalized.
    pub fn assemble_instance(&self, pin: BoundaryPin) -> Result<StationarityInstance, ProblemError> {
        let m = self.m;
        if m == 1 && pin.left && pin.right {
            return Err(ProblemError::InvalidPin);
        }
        let free: Vec<usize> = (0..m)
            .filter(|&i| !(pin.left && i == 0) && !(pin.right && i == m - 1))
            .collect();
        let names: Vec<String> = free.iter().map(|&i| vehicle_var(i)).collect();
        let position = |i: usize| -> RationalPolynomial {
            if pin.left && i == 0 {
                RationalPolynomial::constant(&names, self.a.clone())
            } else if pin.right && i == m - 1 {
                RationalPolynomial::constant(&names, self.b.clone())
            } else {
                RationalPolynomial::variable(&names, &vehicle_var(i)).expect("declared")
            }
        };
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut equations = Vec::with_capacity(free.len());
        for &i in &free {
            let upper = if i + 1 == m {
                RationalPolynomial::constant(&names, self.b.clone())
            } else {
                position(i).try_add(&position(i + 1))?.scale(&half)
            };
            let lower = if i == 0 {
                RationalPolynomial::constant(&names, self.a.clone())
            } else {
                position(i - 1).try_add(&position(i))?.scale(&half)
            };
            let eq = self
                .kernel
                .substitute("p", &position(i))?
                .substitute("b", &upper)?
                .substitute("a", &lower)?
                .align(&names)?;
            equations.push(eq.integer_normalized().0);
        }
        let system = PolynomialSystem::new(&names, equations)?;
        Ok(StationarityInstance {
            pin,
            free_vehicles: free,
            system,
            vehicle_count: m,
            a: self.a(),
            b: self.b(),
        })
    }

    /// Every pin pattern: interior, left, right and (for `m >= 2`) both.
    pub fn enumerate_instances(&self) -> Result<Vec<StationarityInstance>, ProblemError> {
        let mut pins = vec![BoundaryPin::NONE, BoundaryPin::LEFT, BoundaryPin::RIGHT];
        if self.m >= 2 {
            pins.push(BoundaryPin::BOTH);
        }
        pins.into_iter().map(|p| self.assemble_instance(p)).collect()
    }
}

fn p_minus_x_squared() -> RationalPolynomial {
    parse_polynomial("(p - x)^2").expect("literal")
}

/// `∫_a^b f'((p-x)^2)(p-x) φ(x) dx` as a polynomial in `(a, b, p)`.
fn build_kernel(
    phi: &RationalPolynomial,
    cost: &RationalPolynomial,
) -> Result<RationalPolynomial, ProblemError> {
    let df = cost.partial_derivative("s")?;
    let integrand = df
        .substitute_if_present("s", &p_minus_x_squared())?
        .mul_aligned(&parse_polynomial("p - x").expect("literal"))
        .mul_aligned(phi)
        .align(&["p", "x"])?;
    let anti = integrand.antiderivative("x")?;
    let upper = anti.substitute("x", &parse_polynomial("b").expect("literal"))?;
    let lower = anti.substitute("x", &parse_polynomial("a").expect("literal"))?;
    Ok(upper.sub_aligned(&lower).align(&["a", "b", "p"])?)
}

/// Antiderivative in `x` of `½ f((p-x)^2) φ(x)`, over variables `(p, x)`.
fn build_cell_cost(
    phi: &RationalPolynomial,
    cost: &RationalPolynomial,
) -> Result<RationalPolynomial, ProblemError> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let integrand = cost
        .substitute_if_present("s", &p_minus_x_squared())?
        .mul_aligned(phi)
        .scale(&half)
        .align(&["p", "x"])?;
    Ok(integrand.antiderivative("x")?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> CoverageProblem {
        CoverageProblem::parse(0.0, 1.0, 3, "x*(1-x)", "s").unwrap()
    }

    fn ex2() -> CoverageProblem {
        CoverageProblem::parse(-1.0, 1.0, 3, "x^2 - x^4", "s").unwrap()
    }

    #[test]
    fn kernel_matches_closed_forms() {
        // 6F = b^2(6pW - 4pb - 4Wb + 3b^2) - a^2(6pW - 4pa - 4Wa + 3a^2), W = 1
        let six_f = ex1().kernel().scale(&BigRational::from_integer(6.into()));
        let expected = parse_polynomial(
            "(b^2*(6*p - 4*p*b - 4*b + 3*b^2) - a^2*(6*p - 4*p*a - 4*a + 3*a^2))/2",
        )
        .unwrap();
        assert_eq!(six_f, expected.align(&["a", "b", "p"]).unwrap());

        let expected2 = parse_polynomial(
            "p/3*(b^3 - a^3) - (b^4 - a^4)/4 - p/5*(b^5 - a^5) + (b^6 - a^6)/6",
        )
        .unwrap();
        assert_eq!(ex2().kernel(), &expected2);
    }

    #[test]
    fn kernel_vanishes_on_empty_range() {
        let k = ex2().kernel().clone();
        let a_eq_b = k.substitute("b", &parse_polynomial("a").unwrap()).unwrap();
        assert!(a_eq_b.is_zero());
    }

    #[test]
    fn kernel_value_is_the_integral() {
        // ∫_0^1 (1-x) x (1-x) dx = 1/12
        let v = ex1().kernel().evaluate_real(&[0.0, 1.0, 1.0]).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn cells_tile_the_interval() {
        let c = voronoi_cells(&[0.2, 0.5, 0.8], 0.0, 1.0).unwrap();
        let expect = [(0.0, 0.35), (0.35, 0.65), (0.65, 1.0)];
        for (got, want) in c.iter().zip(expect) {
            assert!((got.0 - want.0).abs() < 1e-15 && (got.1 - want.1).abs() < 1e-15);
        }
        assert_eq!(voronoi_cells(&[0.3], -1.0, 2.0).unwrap(), vec![(-1.0, 2.0)]);
        let c = voronoi_cells(&[-0.5, 0.0, 0.5], -1.0, 1.0).unwrap();
        assert_eq!(c, vec![(-1.0, -0.25), (-0.25, 0.25), (0.25, 1.0)]);
        assert!(matches!(
            voronoi_cells(&[0.5, 0.2], 0.0, 1.0),
            Err(ProblemError::Ordering { index: 1, .. })
        ));
        assert!(voronoi_cells(&[0.5, 1.5], 0.0, 1.0).is_err());
    }

    #[test]
    fn zero_density_has_zero_cost() {
        let p = CoverageProblem::parse(0.0, 1.0, 2, "0", "s").unwrap();
        assert_eq!(p.objective(&[0.2, 0.7]).unwrap(), 0.0);
    }

    #[test]
    fn single_vehicle_uniform_hessian_is_one() {
        let p = CoverageProblem::parse(0.0, 1.0, 1, "1", "s").unwrap();
        let h = p.hessian_fd(&[0.5], 1e-3).unwrap();
        assert!((h[(0, 0)] - 1.0).abs() < 1e-8, "{}", h[(0, 0)]);
    }

    #[test]
    fn symmetric_middle_component_vanishes() {
        let g = ex1().gradient(&[0.2, 0.5, 0.8]).unwrap();
        assert!(g[1].abs() < 1e-16);
    }

    #[test]
    fn instances_have_expected_shapes() {
        let p = ex1();
        let inst = p.enumerate_instances().unwrap();
        let counts: Vec<usize> = inst.iter().map(|i| i.system.len()).collect();
        assert_eq!(counts, vec![3, 2, 2, 1]);
        assert_eq!(inst[0].system.degrees(), &[4, 4, 4]);
        assert_eq!(inst[0].system.bezout_bound().unwrap(), 64);
        assert_eq!(ex2().assemble_instance(BoundaryPin::NONE).unwrap().system.bezout_bound().unwrap(), 216);

        let single = CoverageProblem::parse(0.0, 1.0, 1, "x*(1-x)", "s").unwrap();
        let inst = single.enumerate_instances().unwrap();
        assert_eq!(inst.len(), 3);
        assert_eq!(inst[0].system.len(), 1);
        assert!(inst[1].system.is_empty() && inst[2].system.is_empty());
        assert_eq!(inst[1].embed::<f64>(&[]), vec![0.0]);
        assert_eq!(inst[2].embed::<f64>(&[]), vec![1.0]);
        assert!(single.assemble_instance(BoundaryPin::BOTH).is_err());

        let two = CoverageProblem::parse(0.0, 1.0, 2, "1", "s").unwrap();
        let both = two.assemble_instance(BoundaryPin::BOTH).unwrap();
        assert!(both.system.is_empty());
        assert_eq!(both.embed::<f64>(&[]), vec![0.0, 1.0]);
    }

    #[test]
    fn left_pinned_uses_shifted_midpoint() {
        let p = ex1();
        let inst = p.assemble_instance(BoundaryPin::LEFT).unwrap();
        assert_eq!(inst.system.vars(), &["p2".to_string(), "p3".to_string()]);
        let lower = parse_polynomial("p2/2").unwrap();
        let upper = parse_polynomial("(p2 + p3)/2").unwrap();
        let direct = p
            .kernel()
            .substitute("p", &parse_polynomial("p2").unwrap())
            .unwrap()
            .substitute("b", &upper)
            .unwrap()
            .substitute("a", &lower)
            .unwrap()
            .integer_normalized()
            .0;
        assert_eq!(inst.system.equations()[0], direct);
        assert_eq!(inst.embed(&[0.4, 0.8]), vec![0.0, 0.4, 0.8]);
    }

    #[test]
    fn assumption_checks_are_warnings() {
        assert!(ex1().assumption_warnings().is_empty());
        let bad = CoverageProblem::parse(0.0, 1.0, 2, "x - 1/2", "s - s^2").unwrap();
        assert_eq!(bad.assumption_warnings().len(), 2);
    }

    #[test]
    fn invalid_problems_are_rejected() {
        assert!(CoverageProblem::parse(1.0, 1.0, 2, "1", "s").is_err());
        assert!(CoverageProblem::parse(0.0, 1.0, 0, "1", "s").is_err());
        assert!(matches!(
            CoverageProblem::parse(0.0, 1.0, 2, "y", "s"),
            Err(ProblemError::BadDensity(_))
        ));
    }
}
