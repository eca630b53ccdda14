//! Algebraic invariants of exact polynomials, checked by exact evaluation.

use coverage_core::poly::{parse_polynomial, RationalPolynomial};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const VARS: [&str; 2] = ["x", "y"];

/// Text of a random polynomial in `x` and `y` with small rational coefficients.
fn poly_text() -> impl Strategy<Value = String> {
    prop::collection::vec((-9i64..=9, 1i64..=5, 0u32..=3, 0u32..=3), 0..6).prop_map(|terms| {
        let mut s = String::from("0");
        for (n, d, ex, ey) in terms {
            s.push_str(&format!(" + ({n}/{d})*x^{ex}*y^{ey}"));
        }
        s
    })
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=7).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn parse(text: &str) -> RationalPolynomial {
    parse_polynomial(text).unwrap().align(&VARS).unwrap()
}

fn eval(p: &RationalPolynomial, x: &BigRational, y: &BigRational) -> BigRational {
    p.evaluate_exact(&[x.clone(), y.clone()]).unwrap()
}

proptest! {
    #[test]
    fn display_round_trips(t in poly_text()) {
        let p = parse(&t);
        let again = parse(&p.to_string());
        prop_assert!(p == again, "{} vs {}", p, again);
    }

    #[test]
    fn sum_and_product_evaluate_pointwise(s in poly_text(), t in poly_text(), x in rational(), y in rational()) {
        let (p, q) = (parse(&s), parse(&t));
        let sum = p.try_add(&q).unwrap();
        let diff = p.try_sub(&q).unwrap();
        let prod = p.try_mul(&q).unwrap();
        let (u, v) = (eval(&p, &x, &y), eval(&q, &x, &y));
        prop_assert_eq!(eval(&sum, &x, &y), &u + &v);
        prop_assert_eq!(eval(&diff, &x, &y), &u - &v);
        prop_assert_eq!(eval(&prod, &x, &y), u * v);
    }

    #[test]
    fn product_rule(s in poly_text(), t in poly_text()) {
        let (p, q) = (parse(&s), parse(&t));
        let lhs = p.try_mul(&q).unwrap().partial_derivative("x").unwrap();
        let rhs = p
            .partial_derivative("x").unwrap().try_mul(&q).unwrap()
            .try_add(&p.try_mul(&q.partial_derivative("x").unwrap()).unwrap()).unwrap();
        prop_assert!(lhs == rhs);
    }

    #[test]
    fn antiderivative_inverts_derivative(s in poly_text(), a in rational(), b in rational(), y in rational()) {
        let p = parse(&s);
        prop_assert!(p.antiderivative("y").unwrap().partial_derivative("y").unwrap() == p);
        // fundamental theorem on a polynomial integrand: the antiderivative
        // difference equals the exact sum of termwise integrals
        let anti = p.antiderivative("x").unwrap();
        let lhs = eval(&anti, &b, &y) - eval(&anti, &a, &y);
        let mut rhs = BigRational::from_integer(BigInt::from(0));
        for (m, c) in p.terms() {
            let k = m.0[0] as usize + 1;
            let ypow = num_traits::pow(y.clone(), m.0[1] as usize);
            let span = num_traits::pow(b.clone(), k) - num_traits::pow(a.clone(), k);
            rhs += c * ypow * span / BigRational::from_integer(BigInt::from(k));
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_composes(s in poly_text(), x in rational(), y in rational()) {
        let p = parse(&s);
        let shift = parse("y + 1");
        let q = p.substitute("x", &shift).unwrap();
        let x_at = &y + BigRational::from_integer(BigInt::from(1));
        prop_assert_eq!(eval(&q, &x, &y), eval(&p, &x_at, &y));
    }
}
