//! Text form of polynomials: `3/2*p1^2*p2 - 1/4`.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*        divisors must be constants
//! factor := atom ['^' integer]
//! atom   := number | identifier | '(' expr ')' | '-' atom
//! number := digits ['.' digits]
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Coefficient, Polynomial, RationalPolynomial};
use crate::error::PolyError;

/// Parses the polynomial grammar; variables are the identifiers that occur.
pub fn parse_polynomial(src: &str) -> Result<RationalPolynomial, PolyError> {
    let mut p = Parser {
        src,
        bytes: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e.trim_vars())
}

pub(super) fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> PolyError {
        PolyError::Parse {
            position: self.pos,
            message: msg.to_string(),
            input: self.src.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RationalPolynomial, PolyError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let t = self.term()?;
                t.scale(&-BigRational::one())
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add_aligned(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub_aligned(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalPolynomial, PolyError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul_aligned(&self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    let d = self.factor()?;
                    if d.total_degree() > 0 || d.is_zero() {
                        self.pos = at;
                        return Err(self.error("divisor must be a nonzero constant"));
                    }
                    let n = d.nvars();
                    let c = d.coefficient(&vec![0; n]);
                    acc = acc.scale(&c.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RationalPolynomial, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected integer exponent"));
            }
            let k: u32 = self.src[start..self.pos]
                .parse()
                .map_err(|_| self.error("exponent out of range"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RationalPolynomial, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(self.atom()?.scale(&-BigRational::one()))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                let text = &self.src[start..self.pos];
                match parse_decimal(text) {
                    Some(v) => Ok(Polynomial::constant(&[] as &[&str], v)),
                    None => {
                        self.pos = start;
                        Err(self.error("malformed number"))
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                Ok(Polynomial::variable(&[name], name).expect("declared"))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, vars: &[String], exps: &[u32]) -> fmt::Result {
    let mut first = true;
    for (v, &k) in vars.iter().zip(exps) {
        if k == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if k == 1 {
            write!(f, "{v}")?;
        } else {
            write!(f, "{v}^{k}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Polynomial<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let constant = m.degree() == 0;
            if constant || !mag.is_one() {
                if mag.is_integer() {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "{}/{}", mag.numer(), mag.denom())?;
                }
                if !constant {
                    f.write_str("*")?;
                }
            }
            write_monomial(f, &self.vars, &m.0)?;
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial<num_complex::Complex64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in terms.into_iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let c = c.to_complex();
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            if m.degree() > 0 {
                f.write_str("*")?;
                write_monomial(f, &self.vars, &m.0)?;
            }
        }
        Ok(())
    }
}
