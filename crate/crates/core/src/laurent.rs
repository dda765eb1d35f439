//! Sparse multivariate Laurent polynomials with exact integer coefficients.
//!
//! A polynomial does not carry its variable names; they live in the ring
//! declaration of a rule set and are only needed for parsing and printing.
//! Exponent vectors are stored with trailing zeros trimmed, so polynomials
//! built against rings of different width still compare correctly.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent vector of a Laurent monomial, indexed by ring variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<i32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_exponents(mut exps: Vec<i32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn var(index: usize, exp: i32) -> Self {
        let mut v = vec![0; index + 1];
        v[index] = exp;
        Monomial::from_exponents(v)
    }

    pub fn exponent(&self, index: usize) -> i32 {
        self.0.get(index).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[i32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of variables this monomial mentions (highest index + 1).
    pub fn width(&self) -> usize {
        self.0.len()
    }

    fn combine(&self, other: &Self, f: impl Fn(i32, i32) -> i32) -> Self {
        let n = self.0.len().max(other.0.len());
        Monomial::from_exponents(
            (0..n)
                .map(|i| f(self.exponent(i), other.exponent(i)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.0.len().max(other.0.len());
        (0..n)
            .map(|i| self.exponent(i).cmp(&other.exponent(i)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A Laurent polynomial `Σ c_m · m` with no zero coefficients stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Laurent<R: Scalar = i64> {
    terms: BTreeMap<Monomial, R>,
}

impl<R: Scalar> Default for Laurent<R> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<R: Scalar> Laurent<R> {
    pub fn zero() -> Self {
        Laurent {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(R::one())
    }

    pub fn constant(c: R) -> Self {
        Self::monomial(c, Monomial::one())
    }

    pub fn monomial(c: R, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Laurent { terms }
    }

    /// The variable with the given index raised to `exp`.
    pub fn var(index: usize, exp: i32) -> Self {
        Self::monomial(R::one(), Monomial::var(index, exp))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::one()).is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Highest variable index used, plus one.
    pub fn width(&self) -> usize {
        self.terms.keys().map(Monomial::width).max().unwrap_or(0)
    }

    /// The single `(coefficient, monomial)` pair if this is a monomial.
    pub fn as_monomial(&self) -> Option<(&R, &Monomial)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (c, m))
        } else {
            None
        }
    }

    /// Units of the ring: `±m` for a monomial `m`.
    pub fn is_unit(&self) -> bool {
        self.as_monomial()
            .is_some_and(|(c, _)| c.is_one() || (-c.clone()).is_one())
    }

    fn add_term(&mut self, m: Monomial, c: R) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Exact division. Only monomial divisors are supported; `None` if the
    /// divisor is not a monomial or some coefficient is not divisible.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let (c, m) = divisor.as_monomial()?;
        let mut out = Self::zero();
        for (tm, tc) in &self.terms {
            out.add_term(tm.div(m), tc.exact_div(c)?);
        }
        Some(out)
    }

    /// Parses Laurent syntax such as `-A^2 - A^-2` or `3*A*B^-1 + 2`.
    pub fn parse(text: &str, vars: &[String]) -> Result<Self> {
        let mut p = CoeffParser {
            src: text.as_bytes(),
            pos: 0,
            vars,
        };
        let value = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(value)
    }

    pub fn display<'a>(&'a self, vars: &'a [String]) -> LaurentDisplay<'a, R> {
        LaurentDisplay { poly: self, vars }
    }

    /// Printed form that is safe to embed as a coefficient token.
    pub fn to_token(&self, vars: &[String]) -> String {
        let s = self.display(vars).to_string();
        if self.terms.len() > 1 {
            format!("({s})")
        } else {
            s
        }
    }
}

impl<R: Scalar> From<R> for Laurent<R> {
    fn from(c: R) -> Self {
        Self::constant(c)
    }
}

impl<R: Scalar> Add for &Laurent<R> {
    type Output = Laurent<R>;
    fn add(self, rhs: &Laurent<R>) -> Laurent<R> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<R: Scalar> Sub for &Laurent<R> {
    type Output = Laurent<R>;
    fn sub(self, rhs: &Laurent<R>) -> Laurent<R> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<R: Scalar> Mul for &Laurent<R> {
    type Output = Laurent<R>;
    fn mul(self, rhs: &Laurent<R>) -> Laurent<R> {
        let mut out = Laurent::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<R: Scalar> Neg for &Laurent<R> {
    type Output = Laurent<R>;
    fn neg(self) -> Laurent<R> {
        Laurent {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<R: Scalar> $tr for Laurent<R> {
            type Output = Laurent<R>;
            fn $f(self, rhs: Laurent<R>) -> Laurent<R> {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<R: Scalar> Neg for Laurent<R> {
    type Output = Laurent<R>;
    fn neg(self) -> Laurent<R> {
        -&self
    }
}

pub struct LaurentDisplay<'a, R: Scalar> {
    poly: &'a Laurent<R>,
    vars: &'a [String],
}

impl<R: Scalar> fmt::Display for LaurentDisplay<'_, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (idx, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = self
                    .vars
                    .get(idx)
                    .cloned()
                    .unwrap_or_else(|| format!("x{idx}"));
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

struct CoeffParser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl<R: Scalar> Laurent<R> {
    fn scale(&self, c: &R) -> Self {
        let mut out = Self::zero();
        for (m, tc) in &self.terms {
            out.add_term(m.clone(), tc.clone() * c.clone());
        }
        out
    }
}

impl CoeffParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::syntax(1, self.pos + 1, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expr<R: Scalar>(&mut self) -> Result<Laurent<R>> {
        self.skip_ws();
        let mut sign_negative = false;
        if self.peek() == Some(b'-') {
            sign_negative = true;
            self.pos += 1;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        let mut acc = Laurent::zero();
        loop {
            let t: Laurent<R> = self.term()?;
            acc = if sign_negative { &acc - &t } else { &acc + &t };
            self.skip_ws();
            match self.peek() {
                Some(b'+') => sign_negative = false,
                Some(b'-') => sign_negative = true,
                _ => break,
            }
            self.pos += 1;
        }
        Ok(acc)
    }

    fn term<R: Scalar>(&mut self) -> Result<Laurent<R>> {
        self.skip_ws();
        let mut value = Laurent::one();
        let mut saw_factor = false;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'(') => {
                    self.pos += 1;
                    let inner: Laurent<R> = self.expr()?;
                    self.skip_ws();
                    if self.peek() != Some(b')') {
                        return Err(self.err("expected ')'"));
                    }
                    self.pos += 1;
                    value = &value * &inner;
                }
                Some(c) if c.is_ascii_digit() => {
                    let n = self.unsigned()?;
                    let c: R = n.parse().map_err(|_| self.err("integer out of range"))?;
                    value = value.scale(&c);
                }
                Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                    let idx = self.variable()?;
                    let mut exp = 1i32;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        exp = self.signed_int()?;
                    }
                    value = &value * &Laurent::var(idx, exp);
                }
                _ => {
                    if !saw_factor {
                        return Err(self.err("expected coefficient term"));
                    }
                    return Ok(value);
                }
            }
            saw_factor = true;
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
            }
        }
    }

    fn unsigned(&mut self) -> Result<String> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn signed_int(&mut self) -> Result<i32> {
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let digits = self.unsigned()?;
        let v: i32 = digits
            .parse()
            .map_err(|_| self.err("exponent out of range"))?;
        Ok(if negative { -v } else { v })
    }

    fn variable(&mut self) -> Result<usize> {
        // longest declared name that matches here
        let rest = &self.src[self.pos..];
        let best = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| rest.starts_with(v.as_bytes()))
            .max_by_key(|(_, v)| v.len());
        match best {
            Some((i, v)) => {
                self.pos += v.len();
                Ok(i)
            }
            None => Err(self.err("unknown ring variable")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = Laurent<i64>;

    fn vars() -> Vec<String> {
        vec!["A".into(), "B".into()]
    }

    #[test]
    fn parse_and_print_delta() {
        let d = P::parse("-A^2 - A^-2", &vars()).unwrap();
        assert_eq!(d.num_terms(), 2);
        assert_eq!(d.display(&vars()).to_string(), "-A^2 - A^-2");
        assert_eq!(d.to_token(&vars()), "(-A^2 - A^-2)");
    }

    #[test]
    fn parse_forms() {
        let v = vars();
        assert_eq!(P::parse("1", &v).unwrap(), P::one());
        assert_eq!(P::parse("0", &v).unwrap(), P::zero());
        assert_eq!(P::parse("A - A", &v).unwrap(), P::zero());
        let x = P::parse("3*A^2*B^-1 + 2", &v).unwrap();
        assert_eq!(x.display(&v).to_string(), "3*A^2*B^-1 + 2");
        assert_eq!(
            P::parse("(A + 1)(A - 1)", &v).unwrap(),
            P::parse("A^2 - 1", &v).unwrap()
        );
        assert!(P::parse("C", &v).is_err());
        assert!(P::parse("", &v).is_err());
        assert!(P::parse("A +", &v).is_err());
    }

    #[test]
    fn units_and_division() {
        let v = vars();
        assert!(P::parse("-A^3", &v).unwrap().is_unit());
        assert!(!P::parse("2*A", &v).unwrap().is_unit());
        let num = P::parse("2*A^3 + 4*A", &v).unwrap();
        let q = num.exact_div(&P::parse("2*A", &v).unwrap()).unwrap();
        assert_eq!(q, P::parse("A^2 + 2", &v).unwrap());
        assert!(num.exact_div(&P::parse("3", &v).unwrap()).is_none());
        assert!(num.exact_div(&P::parse("A + 1", &v).unwrap()).is_none());
    }

    #[test]
    fn trailing_zero_exponents_are_trimmed() {
        let a = P::monomial(1, Monomial::from_exponents(vec![1, 0, 0]));
        assert_eq!(a, P::var(0, 1));
        assert_eq!(P::var(1, 1).width(), 2);
    }

    fn arb_poly() -> impl Strategy<Value = P> {
        prop::collection::vec((-5i64..5, -3i32..3, -2i32..2), 0..5).prop_map(|ts| {
            ts.into_iter().fold(P::zero(), |acc, (c, a, b)| {
                &acc + &P::monomial(c, Monomial::from_exponents(vec![a, b]))
            })
        })
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
            prop_assert!((&a * &b).terms().all(|(_, c)| *c != 0));
        }

        #[test]
        fn print_parse_roundtrip(a in arb_poly()) {
            let v = vars();
            let s = a.display(&v).to_string();
            prop_assert_eq!(P::parse(&s, &v).unwrap(), a);
        }
    }
}
