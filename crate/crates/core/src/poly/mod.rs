//! Sparse multivariate polynomials over `f64` with dense exponent vectors.
//!
//! Monomials are kept in graded lexicographic order (total degree first, then
//! lexicographic with the first declared variable largest), which fixes the
//! row and column indexing of every SDP built from them.

mod parse;
mod support;

pub use parse::parse_polynomial;
pub use support::{monomial_basis, monomial_basis_on, SupportSet};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Errors raised by polynomial construction, parsing and arithmetic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// An exponent vector `α ∈ ℕⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    /// The constant monomial `x⁰` in `n` variables.
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    /// The degree-one monomial `x_i`.
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Indices of the variables that occur with positive exponent.
    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
    }

    /// Exponent-wise sum, i.e. the product of the two monomials.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: u32) -> Monomial {
        Monomial(self.0.iter().map(|a| a * k).collect())
    }

    /// Exponent vector halved, when every entry is even.
    pub fn half(&self) -> Option<Monomial> {
        if self.0.iter().all(|e| e % 2 == 0) {
            Some(Monomial(self.0.iter().map(|e| e / 2).collect()))
        } else {
            None
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }

    /// Renders the monomial as `x^2*y`, or `1` for the constant monomial.
    pub fn to_text(&self, names: &[String]) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            let name = names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
            match e {
                0 => {}
                1 => parts.push(name),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        parts.join("*")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse polynomial: exponent vector → coefficient, exact zeros never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(Monomial::one(n), c)
    }

    /// The polynomial `x_i`.
    pub fn var(n: usize, i: usize) -> Self {
        Self::monomial(Monomial::var(n, i), 1.0)
    }

    pub fn monomial(m: Monomial, c: f64) -> Self {
        let n = m.nvars();
        let mut p = Self::zero(n);
        p.add_term(m, c);
        p
    }

    /// Builds a polynomial from `(monomial, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        let mut p = Self::zero(n);
        for (m, c) in terms {
            if m.nvars() != n {
                return Err(PolyError::DimensionMismatch {
                    expected: n,
                    found: m.nvars(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum term degree; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// Terms in graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Adds `c·m` in place; a coefficient that lands on exactly zero is removed.
    pub fn add_term(&mut self, m: Monomial, c: f64) {
        debug_assert_eq!(m.nvars(), self.n);
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Indices of the variables occurring in some term.
    pub fn variables(&self) -> Vec<usize> {
        let mut used = vec![false; self.n];
        for m in self.terms.keys() {
            for i in m.variables() {
                used[i] = true;
            }
        }
        (0..self.n).filter(|&i| used[i]).collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let maxdeg = self.degree() as usize;
        // powers[i][k] = x_i^k
        let powers: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(maxdeg + 1);
                let mut acc = 1.0;
                for _ in 0..=maxdeg {
                    row.push(acc);
                    acc *= xi;
                }
                row
            })
            .collect();
        Ok(self
            .terms
            .iter()
            .map(|(m, &c)| {
                m.exponents()
                    .iter()
                    .enumerate()
                    .fold(c, |acc, (i, &e)| acc * powers[i][e as usize])
            })
            .sum())
    }

    fn check_dims(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.n != other.n {
            Err(PolyError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dims(other)?;
        let mut out = Polynomial::zero(self.n);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    /// `self^k` by repeated squaring; `p^0 = 1`.
    pub fn pow(&self, k: u32) -> Polynomial {
        let mut result = Polynomial::constant(self.n, 1.0);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Signed-exponent variant of [`Polynomial::pow`] for callers holding an `i64`.
    pub fn try_pow(&self, k: i64) -> Result<Polynomial, PolyError> {
        if k < 0 {
            return Err(PolyError::NegativeExponent { pos: 0 });
        }
        Ok(self.pow(k as u32))
    }

    /// Reinterprets the polynomial in a larger ambient space, variable `i`
    /// of `self` becoming variable `map[i]`.
    pub fn embed(&self, n: usize, map: &[usize]) -> Polynomial {
        let mut out = Polynomial::zero(n);
        for (m, &c) in &self.terms {
            let mut e = vec![0; n];
            for (i, &k) in m.exponents().iter().enumerate() {
                e[map[i]] += k;
            }
            out.add_term(Monomial(e), c);
        }
        out
    }

    /// Canonical text form accepted back by [`parse_polynomial`].
    pub fn to_text(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (m, &c)) in self.terms.iter().enumerate() {
            let neg = c < 0.0;
            let a = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                s.push_str(&format!("{a}"));
            } else if a == 1.0 {
                s.push_str(&m.to_text(names));
            } else {
                s.push_str(&format!("{a}*{}", m.to_text(names)));
            }
        }
        s
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&[]))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("polynomial dimension mismatch")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

/// Arithmetic operations exposed through [`poly_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Scale,
    Pow,
}

/// Right-hand operand of [`poly_arith`].
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Poly(&'a Polynomial),
    Scalar(f64),
    Exponent(i64),
}

/// Applies `op` to `a` and `b`: a polynomial operand for add/sub/mul, a
/// scalar for scale and an integer exponent for pow.
pub fn poly_arith(op: ArithOp, a: &Polynomial, b: Operand<'_>) -> Result<Polynomial, PolyError> {
    match (op, b) {
        (ArithOp::Add, Operand::Poly(q)) => a.try_add(q),
        (ArithOp::Sub, Operand::Poly(q)) => a.try_sub(q),
        (ArithOp::Mul, Operand::Poly(q)) => a.try_mul(q),
        (ArithOp::Scale, Operand::Scalar(s)) => Ok(a.scale(s)),
        (ArithOp::Pow, Operand::Exponent(k)) => a.try_pow(k),
        (op, _) => Err(PolyError::Syntax {
            pos: 0,
            msg: format!("operand kind does not match {op:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn graded_lex_order() {
        let mut ms = vec![
            Monomial::new(vec![0, 2]),
            Monomial::new(vec![1, 0]),
            Monomial::new(vec![0, 0]),
            Monomial::new(vec![1, 1]),
            Monomial::new(vec![0, 1]),
            Monomial::new(vec![2, 0]),
        ];
        ms.sort();
        let got: Vec<_> = ms.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn eval_examples() {
        let v = names(&["x", "y"]);
        let p = parse_polynomial("x*y - 1/16", &v).unwrap();
        assert!((p.eval(&[0.5, 1.0]).unwrap() - 0.4375).abs() < 1e-15);
        assert_eq!(Polynomial::zero(3).eval(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let theta = parse_polynomial("1 + x^4", &names(&["x"])).unwrap();
        assert_eq!(theta.eval(&[0.0]).unwrap(), 1.0);
        assert!(matches!(
            p.eval(&[1.0]),
            Err(PolyError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn arithmetic_examples() {
        let x = Polynomial::var(1, 0);
        assert_eq!(&x * &x, Polynomial::monomial(Monomial::new(vec![2]), 1.0));
        let one_minus_x = &Polynomial::constant(1, 1.0) - &x;
        let sq = one_minus_x.pow(2);
        assert_eq!(sq.coeff(&Monomial::new(vec![0])), 1.0);
        assert_eq!(sq.coeff(&Monomial::new(vec![1])), -2.0);
        assert_eq!(sq.coeff(&Monomial::new(vec![2])), 1.0);
        assert_eq!(sq.len(), 3);

        let v = names(&["x", "y"]);
        let p = parse_polynomial("x*y - 1/16", &v).unwrap();
        let q = poly_arith(ArithOp::Scale, &p, Operand::Scalar(-1.0)).unwrap();
        assert_eq!(q, parse_polynomial("-x*y + 1/16", &v).unwrap());
    }

    #[test]
    fn arithmetic_errors() {
        let a = Polynomial::var(2, 0);
        let b = Polynomial::var(3, 0);
        assert!(matches!(
            a.try_add(&b),
            Err(PolyError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            poly_arith(ArithOp::Pow, &a, Operand::Exponent(-1)),
            Err(PolyError::NegativeExponent { .. })
        ));
    }

    #[test]
    fn exact_cancellation_prunes() {
        let x = Polynomial::var(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn canonical_text() {
        let v = names(&["x", "y"]);
        let p = parse_polynomial("x^2 + y^2 - 1/4", &v).unwrap();
        assert_eq!(p.to_text(&v), "-0.25 + x^2 + y^2");
        assert_eq!(Polynomial::zero(2).to_text(&v), "0");
    }
}
