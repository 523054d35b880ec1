use std::collections::BTreeSet;

use super::{Monomial, PolyError, Polynomial};

/// A finite, deduplicated set of exponent vectors in `n` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    n: usize,
    members: BTreeSet<Monomial>,
}

impl SupportSet {
    pub fn new(n: usize) -> Self {
        SupportSet {
            n,
            members: BTreeSet::new(),
        }
    }

    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(
        n: usize,
        it: I,
    ) -> Result<Self, PolyError> {
        let mut s = Self::new(n);
        for m in it {
            s.try_insert(m)?;
        }
        Ok(s)
    }

    /// Exponents of the nonzero terms of `p`.
    pub fn support(p: &Polynomial) -> Self {
        SupportSet {
            n: p.nvars(),
            members: p.terms().map(|(m, _)| m.clone()).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.members.contains(m)
    }

    /// Members in graded lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &Monomial> {
        self.members.iter()
    }

    pub fn to_vec(&self) -> Vec<Monomial> {
        self.members.iter().cloned().collect()
    }

    pub fn try_insert(&mut self, m: Monomial) -> Result<bool, PolyError> {
        if m.nvars() != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                found: m.nvars(),
            });
        }
        Ok(self.members.insert(m))
    }

    pub fn insert(&mut self, m: Monomial) -> bool {
        debug_assert_eq!(m.nvars(), self.n);
        self.members.insert(m)
    }

    pub fn remove(&mut self, m: &Monomial) -> bool {
        self.members.remove(m)
    }

    pub fn extend<I: IntoIterator<Item = Monomial>>(&mut self, it: I) {
        for m in it {
            self.insert(m);
        }
    }

    pub fn union(&self, other: &SupportSet) -> Result<SupportSet, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        out.members.extend(other.members.iter().cloned());
        Ok(out)
    }

    /// `F ∪ {0}`.
    pub fn union_zero(&self) -> SupportSet {
        let mut out = self.clone();
        out.members.insert(Monomial::one(self.n));
        out
    }

    /// `F + G = {α + β}`.
    pub fn minkowski_sum(&self, other: &SupportSet) -> Result<SupportSet, PolyError> {
        self.check(other)?;
        let mut out = SupportSet::new(self.n);
        for a in &self.members {
            for b in &other.members {
                out.members.insert(a.mul(b));
            }
        }
        Ok(out)
    }

    /// `kF = F + ⋯ + F` (k summands); `0F = {0}`.
    pub fn minkowski_power(&self, k: u32) -> SupportSet {
        let mut acc = SupportSet::new(self.n);
        acc.members.insert(Monomial::one(self.n));
        for _ in 0..k {
            acc = acc
                .minkowski_sum(self)
                .expect("same ambient dimension by construction");
        }
        acc
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.members.is_subset(&other.members)
    }

    fn check(&self, other: &SupportSet) -> Result<(), PolyError> {
        if self.n != other.n {
            Err(PolyError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            })
        } else {
            Ok(())
        }
    }
}

impl<'a> IntoIterator for &'a SupportSet {
    type Item = &'a Monomial;
    type IntoIter = std::collections::btree_set::Iter<'a, Monomial>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// All monomials of degree ≤ `r` in `n` variables, graded lexicographic.
///
/// The length is `C(n + r, n)`.
pub fn monomial_basis(n: usize, r: u32) -> Vec<Monomial> {
    let all: Vec<usize> = (0..n).collect();
    monomial_basis_on(n, &all, r)
}

/// Monomials of degree ≤ `r` in the variables `vars` only, embedded in `n`
/// ambient variables.
pub fn monomial_basis_on(n: usize, vars: &[usize], r: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut e = vec![0u32; n];
    for d in 0..=r {
        fill_degree(vars, 0, d, &mut e, &mut out);
    }
    out
}

// Emits exponent vectors of exact degree `left` over vars[k..], largest
// exponent on the earliest variable first (descending lex).
fn fill_degree(vars: &[usize], k: usize, left: u32, e: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if k + 1 == vars.len() {
        e[vars[k]] = left;
        out.push(Monomial::new(e.clone()));
        e[vars[k]] = 0;
        return;
    }
    if vars.is_empty() {
        if left == 0 {
            out.push(Monomial::new(e.clone()));
        }
        return;
    }
    for a in (0..=left).rev() {
        e[vars[k]] = a;
        fill_degree(vars, k + 1, left - a, e, out);
    }
    e[vars[k]] = 0;
}
