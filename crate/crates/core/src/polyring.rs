//! Sparse multivariate polynomials over an exact (or floating) coefficient ring.
//!
//! Terms are kept in a `BTreeMap` keyed by [`MultiIndex`] in graded-lexicographic
//! order, with zero coefficients never stored, so two polynomials built from the
//! same term multiset are structurally equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::Num;

use crate::error::{Error, Result};

/// Coefficient ring for [`Polynomial`].
pub trait Coefficient: Num + Clone + Neg<Output = Self> + Debug {}

impl<T: Num + Clone + Neg<Output = T> + Debug> Coefficient for T {}

/// Exponent vector over an ordered variable list.
///
/// Ordering is graded lexicographic: lower total degree first, ties broken by
/// comparing exponents in variable declaration order (so `y^2 < x*y < x^2`).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(len: usize) -> Self {
        MultiIndex(vec![0; len])
    }

    /// `e_i`: exponent one at `i`, zero elsewhere.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut e = vec![0; len];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Indices with nonzero exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i)
    }

    /// Componentwise sum. Panics if lengths differ.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.len(), other.len(), "multi-index length mismatch");
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Splits into the first `at` exponents and the rest.
    pub fn split_at(&self, at: usize) -> (MultiIndex, MultiIndex) {
        let (a, b) = self.0.split_at(at);
        (MultiIndex(a.to_vec()), MultiIndex(b.to_vec()))
    }

    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    /// Keeps only the exponents at `positions`, zeroing the rest.
    pub fn restrict(&self, positions: &[usize]) -> MultiIndex {
        let mut v = vec![0; self.len()];
        for &p in positions {
            v[p] = self.0[p];
        }
        MultiIndex(v)
    }

    /// Evaluates `values^self`.
    pub fn eval<C: Coefficient>(&self, values: &[C]) -> C {
        let mut acc = C::one();
        for (i, &e) in self.0.iter().enumerate() {
            for _ in 0..e {
                acc = acc * values[i].clone();
            }
        }
        acc
    }

    /// Renders as a monomial such as `x*v*s`, `x^2` or `1`.
    pub fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(names)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, n)| if e == 1 { n.clone() } else { format!("{n}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Per-component degrees of a vector-valued polynomial.
pub type DegreeVector = Vec<u32>;

/// Sparse polynomial in canonical form.
#[derive(Clone, PartialEq)]
pub struct Polynomial<C> {
    vars: Arc<[String]>,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coefficient> Polynomial<C> {
    pub fn zero(vars: Arc<[String]>) -> Self {
        Polynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Arc<[String]>, c: C) -> Self {
        let n = vars.len();
        Self::from_terms(vars, [(MultiIndex::zeros(n), c)])
    }

    pub fn one(vars: Arc<[String]>) -> Self {
        Self::constant(vars, C::one())
    }

    /// The polynomial consisting of variable `i`.
    pub fn var(vars: Arc<[String]>, i: usize) -> Self {
        let n = vars.len();
        Self::from_terms(vars, [(MultiIndex::unit(n, i), C::one())])
    }

    /// Builds a canonical polynomial, summing duplicate monomials and dropping zeros.
    pub fn from_terms<I>(vars: Arc<[String]>, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, C)>,
    {
        let mut map: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (mi, c) in terms {
            debug_assert_eq!(mi.len(), vars.len());
            accumulate(&mut map, mi, c);
        }
        map.retain(|_, c| !c.is_zero());
        Polynomial { vars, terms: map }
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
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

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mi: &MultiIndex) -> C {
        self.terms.get(mi).cloned().unwrap_or_else(C::zero)
    }

    /// Max total degree over stored terms; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let mut map = self.terms.clone();
        for (mi, c) in &other.terms {
            accumulate(&mut map, mi.clone(), c.clone());
        }
        map.retain(|_, c| !c.is_zero());
        Ok(Polynomial { vars: self.vars.clone(), terms: map })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let mut map: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                accumulate(&mut map, a.plus(b), ca.clone() * cb.clone());
            }
        }
        map.retain(|_, c| !c.is_zero());
        Ok(Polynomial { vars: self.vars.clone(), terms: map })
    }

    fn neg_ref(&self) -> Self {
        Polynomial { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Self::zero(self.vars.clone());
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * k.clone())).collect(),
        }
    }

    /// `self^n` by repeated squaring.
    pub fn pow(&self, mut n: u32) -> Self {
        let mut result = Self::one(self.vars.clone());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.try_mul(&base).expect("same ambient");
            }
            n >>= 1;
            if n > 0 {
                base = base.try_mul(&base).expect("same ambient");
            }
        }
        result
    }

    pub fn eval(&self, values: &[C]) -> C {
        assert_eq!(values.len(), self.nvars(), "one value per variable");
        self.terms.iter().fold(C::zero(), |acc, (mi, c)| acc + c.clone() * mi.eval(values))
    }

    /// Re-builds the canonical form; identity on canonical inputs.
    pub fn canonicalize(&self) -> Self {
        Self::from_terms(self.vars.clone(), self.terms.iter().map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(self.vars.clone(), self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

fn accumulate<C: Coefficient>(map: &mut BTreeMap<MultiIndex, C>, mi: MultiIndex, c: C) {
    match map.get_mut(&mi) {
        Some(existing) => *existing = existing.clone() + c,
        None => {
            map.insert(mi, c);
        }
    }
}

/// Degree vector of a vector-valued polynomial.
pub fn degree_vector<C: Coefficient>(components: &[Polynomial<C>]) -> DegreeVector {
    components.iter().map(Polynomial::degree).collect()
}

/// `∏ᵢ pᵢ^{αᵢ}` for a vector-valued polynomial `p` and multi-index `α`.
pub fn pow_multiindex<C: Coefficient>(components: &[Polynomial<C>], alpha: &MultiIndex) -> Result<Polynomial<C>> {
    if components.len() != alpha.len() {
        return Err(Error::LengthMismatch { expected: components.len(), actual: alpha.len() });
    }
    let vars = match components.first() {
        Some(p) => p.vars.clone(),
        None => return Err(Error::LengthMismatch { expected: 1, actual: 0 }),
    };
    let mut acc = Polynomial::one(vars);
    for (p, &e) in components.iter().zip(alpha.as_slice()) {
        if e > 0 {
            acc = acc.try_mul(&p.pow(e))?;
        }
    }
    Ok(acc)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<C: Coefficient> $tr for &Polynomial<C> {
            type Output = Polynomial<C>;
            /// Panics on ambient mismatch; use the `try_` form to get an error.
            fn $method(self, rhs: &Polynomial<C>) -> Polynomial<C> {
                self.$checked(rhs).expect("polynomial ambient mismatch")
            }
        }
        impl<C: Coefficient> $tr for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: Polynomial<C>) -> Polynomial<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl<C: Coefficient> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.neg_ref()
    }
}

impl<C: Coefficient + Display> Display for Polynomial<C> {
    /// Highest-order terms first, e.g. `x^2 + 2*x*y + -1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mi, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mi.is_zero() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", mi.render(&self.vars))?;
            } else {
                write!(f, "{c}*{}", mi.render(&self.vars))?;
            }
        }
        Ok(())
    }
}

impl<C: Coefficient> Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Shared variable list from names.
pub fn ambient<S: AsRef<str>>(names: &[S]) -> Arc<[String]> {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}
