//! Sparse multivariate polynomials with `f64` coefficients.
//!
//! A [`Polynomial`] lives in a variable space of fixed dimension `nvars`;
//! variables are addressed by zero-based [`VarId`]s and printed 1-based as
//! `x1, x2, ...`. Terms are kept in graded-lexicographic order with no zero
//! coefficients, so structural equality is canonical equality.

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use parse::ParseError;

/// Zero-based index of a variable in a polynomial's variable space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("variable space mismatch: {left} vs {right} variables")]
    SpaceMismatch { left: usize, right: usize },
    #[error("point has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable {var} is outside a space of {nvars} variables")]
    VarOutOfRange { var: VarId, nvars: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Product of variable powers, stored as `(var, exponent)` pairs sorted by var.
///
/// Exponents are always positive; the empty monomial is the constant `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    factors: Vec<(VarId, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: VarId) -> Self {
        Self { factors: vec![(v, 1)] }
    }

    /// Builds a monomial from `(var, exponent)` pairs in any order. Repeated
    /// variables are merged and zero exponents dropped.
    pub fn from_powers<I>(powers: I) -> Self
    where
        I: IntoIterator<Item = (VarId, u32)>,
    {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in powers {
            *map.entry(v).or_insert(0) += e;
        }
        Self {
            factors: map.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    /// Monomial whose variables are the given factor list, e.g. `[x1, x1, x2]`.
    pub fn from_factors(vars: &[VarId]) -> Self {
        Self::from_powers(vars.iter().map(|&v| (v, 1)))
    }

    pub fn powers(&self) -> &[(VarId, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.factors
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Highest variable index used, if any.
    pub fn max_var(&self) -> Option<VarId> {
        self.factors.last().map(|&(v, _)| v)
    }

    /// Flat factor list in ascending variable order: `x1^2 x3` -> `[x1, x1, x3]`.
    pub fn flatten(&self) -> Vec<VarId> {
        self.factors
            .iter()
            .flat_map(|&(v, e)| std::iter::repeat_n(v, e as usize))
            .collect()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ea) = self.factors[i];
            let (b, eb) = other.factors[j];
            match a.cmp(&b) {
                Ordering::Less => {
                    out.push((a, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial { factors: out }
    }

    /// Formal derivative with respect to `v`: `(exponent, monomial / v)`.
    pub fn derivative(&self, v: VarId) -> Option<(u32, Monomial)> {
        let idx = self.factors.binary_search_by_key(&v, |&(w, _)| w).ok()?;
        let e = self.factors[idx].1;
        let mut factors = self.factors.clone();
        if e == 1 {
            factors.remove(idx);
        } else {
            factors[idx].1 = e - 1;
        }
        Some((e, Monomial { factors }))
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.factors.iter().map(|&(v, e)| point[v.0].powi(e as i32)).product()
    }
}

impl std::str::FromStr for Monomial {
    type Err = ParseError;

    /// Parses a single coefficient-free term such as `x1^2*x3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let p = parse::parse_polynomial(s, None)?;
        match p.terms.as_slice() {
            [(m, c)] if *c == 1.0 => Ok(m.clone()),
            _ => Err(ParseError {
                line: 1,
                column: 1,
                message: format!("'{s}' is not a single monomial"),
            }),
        }
    }
}

impl Ord for Monomial {
    /// Graded order: lower total degree first; within a degree, larger
    /// exponents on lower-indexed variables first (`x1^2 < x1 x2 < x2^2`).
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (&(va, ea), &(vb, eb)) in self.factors.iter().zip(&other.factors) {
                let ord = va.cmp(&vb).then_with(|| eb.cmp(&ea));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            other.factors.len().cmp(&self.factors.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, &(v, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial over `nvars` variables.
///
/// Terms are sorted by [`Monomial`]'s graded order and never carry an exactly
/// zero coefficient. Values are immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<(Monomial, f64)>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::from_terms(nvars, [(Monomial::one(), c)])
    }

    /// The polynomial `x_v`. Panics if `v` is outside the space.
    pub fn var(nvars: usize, v: VarId) -> Self {
        assert!(v.0 < nvars, "{v} outside a space of {nvars} variables");
        Self::from_terms(nvars, [(Monomial::var(v), 1.0)])
    }

    /// Collects terms, summing like monomials and dropping exact zeros.
    /// Panics if a monomial references a variable outside the space.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        let mut map: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (m, c) in terms {
            if let Some(v) = m.max_var() {
                assert!(v.0 < nvars, "{v} outside a space of {nvars} variables");
            }
            *map.entry(m).or_insert(0.0) += c;
        }
        Self::from_map(nvars, map)
    }

    fn from_map(nvars: usize, map: BTreeMap<Monomial, f64>) -> Self {
        Self {
            nvars,
            terms: map.into_iter().filter(|&(_, c)| c != 0.0).collect(),
        }
    }

    pub fn parse(text: &str, nvars: usize) -> Result<Self, ParseError> {
        parse::parse_polynomial(text, Some(nvars))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Monomial, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms.last().map(|(m, _)| m.degree() as i32).unwrap_or(-1)
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms
            .binary_search_by(|(t, _)| t.cmp(m))
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    /// Same polynomial viewed in a larger space (new variables appended).
    pub fn embed(&self, nvars: usize) -> Self {
        assert!(nvars >= self.nvars, "cannot embed into a smaller space");
        Self {
            nvars,
            terms: self.terms.clone(),
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    /// Evaluation without the length check; `point` must cover every variable
    /// that occurs in the polynomial.
    pub fn eval_unchecked(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }

    pub fn partial(&self, v: VarId) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| m.derivative(v).map(|(e, dm)| (dm, c * e as f64)));
        Self::from_terms(self.nvars, terms)
    }

    /// Partials with respect to the first `k` variables.
    pub fn gradient(&self, k: usize) -> Vec<Polynomial> {
        (0..k).map(|i| self.partial(VarId(i))).collect()
    }

    fn check_space(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(PolyError::SpaceMismatch {
                left: self.nvars,
                right: other.nvars,
            })
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_space(other)?;
        Ok(Self::from_terms(
            self.nvars,
            self.terms.iter().chain(&other.terms).cloned(),
        ))
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_space(other)?;
        let neg = other.terms.iter().map(|(m, c)| (m.clone(), -c));
        Ok(Self::from_terms(self.nvars, self.terms.iter().cloned().chain(neg)))
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_space(other)?;
        let mut map: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *map.entry(ma.mul(mb)).or_insert(0.0) += ca * cb;
            }
        }
        Ok(Self::from_map(self.nvars, map))
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Self::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Self::constant(self.nvars, 1.0);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Replaces each bound variable by its image and expands. Unbound
    /// variables are carried over unchanged and must exist in `target_nvars`.
    pub fn substitute(
        &self,
        bindings: &BTreeMap<VarId, Polynomial>,
        target_nvars: usize,
    ) -> Result<Polynomial, PolyError> {
        for (v, img) in bindings {
            if v.0 >= self.nvars {
                return Err(PolyError::VarOutOfRange {
                    var: *v,
                    nvars: self.nvars,
                });
            }
            if img.nvars != target_nvars {
                return Err(PolyError::SpaceMismatch {
                    left: target_nvars,
                    right: img.nvars,
                });
            }
        }
        let mut out = Self::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut term = Self::constant(target_nvars, *c);
            for &(v, e) in m.powers() {
                let image = match bindings.get(&v) {
                    Some(p) => p.clone(),
                    None if v.0 < target_nvars => Self::var(target_nvars, v),
                    None => {
                        return Err(PolyError::VarOutOfRange {
                            var: v,
                            nvars: target_nvars,
                        })
                    }
                };
                term = &term * &image.pow(e);
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Largest coefficient difference over the union of both supports.
    pub fn max_coeff_diff(&self, other: &Polynomial) -> f64 {
        let mut map: BTreeMap<&Monomial, f64> = BTreeMap::new();
        for (m, c) in &self.terms {
            *map.entry(m).or_insert(0.0) += c;
        }
        for (m, c) in &other.terms {
            *map.entry(m).or_insert(0.0) -= c;
        }
        map.values().fold(0.0, |acc, d| acc.max(d.abs()))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, (_, c)| acc.max(c.abs()))
    }

    /// Coefficient-wise comparison with tolerance `rel_tol * max(1, largest |coeff|)`.
    pub fn approx_eq(&self, other: &Polynomial, rel_tol: f64) -> bool {
        let scale = self.max_abs_coeff().max(other.max_abs_coeff()).max(1.0);
        self.nvars == other.nvars && self.max_coeff_diff(other) <= rel_tol * scale
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        parse::write_polynomial(self, f)
    }
}

impl std::str::FromStr for Polynomial {
    type Err = ParseError;

    /// Parses with the space sized to the highest variable index present.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse_polynomial(s, None)
    }
}

// Operator impls panic on mismatched spaces; the checked_* methods report it.

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }

        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }

        impl $tr<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Mul<f64> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl Mul<f64> for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}
