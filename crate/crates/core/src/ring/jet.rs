//! Truncated multivariate polynomials (jets) with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::monomial::Monomial;
use super::rational::Rational;
use super::RingError;

/// Algebraic multiplicity at the origin: lowest total degree of a nonzero term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(k) => Some(k),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => f.write_str("infinite"),
        }
    }
}

/// A polynomial in `nvars` variables known modulo terms of total degree
/// `> degree`.
///
/// Invariants: no stored zero coefficients, every stored monomial has total
/// degree `<= degree`, every monomial has length `nvars`.
#[derive(Clone, PartialEq, Eq)]
pub struct Jet {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
}

/// Strict arithmetic: both operands must share dimension and truncation.
pub fn jet_arith(a: &Jet, b: &Jet, op: JetOp) -> Result<Jet, RingError> {
    if a.nvars != b.nvars {
        return Err(RingError::DimensionMismatch {
            left: a.nvars,
            right: b.nvars,
        });
    }
    if a.degree != b.degree {
        return Err(RingError::TruncationMismatch {
            left: a.degree,
            right: b.degree,
        });
    }
    Ok(match op {
        JetOp::Add => a + b,
        JetOp::Sub => a - b,
        JetOp::Mul => a * b,
    })
}

impl Jet {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        Jet {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, degree: u32, value: Rational) -> Self {
        Self::monomial(nvars, degree, Monomial::one(nvars), value)
    }

    pub fn one(nvars: usize, degree: u32) -> Self {
        Self::constant(nvars, degree, Rational::one())
    }

    pub fn var(nvars: usize, degree: u32, index: usize) -> Self {
        assert!(index < nvars, "variable index {index} out of range");
        Self::monomial(nvars, degree, Monomial::var(nvars, index), Rational::one())
    }

    pub fn monomial(nvars: usize, degree: u32, monomial: Monomial, coeff: Rational) -> Self {
        assert_eq!(monomial.nvars(), nvars, "monomial has wrong dimension");
        let mut jet = Self::zero(nvars, degree);
        jet.add_term(monomial, coeff);
        jet
    }

    pub fn from_terms<I>(nvars: usize, degree: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut jet = Self::zero(nvars, degree);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial has wrong dimension");
            jet.add_term(m, c);
        }
        jet
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn truncation_degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// Adds `coeff * m`, dropping it if beyond the truncation degree.
    pub fn add_term(&mut self, m: Monomial, coeff: Rational) {
        if coeff.is_zero() || m.total_degree() > self.degree {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn order(&self) -> Order {
        self.terms
            .keys()
            .next()
            .map_or(Order::Infinite, |m| Order::Finite(m.total_degree()))
    }

    /// Highest total degree of a stored term.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::total_degree)
    }

    /// Re-truncates at `degree`. Raising the degree adds no information, so
    /// the result keeps `min(self.degree, degree)`.
    pub fn truncate(&self, degree: u32) -> Jet {
        let degree = degree.min(self.degree);
        Jet {
            nvars: self.nvars,
            degree,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total_degree() <= degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Declares the stored polynomial exact up to `degree` (which may be
    /// larger than the current truncation). Used for values the engine chose
    /// itself, such as gauge-fixed solutions, where the missing terms are
    /// zero by construction rather than unknown.
    pub fn with_degree(&self, degree: u32) -> Jet {
        let mut out = Jet::zero(self.nvars, degree);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn homogeneous_part(&self, k: u32) -> Jet {
        Jet {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total_degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Jet {
        if c.is_zero() {
            return Jet::zero(self.nvars, self.degree);
        }
        Jet {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    /// `x^m * self`, truncated.
    pub fn shift(&self, m: &Monomial, c: &Rational) -> Jet {
        let mut out = Jet::zero(self.nvars, self.degree);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.add_term(k.mul(m), v * c);
        }
        out
    }

    /// Partial derivative in `x_index`. The result is trusted one degree
    /// less than the input.
    pub fn derivative(&self, index: usize) -> Jet {
        let mut out = Jet::zero(self.nvars, self.degree.saturating_sub(1));
        for (m, c) in &self.terms {
            let e = m.exponent(index);
            if let Some(lower) = m.lower(index) {
                out.add_term(lower, c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Inverse of a unit: `u * v = 1` modulo degree `D + 1`.
    ///
    /// Writes `u = c (1 + m)` with `m` in the maximal ideal and sums the
    /// geometric series `c^-1 (1 - m + m^2 - ...)` up to `m^D`.
    pub fn invert_unit(&self) -> Result<Jet, RingError> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(RingError::NotAUnit);
        }
        let c_inv = c.recip();
        let mut neg_m = self.scale(&-c_inv.clone());
        neg_m.terms.remove(&Monomial::one(self.nvars));
        let mut sum = Jet::one(self.nvars, self.degree);
        let mut power = Jet::one(self.nvars, self.degree);
        for _ in 0..self.degree {
            power = &power * &neg_m;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(&c_inv))
    }

    pub fn pow(&self, exponent: u32) -> Jet {
        let mut out = Jet::one(self.nvars, self.degree);
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }

    /// Substitutes `x_i -> images[i]`; all images share one target ring.
    pub fn compose(&self, images: &[Jet]) -> Jet {
        assert_eq!(images.len(), self.nvars, "one image per variable");
        let (target_vars, target_degree) = images
            .first()
            .map(|j| (j.nvars, j.degree))
            .unwrap_or((0, self.degree));
        let mut powers: Vec<Vec<Jet>> = images
            .iter()
            .map(|img| vec![Jet::one(target_vars, target_degree), img.clone()])
            .collect();
        let mut out = Jet::zero(target_vars, target_degree);
        for (m, c) in &self.terms {
            let mut term = Jet::constant(target_vars, target_degree, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                let e = e as usize;
                while powers[i].len() <= e {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e];
            }
            out = &out + &term;
        }
        out
    }

    /// Solves `f * q = self` modulo degree `D + 1` degree by degree, dividing
    /// each homogeneous residual by the lowest-degree form of `f`.
    ///
    /// The quotient is unique when it exists, so the first nonzero remainder
    /// proves non-divisibility. On failure returns the degree and the
    /// homogeneous remainder.
    pub fn divide_by(&self, f: &Jet) -> Result<Jet, (u32, Jet)> {
        assert_eq!(self.nvars, f.nvars, "dimension mismatch");
        let low = match f.order() {
            Order::Finite(k) => k,
            Order::Infinite => {
                return if self.is_zero() {
                    Ok(Jet::zero(self.nvars, 0))
                } else {
                    let k = self.order().finite().unwrap_or(0);
                    Err((k, self.homogeneous_part(k)))
                };
            }
        };
        let lead = f.homogeneous_part(low);
        let (lead_mono, lead_coeff) = lead
            .terms
            .iter()
            .next_back()
            .map(|(m, c)| (m.clone(), c.clone()))
            .expect("nonzero lowest form");
        let d = self.degree;
        if d < low {
            return Ok(Jet::zero(self.nvars, 0));
        }
        let q_degree = d - low;
        let mut q = Jet::zero(self.nvars, q_degree);
        let f_work = f.truncate(d).with_degree(d);
        for k in 0..=d {
            let mut residual = self.homogeneous_part(k);
            if k < low {
                if !residual.is_zero() {
                    return Err((k, residual));
                }
                continue;
            }
            let product = &f_work * &q.with_degree(d);
            residual = &residual - &product.homogeneous_part(k);
            let mut quotient_part = Jet::zero(self.nvars, q_degree);
            // Single-divisor division: leading terms under grlex, which on a
            // homogeneous slice is plain lex.
            while let Some((m, c)) = residual.terms.iter().next_back() {
                let Some(qm) = m.checked_div(&lead_mono) else {
                    return Err((k, residual));
                };
                let qc = c / &lead_coeff;
                residual = &residual - &lead.shift(&qm, &qc).with_degree(residual.degree);
                quotient_part.add_term(qm, qc);
            }
            q = &q + &quotient_part;
        }
        Ok(q)
    }

    fn align(&self, other: &Jet) -> u32 {
        assert_eq!(
            self.nvars, other.nvars,
            "jets live in different dimensions"
        );
        self.degree.min(other.degree)
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet[n={}, D={}](", self.nvars, self.degree)?;
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{m:?}")?;
        }
        f.write_str(")")
    }
}

// Operators align truncation to the smaller degree and panic on a dimension
// mismatch. `jet_arith` is the strict variant.

impl Add for &Jet {
    type Output = Jet;

    fn add(self, rhs: &Jet) -> Jet {
        let degree = self.align(rhs);
        let mut out = self.truncate(degree);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;

    fn sub(self, rhs: &Jet) -> Jet {
        let degree = self.align(rhs);
        let mut out = self.truncate(degree);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Jet {
    type Output = Jet;

    fn mul(self, rhs: &Jet) -> Jet {
        let degree = self.align(rhs);
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            let da = ma.total_degree();
            if da > degree {
                break;
            }
            for (mb, cb) in &rhs.terms {
                if da + mb.total_degree() > degree {
                    break;
                }
                let entry = acc.entry(ma.mul(mb)).or_insert_with(Rational::zero);
                *entry += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Jet {
            nvars: self.nvars,
            degree,
            terms: acc,
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;

    fn neg(self) -> Jet {
        Jet {
            nvars: self.nvars,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}
