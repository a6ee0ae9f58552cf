//! Differential forms of degree 0..=3 with jet coefficients.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use super::FormError;
use crate::ring::{Jet, Order, Rational};

/// Maximum form degree the engine represents; enough for `omega ^ d omega`.
pub const MAX_FORM_DEGREE: usize = 3;

/// Strictly increasing index tuple `(i_1 < ... < i_p)` naming `dx_{i_1} ^ ... ^ dx_{i_p}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTuple(SmallVec<[u8; 3]>);

impl IndexTuple {
    pub fn empty() -> Self {
        IndexTuple(SmallVec::new())
    }

    pub fn single(i: usize) -> Self {
        IndexTuple(SmallVec::from_slice(&[i as u8]))
    }

    /// Sorts `indices`, returning the tuple and the sign of the sorting
    /// permutation, or `None` when an index repeats.
    pub fn from_unsorted(indices: &[usize]) -> Option<(Self, i32)> {
        let mut v: SmallVec<[u8; 3]> = indices.iter().map(|&i| i as u8).collect();
        let mut sign = 1;
        // insertion sort, counting transpositions
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((IndexTuple(v), sign))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&(i as u8))
    }

    /// `dx_i ^ dx_I = sign * dx_{I + i}`, or `None` if `i` is already in `I`.
    fn prepend(&self, i: usize) -> Option<(IndexTuple, i32)> {
        if self.contains(i) {
            return None;
        }
        let pos = self.0.iter().filter(|&&k| (k as usize) < i).count();
        let mut v = self.0.clone();
        v.insert(pos, i as u8);
        let sign = if pos % 2 == 0 { 1 } else { -1 };
        Some((IndexTuple(v), sign))
    }

    /// `dx_I ^ dx_J = sign * dx_{I u J}`, or `None` on overlap.
    fn merge(&self, other: &IndexTuple) -> Option<(IndexTuple, i32)> {
        let mut inversions = 0usize;
        for &i in &self.0 {
            for &j in &other.0 {
                if i == j {
                    return None;
                }
                if i > j {
                    inversions += 1;
                }
            }
        }
        let mut v: SmallVec<[u8; 3]> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        Some((IndexTuple(v), if inversions.is_multiple_of(2) { 1 } else { -1 }))
    }
}

impl fmt::Debug for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// A `p`-form `sum_I c_I dx_I` whose coefficients are trusted up to total
/// degree `trust`.
///
/// Only strictly increasing tuples are stored and no component is zero.
/// Arithmetic between forms of different trust keeps the smaller one.
#[derive(Clone, PartialEq, Eq)]
pub struct PForm {
    degree: usize,
    nvars: usize,
    trust: u32,
    components: BTreeMap<IndexTuple, Jet>,
}

impl PForm {
    pub fn zero(degree: usize, nvars: usize, trust: u32) -> Self {
        assert!(degree <= MAX_FORM_DEGREE, "forms are capped at degree 3");
        PForm {
            degree,
            nvars,
            trust,
            components: BTreeMap::new(),
        }
    }

    pub fn from_function(f: &Jet) -> Self {
        let mut out = Self::zero(0, f.nvars(), f.truncation_degree());
        out.insert(IndexTuple::empty(), f.clone());
        out
    }

    /// `sum_i coeffs[i] dx_i`, trusted to the smallest coefficient truncation.
    pub fn one_form(coeffs: &[Jet]) -> Self {
        assert!(!coeffs.is_empty(), "need at least one coefficient");
        let nvars = coeffs[0].nvars();
        assert_eq!(coeffs.len(), nvars, "one coefficient per variable");
        let trust = coeffs.iter().map(Jet::truncation_degree).min().unwrap();
        let mut out = Self::zero(1, nvars, trust);
        for (i, c) in coeffs.iter().enumerate() {
            out.insert(IndexTuple::single(i), c.truncate(trust));
        }
        out
    }

    /// `dx_i` as a 1-form.
    pub fn basis(nvars: usize, trust: u32, i: usize) -> Self {
        let mut out = Self::zero(1, nvars, trust);
        out.insert(IndexTuple::single(i), Jet::one(nvars, trust));
        out
    }

    /// Builds a form from `(tuple, coefficient)` pairs; tuples may be unsorted
    /// (the permutation sign is applied) and repeated indices vanish.
    pub fn from_components<I>(degree: usize, nvars: usize, trust: u32, parts: I) -> Self
    where
        I: IntoIterator<Item = (Vec<usize>, Jet)>,
    {
        let mut out = Self::zero(degree, nvars, trust);
        for (indices, c) in parts {
            assert_eq!(indices.len(), degree, "tuple length must equal form degree");
            assert!(indices.iter().all(|&i| i < nvars), "index out of range");
            if let Some((tuple, sign)) = IndexTuple::from_unsorted(&indices) {
                let c = if sign < 0 { -&c } else { c };
                out.accumulate(tuple, &c.truncate(trust));
            }
        }
        out
    }

    fn insert(&mut self, tuple: IndexTuple, c: Jet) {
        let c = c.truncate(self.trust);
        if c.is_zero() {
            self.components.remove(&tuple);
        } else {
            self.components.insert(tuple, c);
        }
    }

    fn accumulate(&mut self, tuple: IndexTuple, c: &Jet) {
        let next = match self.components.get(&tuple) {
            Some(existing) => existing + c,
            None => c.truncate(self.trust),
        };
        self.insert(tuple, next);
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trust(&self) -> u32 {
        self.trust
    }

    pub fn components(&self) -> impl Iterator<Item = (&IndexTuple, &Jet)> + '_ {
        self.components.iter()
    }

    pub fn component(&self, tuple: &IndexTuple) -> Jet {
        self.components
            .get(tuple)
            .cloned()
            .unwrap_or_else(|| Jet::zero(self.nvars, self.trust))
    }

    /// Coefficient of `dx_i` in a 1-form.
    pub fn coeff(&self, i: usize) -> Jet {
        self.component(&IndexTuple::single(i))
    }

    /// The function of a 0-form.
    pub fn function(&self) -> Jet {
        assert_eq!(self.degree, 0, "not a 0-form");
        self.component(&IndexTuple::empty())
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Algebraic multiplicity: the least order among the coefficients.
    pub fn order(&self) -> Order {
        self.components
            .values()
            .map(Jet::order)
            .min()
            .unwrap_or(Order::Infinite)
    }

    pub fn truncate(&self, trust: u32) -> PForm {
        let trust = trust.min(self.trust);
        let mut out = Self::zero(self.degree, self.nvars, trust);
        for (t, c) in &self.components {
            out.insert(t.clone(), c.truncate(trust));
        }
        out
    }

    /// See [`Jet::with_degree`]: declares the stored coefficients exact up to `trust`.
    pub fn with_trust(&self, trust: u32) -> PForm {
        let mut out = Self::zero(self.degree, self.nvars, trust);
        for (t, c) in &self.components {
            out.insert(t.clone(), c.with_degree(trust));
        }
        out
    }

    fn check_compatible(&self, other: &PForm) {
        assert_eq!(self.nvars, other.nvars, "forms live in different dimensions");
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
    }

    pub fn add(&self, other: &PForm) -> PForm {
        self.check_compatible(other);
        let mut out = self.truncate(other.trust);
        for (t, c) in &other.components {
            out.accumulate(t.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &PForm) -> PForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PForm {
        self.map(|c| -c)
    }

    pub fn scale(&self, c: &Rational) -> PForm {
        self.map(|j| j.scale(c))
    }

    /// `g * self` for a function `g`.
    pub fn mul_function(&self, g: &Jet) -> PForm {
        assert_eq!(self.nvars, g.nvars(), "dimension mismatch");
        let trust = self.trust.min(g.truncation_degree());
        let mut out = Self::zero(self.degree, self.nvars, trust);
        for (t, c) in &self.components {
            out.insert(t.clone(), c * g);
        }
        out
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> PForm {
        let mut out = Self::zero(self.degree, self.nvars, self.trust);
        for (t, c) in &self.components {
            let mapped = f(c);
            out.trust = out.trust.min(mapped.truncation_degree());
            out.insert(t.clone(), mapped);
        }
        out.truncate(out.trust)
    }

    /// Exterior derivative. Differentiation costs one degree of trust.
    pub fn exterior_d(&self) -> Result<PForm, FormError> {
        if self.degree >= MAX_FORM_DEGREE {
            return Err(FormError::DegreeCap {
                degree: self.degree + 1,
            });
        }
        let trust = self.trust.saturating_sub(1);
        let mut out = Self::zero(self.degree + 1, self.nvars, trust);
        for (tuple, c) in &self.components {
            for i in 0..self.nvars {
                let Some((merged, sign)) = tuple.prepend(i) else {
                    continue;
                };
                let partial = c.derivative(i);
                if partial.is_zero() {
                    continue;
                }
                let partial = if sign < 0 { -&partial } else { partial };
                out.accumulate(merged, &partial);
            }
        }
        Ok(out)
    }

    /// `self ^ other`, trusted to the smaller trust of the two factors.
    pub fn wedge(&self, other: &PForm) -> Result<PForm, FormError> {
        assert_eq!(self.nvars, other.nvars, "forms live in different dimensions");
        let degree = self.degree + other.degree;
        if degree > MAX_FORM_DEGREE {
            return Err(FormError::DegreeCap { degree });
        }
        let trust = self.trust.min(other.trust);
        let mut out = Self::zero(degree, self.nvars, trust);
        for (ta, ca) in &self.components {
            for (tb, cb) in &other.components {
                let Some((merged, sign)) = ta.merge(tb) else {
                    continue;
                };
                let product = ca * cb;
                let product = if sign < 0 { -&product } else { product };
                out.accumulate(merged, &product);
            }
        }
        Ok(out)
    }
}

/// `omega ^ d omega`; zero means integrable up to the returned trust.
pub fn integrability_residual(omega: &PForm) -> Result<PForm, FormError> {
    if omega.degree() != 1 {
        return Err(FormError::WrongDegree {
            expected: 1,
            found: omega.degree(),
        });
    }
    omega.wedge(&omega.exterior_d()?)
}

/// `df` for a function `f`.
pub fn differential(f: &Jet) -> PForm {
    PForm::from_function(f)
        .exterior_d()
        .expect("0-forms always differentiate")
}

impl fmt::Debug for PForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PForm[p={}, n={}, trust={}]", self.degree, self.nvars, self.trust)?;
        f.debug_map().entries(&self.components).finish()
    }
}
