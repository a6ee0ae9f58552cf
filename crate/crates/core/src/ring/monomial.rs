//! Exponent vectors under the graded lexicographic order.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Exponents of `x_1 .. x_n`. The length is the ambient dimension.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(SmallVec<[u32; 4]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[index] = 1;
        m
    }

    pub fn from_exponents(exponents: &[u32]) -> Self {
        Monomial(SmallVec::from_slice(exponents))
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, index: usize) -> u32 {
        self.0[index]
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Monomial(out))
    }

    /// Drops one power of `x_index`, or `None` if the exponent is already zero.
    pub fn lower(&self, index: usize) -> Option<Monomial> {
        if self.0[index] == 0 {
            return None;
        }
        let mut m = self.clone();
        m.0[index] -= 1;
        Some(m)
    }

    pub fn raise(&self, index: usize) -> Monomial {
        let mut m = self.clone();
        m.0[index] += 1;
        m
    }

    /// Weighted degree `<w, exponents>`.
    pub fn weighted_degree(&self, weights: &[u32]) -> u64 {
        self.0
            .iter()
            .zip(weights)
            .map(|(&e, &w)| e as u64 * w as u64)
            .sum()
    }

    /// All exponent vectors of total degree exactly `degree`, ascending.
    pub fn all_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut current = vec![0u32; nvars];
        fill_degree(&mut out, &mut current, 0, degree);
        out.sort();
        out
    }

    /// All exponent vectors of total degree at most `degree`, ascending.
    pub fn all_up_to_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
        (0..=degree)
            .flat_map(|k| Self::all_of_degree(nvars, k))
            .collect()
    }
}

fn fill_degree(out: &mut Vec<Monomial>, current: &mut Vec<u32>, index: usize, remaining: u32) {
    if current.is_empty() {
        if remaining == 0 {
            out.push(Monomial(SmallVec::new()));
        }
        return;
    }
    if index + 1 == current.len() {
        current[index] = remaining;
        out.push(Monomial::from_exponents(current));
        current[index] = 0;
        return;
    }
    for e in 0..=remaining {
        current[index] = e;
        fill_degree(out, current, index + 1, remaining - e);
    }
    current[index] = 0;
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}
