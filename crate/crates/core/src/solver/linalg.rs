//! Incremental sparse Gaussian elimination over the rationals.
//!
//! Rows are reduced only on their leading column, which keeps every stored
//! row's pivot unique and to the left of its other entries. That is enough
//! for back-substitution in decreasing pivot order with free columns set to
//! zero, and the set of pivot columns depends only on the row space and the
//! column order.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::ring::Rational;

pub type SparseVec = BTreeMap<usize, Rational>;

/// One linear equation `sum coeffs[c] * x_c = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub coeffs: SparseVec,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
struct PivotRow {
    entries: SparseVec,
    rhs: Rational,
    combination: SparseVec,
}

/// Result of adding one equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Insertion {
    NewPivot(usize),
    Redundant,
    /// The equation reduces to `0 = residual` with `residual != 0`; when
    /// tracking is on, `combination` holds multipliers on the inserted
    /// equations (by insertion index) producing that row.
    Inconsistent {
        residual: Rational,
        combination: Option<SparseVec>,
    },
}

/// Outcome of [`Echelon::reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub remainder: SparseVec,
    pub rhs: Rational,
    pub combination: Option<SparseVec>,
}

#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: HashMap<usize, PivotRow>,
    track: bool,
    inserted: usize,
}

impl Echelon {
    pub fn new(track_combinations: bool) -> Self {
        Echelon {
            pivots: HashMap::new(),
            track: track_combinations,
            inserted: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    pub fn insert(&mut self, eq: &Equation) -> Insertion {
        let index = self.inserted;
        self.inserted += 1;
        let mut entries = eq.coeffs.clone();
        entries.retain(|_, v| !v.is_zero());
        let mut rhs = eq.rhs.clone();
        let mut combination = SparseVec::new();
        if self.track {
            combination.insert(index, Rational::one());
        }
        loop {
            let Some((&lead, lead_value)) = entries.iter().next() else {
                if rhs.is_zero() {
                    return Insertion::Redundant;
                }
                return Insertion::Inconsistent {
                    residual: rhs,
                    combination: self.track.then_some(combination),
                };
            };
            let Some(pivot) = self.pivots.get(&lead) else {
                let scale = lead_value.recip();
                for v in entries.values_mut() {
                    *v *= &scale;
                }
                rhs *= &scale;
                for v in combination.values_mut() {
                    *v *= &scale;
                }
                self.pivots.insert(
                    lead,
                    PivotRow {
                        entries,
                        rhs,
                        combination,
                    },
                );
                return Insertion::NewPivot(lead);
            };
            let factor = lead_value.clone();
            axpy(&mut entries, &-factor.clone(), &pivot.entries);
            rhs -= &factor * &pivot.rhs;
            if self.track {
                axpy(&mut combination, &-factor, &pivot.combination);
            }
        }
    }

    /// Reduces `eq` against the stored rows without inserting it. The result
    /// satisfies `eq = remainder + sum_i y_i * inserted_i`, with `y` present
    /// only when tracking is on.
    pub fn reduce(&self, eq: &Equation) -> Reduction {
        let mut entries = eq.coeffs.clone();
        entries.retain(|_, v| !v.is_zero());
        let mut rhs = eq.rhs.clone();
        let mut combination = SparseVec::new();
        let mut remainder = SparseVec::new();
        while let Some((lead, value)) = entries.pop_first() {
            match self.pivots.get(&lead) {
                Some(pivot) => {
                    let mut rest = pivot.entries.clone();
                    rest.remove(&lead);
                    axpy(&mut entries, &-value.clone(), &rest);
                    rhs -= &value * &pivot.rhs;
                    if self.track {
                        axpy(&mut combination, &value, &pivot.combination);
                    }
                }
                None => {
                    remainder.insert(lead, value);
                }
            }
        }
        Reduction {
            remainder,
            rhs,
            combination: self.track.then_some(combination),
        }
    }

    /// Back-substitution with every free column set to zero.
    pub fn solve(&self, ncols: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); ncols];
        let mut order: Vec<usize> = self.pivots.keys().copied().collect();
        order.sort_unstable_by(|a, b| b.cmp(a));
        for col in order {
            let row = &self.pivots[&col];
            let mut value = row.rhs.clone();
            for (&c, v) in row.entries.range(col + 1..) {
                if !x[c].is_zero() {
                    value -= v * &x[c];
                }
            }
            x[col] = value;
        }
        x
    }
}

/// `target += factor * source`, dropping cancelled entries.
fn axpy(target: &mut SparseVec, factor: &Rational, source: &SparseVec) {
    for (&c, v) in source {
        let delta = factor * v;
        match target.entry(c) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if !delta.is_zero() {
                    e.insert(delta);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += delta;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

/// Evaluates `sum_i y_i * equations[i]`, returning the combined row and rhs.
pub fn combine(equations: &[Equation], multipliers: &SparseVec) -> (SparseVec, Rational) {
    let mut row = SparseVec::new();
    let mut rhs = Rational::zero();
    for (&i, y) in multipliers {
        axpy(&mut row, y, &equations[i].coeffs);
        rhs += y * &equations[i].rhs;
    }
    (row, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, rat};

    fn eq(coeffs: &[(usize, i64)], rhs: i64) -> Equation {
        Equation {
            coeffs: coeffs.iter().map(|&(c, v)| (c, int(v))).collect(),
            rhs: int(rhs),
        }
    }

    #[test]
    fn solves_with_free_columns_zero() {
        // x0 + x1 = 3, x1 + x2 = 5 -> x2 free = 0, x1 = 5, x0 = -2
        let mut e = Echelon::new(false);
        assert_eq!(e.insert(&eq(&[(0, 1), (1, 1)], 3)), Insertion::NewPivot(0));
        assert_eq!(e.insert(&eq(&[(1, 1), (2, 1)], 5)), Insertion::NewPivot(1));
        assert_eq!(e.solve(3), vec![int(-2), int(5), int(0)]);
    }

    #[test]
    fn detects_inconsistency_with_certificate() {
        let eqs = vec![
            eq(&[(0, 2), (1, 1)], 1),
            eq(&[(1, 3)], 2),
            eq(&[(0, 4), (1, 5)], 7),
        ];
        let mut e = Echelon::new(true);
        assert!(matches!(e.insert(&eqs[0]), Insertion::NewPivot(0)));
        assert!(matches!(e.insert(&eqs[1]), Insertion::NewPivot(1)));
        let Insertion::Inconsistent {
            residual,
            combination: Some(y),
        } = e.insert(&eqs[2])
        else {
            panic!("expected inconsistency");
        };
        // 4x0 + 5x1 = 7 vs 2*(first) + (second) = 4x0 + 5x1 = 4
        assert_eq!(residual, int(3));
        let (row, rhs) = combine(&eqs, &y);
        assert!(row.is_empty());
        assert_eq!(rhs, int(3));
    }

    #[test]
    fn reduce_expresses_members_of_the_row_space() {
        let eqs = vec![eq(&[(0, 1), (1, 1)], 0), eq(&[(1, 1), (2, 2)], 0)];
        let mut e = Echelon::new(true);
        for q in &eqs {
            e.insert(q);
        }
        // 2*(x0 + x1) - (x1 + 2x2) = 2x0 + x1 - 2x2
        let target = eq(&[(0, 2), (1, 1), (2, -2)], 0);
        let r = e.reduce(&target);
        assert!(r.remainder.is_empty());
        let (row, _) = combine(&eqs, r.combination.as_ref().unwrap());
        assert_eq!(row, target.coeffs);
        let outside = e.reduce(&eq(&[(2, 1)], 0));
        assert!(!outside.remainder.is_empty());
    }

    #[test]
    fn redundant_rows() {
        let mut e = Echelon::new(false);
        e.insert(&eq(&[(0, 2)], 1));
        assert_eq!(e.insert(&eq(&[(0, 4)], 2)), Insertion::Redundant);
        assert_eq!(e.solve(1), vec![rat(1, 2)]);
    }
}
