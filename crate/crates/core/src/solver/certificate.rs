//! Finite witnesses that a decomposition has no solution.


use super::system::EquationLabel;
use super::DecompositionKind;
use crate::ring::Rational;

/// A combination of coefficient equations under which every unknown cancels
/// while the right-hand sides leave a nonzero constant.
///
/// `degree` is the reported obstruction degree. For the relative problem
/// every such combination is a functional of `d(eta)`, so it is reported at
/// the degree of the `d(eta)` component, one below the coefficient equations
/// involved (`equation_degree`). For the invariant problem both coincide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionCertificate {
    pub kind: DecompositionKind,
    pub degree: u32,
    pub equation_degree: u32,
    pub row: Vec<(EquationLabel, Rational)>,
    pub residual: Rational,
    pub note: String,
    /// Set when the obstruction arose inside the normalization loop.
    pub t_order: Option<usize>,
}

impl ObstructionCertificate {
    pub(crate) fn new(
        kind: DecompositionKind,
        equation_degree: u32,
        row: Vec<(EquationLabel, Rational)>,
        residual: Rational,
        note: String,
    ) -> Self {
        let degree = match kind {
            DecompositionKind::Relative => equation_degree.saturating_sub(1),
            DecompositionKind::Invariant => equation_degree,
        };
        ObstructionCertificate {
            kind,
            degree,
            equation_degree,
            row,
            residual,
            note,
            t_order: None,
        }
    }

    pub fn with_t_order(mut self, t_order: usize) -> Self {
        self.t_order = Some(t_order);
        self
    }
}
