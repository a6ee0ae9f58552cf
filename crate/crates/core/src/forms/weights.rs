//! Weight vectors and the weighted rescaling `sigma_t(x) = (t^{d_1} x_1, ..., t^{d_n} x_n)`.

use super::pform::PForm;
use super::tform::TForm;
use super::FormError;
use crate::ring::{Jet, Monomial, TPoly};

/// Positive weights `d_1..d_n` and a positive level `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct WeightVector {
    level: u32,
    weights: Vec<u32>,
}

impl WeightVector {
    /// Only strict weight systems (every entry positive) are accepted.
    pub fn new(level: u32, weights: Vec<u32>) -> Result<Self, FormError> {
        if level == 0 || weights.contains(&0) {
            return Err(FormError::NotStrict);
        }
        Ok(WeightVector { level, weights })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn max_weight(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// t-exponent picked up by `x^m dx_I` under `sigma_t`.
    pub fn weight_of(&self, m: &Monomial, slots: impl Iterator<Item = usize>) -> u64 {
        m.weighted_degree(&self.weights) + slots.map(|i| self.weights[i] as u64).sum::<u64>()
    }

    /// Whether every monomial of `f` sits at weighted degree `level`.
    pub fn is_quasi_homogeneous(&self, f: &Jet) -> bool {
        f.terms()
            .all(|(m, _)| m.weighted_degree(&self.weights) == self.level as u64)
    }
}

/// `sigma_t^* alpha` as a polynomial in `t`: `x_i -> t^{d_i} x_i` and
/// `dx_i -> t^{d_i} dx_i`, with `t` kept formal.
pub fn pullback_weighted(alpha: &PForm, w: &WeightVector) -> TForm {
    assert_eq!(alpha.nvars(), w.weights.len(), "one weight per variable");
    let mut max_power = 0u64;
    for (tuple, c) in alpha.components() {
        for (m, _) in c.terms() {
            max_power = max_power.max(w.weight_of(m, tuple.indices()));
        }
    }
    let mut coeffs =
        vec![PForm::zero(alpha.degree(), alpha.nvars(), alpha.trust()); max_power as usize + 1];
    for (tuple, c) in alpha.components() {
        for (m, value) in c.terms() {
            let power = w.weight_of(m, tuple.indices()) as usize;
            let term = Jet::monomial(alpha.nvars(), alpha.trust(), m.clone(), value.clone());
            let piece = PForm::from_components(
                alpha.degree(),
                alpha.nvars(),
                alpha.trust(),
                [(tuple.indices().collect(), term)],
            );
            coeffs[power] = coeffs[power].add(&piece);
        }
    }
    TForm::from_coeffs(coeffs)
}

/// `sigma_t^* f` for a function, as a t-polynomial.
pub fn pullback_function(f: &Jet, w: &WeightVector) -> TPoly {
    let graded = pullback_weighted(&PForm::from_function(f), w);
    TPoly::from_coeffs(graded.coeffs().iter().map(PForm::function).collect())
}
