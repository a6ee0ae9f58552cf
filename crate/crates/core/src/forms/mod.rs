//! Differential forms with jet coefficients: exterior derivative, wedge,
//! integrability residual and the weighted pullback.

pub mod pform;
pub mod tform;
pub mod weights;

pub use pform::{differential, integrability_residual, IndexTuple, PForm, MAX_FORM_DEGREE};
pub use tform::TForm;
pub use weights::{pullback_function, pullback_weighted, WeightVector};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("forms of degree {degree} exceed the supported maximum of 3")]
    DegreeCap { degree: usize },
    #[error("expected a {expected}-form, found a {found}-form")]
    WrongDegree { expected: usize, found: usize },
    #[error("weights must all be positive (strict quasi-homogeneity)")]
    NotStrict,
}
