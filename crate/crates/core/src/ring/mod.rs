//! Exact arithmetic on sparse multivariate polynomials over the rationals,
//! their total-degree truncations (jets), and polynomials in `t` over jets.

pub mod jet;
pub mod monomial;
pub mod rational;
pub mod tpoly;

pub use jet::{jet_arith, Jet, JetOp, Order};
pub use monomial::Monomial;
pub use rational::{format_rational, int, rat, Rational};
pub use tpoly::TPoly;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("dimension mismatch: {left} vs {right} variables")]
    DimensionMismatch { left: usize, right: usize },
    #[error("truncation mismatch: degree {left} vs {right}")]
    TruncationMismatch { left: u32, right: u32 },
    #[error("not a unit: constant term is zero")]
    NotAUnit,
}
