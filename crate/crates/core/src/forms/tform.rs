//! Polynomials in `t` whose coefficients are forms of one fixed degree.

use std::fmt;

use super::pform::PForm;
use super::FormError;
use crate::ring::{Jet, TPoly};

/// `sum_{j=0}^{K} t^j alpha_j`. All coefficients share degree, dimension and trust.
#[derive(Clone, PartialEq, Eq)]
pub struct TForm {
    coeffs: Vec<PForm>,
}

impl TForm {
    pub fn zero(degree: usize, nvars: usize, trust: u32, t_order: usize) -> Self {
        TForm {
            coeffs: vec![PForm::zero(degree, nvars, trust); t_order + 1],
        }
    }

    pub fn from_coeffs(coeffs: Vec<PForm>) -> Self {
        assert!(!coeffs.is_empty(), "need a t^0 coefficient");
        let degree = coeffs[0].degree();
        let nvars = coeffs[0].nvars();
        assert!(
            coeffs.iter().all(|c| c.degree() == degree && c.nvars() == nvars),
            "coefficients must share degree and dimension"
        );
        let trust = coeffs.iter().map(PForm::trust).min().unwrap();
        TForm {
            coeffs: coeffs.into_iter().map(|c| c.truncate(trust)).collect(),
        }
    }

    pub fn t_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs[0].degree()
    }

    pub fn nvars(&self) -> usize {
        self.coeffs[0].nvars()
    }

    pub fn trust(&self) -> u32 {
        self.coeffs[0].trust()
    }

    pub fn coeff(&self, j: usize) -> &PForm {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[PForm] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PForm::is_zero)
    }

    /// Lowest `t` power with a nonzero coefficient.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, t_order: usize, trust: u32) -> TForm {
        let mut coeffs: Vec<PForm> = self
            .coeffs
            .iter()
            .take(t_order + 1)
            .map(|c| c.truncate(trust))
            .collect();
        let (degree, nvars, trust) = (self.degree(), self.nvars(), coeffs[0].trust());
        coeffs.resize(t_order + 1, PForm::zero(degree, nvars, trust));
        TForm { coeffs }
    }

    pub fn add(&self, other: &TForm) -> TForm {
        let k = self.t_order().max(other.t_order());
        let trust = self.trust().min(other.trust());
        let a = self.truncate(k, trust);
        let b = other.truncate(k, trust);
        TForm::from_coeffs(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.add(y)).collect())
    }

    pub fn sub(&self, other: &TForm) -> TForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TForm {
        TForm::from_coeffs(self.coeffs.iter().map(PForm::neg).collect())
    }

    /// `t^shift * self`, keeping t-order `t_order`.
    pub fn shift(&self, shift: usize, t_order: usize) -> TForm {
        let mut out = TForm::zero(self.degree(), self.nvars(), self.trust(), t_order);
        for (j, c) in self.coeffs.iter().enumerate() {
            if j + shift <= t_order {
                out.coeffs[j + shift] = c.clone();
            }
        }
        out
    }

    /// Multiplies by a t-polynomial of functions, truncating at the smaller t-order.
    pub fn mul_tpoly(&self, p: &TPoly) -> TForm {
        let k = self.t_order().min(p.t_order());
        let trust = self.trust().min(p.truncation_degree());
        let coeffs = (0..=k)
            .map(|j| {
                (0..=j).fold(
                    PForm::zero(self.degree(), self.nvars(), trust),
                    |acc, i| acc.add(&self.coeffs[i].mul_function(p.coeff(j - i))),
                )
            })
            .collect();
        TForm::from_coeffs(coeffs)
    }

    pub fn mul_function(&self, g: &Jet) -> TForm {
        TForm::from_coeffs(self.coeffs.iter().map(|c| c.mul_function(g)).collect())
    }

    /// `d_x` applied coefficientwise (`t` is a parameter).
    pub fn exterior_d(&self) -> Result<TForm, FormError> {
        Ok(TForm::from_coeffs(
            self.coeffs
                .iter()
                .map(PForm::exterior_d)
                .collect::<Result<_, _>>()?,
        ))
    }

    /// Product in `t` and wedge in `x`, truncated at the smaller t-order.
    pub fn wedge(&self, other: &TForm) -> Result<TForm, FormError> {
        let k = self.t_order().min(other.t_order());
        let mut coeffs = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let mut acc: Option<PForm> = None;
            for i in 0..=j {
                let term = self.coeffs[i].wedge(&other.coeffs[j - i])?;
                acc = Some(match acc {
                    Some(a) => a.add(&term),
                    None => term,
                });
            }
            coeffs.push(acc.expect("at least one term"));
        }
        Ok(TForm::from_coeffs(coeffs))
    }

    /// `d_x F` for a t-polynomial of functions.
    pub fn differential_of(f: &TPoly) -> TForm {
        TForm::from_coeffs(f.coeffs().iter().map(super::pform::differential).collect())
    }

    pub fn eval_at_one(&self) -> PForm {
        self.coeffs
            .iter()
            .skip(1)
            .fold(self.coeffs[0].clone(), |acc, c| acc.add(c))
    }
}

impl fmt::Debug for TForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}
