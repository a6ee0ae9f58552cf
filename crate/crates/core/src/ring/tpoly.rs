//! Polynomials in the deformation parameter `t` with jet coefficients.

use std::fmt;

use super::jet::Jet;
use super::RingError;

/// `sum_{j=0}^{K} t^j c_j`, every `c_j` sharing dimension and truncation.
#[derive(Clone, PartialEq, Eq)]
pub struct TPoly {
    coeffs: Vec<Jet>,
}

impl TPoly {
    pub fn zero(nvars: usize, degree: u32, t_order: usize) -> Self {
        TPoly {
            coeffs: vec![Jet::zero(nvars, degree); t_order + 1],
        }
    }

    pub fn one(nvars: usize, degree: u32, t_order: usize) -> Self {
        Self::constant(Jet::one(nvars, degree), t_order)
    }

    /// The jet `c` as a t-polynomial with no `t` dependence.
    pub fn constant(c: Jet, t_order: usize) -> Self {
        let mut p = Self::zero(c.nvars(), c.truncation_degree(), t_order);
        p.coeffs[0] = c;
        p
    }

    /// Builds from coefficients `c_0 .. c_K`, aligning them to the smallest
    /// truncation degree.
    pub fn from_coeffs(coeffs: Vec<Jet>) -> Self {
        assert!(!coeffs.is_empty(), "a t-polynomial needs a t^0 coefficient");
        let nvars = coeffs[0].nvars();
        assert!(
            coeffs.iter().all(|c| c.nvars() == nvars),
            "coefficients live in different dimensions"
        );
        let degree = coeffs.iter().map(Jet::truncation_degree).min().unwrap();
        TPoly {
            coeffs: coeffs.into_iter().map(|c| c.truncate(degree)).collect(),
        }
    }

    pub fn t_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn nvars(&self) -> usize {
        self.coeffs[0].nvars()
    }

    pub fn truncation_degree(&self) -> u32 {
        self.coeffs[0].truncation_degree()
    }

    pub fn coeff(&self, j: usize) -> &Jet {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[Jet] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, j: usize, c: Jet) {
        let degree = self.truncation_degree();
        self.coeffs[j] = c.truncate(degree);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Jet::is_zero)
    }

    /// Re-truncates in `t` and in `x`.
    pub fn truncate(&self, t_order: usize, degree: u32) -> TPoly {
        let mut coeffs: Vec<Jet> = self
            .coeffs
            .iter()
            .take(t_order + 1)
            .map(|c| c.truncate(degree))
            .collect();
        let nvars = self.nvars();
        let degree = coeffs[0].truncation_degree();
        coeffs.resize(t_order + 1, Jet::zero(nvars, degree));
        TPoly { coeffs }
    }

    /// `1 + t^j a`.
    pub fn one_plus_monomial(a: &Jet, j: usize, t_order: usize) -> Self {
        let mut p = Self::one(a.nvars(), a.truncation_degree(), t_order);
        if j <= t_order {
            p.coeffs[j] = &p.coeffs[j] + a;
        }
        p
    }

    pub fn add(&self, other: &TPoly) -> TPoly {
        let k = self.t_order().min(other.t_order());
        TPoly::from_coeffs((0..=k).map(|j| &self.coeffs[j] + &other.coeffs[j]).collect())
    }

    pub fn sub(&self, other: &TPoly) -> TPoly {
        let k = self.t_order().min(other.t_order());
        TPoly::from_coeffs((0..=k).map(|j| &self.coeffs[j] - &other.coeffs[j]).collect())
    }

    pub fn mul(&self, other: &TPoly) -> TPoly {
        let k = self.t_order().min(other.t_order());
        let degree = self.truncation_degree().min(other.truncation_degree());
        let nvars = self.nvars();
        let coeffs = (0..=k)
            .map(|j| {
                (0..=j).fold(Jet::zero(nvars, degree), |acc, i| {
                    &acc + &(&self.coeffs[i] * &other.coeffs[j - i])
                })
            })
            .collect();
        TPoly::from_coeffs(coeffs)
    }

    pub fn scale_jet(&self, c: &Jet) -> TPoly {
        TPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Inverse modulo `(t^{K+1}, degree D+1)`; needs a unit `t^0` coefficient.
    pub fn invert_unit(&self) -> Result<TPoly, RingError> {
        let v0 = self.coeffs[0].invert_unit()?;
        let mut out = vec![v0.clone()];
        for k in 1..=self.t_order() {
            let mut acc = Jet::zero(self.nvars(), v0.truncation_degree());
            for i in 1..=k {
                acc = &acc + &(&self.coeffs[i] * &out[k - i]);
            }
            out.push(-&(&v0 * &acc));
        }
        Ok(TPoly::from_coeffs(out))
    }

    /// `d/dt`; the result has t-order `K - 1` (or 0 for constants).
    pub fn derivative_t(&self) -> TPoly {
        if self.t_order() == 0 {
            return TPoly::zero(self.nvars(), self.truncation_degree(), 0);
        }
        TPoly::from_coeffs(
            (1..=self.t_order())
                .map(|j| self.coeffs[j].scale(&super::rational::from_u64(j as u64)))
                .collect(),
        )
    }

    /// `sum_j c_j`: the value at `t = 1` of the truncated polynomial.
    pub fn eval_at_one(&self) -> Jet {
        self.coeffs
            .iter()
            .skip(1)
            .fold(self.coeffs[0].clone(), |acc, c| &acc + c)
    }
}

impl fmt::Debug for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}
