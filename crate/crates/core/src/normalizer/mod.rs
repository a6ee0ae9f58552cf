//! Inductive normalization of an integrable deformation `df0 + sum t^j w_j`
//! into `G * d_x F`, producing a formal first integral `F(x, t)` with
//! `F(x, 0) = f0`.

use crate::forms::{differential, FormError, PForm, TForm};
use crate::ring::{Jet, TPoly};
use crate::solver::{solve_relative, DecompositionParts, ObstructionCertificate, SolveOutcome, SolverError};

/// `omega_t = df0 + t w_1 + ... + t^K w_K` on jets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformationFamily {
    f0: Jet,
    omegas: Vec<PForm>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("f0 must vanish at the origin")]
    NonzeroConstant,
    #[error("deformation term {index} is a {degree}-form, expected a 1-form")]
    NotAOneForm { index: usize, degree: usize },
    #[error("deformation term {index} has {found} variables, f0 has {expected}")]
    Dimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("the t^0 coefficient of the series is not df0")]
    LeadingTerm,
}

impl DeformationFamily {
    pub fn new(f0: Jet, omegas: Vec<PForm>) -> Result<Self, FamilyError> {
        use num_traits::Zero;
        if !f0.constant_term().is_zero() {
            return Err(FamilyError::NonzeroConstant);
        }
        for (i, w) in omegas.iter().enumerate() {
            if w.degree() != 1 {
                return Err(FamilyError::NotAOneForm {
                    index: i + 1,
                    degree: w.degree(),
                });
            }
            if w.nvars() != f0.nvars() {
                return Err(FamilyError::Dimension {
                    index: i + 1,
                    expected: f0.nvars(),
                    found: w.nvars(),
                });
            }
        }
        Ok(DeformationFamily { f0, omegas })
    }

    /// Reads a series whose `t^0` coefficient must equal `df0` within trust.
    pub fn from_series(f0: Jet, series: &TForm) -> Result<Self, FamilyError> {
        if series.degree() != 1 {
            return Err(FamilyError::NotAOneForm {
                index: 0,
                degree: series.degree(),
            });
        }
        let lead = series.coeff(0);
        if lead.sub(&differential(&f0)).truncate(lead.trust()).is_zero() {
            Self::new(f0, series.coeffs()[1..].to_vec())
        } else {
            Err(FamilyError::LeadingTerm)
        }
    }

    pub fn f0(&self) -> &Jet {
        &self.f0
    }

    pub fn omegas(&self) -> &[PForm] {
        &self.omegas
    }

    pub fn t_order(&self) -> usize {
        self.omegas.len()
    }

    pub fn nvars(&self) -> usize {
        self.f0.nvars()
    }

    /// Degree up to which every coefficient of the series is exact.
    pub fn trusted_degree(&self) -> u32 {
        self.omegas
            .iter()
            .map(PForm::trust)
            .fold(self.f0.truncation_degree().saturating_sub(1), u32::min)
    }

    /// The whole series with `t^0` coefficient `df0`.
    pub fn series(&self) -> TForm {
        let mut coeffs = Vec::with_capacity(self.omegas.len() + 1);
        coeffs.push(differential(&self.f0));
        coeffs.extend(self.omegas.iter().cloned());
        TForm::from_coeffs(coeffs)
    }
}

/// Degree through which the stage-`j` coefficient is known to be relatively
/// closed. Earlier stages fixed their coefficients only through their own
/// trusted degree; the unseen remainder `r_b` (order above `E_b`) enters the
/// order-`j` integrability condition through `rho_a ^ d r_b` with `a + b = j`,
/// which spoils `d(rho_j) ^ df0` from degree `ord(rho_a) + E_b` on.
fn stage_budget(j: usize, stage_trust: &[u32], stage_order: &[u32], nu: u32) -> u32 {
    (1..j)
        .map(|a| (stage_order[a] + stage_trust[j - a]).saturating_sub(nu))
        .min()
        .unwrap_or(u32::MAX)
}

/// Coefficientwise integrability `omega_t ^ d omega_t` up to the family's t-order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeReport {
    pub passed: bool,
    pub failing_order: Option<usize>,
    pub residual: Option<PForm>,
    /// The full 3-form series, zero when `passed`.
    pub series: TForm,
}

pub fn check_cascade(family: &DeformationFamily) -> Result<CascadeReport, FormError> {
    let omega = family.series();
    let series = omega.wedge(&omega.exterior_d()?)?;
    let failing_order = series.first_nonzero();
    Ok(CascadeReport {
        passed: failing_order.is_none(),
        residual: failing_order.map(|j| series.coeff(j).clone()),
        failing_order,
        series,
    })
}

/// One stage of the loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationStep {
    pub t_order: usize,
    /// Coefficient `w_j` of the input family.
    pub original: PForm,
    /// Coefficient of `t^j` in the family after the earlier divisions.
    pub rho: PForm,
    pub f: Jet,
    pub a: Jet,
    /// Degree up to which this stage's equations were imposed.
    pub trust: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationResult {
    pub g: TPoly,
    pub f: TPoly,
    /// `omega_t ^ d_x F`, zero within `trust`.
    pub certificate_residual: TForm,
    pub steps: Vec<NormalizationStep>,
    /// `G * dF/dt`, the `dt`-component that completes `omega_t` to
    /// `G d_(x,t) F`.
    pub h_hat: TPoly,
    pub trust: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalizeOutcome {
    Normalized(NormalizationResult),
    /// The family is not integrable; the loop was not run.
    NotIntegrable(CascadeReport),
    /// `rho` is the coefficient that admitted no decomposition.
    Obstructed {
        certificate: ObstructionCertificate,
        rho: PForm,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("internal consistency failure at t-order {t_order}: {message}")]
    Internal { t_order: usize, message: String },
}

pub fn normalize(family: &DeformationFamily) -> Result<NormalizeOutcome, NormalizeError> {
    let cascade = check_cascade(family)?;
    if !cascade.passed {
        return Ok(NormalizeOutcome::NotIntegrable(cascade));
    }
    let n = family.nvars();
    let k = family.t_order();
    let input_trust = family.trusted_degree();
    let f0 = family.f0().truncate(input_trust + 1);
    let df0 = differential(&f0);
    let nu = df0.order().finite().unwrap_or(input_trust + 1);
    let original = family.series().truncate(k, input_trust);

    let mut current = original.clone();
    let mut trust = input_trust;
    let mut stage_trust = vec![input_trust];
    let mut stage_order = vec![nu];
    let mut g = TPoly::one(n, trust, k);
    let mut f_coeffs = vec![f0.clone()];
    let mut steps = Vec::with_capacity(k);
    for j in 1..=k {
        trust = trust.min(stage_budget(j, &stage_trust, &stage_order, nu));
        current = current.truncate(k, trust);
        let rho = current.coeff(j).clone();
        let closed = rho.exterior_d()?.wedge(&df0)?;
        if !closed.is_zero() {
            return Err(NormalizeError::Internal {
                t_order: j,
                message: format!("d(rho) ^ df0 is not zero: {closed:?}"),
            });
        }
        let (h, a) = match solve_relative(&rho, &f0)? {
            SolveOutcome::Obstructed(cert) => {
                return Ok(NormalizeOutcome::Obstructed {
                    certificate: cert.with_t_order(j),
                    rho,
                })
            }
            SolveOutcome::Solved(d) => match d.parts {
                DecompositionParts::Relative { h, a } => (h, a),
                DecompositionParts::Invariant { .. } => unreachable!(),
            },
        };
        let a = a.with_degree(trust);
        let unit = TPoly::one_plus_monomial(&a, j, k);
        let inverse = unit.invert_unit().expect("1 + t^j a is a unit");
        let divided = current.mul_tpoly(&inverse).truncate(k, trust);
        if let Some(i) = (0..j).find(|&i| divided.coeff(i) != current.coeff(i)) {
            return Err(NormalizeError::Internal {
                t_order: j,
                message: format!("division changed the coefficient of t^{i}"),
            });
        }
        current = divided;
        stage_trust.push(trust);
        stage_order.push(current.coeff(j).order().finite().unwrap_or(trust + 1));
        g = g.mul(&unit);
        f_coeffs.push(h.with_degree(input_trust + 1));
        steps.push(NormalizationStep {
            t_order: j,
            original: original.coeff(j).clone(),
            rho,
            f: h,
            a,
            trust,
        });
    }

    let g = g.truncate(k, trust);
    let f = TPoly::from_coeffs(f_coeffs).truncate(k, trust + 1);
    let df = TForm::differential_of(&f);
    let recomposed = df.mul_tpoly(&g);
    let difference = original.sub(&recomposed).truncate(k, trust);
    if let Some(j) = difference.first_nonzero() {
        return Err(NormalizeError::Internal {
            t_order: j,
            message: format!("omega_t - G d_x F does not vanish: {:?}", difference.coeff(j)),
        });
    }
    let check = certify_first_integral(family, &f)?;
    if !check.valid {
        return Err(NormalizeError::Internal {
            t_order: check.failing_order.unwrap_or(0),
            message: "omega_t ^ d_x F does not vanish".into(),
        });
    }
    let h_hat = g.mul(&f.derivative_t());
    Ok(NormalizeOutcome::Normalized(NormalizationResult {
        g,
        f,
        certificate_residual: check.residual,
        steps,
        h_hat,
        trust,
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstIntegralCheck {
    pub valid: bool,
    pub failing_order: Option<usize>,
    /// `omega_t ^ d_x F` per t-order.
    pub residual: TForm,
    pub trust: u32,
}

/// Checks `omega_t ^ d_x F = 0` per t-order up to the smaller t-order and
/// trusted degree of the two inputs.
pub fn certify_first_integral(
    family: &DeformationFamily,
    f: &TPoly,
) -> Result<FirstIntegralCheck, FormError> {
    let residual = family.series().wedge(&TForm::differential_of(f))?;
    let failing_order = residual.first_nonzero();
    Ok(FirstIntegralCheck {
        valid: failing_order.is_none(),
        failing_order,
        trust: residual.trust(),
        residual,
    })
}
