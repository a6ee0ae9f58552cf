//! Exact solvers for `eta = dh + a df` and `omega = a df + f eta`.

pub mod certificate;
pub mod linalg;
pub mod system;

use serde::Serialize;

pub use certificate::ObstructionCertificate;
pub use system::{EquationLabel, GradedLinearSystem, Unknown};

use crate::forms::{differential, FormError, IndexTuple, PForm};
use num_traits::Zero;

use crate::ring::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DecompositionKind {
    /// `eta = dh + a df`
    Relative,
    /// `omega = a df + f eta`
    Invariant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecompositionParts {
    Relative { h: Jet, a: Jet },
    Invariant { a: Jet, eta: PForm },
}

/// A solved decomposition. `residual` is the input minus the recomposition,
/// which is identically zero within `trust`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub parts: DecompositionParts,
    pub residual: PForm,
    pub trust: u32,
}

impl Decomposition {
    pub fn kind(&self) -> DecompositionKind {
        match self.parts {
            DecompositionParts::Relative { .. } => DecompositionKind::Relative,
            DecompositionParts::Invariant { .. } => DecompositionKind::Invariant,
        }
    }

    pub fn a(&self) -> &Jet {
        match &self.parts {
            DecompositionParts::Relative { a, .. } | DecompositionParts::Invariant { a, .. } => a,
        }
    }

    /// Rebuilds `dh + a df` or `a df + f eta`.
    pub fn recompose(&self, f: &Jet) -> PForm {
        let df = differential(f);
        match &self.parts {
            DecompositionParts::Relative { h, a } => differential(h).add(&df.mul_function(a)),
            DecompositionParts::Invariant { a, eta } => {
                df.mul_function(a).add(&eta.mul_function(f))
            }
        }
        .truncate(self.trust)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Decomposition),
    Obstructed(ObstructionCertificate),
}

impl SolveOutcome {
    pub fn decomposition(&self) -> Option<&Decomposition> {
        match self {
            SolveOutcome::Solved(d) => Some(d),
            SolveOutcome::Obstructed(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&ObstructionCertificate> {
        match self {
            SolveOutcome::Solved(_) => None,
            SolveOutcome::Obstructed(c) => Some(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("relative closedness needs at least 3 variables, got {0}")]
    DimensionTooSmall(usize),
    #[error("f must vanish at the origin and be nonzero")]
    BadFunction,
    #[error("f does not divide component {component:?} of omega^df (first remainder in degree {degree})")]
    NotInvariant {
        component: IndexTuple,
        degree: u32,
        remainder: Jet,
    },
    #[error("invariant split is obstructed: {}", .0.note)]
    NoSplit(Box<ObstructionCertificate>),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// Whether `d(eta) ^ df = 0`, with the residual 3-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosednessReport {
    pub closed: bool,
    pub residual: PForm,
}

pub fn check_relative_closedness(eta: &PForm, f: &Jet) -> Result<ClosednessReport, SolverError> {
    if f.nvars() < 3 {
        return Err(SolverError::DimensionTooSmall(f.nvars()));
    }
    let residual = eta.exterior_d()?.wedge(&differential(f))?;
    Ok(ClosednessReport {
        closed: residual.is_zero(),
        residual,
    })
}

fn verified(decomposition: Decomposition, input: &PForm, f: &Jet) -> Result<Decomposition, SolverError> {
    let residual = input.truncate(decomposition.trust).sub(&decomposition.recompose(f));
    if !residual.is_zero() {
        return Err(SolverError::Internal(format!(
            "recomposition differs from input: {residual:?}"
        )));
    }
    Ok(Decomposition {
        residual,
        ..decomposition
    })
}

/// Solves `eta = dh + a df` on jets, or certifies that no solution exists at
/// the minimal failing degree.
pub fn solve_relative(eta: &PForm, f: &Jet) -> Result<SolveOutcome, SolverError> {
    if eta.degree() != 1 {
        return Err(FormError::WrongDegree {
            expected: 1,
            found: eta.degree(),
        }
        .into());
    }
    let system = GradedLinearSystem::relative(eta, f);
    let x = match system.solve() {
        Ok(x) => x,
        Err(cert) => return Ok(SolveOutcome::Obstructed(cert)),
    };
    let parts = system.unpack(&x);
    let trust = system.trust();
    let decomposition = Decomposition {
        parts: DecompositionParts::Relative {
            h: parts.h,
            a: parts.a,
        },
        residual: PForm::zero(1, f.nvars(), trust),
        trust,
    };
    Ok(SolveOutcome::Solved(verified(decomposition, eta, f)?))
}

/// Checks that `f` divides every component of `omega ^ df` modulo the
/// trusted degree.
pub fn check_invariance(omega: &PForm, f: &Jet) -> Result<(), SolverError> {
    let wedge = omega.wedge(&differential(f))?;
    for (tuple, c) in wedge.components() {
        if let Err((degree, remainder)) = c.divide_by(f) {
            return Err(SolverError::NotInvariant {
                component: tuple.clone(),
                degree,
                remainder,
            });
        }
    }
    Ok(())
}

/// Solves `omega = a df + f eta` after checking that `(f = 0)` is invariant.
pub fn solve_invariant_split(omega: &PForm, f: &Jet) -> Result<SolveOutcome, SolverError> {
    if omega.degree() != 1 {
        return Err(FormError::WrongDegree {
            expected: 1,
            found: omega.degree(),
        }
        .into());
    }
    if f.is_zero() || !f.constant_term().is_zero() {
        return Err(SolverError::BadFunction);
    }
    check_invariance(omega, f)?;
    let system = GradedLinearSystem::invariant(omega, f);
    let x = match system.solve() {
        Ok(x) => x,
        Err(cert) => return Ok(SolveOutcome::Obstructed(cert)),
    };
    let parts = system.unpack(&x);
    let trust = system.trust();
    let decomposition = Decomposition {
        parts: DecompositionParts::Invariant {
            a: parts.a,
            eta: PForm::one_form(&parts.eta),
        },
        residual: PForm::zero(1, f.nvars(), trust),
        trust,
    };
    Ok(SolveOutcome::Solved(verified(decomposition, omega, f)?))
}

/// Multiplicities of `omega` and `df` and whether the split's `a` is a unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnitClaim {
    pub a_is_unit: bool,
    pub nu_omega: Option<u32>,
    pub nu_df: Option<u32>,
}

impl UnitClaim {
    pub fn multiplicities_agree(&self) -> bool {
        self.nu_omega.is_some() && self.nu_omega == self.nu_df
    }
}

/// Runs the invariant split and checks that `nu(omega) = nu(df)` forces
/// `a(0) != 0` on the canonical solution.
pub fn unit_test_claim(omega: &PForm, f: &Jet) -> Result<(UnitClaim, Decomposition), SolverError> {
    let decomposition = match solve_invariant_split(omega, f)? {
        SolveOutcome::Solved(d) => d,
        SolveOutcome::Obstructed(c) => return Err(SolverError::NoSplit(Box::new(c))),
    };
    let claim = UnitClaim {
        a_is_unit: !decomposition.a().constant_term().is_zero(),
        nu_omega: omega.order().finite(),
        nu_df: differential(f).order().finite(),
    };
    if claim.multiplicities_agree() && !claim.a_is_unit {
        return Err(SolverError::Internal(
            "equal multiplicities but the solved a vanishes at the origin".into(),
        ));
    }
    Ok((claim, decomposition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, Jet};

    fn vars(n: usize, d: u32) -> Vec<Jet> {
        (0..n).map(|i| Jet::var(n, d, i)).collect()
    }

    fn sphere(d: u32) -> (Vec<Jet>, Jet) {
        let v = vars(3, d);
        let f = &(&v[0].pow(2) + &v[1].pow(2)) + &v[2].pow(2);
        (v, f)
    }

    #[test]
    fn cusp_deformation_term_is_obstructed_in_degree_one() {
        let v = vars(2, 6);
        let (x, y) = (&v[0], &v[1]);
        let f = &x.pow(3) + &y.pow(2);
        let eta = PForm::one_form(&[(x * y).scale(&int(-3)), x.pow(2).scale(&int(2))]);
        let outcome = solve_relative(&eta, &f).unwrap();
        let cert = outcome.certificate().expect("obstructed");
        assert_eq!(cert.kind, DecompositionKind::Relative);
        assert_eq!(cert.degree, 1);
        assert_eq!(cert.equation_degree, 2);
        let system = GradedLinearSystem::relative(&eta, &f);
        assert!(system.check_certificate(cert));
    }

    #[test]
    fn exact_plus_multiple_of_df_roundtrips() {
        let (v, f) = sphere(8);
        let (x, y) = (&v[0], &v[1]);
        let eta = differential(&(x * y)).add(&differential(&f).mul_function(x));
        let outcome = solve_relative(&eta, &f).unwrap();
        let d = outcome.decomposition().expect("solvable");
        let DecompositionParts::Relative { h, a } = &d.parts else {
            panic!("wrong kind")
        };
        assert_eq!(h.truncate(3), (x * y).truncate(3));
        assert_eq!(a.truncate(1), x.truncate(1));
        assert!(d.residual.is_zero());
        assert_eq!(d.recompose(&f), eta.truncate(d.trust));
    }

    #[test]
    fn df_itself_prefers_the_multiplier() {
        let (_, f) = sphere(6);
        let eta = differential(&f);
        let d = solve_relative(&eta, &f).unwrap().decomposition().cloned().unwrap();
        let DecompositionParts::Relative { h, a } = &d.parts else {
            panic!("wrong kind")
        };
        assert!(h.is_zero());
        assert_eq!(a.terms().count(), 1);
        assert_eq!(a.constant_term(), int(1));
    }

    #[test]
    fn closedness_requires_three_variables() {
        let v = vars(2, 4);
        let f = &v[0].pow(3) + &v[1].pow(2);
        let eta = PForm::one_form(&[v[1].clone(), Jet::zero(2, 4)]);
        assert_eq!(
            check_relative_closedness(&eta, &f),
            Err(SolverError::DimensionTooSmall(2))
        );
    }

    #[test]
    fn closedness_detects_non_closed_input() {
        let (v, f) = sphere(6);
        let eta = PForm::one_form(&[Jet::zero(3, 6), v[0].clone(), Jet::zero(3, 6)]);
        let report = check_relative_closedness(&eta, &f).unwrap();
        // d(x dy) ^ df = dx^dy ^ 2z dz
        assert!(!report.closed);
        assert_eq!(
            report.residual.component(&IndexTuple::from_unsorted(&[0, 1, 2]).unwrap().0),
            v[2].scale(&int(2)).truncate(report.residual.trust())
        );
    }

    #[test]
    fn invariant_split_of_unit_times_df_plus_f_dx() {
        let (v, f) = sphere(8);
        let x = &v[0];
        let unit = &Jet::one(3, 8) + x;
        let omega = differential(&f)
            .mul_function(&unit)
            .add(&PForm::basis(3, 7, 0).mul_function(&f));
        let outcome = solve_invariant_split(&omega, &f).unwrap();
        let d = outcome.decomposition().unwrap();
        assert_eq!(d.recompose(&f), omega.truncate(d.trust));
        assert_eq!(d.a().constant_term(), int(1));
        let (claim, _) = unit_test_claim(&omega, &f).unwrap();
        assert!(claim.multiplicities_agree());
        assert!(claim.a_is_unit);
    }

    #[test]
    fn non_invariant_form_is_rejected() {
        let v = vars(3, 6);
        let f = &v[0] * &v[1];
        let omega = PForm::basis(3, 5, 1);
        // dy ^ (y dx + x dy) = -y dx^dy, not divisible by xy
        let err = solve_invariant_split(&omega, &f).unwrap_err();
        assert!(matches!(err, SolverError::NotInvariant { degree: 1, .. }));
    }

    #[test]
    fn unit_claim_with_higher_multiplicity_form() {
        let (v, f) = sphere(8);
        let omega = differential(&f).mul_function(&v[0]);
        let (claim, d) = unit_test_claim(&omega, &f).unwrap();
        assert_eq!(claim.nu_omega, Some(2));
        assert_eq!(claim.nu_df, Some(1));
        assert!(!claim.a_is_unit);
        assert_eq!(d.recompose(&f), omega.truncate(d.trust));
    }

    #[test]
    fn f_with_constant_term_is_rejected() {
        let (_, f) = sphere(6);
        let g = &f + &Jet::one(3, 6);
        assert_eq!(
            solve_invariant_split(&differential(&g), &g),
            Err(SolverError::BadFunction)
        );
    }
}
