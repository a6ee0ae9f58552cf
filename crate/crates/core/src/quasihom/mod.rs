//! Weighted homogeneity, the weighted-rescaling embedding of
//! `omega = a df + f eta` into a deformation family, and exact tests for an
//! isolated singularity and for the multiplicity criterion.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::forms::{differential, pullback_weighted, FormError, PForm, TForm, WeightVector};
use crate::normalizer::{DeformationFamily, FamilyError};
use crate::ring::{Jet, Monomial, Order, Rational};
use crate::solver::linalg::{Echelon, Equation, SparseVec};
use crate::solver::{
    solve_invariant_split, Decomposition, DecompositionParts, ObstructionCertificate, SolveOutcome,
    SolverError,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiHomogeneityReport {
    pub is_qh: bool,
    pub weights: Option<WeightVector>,
    pub strict: bool,
}

/// Searches positive integer weights `d_j <= max_weight` putting every
/// monomial of `f` on one weighted level, returning the lexicographically
/// smallest such vector.
pub fn detect_quasihomogeneity(f: &Jet, max_weight: u32) -> QuasiHomogeneityReport {
    let n = f.nvars();
    let monomials: Vec<&Monomial> = f.terms().map(|(m, _)| m).collect();
    let not_found = QuasiHomogeneityReport {
        is_qh: false,
        weights: None,
        strict: false,
    };
    if monomials.is_empty() || monomials.iter().any(|m| m.is_one()) || max_weight == 0 || n == 0 {
        return not_found;
    }
    let mut weights = vec![1u32; n];
    loop {
        let level = monomials[0].weighted_degree(&weights);
        if monomials.iter().all(|m| m.weighted_degree(&weights) == level) {
            let w = WeightVector::new(level as u32, weights).expect("weights are positive");
            return QuasiHomogeneityReport {
                is_qh: true,
                weights: Some(w),
                strict: true,
            };
        }
        // Next vector in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return not_found;
            }
            i -= 1;
            if weights[i] < max_weight {
                weights[i] += 1;
                weights[i + 1..].fill(1);
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("f is not quasi-homogeneous for the given weights")]
    NotQuasiHomogeneous,
    #[error("weight vector has {found} entries, expected {expected}")]
    WeightCount { expected: usize, found: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("omega = a df + f eta has no solution: {}", .0.note)]
    NoSplit(Box<ObstructionCertificate>),
    #[error("a(0) = 0: omega is not a unit multiple of df modulo f")]
    NotAUnit,
    #[error("the rescaled form has a term below the level of f")]
    BelowLevel,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// The rescaled family and the data it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub family: DeformationFamily,
    /// `a` and `eta` from `omega = a df + f eta`.
    pub a: Jet,
    pub eta: PForm,
    /// The complete series `t^-d sigma_t^* omega` before any t-truncation.
    pub series: TForm,
}

/// Largest t-order chosen by default for an embedding.
pub const EMBED_T_ORDER_CAP: usize = 12;

/// Smallest `K` such that no t-order above `K` of `omega_t ^ d_x F` reaches
/// total degree `trust`. Both factors are weighted-homogeneous, so the
/// `t^j` part has weighted degree `2d + j` and coefficients of degree at
/// least `(2d + j) / max_weight - 2`.
pub fn first_integral_t_order(w: &WeightVector, trust: u32) -> usize {
    let reach = w.max_weight() as u64 * (trust as u64 + 2);
    reach.saturating_sub(2 * w.level() as u64) as usize
}

/// Builds `omega_t = t^-d sigma_t^* omega`. Its `t^0` coefficient is
/// `a(0) df`, so the family is based at `f0 = a(0) f`, and its value at
/// `t = 1` is `omega`. The default t-order keeps every term, so evaluation
/// at `t = 1` is exact, and extends to [`first_integral_t_order`] (at most
/// [`EMBED_T_ORDER_CAP`]) so that `F(x, 1)` is a first integral of `omega`
/// within trust. A smaller `t_order` truncates.
pub fn embed_as_deformation(
    omega: &PForm,
    f: &Jet,
    w: &WeightVector,
    t_order: Option<usize>,
) -> Result<Embedding, EmbedError> {
    if w.weights().len() != f.nvars() {
        return Err(EmbedError::WeightCount {
            expected: f.nvars(),
            found: w.weights().len(),
        });
    }
    if !w.is_quasi_homogeneous(f) {
        return Err(EmbedError::NotQuasiHomogeneous);
    }
    let decomposition = match solve_invariant_split(omega, f)? {
        SolveOutcome::Solved(d) => d,
        SolveOutcome::Obstructed(c) => return Err(EmbedError::NoSplit(Box::new(c))),
    };
    let (a, eta) = match &decomposition.parts {
        DecompositionParts::Invariant { a, eta } => (a.clone(), eta.clone()),
        DecompositionParts::Relative { .. } => unreachable!(),
    };
    let a0 = a.constant_term();
    if a0.is_zero() {
        return Err(EmbedError::NotAUnit);
    }
    let level = w.level() as usize;
    let trust = decomposition.trust;
    let pulled = pullback_weighted(&omega.truncate(trust), w);
    if pulled.coeffs().iter().take(level).any(|c| !c.is_zero()) {
        return Err(EmbedError::BelowLevel);
    }
    let coeffs: Vec<PForm> = pulled.coeffs().iter().skip(level).cloned().collect();
    let series = if coeffs.is_empty() {
        TForm::from_coeffs(vec![PForm::zero(1, f.nvars(), trust)])
    } else {
        TForm::from_coeffs(coeffs)
    };
    let k = t_order.unwrap_or_else(|| {
        series
            .t_order()
            .max(first_integral_t_order(w, trust).min(EMBED_T_ORDER_CAP))
    });
    let truncated = series.truncate(k, trust);
    let f0 = f.scale(&a0).truncate(trust + 1);
    let family = DeformationFamily::from_series(f0, &truncated)?;
    Ok(Embedding {
        family,
        a,
        eta,
        series,
    })
}

/// Expression of one monomial as `sum_i c_i * df/dx_i` modulo the trusted degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainmentWitness {
    pub monomial: Monomial,
    pub multipliers: Vec<Jet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularityReport {
    pub isolated_certified: bool,
    /// Minimal `k` with every degree-`k` monomial in the Jacobian ideal
    /// modulo degree `trust + 1`.
    pub k_found: Option<u32>,
    pub jacobian_generators: Vec<Jet>,
    /// Witnesses for every monomial of degree `k_found`.
    pub witnesses: Vec<ContainmentWitness>,
    /// Degree through which containment is checked (the partials' truncation).
    pub trust: u32,
}

impl SingularityReport {
    /// Re-multiplies every witness and compares with its monomial.
    pub fn verify(&self) -> bool {
        let n = self.jacobian_generators.len();
        self.witnesses.iter().all(|w| {
            let mut sum = Jet::zero(n, self.trust);
            for (c, p) in w.multipliers.iter().zip(&self.jacobian_generators) {
                sum = &sum + &(c * p);
            }
            let target = Jet::monomial(n, self.trust, w.monomial.clone(), Rational::from_integer(1.into()));
            sum.truncate(self.trust) == target
        })
    }
}

/// Tests `m^k ⊆ J(f)` modulo degree `trust + 1` for `k = 1..=trust` by exact
/// elimination on the vectors `x^beta df/dx_i`. The partials are only known
/// through degree `D - 1`, which is the trust used.
pub fn certify_isolated_singularity(f: &Jet) -> SingularityReport {
    let n = f.nvars();
    let partials: Vec<Jet> = (0..n).map(|i| f.derivative(i)).collect();
    let trust = f.truncation_degree().saturating_sub(1);
    let columns: BTreeMap<Monomial, usize> = Monomial::all_up_to_degree(n, trust)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();

    let mut generators: Vec<(usize, Monomial)> = Vec::new();
    let mut echelon = Echelon::new(true);
    for (i, p) in partials.iter().enumerate() {
        let Order::Finite(low) = p.order() else {
            continue;
        };
        if low > trust {
            continue;
        }
        for beta in Monomial::all_up_to_degree(n, trust - low) {
            let mut coeffs = SparseVec::new();
            for (gamma, c) in p.terms() {
                let mu = beta.mul(gamma);
                if mu.total_degree() <= trust {
                    coeffs.insert(columns[&mu], c.clone());
                }
            }
            echelon.insert(&Equation {
                coeffs,
                rhs: Rational::zero(),
            });
            generators.push((i, beta));
        }
    }

    let mut report = SingularityReport {
        isolated_certified: false,
        k_found: None,
        jacobian_generators: partials.iter().map(|p| p.truncate(trust)).collect(),
        witnesses: Vec::new(),
        trust,
    };
    for k in 1..=trust {
        let mut witnesses = Vec::new();
        for m in Monomial::all_of_degree(n, k) {
            let target = Equation {
                coeffs: [(columns[&m], Rational::from_integer(1.into()))].into_iter().collect(),
                rhs: Rational::zero(),
            };
            let reduction = echelon.reduce(&target);
            if !reduction.remainder.is_empty() {
                witnesses.clear();
                break;
            }
            let mut multipliers = vec![Jet::zero(n, trust); n];
            for (g, y) in reduction.combination.expect("tracking is on") {
                let (i, beta) = &generators[g];
                multipliers[*i].add_term(beta.clone(), y);
            }
            witnesses.push(ContainmentWitness {
                monomial: m,
                multipliers,
            });
        }
        if !witnesses.is_empty() {
            report.isolated_certified = true;
            report.k_found = Some(k);
            report.witnesses = witnesses;
            break;
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Isolated singularity certified and `nu(omega) = nu(df)`.
    Expected,
    /// Isolated singularity certified and the multiplicities differ.
    NotExpected,
    /// The isolated-singularity test or the split was not conclusive.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityReport {
    pub verdict: Verdict,
    pub first_integral_expected: bool,
    pub nu_omega: Option<u32>,
    pub nu_df: Option<u32>,
    pub isolated: bool,
    pub singularity: SingularityReport,
    /// `a(0) != 0` for the solved split, absent when the split is obstructed.
    pub a_is_unit: Option<bool>,
    pub split: Option<Decomposition>,
    pub split_obstruction: Option<ObstructionCertificate>,
}

/// Multiplicity criterion for `omega = a df + f eta` with `f` having an
/// isolated singularity: a holomorphic first integral is expected exactly
/// when `nu(omega) = nu(df)`.
pub fn multiplicity_criterion(omega: &PForm, f: &Jet) -> Result<MultiplicityReport, SolverError> {
    let singularity = certify_isolated_singularity(f);
    let outcome = solve_invariant_split(omega, f)?;
    let nu_omega = omega.order().finite();
    let nu_df = differential(f).order().finite();
    let isolated = singularity.isolated_certified;
    let (a_is_unit, split, split_obstruction) = match outcome {
        SolveOutcome::Solved(d) => (Some(!d.a().constant_term().is_zero()), Some(d), None),
        SolveOutcome::Obstructed(c) => (None, None, Some(c)),
    };
    let verdict = if !isolated || split_obstruction.is_some() {
        Verdict::Inconclusive
    } else if nu_omega.is_some() && nu_omega == nu_df {
        Verdict::Expected
    } else {
        Verdict::NotExpected
    };
    Ok(MultiplicityReport {
        verdict,
        first_integral_expected: verdict == Verdict::Expected,
        nu_omega,
        nu_df,
        isolated,
        singularity,
        a_is_unit,
        split,
        split_obstruction,
    })
}

/// Substitution of a parametrized curve `s -> gamma(s)` into `omega` and `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveReport {
    /// Every component `omega_i(gamma(s))` vanishes within trust.
    pub in_zero_set: bool,
    /// `gamma^* omega` as the coefficient of `ds`.
    pub pullback: Jet,
    /// Order `p` of `f(gamma(s))`; absent when the curve lies in `f = 0`.
    pub f_order: Option<u32>,
    /// The curve lies in the zero set of `omega` while `f(gamma(s)) = c s^p + ...`
    /// with `p` finite: then `gamma^* omega = 0` contradicts
    /// `gamma^*(a df + f eta) = p c s^(p-1) ds + ...` for a unit `a`.
    pub contradiction: bool,
}

/// `gamma` is given by one-variable jets without constant terms.
pub fn check_candidate_curve(omega: &PForm, f: &Jet, gamma: &[Jet]) -> Result<CurveReport, FormError> {
    if omega.degree() != 1 {
        return Err(FormError::WrongDegree {
            expected: 1,
            found: omega.degree(),
        });
    }
    assert_eq!(gamma.len(), omega.nvars(), "one curve coordinate per variable");
    assert!(
        gamma.iter().all(|g| g.nvars() == 1 && g.constant_term().is_zero()),
        "curve coordinates are one-variable jets through the origin"
    );
    let trust = omega.trust();
    let gamma: Vec<Jet> = gamma.iter().map(|g| g.with_degree(trust + 1)).collect();
    let mut in_zero_set = true;
    let mut pullback = Jet::zero(1, trust);
    for (i, g) in gamma.iter().enumerate() {
        let c = omega.coeff(i).compose(&gamma).truncate(trust);
        if !c.is_zero() {
            in_zero_set = false;
        }
        pullback = &pullback + &(&c * &g.derivative(0));
    }
    let f_order = f
        .compose(&gamma)
        .truncate(f.truncation_degree().min(trust + 1))
        .order()
        .finite();
    Ok(CurveReport {
        in_zero_set,
        contradiction: in_zero_set && f_order.is_some_and(|p| p <= trust),
        pullback,
        f_order,
    })
}
