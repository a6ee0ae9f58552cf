//! Linearization of the two decomposition problems on jet coefficients.
//!
//! * relative: `eta = dh + a df`
//! * invariant: `omega = a df + f eta`
//!
//! Each equation is "coefficient of `x^m dx_i`" for `|m| <= E`, where `E` is
//! the trusted degree of the input. Equations are inserted into the
//! eliminator in increasing total degree so the first inconsistency fixes the
//! minimal obstruction degree.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use super::certificate::ObstructionCertificate;
use super::linalg::{combine, Echelon, Equation, Insertion, SparseVec};
use super::DecompositionKind;
use crate::forms::PForm;
use crate::ring::{format_rational, Jet, Monomial, Order, Rational};

/// A coordinate of the linear system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Unknown {
    A(Monomial),
    H(Monomial),
    Eta(usize, Monomial),
}

/// "Coefficient of `x^monomial dx_component`".
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EquationLabel {
    pub component: usize,
    pub monomial: Vec<u32>,
}

impl EquationLabel {
    pub fn degree(&self) -> u32 {
        self.monomial.iter().sum()
    }
}

impl fmt::Display for EquationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[x^{:?} dx_{}]", self.monomial, self.component + 1)
    }
}

#[derive(Clone, Debug)]
pub struct GradedLinearSystem {
    kind: DecompositionKind,
    nvars: usize,
    trust: u32,
    unknowns: Vec<Unknown>,
    equations: Vec<Equation>,
    labels: Vec<EquationLabel>,
    /// `(degree, first equation index)` for each degree block, ascending.
    blocks: Vec<(u32, usize)>,
}

/// Degree-ordered rows keyed by `(monomial, component)`.
type RowMap = BTreeMap<(Monomial, usize), SparseVec>;

impl GradedLinearSystem {
    /// `eta = dh + a df` with `h` of degree `1..=E+1` and `a` of degree
    /// `0..=E - nu(df)`; `a`-columns come first.
    pub fn relative(eta: &PForm, f: &Jet) -> Self {
        let nvars = f.nvars();
        let trust = eta.trust().min(f.truncation_degree().saturating_sub(1));
        let partials: Vec<Jet> = (0..nvars).map(|i| f.derivative(i).truncate(trust)).collect();
        let a_max = max_multiplier_degree(&partials, trust);

        let mut unknowns = Vec::new();
        if let Some(a_max) = a_max {
            unknowns.extend(Monomial::all_up_to_degree(nvars, a_max).into_iter().map(Unknown::A));
        }
        unknowns.extend(
            (1..=trust + 1)
                .flat_map(|k| Monomial::all_of_degree(nvars, k))
                .map(Unknown::H),
        );

        let mut rows = empty_rows(nvars, trust);
        for (col, unknown) in unknowns.iter().enumerate() {
            match unknown {
                Unknown::A(alpha) => add_product(&mut rows, col, alpha, &partials, trust),
                Unknown::H(beta) => {
                    for i in 0..nvars {
                        if let Some(mu) = beta.lower(i) {
                            let e = beta.exponent(i);
                            rows.get_mut(&(mu, i))
                                .expect("row exists")
                                .insert(col, Rational::from_integer(e.into()));
                        }
                    }
                }
                Unknown::Eta(..) => unreachable!(),
            }
        }
        Self::finish(DecompositionKind::Relative, nvars, trust, unknowns, rows, eta)
    }

    /// `omega = a df + f eta` with `a` of degree `0..=E - nu(df)` and each
    /// `eta_i` of degree `0..=E - ord(f)`; `a`-columns come first.
    pub fn invariant(omega: &PForm, f: &Jet) -> Self {
        let nvars = f.nvars();
        let trust = omega.trust().min(f.truncation_degree().saturating_sub(1));
        let partials: Vec<Jet> = (0..nvars).map(|i| f.derivative(i).truncate(trust)).collect();
        let f_trunc = f.truncate(trust);
        let a_max = max_multiplier_degree(&partials, trust);
        let eta_max = match f_trunc.order() {
            Order::Finite(k) if k <= trust => Some(trust - k),
            _ => None,
        };

        let mut unknowns = Vec::new();
        if let Some(a_max) = a_max {
            unknowns.extend(Monomial::all_up_to_degree(nvars, a_max).into_iter().map(Unknown::A));
        }
        if let Some(eta_max) = eta_max {
            for i in 0..nvars {
                unknowns.extend(
                    Monomial::all_up_to_degree(nvars, eta_max)
                        .into_iter()
                        .map(|m| Unknown::Eta(i, m)),
                );
            }
        }

        let mut rows = empty_rows(nvars, trust);
        for (col, unknown) in unknowns.iter().enumerate() {
            match unknown {
                Unknown::A(alpha) => add_product(&mut rows, col, alpha, &partials, trust),
                Unknown::Eta(i, beta) => {
                    for (gamma, c) in f_trunc.terms() {
                        let mu = beta.mul(gamma);
                        if mu.total_degree() <= trust {
                            accumulate(rows.get_mut(&(mu, *i)).expect("row exists"), col, c);
                        }
                    }
                }
                Unknown::H(_) => unreachable!(),
            }
        }
        Self::finish(DecompositionKind::Invariant, nvars, trust, unknowns, rows, omega)
    }

    fn finish(
        kind: DecompositionKind,
        nvars: usize,
        trust: u32,
        unknowns: Vec<Unknown>,
        rows: RowMap,
        target: &PForm,
    ) -> Self {
        let mut equations = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        let mut blocks: Vec<(u32, usize)> = Vec::new();
        for ((mu, i), coeffs) in rows {
            let degree = mu.total_degree();
            if blocks.last().map(|b| b.0) != Some(degree) {
                blocks.push((degree, equations.len()));
            }
            let rhs = target.coeff(i).coeff(&mu);
            equations.push(Equation { coeffs, rhs });
            labels.push(EquationLabel {
                component: i,
                monomial: mu.exponents().to_vec(),
            });
        }
        GradedLinearSystem {
            kind,
            nvars,
            trust,
            unknowns,
            equations,
            labels,
            blocks,
        }
    }

    pub fn kind(&self) -> DecompositionKind {
        self.kind
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Degree up to which the equations are imposed.
    pub fn trust(&self) -> u32 {
        self.trust
    }

    pub fn unknowns(&self) -> &[Unknown] {
        &self.unknowns
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn labels(&self) -> &[EquationLabel] {
        &self.labels
    }

    fn block_end(&self, block: usize) -> usize {
        self.blocks
            .get(block + 1)
            .map_or(self.equations.len(), |b| b.1)
    }

    /// Eliminates degree by degree. On success returns the canonical solution
    /// (free columns zero); otherwise a certificate at the first failing degree.
    #[allow(clippy::result_large_err)]
    pub fn solve(&self) -> Result<Vec<Rational>, ObstructionCertificate> {
        let mut echelon = Echelon::new(false);
        for (b, &(degree, start)) in self.blocks.iter().enumerate() {
            for eq in &self.equations[start..self.block_end(b)] {
                if let Insertion::Inconsistent { .. } = echelon.insert(eq) {
                    return Err(self.certificate_at(b, degree));
                }
            }
        }
        Ok(echelon.solve(self.unknowns.len()))
    }

    /// Replays elimination with combination tracking up to block `b`.
    fn certificate_at(&self, block: usize, degree: u32) -> ObstructionCertificate {
        let mut echelon = Echelon::new(true);
        let end = self.block_end(block);
        for eq in &self.equations[..end] {
            if let Insertion::Inconsistent {
                residual,
                combination: Some(y),
            } = echelon.insert(eq)
            {
                let row: Vec<(EquationLabel, Rational)> = y
                    .iter()
                    .map(|(&i, v)| (self.labels[i].clone(), v.clone()))
                    .collect();
                let note = render_note(self.kind, degree, &row, &residual);
                return ObstructionCertificate::new(self.kind, degree, row, residual, note);
            }
        }
        unreachable!("tracked replay must reproduce the inconsistency")
    }

    /// Re-evaluates a certificate's multipliers against this system: every
    /// unknown must cancel and the right-hand sides must leave the stated
    /// nonzero residual.
    pub fn check_certificate(&self, cert: &ObstructionCertificate) -> bool {
        if cert.kind != self.kind || cert.residual.is_zero() {
            return false;
        }
        let index: HashMap<&EquationLabel, usize> =
            self.labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let mut multipliers = SparseVec::new();
        for (label, y) in &cert.row {
            let Some(&i) = index.get(label) else {
                return false;
            };
            multipliers.insert(i, y.clone());
        }
        let (row, rhs) = combine(&self.equations, &multipliers);
        row.is_empty() && rhs == cert.residual
    }

    /// Splits a solution vector into the jets/forms it encodes.
    pub(crate) fn unpack(&self, x: &[Rational]) -> Unpacked {
        let n = self.nvars;
        let mut a = Jet::zero(n, self.trust);
        let mut h = Jet::zero(n, self.trust + 1);
        let mut eta = vec![Jet::zero(n, self.trust); n];
        for (unknown, value) in self.unknowns.iter().zip(x) {
            if value.is_zero() {
                continue;
            }
            match unknown {
                Unknown::A(m) => a.add_term(m.clone(), value.clone()),
                Unknown::H(m) => h.add_term(m.clone(), value.clone()),
                Unknown::Eta(i, m) => eta[*i].add_term(m.clone(), value.clone()),
            }
        }
        Unpacked { a, h, eta }
    }
}

pub(crate) struct Unpacked {
    pub a: Jet,
    pub h: Jet,
    pub eta: Vec<Jet>,
}

/// Highest degree of a multiplier `a` whose product with `df` still lands
/// inside the trusted range.
fn max_multiplier_degree(partials: &[Jet], trust: u32) -> Option<u32> {
    let nu = partials.iter().map(Jet::order).min().unwrap_or(Order::Infinite);
    match nu {
        Order::Finite(k) if k <= trust => Some(trust - k),
        _ => None,
    }
}

fn empty_rows(nvars: usize, trust: u32) -> RowMap {
    let mut rows = RowMap::new();
    for mu in Monomial::all_up_to_degree(nvars, trust) {
        for i in 0..nvars {
            rows.insert((mu.clone(), i), SparseVec::new());
        }
    }
    rows
}

/// Adds column `col` for the unknown `x^alpha` multiplying `(partials_i)_i`.
fn add_product(rows: &mut RowMap, col: usize, alpha: &Monomial, partials: &[Jet], trust: u32) {
    for (i, p) in partials.iter().enumerate() {
        for (gamma, c) in p.terms() {
            let mu = alpha.mul(gamma);
            if mu.total_degree() <= trust {
                accumulate(rows.get_mut(&(mu, i)).expect("row exists"), col, c);
            }
        }
    }
}

fn accumulate(row: &mut SparseVec, col: usize, c: &Rational) {
    let entry = row.entry(col).or_insert_with(Rational::zero);
    *entry += c;
    if entry.is_zero() {
        row.remove(&col);
    }
}

fn render_note(
    kind: DecompositionKind,
    equation_degree: u32,
    row: &[(EquationLabel, Rational)],
    residual: &Rational,
) -> String {
    let shape = match kind {
        DecompositionKind::Relative => "eta = dh + a*df",
        DecompositionKind::Invariant => "omega = a*df + f*eta",
    };
    let terms: Vec<String> = row
        .iter()
        .map(|(l, y)| format!("({}){}", format_rational(y), l))
        .collect();
    format!(
        "{shape} has no solution through degree {equation_degree}: the combination {} \
         of coefficient equations cancels every unknown and leaves 0 = {}",
        terms.join(" + "),
        format_rational(residual)
    )
}
