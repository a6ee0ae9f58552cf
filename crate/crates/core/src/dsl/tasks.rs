//! Task dispatch: runs the requested computation and assembles the
//! certificate document, its status and a replay problem for every success.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{json, Value as Json};

use super::elaborate::{describe, is_t_free, Elaborator};
use super::parser::{render, Expr, ExprKind};
use super::print::{print_form, print_jet, print_monomial, print_tform, print_tpoly};
use super::{DslError, Overrides, ProblemFile, Settings, TaskName, BUILTINS, KEYWORDS};
use crate::forms::{differential, FormError, IndexTuple, PForm, TForm, WeightVector};
use crate::normalizer::{
    normalize, CascadeReport, DeformationFamily, FamilyError, NormalizationResult, NormalizeError,
    NormalizeOutcome,
};
use crate::quasihom::{
    certify_isolated_singularity, check_candidate_curve, detect_quasihomogeneity, embed_as_deformation,
    multiplicity_criterion, EmbedError, SingularityReport, Verdict,
};
use crate::ring::{format_rational, Jet, Monomial, TPoly};
use crate::solver::{
    check_relative_closedness, solve_invariant_split, solve_relative, Decomposition, DecompositionParts,
    GradedLinearSystem, ObstructionCertificate, SolveOutcome, SolverError,
};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest weight tried when a task has to detect quasi-homogeneity itself.
pub const WEIGHT_SEARCH_BOUND: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Success,
    Obstruction,
    NotInvariant,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Obstruction | Status::NotInvariant | Status::Fail => 2,
            Status::Inconclusive => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Success => "SUCCESS",
            Status::Obstruction => "OBSTRUCTION",
            Status::NotInvariant => "NOT_INVARIANT",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskReport {
    pub status: Status,
    pub document: Json,
    /// Short human-readable lines.
    pub summary: Vec<String>,
    /// Extra lines for verbose output.
    pub details: Vec<String>,
}

impl TaskReport {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// The certificate document as pretty JSON with a trailing newline.
    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.document).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn replay(&self) -> Option<&str> {
        self.document.get("replay").and_then(Json::as_str)
    }
}

struct Outcome {
    status: Status,
    trusted_degree: Option<u32>,
    payload: Json,
    replay: Option<String>,
    summary: Vec<String>,
    details: Vec<String>,
}

impl Outcome {
    fn new(status: Status, trusted_degree: Option<u32>, payload: Json) -> Self {
        Outcome {
            status,
            trusted_degree,
            payload,
            replay: None,
            summary: Vec::new(),
            details: Vec::new(),
        }
    }

    fn replay(mut self, replay: String) -> Self {
        self.replay = Some(replay);
        self
    }

    fn line(mut self, s: impl Into<String>) -> Self {
        self.summary.push(s.into());
        self
    }

    fn detail(mut self, s: impl Into<String>) -> Self {
        self.details.push(s.into());
        self
    }
}

struct Ctx<'a> {
    problem: &'a ProblemFile,
    settings: Settings,
    elab: Elaborator,
}

pub fn run_task(problem: &ProblemFile, overrides: Overrides) -> Result<TaskReport, DslError> {
    let settings = problem.settings(overrides);
    if settings.degree == 0 {
        return Err(DslError::general("degree must be positive"));
    }
    let elab = Elaborator::from_problem(problem, &settings)?;
    let ctx = Ctx {
        problem,
        settings,
        elab,
    };
    let outcome = match problem.task.name {
        TaskName::CheckIntegrability => ctx.check_integrability()?,
        TaskName::DecomposeRelative => ctx.decompose_relative()?,
        TaskName::DecomposeInvariant => ctx.decompose_invariant()?,
        TaskName::Normalize => ctx.normalize()?,
        TaskName::EmbedQh => ctx.embed_qh()?,
        TaskName::Certify => ctx.certify()?,
        TaskName::AnalyzeSingularity => ctx.analyze_singularity()?,
        TaskName::Theorem3 => ctx.theorem3()?,
    };
    let document = json!({
        "schema": SCHEMA_VERSION,
        "task": ctx.echo(),
        "status": outcome.status,
        "trusted_degree": outcome.trusted_degree,
        "residual_zero": outcome.status == Status::Success,
        "payload": outcome.payload,
        "replay": outcome.replay,
    });
    let mut summary = vec![
        format!("task {}", problem.task.name.as_str()),
        format!(
            "degree {} ({}), torder {} ({})",
            settings.degree,
            settings.degree_source.as_str(),
            settings.torder,
            settings.torder_source.as_str()
        ),
    ];
    summary.extend(outcome.summary);
    if let Some(t) = outcome.trusted_degree {
        summary.push(format!("trusted through degree {t}"));
    }
    summary.push(format!("status {}", outcome.status.as_str()));
    Ok(TaskReport {
        status: outcome.status,
        document,
        summary,
        details: outcome.details,
    })
}

fn internal(e: impl std::fmt::Display) -> DslError {
    DslError::general(format!("internal error: {e}"))
}

fn form_error(e: FormError) -> DslError {
    DslError::general(e.to_string())
}

impl Ctx<'_> {
    fn names(&self) -> &[String] {
        &self.problem.vars
    }

    fn args(&self) -> &[Expr] {
        &self.problem.task.args
    }

    fn echo(&self) -> Json {
        json!({
            "name": self.problem.task.name.as_str(),
            "arguments": self.args().iter().map(render).collect::<Vec<_>>(),
            "vars": self.names(),
            "degree": self.settings.degree,
            "degree_source": self.settings.degree_source.as_str(),
            "torder": self.settings.torder,
            "torder_source": self.settings.torder_source.as_str(),
            "weights": self.problem.weights,
        })
    }

    fn arity(&self, allowed: &[usize], shape: &str) -> Result<(), DslError> {
        if allowed.contains(&self.args().len()) {
            Ok(())
        } else {
            Err(DslError::at(
                self.problem.task.pos,
                format!("`{}` expects {shape}", self.problem.task.name.as_str()),
            ))
        }
    }

    fn value(&self, i: usize) -> Result<TForm, DslError> {
        self.elab.eval(&self.args()[i])
    }

    fn function(&self, i: usize) -> Result<Jet, DslError> {
        let v = self.value(i)?;
        if v.degree() != 0 || !is_t_free(&v) {
            return Err(self.wrong(i, "a t-free function", &v));
        }
        Ok(v.coeff(0).function())
    }

    fn one_form(&self, i: usize) -> Result<PForm, DslError> {
        let v = self.value(i)?;
        if v.degree() != 1 || !is_t_free(&v) {
            return Err(self.wrong(i, "a t-free 1-form", &v));
        }
        Ok(v.coeff(0).clone())
    }

    fn wrong(&self, i: usize, expected: &str, found: &TForm) -> DslError {
        let kind = if found.degree() > 0 || is_t_free(found) {
            describe(found)
        } else {
            format!("{} depending on t", describe(found))
        };
        DslError::at(self.args()[i].pos, format!("argument {} must be {expected}, found {kind}", i + 1))
    }

    fn jet(&self, f: &Jet) -> String {
        print_jet(f, self.names())
    }

    fn form(&self, w: &PForm) -> String {
        print_form(w, self.names())
    }

    fn replay(&self, degree: u32) -> Replay {
        Replay::new(self.names().to_vec(), degree, self.settings.torder)
    }

    fn label(&self, component: usize, monomial: &[u32]) -> String {
        let m = Monomial::from_exponents(monomial);
        let basis = format!("d{}", self.names()[component]);
        if m.is_one() {
            basis
        } else {
            format!("{}*{basis}", print_monomial(&m, self.names()))
        }
    }

    fn tuple(&self, t: &IndexTuple) -> String {
        let parts: Vec<String> = t.indices().map(|i| format!("d{}", self.names()[i])).collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    fn obstruction(&self, cert: &ObstructionCertificate, system: Option<&GradedLinearSystem>) -> Json {
        let row: Vec<Json> = cert
            .row
            .iter()
            .map(|(label, y)| {
                json!({
                    "coefficient_of": self.label(label.component, &label.monomial),
                    "multiplier": format_rational(y),
                })
            })
            .collect();
        json!({
            "kind": cert.kind,
            "degree": cert.degree,
            "equation_degree": cert.equation_degree,
            "t_order": cert.t_order,
            "residual": format_rational(&cert.residual),
            "row": row,
            "row_verified": system.map(|s| s.check_certificate(cert)),
        })
    }

    fn obstruction_lines(&self, outcome: Outcome, cert: &ObstructionCertificate, verified: Option<bool>) -> Outcome {
        let at = match cert.t_order {
            Some(j) => format!(" at t-order {j}"),
            None => String::new(),
        };
        let mut o = outcome.line(format!(
            "obstruction{at} in degree {} (coefficient equations of degree {})",
            cert.degree, cert.equation_degree
        ));
        if let Some(v) = verified {
            o = o.line(format!("obstruction row verified: {v}"));
        }
        for (label, y) in &cert.row {
            o = o.detail(format!(
                "  {} x [{}]",
                format_rational(y),
                self.label(label.component, &label.monomial)
            ));
        }
        o.detail(format!("  combination leaves {}", format_rational(&cert.residual)))
    }

    fn check_integrability(&self) -> Result<Outcome, DslError> {
        self.arity(&[1], "one 1-form")?;
        let w = self.value(0)?;
        if w.degree() != 1 {
            return Err(self.wrong(0, "a 1-form", &w));
        }
        let residual = w.wedge(&w.exterior_d().map_err(form_error)?).map_err(form_error)?;
        let trust = residual.trust();
        let failing = residual.first_nonzero();
        let payload = json!({
            "form": print_tform(&w, self.names()),
            "residual": print_tform(&residual, self.names()),
            "failing_t_order": failing,
        });
        Ok(match failing {
            None => {
                let mut r = self.replay(trust + 1);
                let name = r.fresh("omega");
                r.def(kind_of(&w), &name, print_tform(&w, self.names()));
                Outcome::new(Status::Success, Some(trust), payload)
                    .replay(r.finish(&format!("certify({name})")))
                    .line("omega ^ d(omega) vanishes")
            }
            Some(j) => Outcome::new(Status::Fail, Some(trust), payload)
                .line(format!("omega ^ d(omega) is nonzero at t-order {j}"))
                .detail(format!("  residual {}", print_tform(&residual, self.names()))),
        })
    }

    fn decompose_relative(&self) -> Result<Outcome, DslError> {
        self.arity(&[2], "a 1-form and a function")?;
        let eta = self.one_form(0)?;
        let f = self.function(1)?;
        let closedness = match check_relative_closedness(&eta, &f) {
            Ok(c) => Some(c),
            Err(SolverError::DimensionTooSmall(_)) => None,
            Err(e) => return Err(solver_error(e)),
        };
        let closed_json = json!({
            "closed": closedness.as_ref().map(|c| c.closed),
            "residual": closedness.as_ref().map(|c| self.form(&c.residual)),
        });
        match solve_relative(&eta, &f).map_err(solver_error)? {
            SolveOutcome::Solved(dec) => {
                let DecompositionParts::Relative { h, a } = &dec.parts else {
                    return Err(internal("relative solve returned another kind"));
                };
                let mut r = self.replay(dec.trust + 1);
                let (en, fname, hn, an) = (r.fresh("eta"), r.fresh("f"), r.fresh("h"), r.fresh("a"));
                r.def("form", &en, self.form(&eta));
                r.def("poly", &fname, self.jet(&f));
                r.def("poly", &hn, self.jet(h));
                r.def("poly", &an, self.jet(a));
                let payload = json!({
                    "h": self.jet(h),
                    "a": self.jet(a),
                    "closedness": closed_json,
                    "recomposition_residual": self.form(&dec.residual),
                });
                Ok(Outcome::new(Status::Success, Some(dec.trust), payload)
                    .replay(r.finish(&format!("certify({en}, d({hn}) + {an}*d({fname}))")))
                    .line(format!("h = {}", self.jet(h)))
                    .line(format!("a = {}", self.jet(a))))
            }
            SolveOutcome::Obstructed(cert) => {
                let system = GradedLinearSystem::relative(&eta, &f);
                let verified = system.check_certificate(&cert);
                let payload = json!({
                    "closedness": closed_json,
                    "obstruction": self.obstruction(&cert, Some(&system)),
                });
                let o = Outcome::new(Status::Obstruction, Some(system.trust()), payload);
                Ok(self.obstruction_lines(o, &cert, Some(verified)))
            }
        }
    }

    fn invariant_success(&self, omega: &PForm, f: &Jet, dec: &Decomposition, payload: Json) -> Result<Outcome, DslError> {
        let DecompositionParts::Invariant { a, eta } = &dec.parts else {
            return Err(internal("invariant solve returned another kind"));
        };
        let mut r = self.replay(dec.trust + 1);
        let (on, fname, an, en) = (r.fresh("omega"), r.fresh("f"), r.fresh("a"), r.fresh("eta"));
        r.def("form", &on, self.form(omega));
        r.def("poly", &fname, self.jet(f));
        r.def("poly", &an, self.jet(a));
        r.def(form_kind(eta), &en, self.form(eta));
        Ok(Outcome::new(Status::Success, Some(dec.trust), payload)
            .replay(r.finish(&format!("certify({on}, {an}*d({fname}) + {fname}*{en})")))
            .line(format!("a = {}", self.jet(a)))
            .line(format!("eta = {}", self.form(eta))))
    }

    fn decompose_invariant(&self) -> Result<Outcome, DslError> {
        self.arity(&[2], "a 1-form and a function")?;
        let omega = self.one_form(0)?;
        let f = self.function(1)?;
        match solve_invariant_split(&omega, &f) {
            Ok(SolveOutcome::Solved(dec)) => {
                let (a, eta) = match &dec.parts {
                    DecompositionParts::Invariant { a, eta } => (a, eta),
                    _ => return Err(internal("invariant solve returned another kind")),
                };
                let nu_omega = omega.order().finite();
                let nu_df = differential(&f).order().finite();
                let payload = json!({
                    "a": self.jet(a),
                    "eta": self.form(eta),
                    "a_at_origin": format_rational(&a.constant_term()),
                    "a_is_unit": !num_traits::Zero::is_zero(&a.constant_term()),
                    "nu_omega": nu_omega,
                    "nu_df": nu_df,
                    "recomposition_residual": self.form(&dec.residual),
                });
                self.invariant_success(&omega, &f, &dec, payload)
            }
            Ok(SolveOutcome::Obstructed(cert)) => {
                let system = GradedLinearSystem::invariant(&omega, &f);
                let verified = system.check_certificate(&cert);
                let payload = json!({ "obstruction": self.obstruction(&cert, Some(&system)) });
                let o = Outcome::new(Status::Obstruction, Some(system.trust()), payload);
                Ok(self.obstruction_lines(o, &cert, Some(verified)))
            }
            Err(SolverError::NotInvariant {
                component,
                degree,
                remainder,
            }) => {
                let payload = json!({
                    "component": self.tuple(&component),
                    "degree": degree,
                    "remainder": self.jet(&remainder),
                });
                Ok(Outcome::new(Status::NotInvariant, None, payload).line(format!(
                    "f does not divide the {} component of omega ^ df (remainder from degree {degree})",
                    self.tuple(&component)
                )))
            }
            Err(e) => Err(solver_error(e)),
        }
    }

    fn family_payload(&self, result: &NormalizationResult, torder: usize) -> Json {
        let names = self.names();
        let steps: Vec<Json> = result
            .steps
            .iter()
            .map(|s| {
                json!({
                    "t_order": s.t_order,
                    "original": print_form(&s.original, names),
                    "rho": print_form(&s.rho, names),
                    "f": print_jet(&s.f, names),
                    "a": print_jet(&s.a, names),
                    "trust": s.trust,
                })
            })
            .collect();
        json!({
            "F": print_tpoly(&result.f, names),
            "G": print_tpoly(&result.g, names),
            "h_hat": print_tpoly(&result.h_hat, names),
            "t_order": torder,
            "steps": steps,
            "certificate_residual": print_tform(&result.certificate_residual, names),
        })
    }

    /// Runs the normalization loop and renders its outcome; `extra` is merged
    /// into the payload.
    fn normalized(
        &self,
        family: &DeformationFamily,
        mut extra: Json,
    ) -> Result<(Outcome, Option<NormalizationResult>), DslError> {
        let outcome = normalize(family).map_err(|e| match e {
            NormalizeError::Internal { .. } => internal(e),
            other => DslError::general(other.to_string()),
        })?;
        let torder = family.t_order();
        let merge = |extra: &mut Json, payload: Json| {
            if let (Json::Object(target), Json::Object(source)) = (extra, payload) {
                target.extend(source);
            }
        };
        match outcome {
            NormalizeOutcome::Normalized(result) => {
                merge(&mut extra, self.family_payload(&result, torder));
                let mut r = self.replay(result.trust + 1);
                r.torder = torder as u32;
                let (on, fname) = (r.fresh("Omega"), r.fresh("F"));
                r.def("family", &on, print_tform(&family.series(), self.names()));
                r.def("poly", &fname, print_tpoly(&result.f, self.names()));
                let mut o = Outcome::new(Status::Success, Some(result.trust), extra)
                    .replay(r.finish(&format!("certify({on}, {fname})")))
                    .line(format!("F = {}", print_tpoly(&result.f, self.names())))
                    .line(format!("G = {}", print_tpoly(&result.g, self.names())));
                for s in &result.steps {
                    o = o.detail(format!(
                        "  t^{}: f = {}, a = {} (trusted through {})",
                        s.t_order,
                        self.jet(&s.f),
                        self.jet(&s.a),
                        s.trust
                    ));
                }
                Ok((o, Some(result)))
            }
            NormalizeOutcome::NotIntegrable(report) => {
                merge(&mut extra, self.cascade_json(&report));
                let o = Outcome::new(Status::Fail, Some(report.series.trust()), extra).line(format!(
                    "the family is not integrable: Omega ^ d(Omega) is nonzero at t-order {}",
                    report.failing_order.map_or("?".into(), |j| j.to_string())
                ));
                Ok((o, None))
            }
            NormalizeOutcome::Obstructed { certificate, rho } => {
                let system = GradedLinearSystem::relative(&rho, family.f0());
                let verified = system.check_certificate(&certificate);
                merge(
                    &mut extra,
                    json!({
                        "rho": self.form(&rho),
                        "obstruction": self.obstruction(&certificate, Some(&system)),
                    }),
                );
                let o = Outcome::new(Status::Obstruction, Some(system.trust()), extra);
                Ok((self.obstruction_lines(o, &certificate, Some(verified)), None))
            }
        }
    }

    fn cascade_json(&self, report: &CascadeReport) -> Json {
        json!({
            "cascade": {
                "passed": report.passed,
                "failing_t_order": report.failing_order,
                "residual": report.residual.as_ref().map(|r| self.form(r)),
            }
        })
    }

    fn normalize(&self) -> Result<Outcome, DslError> {
        self.arity(&[2], "a family and a function")?;
        let series = self.value(0)?;
        if series.degree() != 1 {
            return Err(self.wrong(0, "a 1-form family", &series));
        }
        let f = self.function(1)?;
        let family = DeformationFamily::from_series(f, &series).map_err(|e| match e {
            FamilyError::LeadingTerm => DslError::at(
                self.args()[0].pos,
                "the t^0 coefficient of the family must equal d of the function",
            ),
            other => DslError::general(other.to_string()),
        })?;
        Ok(self.normalized(&family, json!({}))?.0)
    }

    fn embed_qh(&self) -> Result<Outcome, DslError> {
        self.arity(&[2], "a 1-form and a function")?;
        let omega = self.one_form(0)?;
        let f = self.function(1)?;
        let weights = match &self.problem.weights {
            Some(w) => {
                let level = f.terms().next().map(|(m, _)| m.weighted_degree(w)).unwrap_or(0);
                WeightVector::new(level as u32, w.clone()).map_err(form_error)?
            }
            None => match detect_quasihomogeneity(&f, WEIGHT_SEARCH_BOUND).weights {
                Some(w) => w,
                None => {
                    let payload = json!({ "reason": "no weights found", "weight_bound": WEIGHT_SEARCH_BOUND });
                    return Ok(Outcome::new(Status::Fail, None, payload).line(format!(
                        "f is not quasi-homogeneous for any weights up to {WEIGHT_SEARCH_BOUND}"
                    )));
                }
            },
        };
        let t_order = match self.settings.torder_source {
            super::Source::Default => None,
            _ => Some(self.settings.torder as usize),
        };
        let weights_json = json!({ "weights": weights.weights(), "level": weights.level() });
        let embedding = match embed_as_deformation(&omega, &f, &weights, t_order) {
            Ok(e) => e,
            Err(EmbedError::NoSplit(cert)) => {
                let system = GradedLinearSystem::invariant(&omega, &f);
                let verified = system.check_certificate(&cert);
                let payload = json!({
                    "weighting": weights_json,
                    "obstruction": self.obstruction(&cert, Some(&system)),
                });
                let o = Outcome::new(Status::Obstruction, Some(system.trust()), payload);
                return Ok(self.obstruction_lines(o, &cert, Some(verified)));
            }
            Err(EmbedError::Solver(SolverError::NotInvariant {
                component,
                degree,
                remainder,
            })) => {
                let payload = json!({
                    "weighting": weights_json,
                    "component": self.tuple(&component),
                    "degree": degree,
                    "remainder": self.jet(&remainder),
                });
                return Ok(Outcome::new(Status::NotInvariant, None, payload)
                    .line("omega does not leave f = 0 invariant"));
            }
            Err(e @ (EmbedError::NotQuasiHomogeneous | EmbedError::NotAUnit | EmbedError::BelowLevel)) => {
                let payload = json!({ "weighting": weights_json, "reason": e.to_string() });
                return Ok(Outcome::new(Status::Fail, None, payload).line(e.to_string()));
            }
            Err(e) => return Err(DslError::general(e.to_string())),
        };
        let complete = embedding.family.t_order() + 1 >= embedding.series.coeffs().len();
        let trust = embedding.series.trust();
        let at_one = embedding.series.eval_at_one().sub(&omega).truncate(trust);
        let names = self.names();
        let extra = json!({
            "weighting": weights_json,
            "a": self.jet(&embedding.a),
            "eta": self.form(&embedding.eta),
            "f0": self.jet(embedding.family.f0()),
            "family": print_tform(&embedding.family.series(), names),
            "complete_series": complete,
            "evaluation_at_one_exact": at_one.is_zero(),
        });
        let (mut outcome, result) = self.normalized(&embedding.family, extra)?;
        if let Some(result) = result {
            let f1 = result.f.eval_at_one();
            let residual = omega.wedge(&differential(&f1)).map_err(form_error)?;
            if let Json::Object(map) = &mut outcome.payload {
                map.insert(
                    "first_integral_at_one".into(),
                    json!({ "F_at_one": self.jet(&f1), "residual_zero": residual.is_zero(), "trust": residual.trust() }),
                );
            }
            outcome = outcome.line(format!("omega ^ dF(., 1) vanishes: {}", residual.is_zero()));
        }
        Ok(outcome.line(format!(
            "weights {:?} at level {}, family of t-order {}{}",
            weights.weights(),
            weights.level(),
            embedding.family.t_order(),
            if complete { " (complete)" } else { " (truncated)" }
        )))
    }

    fn certify(&self) -> Result<Outcome, DslError> {
        self.arity(&[1, 2], "one or two arguments")?;
        let names = self.names();
        if self.args().len() == 1 {
            let w = self.value(0)?;
            if w.degree() != 1 {
                return Err(self.wrong(0, "a 1-form", &w));
            }
            let residual = w.wedge(&w.exterior_d().map_err(form_error)?).map_err(form_error)?;
            let trust = residual.trust();
            let payload = json!({
                "claim": "integrable",
                "residual": print_tform(&residual, names),
                "failing_t_order": residual.first_nonzero(),
            });
            return Ok(self.claim(residual.is_zero(), trust, payload, || {
                format!("certify({})", print_tform(&w, names))
            }, 1, "omega ^ d(omega) = 0"));
        }
        let (lhs, rhs) = (&self.args()[0], &self.args()[1]);
        if let (ExprKind::Tuple(xs), ExprKind::Tuple(ys)) = (&lhs.kind, &rhs.kind) {
            if xs.len() != ys.len() {
                return Err(DslError::at(rhs.pos, "tuples must have the same length"));
            }
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut residuals = Vec::new();
            let mut trust = u32::MAX;
            for (x, y) in xs.iter().zip(ys) {
                let (a, b) = (self.elab.eval(x)?, self.elab.eval(y)?);
                if a.degree() != b.degree() {
                    return Err(DslError::at(y.pos, format!("cannot compare {} with {}", describe(&a), describe(&b))));
                }
                let diff = a.sub(&b);
                trust = trust.min(diff.trust());
                residuals.push(diff);
                left.push(a);
                right.push(b);
            }
            let residuals: Vec<TForm> = residuals
                .iter()
                .map(|r| r.truncate(r.t_order(), trust))
                .collect();
            let holds = residuals.iter().all(TForm::is_zero);
            let payload = json!({
                "claim": "equal",
                "residuals": residuals.iter().map(|r| print_tform(r, names)).collect::<Vec<_>>(),
            });
            let print_all = |vs: &[TForm]| vs.iter().map(|v| print_tform(v, names)).collect::<Vec<_>>().join(", ");
            return Ok(self.claim(holds, trust, payload, || {
                format!("certify(({}), ({}))", print_all(&left), print_all(&right))
            }, 0, "the tuples agree"));
        }
        let (a, b) = (self.value(0)?, self.value(1)?);
        if a.degree() == 1 && b.degree() == 0 {
            let residual = a.wedge(&TForm::differential_of(&tpoly(&b))).map_err(form_error)?;
            let trust = residual.trust();
            let payload = json!({
                "claim": "first_integral",
                "residual": print_tform(&residual, names),
                "failing_t_order": residual.first_nonzero(),
            });
            return Ok(self.claim(residual.is_zero(), trust, payload, || {
                format!("certify({}, {})", print_tform(&a, names), print_tform(&b, names))
            }, 1, "omega ^ dF = 0"));
        }
        if a.degree() != b.degree() {
            return Err(DslError::at(
                rhs.pos,
                format!("cannot compare {} with {}", describe(&a), describe(&b)),
            ));
        }
        let diff = a.sub(&b);
        let trust = diff.trust();
        let payload = json!({
            "claim": "equal",
            "residual": print_tform(&diff, names),
            "failing_t_order": diff.first_nonzero(),
        });
        Ok(self.claim(diff.is_zero(), trust, payload, || {
            format!("certify({}, {})", print_tform(&a, names), print_tform(&b, names))
        }, 0, "both sides agree"))
    }

    /// A checked identity; `lift` is how many degrees the replayed check
    /// loses to differentiation, so the replay compares at the same trust.
    fn claim(
        &self,
        holds: bool,
        trust: u32,
        payload: Json,
        task: impl FnOnce() -> String,
        lift: u32,
        what: &str,
    ) -> Outcome {
        if holds {
            let r = self.replay(trust + lift);
            Outcome::new(Status::Success, Some(trust), payload)
                .replay(r.finish(&task()))
                .line(format!("{what} through degree {trust}"))
        } else {
            Outcome::new(Status::Fail, Some(trust), payload).line(format!("{what} does not hold"))
        }
    }

    fn singularity_json(&self, s: &SingularityReport) -> Json {
        let witnesses: Vec<Json> = s
            .witnesses
            .iter()
            .map(|w| {
                json!({
                    "monomial": print_monomial(&w.monomial, self.names()),
                    "multipliers": w.multipliers.iter().map(|m| self.jet(m)).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "isolated_certified": s.isolated_certified,
            "k": s.k_found,
            "trust": s.trust,
            "witnesses": witnesses,
            "witnesses_verified": s.verify(),
        })
    }

    /// `certify((m_1, ...), (c_11*diff(f, x) + ..., ...))` for the witnesses.
    fn singularity_replay(&self, f: &Jet, s: &SingularityReport) -> String {
        let mut r = self.replay(s.trust + 1);
        let fname = r.fresh("f");
        r.def("poly", &fname, self.jet(f));
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for w in &s.witnesses {
            lhs.push(print_monomial(&w.monomial, self.names()));
            let terms: Vec<String> = w
                .multipliers
                .iter()
                .zip(self.names())
                .filter(|(m, _)| !m.is_zero())
                .map(|(m, v)| format!("({})*diff({fname}, {v})", self.jet(m)))
                .collect();
            rhs.push(if terms.is_empty() { "0".into() } else { terms.join(" + ") });
        }
        r.finish(&format!("certify(({}), ({}))", lhs.join(", "), rhs.join(", ")))
    }

    fn analyze_singularity(&self) -> Result<Outcome, DslError> {
        self.arity(&[1, 3], "a function, optionally followed by a 1-form and a curve")?;
        let f = self.function(0)?;
        let report = certify_isolated_singularity(&f);
        let qh = detect_quasihomogeneity(&f, WEIGHT_SEARCH_BOUND);
        let mut payload = json!({
            "singularity": self.singularity_json(&report),
            "quasi_homogeneous": qh.weights.as_ref().map(|w| json!({ "weights": w.weights(), "level": w.level() })),
        });
        let mut extra_lines = Vec::new();
        if self.args().len() == 3 {
            let omega = self.one_form(1)?;
            let curve_expr = &self.args()[2];
            let gamma = match &curve_expr.kind {
                ExprKind::Name(n) => self.elab.curve(n),
                _ => None,
            }
            .ok_or_else(|| DslError::at(curve_expr.pos, "argument 3 must be a declared curve"))?;
            if gamma.len() != self.names().len() {
                return Err(DslError::at(
                    curve_expr.pos,
                    format!("the curve needs {} coordinates", self.names().len()),
                ));
            }
            let c = check_candidate_curve(&omega, &f, gamma).map_err(form_error)?;
            let param = vec!["s".to_string()];
            payload["curve"] = json!({
                "in_zero_set": c.in_zero_set,
                "pullback": print_jet(&c.pullback, &param),
                "f_order": c.f_order,
                "contradiction": c.contradiction,
            });
            extra_lines.push(format!(
                "curve in the zero set of omega: {}, order of f along it: {}, contradiction: {}",
                c.in_zero_set,
                c.f_order.map_or("infinite".into(), |p| p.to_string()),
                c.contradiction
            ));
        }
        let mut o = if report.isolated_certified {
            let k = report.k_found.expect("certified reports carry k");
            Outcome::new(Status::Success, Some(report.trust), payload)
                .replay(self.singularity_replay(&f, &report))
                .line(format!("every monomial of degree {k} lies in the Jacobian ideal"))
        } else {
            Outcome::new(Status::Inconclusive, Some(report.trust), payload)
                .line(format!("no power of the maximal ideal found in the Jacobian ideal through degree {}", report.trust))
        };
        for l in extra_lines {
            o = o.line(l);
        }
        Ok(o)
    }

    fn theorem3(&self) -> Result<Outcome, DslError> {
        self.arity(&[2], "a 1-form and a function")?;
        let omega = self.one_form(0)?;
        let f = self.function(1)?;
        let report = match multiplicity_criterion(&omega, &f) {
            Ok(r) => r,
            Err(SolverError::NotInvariant {
                component,
                degree,
                remainder,
            }) => {
                let payload = json!({
                    "component": self.tuple(&component),
                    "degree": degree,
                    "remainder": self.jet(&remainder),
                });
                return Ok(Outcome::new(Status::NotInvariant, None, payload)
                    .line("omega does not leave f = 0 invariant"));
            }
            Err(e) => return Err(solver_error(e)),
        };
        let split = report.split.as_ref().map(|d| match &d.parts {
            DecompositionParts::Invariant { a, eta } => json!({ "a": self.jet(a), "eta": self.form(eta) }),
            DecompositionParts::Relative { .. } => Json::Null,
        });
        let system = GradedLinearSystem::invariant(&omega, &f);
        let payload = json!({
            "verdict": report.verdict,
            "first_integral_expected": report.first_integral_expected,
            "nu_omega": report.nu_omega,
            "nu_df": report.nu_df,
            "isolated": report.isolated,
            "a_is_unit": report.a_is_unit,
            "split": split,
            "split_obstruction": report.split_obstruction.as_ref().map(|c| self.obstruction(c, Some(&system))),
            "singularity": self.singularity_json(&report.singularity),
        });
        let nu = |v: Option<u32>| v.map_or("infinite".to_string(), |n| n.to_string());
        let line = format!(
            "nu(omega) = {}, nu(df) = {}, isolated singularity certified: {}",
            nu(report.nu_omega),
            nu(report.nu_df),
            report.isolated
        );
        Ok(match report.verdict {
            Verdict::Expected => {
                let dec = report.split.as_ref().ok_or_else(|| internal("expected verdict without a split"))?;
                self.invariant_success(&omega, &f, dec, payload)?
                    .line(line)
                    .line("a holomorphic first integral is expected")
            }
            Verdict::NotExpected => Outcome::new(Status::Fail, Some(system.trust()), payload)
                .line(line)
                .line("no holomorphic first integral is expected"),
            Verdict::Inconclusive => Outcome::new(Status::Inconclusive, Some(system.trust()), payload)
                .line(line)
                .line("the criterion is inconclusive at this degree"),
        })
    }
}

fn solver_error(e: SolverError) -> DslError {
    match e {
        SolverError::Internal(_) => internal(e),
        other => DslError::general(other.to_string()),
    }
}

fn tpoly(v: &TForm) -> TPoly {
    TPoly::from_coeffs(v.coeffs().iter().map(PForm::function).collect())
}

fn form_kind(w: &PForm) -> &'static str {
    if w.degree() == 0 {
        "poly"
    } else {
        "form"
    }
}

fn kind_of(w: &TForm) -> &'static str {
    match (w.degree(), is_t_free(w)) {
        (0, _) => "poly",
        (_, true) => "form",
        _ => "family",
    }
}

/// A self-contained problem file re-checking a result.
struct Replay {
    vars: Vec<String>,
    degree: u32,
    torder: u32,
    lines: Vec<String>,
    used: BTreeSet<String>,
}

impl Replay {
    fn new(vars: Vec<String>, degree: u32, torder: u32) -> Self {
        let mut used: BTreeSet<String> = KEYWORDS.iter().chain(BUILTINS.iter()).map(|s| s.to_string()).collect();
        for v in &vars {
            used.insert(v.clone());
            used.insert(format!("d{v}"));
        }
        Replay {
            vars,
            degree,
            torder,
            lines: Vec::new(),
            used,
        }
    }

    fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut k = 2;
        while self.used.contains(&name)
            || name
                .strip_prefix('d')
                .is_some_and(|rest| self.vars.iter().any(|v| v == rest))
        {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.used.insert(name.clone());
        name
    }

    fn def(&mut self, kind: &str, name: &str, text: String) {
        self.lines.push(format!("{kind} {name} = {text};"));
    }

    fn finish(self, task: &str) -> String {
        let mut out = format!(
            "vars {};\ndegree {};\ntorder {};\n",
            self.vars.join(" "),
            self.degree,
            self.torder
        );
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&format!("task {task};\n"));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_problem;

    fn run(text: &str) -> TaskReport {
        run_task(&parse_problem(text).unwrap(), Overrides::default()).unwrap()
    }

    fn replay_succeeds(report: &TaskReport) {
        let text = report.replay().expect("success carries a replay");
        let again = run(text);
        assert_eq!(again.status, Status::Success, "replay failed:\n{text}\n{}", again.json());
    }

    const CUSP: &str = "vars x y z;\ndegree 6;\ntorder 1;\n\
        poly f0 = y^2 + x^3;\nfamily Omega = d(f0) + t*x*(2*x*dy - 3*y*dx);\n";

    #[test]
    fn cusp_family_is_obstructed() {
        let r = run(&format!("{CUSP}task normalize(Omega, f0);"));
        assert_eq!(r.status, Status::Obstruction);
        let obs = &r.document["payload"]["obstruction"];
        assert_eq!(obs["degree"], 1);
        assert_eq!(obs["t_order"], 1);
        assert_eq!(obs["row_verified"], true);
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn undeformed_family_normalizes_and_replays() {
        let r = run(&format!("{CUSP}family W = d(f0) + t*d(x*y);\ntask normalize(W, f0);"));
        assert_eq!(r.status, Status::Success);
        assert_eq!(r.document["schema"], 1);
        replay_succeeds(&r);
    }

    #[test]
    fn relative_decomposition_replays() {
        let r = run("vars x y z;\ndegree 6;\npoly f = x^2 + y^2 + z^2;\n\
            form eta = d(x*y) + x*d(f);\ntask decompose-relative(eta, f);");
        assert_eq!(r.status, Status::Success);
        replay_succeeds(&r);
    }

    #[test]
    fn invariant_decomposition_and_not_invariant() {
        let r = run("vars x y z;\ndegree 6;\npoly f = x^3 + y^3 + z^3;\n\
            form w = (1 + x)*d(f) + f*dx;\ntask decompose-invariant(w, f);");
        assert_eq!(r.status, Status::Success);
        replay_succeeds(&r);
        let r = run("vars x y z;\ndegree 6;\npoly f = x^2 + y^2 + z^2;\n\
            form w = dx;\ntask decompose-invariant(w, f);");
        assert_eq!(r.status, Status::NotInvariant);
    }

    #[test]
    fn certify_variants() {
        let base = "vars x y z;\ndegree 5;\npoly f = x*y + z^2;\n";
        assert_eq!(run(&format!("{base}task certify(d(f));")).status, Status::Success);
        assert_eq!(run(&format!("{base}task certify(y*dx);")).status, Status::Success);
        assert_eq!(run(&format!("{base}task certify(y*dx + dz);")).status, Status::Fail);
        let r = run(&format!("{base}task certify(x*d(f), f);"));
        assert_eq!(r.status, Status::Success);
        replay_succeeds(&r);
        let r = run(&format!("{base}task certify(d(f), y*dx + x*dy + 2*z*dz);"));
        assert_eq!(r.status, Status::Success);
        replay_succeeds(&r);
        let r = run(&format!("{base}task certify((diff(f, x), f), (y, y*x + z^2));"));
        assert_eq!(r.status, Status::Success);
        replay_succeeds(&r);
        assert_eq!(run(&format!("{base}task certify(f, x);")).status, Status::Fail);
    }

    #[test]
    fn singularity_witnesses_replay() {
        let r = run("vars x y z;\ndegree 6;\npoly f = x^3 + y^3 + z^3;\ntask analyze-singularity(f);");
        assert_eq!(r.status, Status::Success);
        assert_eq!(r.document["payload"]["singularity"]["k"], 4);
        replay_succeeds(&r);
        let r = run("vars x y z;\ndegree 6;\npoly f = y^2 + x^3;\ntask analyze-singularity(f);");
        assert_eq!(r.status, Status::Inconclusive);
        assert_eq!(r.exit_code(), 3);
    }

    #[test]
    fn theorem3_verdicts() {
        let r = run("vars x y z;\ndegree 6;\npoly f = x^3 + y^3 + z^3;\n\
            form w = (1 + x)*d(f) + f*dx;\ntask theorem3(w, f);");
        assert_eq!(r.status, Status::Success);
        replay_succeeds(&r);
        let r = run("vars x y z;\ndegree 6;\npoly f = x^2 + y^2 + z^2;\n\
            form w = f*dx + x^3*d(f);\ntask theorem3(w, f);");
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.document["payload"]["nu_omega"], 2);
        assert_eq!(r.document["payload"]["nu_df"], 1);
    }

    #[test]
    fn embedding_normalizes() {
        let r = run("vars x y z;\ndegree 7;\npoly f = x^3 + y^3 + z^3;\n\
            form w = d(f) + f*dx;\ntask embed-qh(w, f);");
        assert_eq!(r.status, Status::Success, "{}", r.json());
        assert_eq!(r.document["payload"]["evaluation_at_one_exact"], true);
        replay_succeeds(&r);
    }

    #[test]
    fn replay_names_avoid_variables() {
        let r = run("vars f eta h;\ndegree 5;\npoly g = f^2 + eta^2 + h^2;\n\
            form w = d(f*eta) + f*d(g);\ntask decompose-relative(w, g);");
        assert_eq!(r.status, Status::Success);
        replay_succeeds(&r);
    }

    #[test]
    fn documents_are_deterministic() {
        let text = format!("{CUSP}task normalize(Omega, f0);");
        assert_eq!(run(&text).json(), run(&text).json());
    }
}
