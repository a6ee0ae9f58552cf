//! Evaluation of parsed expressions into t-polynomials of forms.
//!
//! Every value is a [`TForm`] of t-order `K`; functions are 0-forms. Written
//! polynomials are truncated at degree `D`; `d` and `diff` lower the trusted
//! degree by one.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::parser::{DefKind, Expr, ExprKind};
use super::{DslError, ProblemFile, Settings};
use crate::forms::{PForm, TForm};
use crate::ring::{Jet, Rational, TPoly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Field { kind: DefKind, value: TForm },
    Curve { param: String, coords: Vec<Jet> },
}

#[derive(Clone, Debug)]
pub struct Elaborator {
    pub vars: Vec<String>,
    pub degree: u32,
    pub torder: usize,
    pub env: BTreeMap<String, Value>,
}

impl Elaborator {
    pub fn new(vars: Vec<String>, settings: &Settings) -> Self {
        Elaborator {
            vars,
            degree: settings.degree,
            torder: settings.torder as usize,
            env: BTreeMap::new(),
        }
    }

    /// Evaluates every definition and curve of `problem` in order.
    pub fn from_problem(problem: &ProblemFile, settings: &Settings) -> Result<Self, DslError> {
        let mut e = Self::new(problem.vars.clone(), settings);
        for def in &problem.definitions {
            let value = e.eval(&def.expr)?;
            let ok = match def.kind {
                DefKind::Poly => value.degree() == 0,
                DefKind::Form => value.degree() >= 1 && is_t_free(&value),
                DefKind::Family => value.degree() == 1,
            };
            if !ok {
                let expected = match def.kind {
                    DefKind::Poly => "a function",
                    DefKind::Form => "a t-free form of positive degree",
                    DefKind::Family => "a 1-form",
                };
                return Err(DslError::at(
                    def.expr.pos,
                    format!("`{}` must be {expected}, found {}", def.name, describe(&value)),
                ));
            }
            e.env.insert(
                def.name.clone(),
                Value::Field {
                    kind: def.kind,
                    value,
                },
            );
        }
        for curve in &problem.curves {
            let mut coords = Vec::with_capacity(curve.coords.len());
            let inner = Elaborator {
                vars: vec![curve.param.clone()],
                degree: settings.degree,
                torder: 0,
                env: BTreeMap::new(),
            };
            for c in &curve.coords {
                let value = inner.eval(c)?;
                if value.degree() != 0 {
                    return Err(DslError::at(c.pos, "curve coordinates must be functions"));
                }
                let jet = value.coeff(0).function();
                if !jet.constant_term().is_zero() {
                    return Err(DslError::at(c.pos, "curve coordinates must vanish at the parameter origin"));
                }
                coords.push(jet);
            }
            e.env.insert(
                curve.name.clone(),
                Value::Curve {
                    param: curve.param.clone(),
                    coords,
                },
            );
        }
        Ok(e)
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn constant(&self, c: Rational) -> TForm {
        let jet = Jet::constant(self.nvars(), self.degree, c);
        self.lift(PForm::from_function(&jet), 0)
    }

    /// `t^power * form` at the working t-order.
    fn lift(&self, form: PForm, power: usize) -> TForm {
        let mut coeffs = vec![PForm::zero(form.degree(), form.nvars(), form.trust()); self.torder + 1];
        if power <= self.torder {
            coeffs[power] = form;
        }
        TForm::from_coeffs(coeffs)
    }

    pub fn eval(&self, expr: &Expr) -> Result<TForm, DslError> {
        let err = |message: String| DslError::at(expr.pos, message);
        match &expr.kind {
            ExprKind::Int(n) => Ok(self.constant(Rational::from_integer(n.clone()))),
            ExprKind::Name(name) => self.lookup(name).ok_or_else(|| err(format!("unknown identifier `{name}`"))),
            ExprKind::Neg(a) => Ok(self.eval(a)?.neg()),
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                if x.degree() != y.degree() {
                    return Err(err(format!(
                        "cannot add {} and {}",
                        describe(&x),
                        describe(&y)
                    )));
                }
                Ok(if matches!(expr.kind, ExprKind::Add(..)) {
                    x.add(&y)
                } else {
                    x.sub(&y)
                })
            }
            ExprKind::Mul(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                x.wedge(&y).map_err(|e| err(e.to_string()))
            }
            ExprKind::Div(a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                let c = constant_value(&y)
                    .ok_or_else(|| DslError::at(b.pos, "can only divide by a nonzero rational constant"))?;
                Ok(scale(&x, &c.recip()))
            }
            ExprKind::Pow(a, k) => {
                let base = self.eval(a)?;
                if base.degree() != 0 {
                    return Err(err("powers apply to functions only".into()));
                }
                Ok(self.power(&base, *k))
            }
            ExprKind::Call(name, args) => match (name.as_str(), args.as_slice()) {
                ("d", [a]) => self.eval(a)?.exterior_d().map_err(|e| err(e.to_string())),
                ("diff", [a, var]) => {
                    let value = self.eval(a)?;
                    if value.degree() != 0 {
                        return Err(err("`diff` applies to functions only".into()));
                    }
                    let index = match &var.kind {
                        ExprKind::Name(v) => self.vars.iter().position(|x| x == v),
                        _ => None,
                    }
                    .ok_or_else(|| DslError::at(var.pos, "second argument of `diff` must be a variable"))?;
                    Ok(TForm::from_coeffs(
                        value
                            .coeffs()
                            .iter()
                            .map(|c| PForm::from_function(&c.function().derivative(index)))
                            .collect(),
                    ))
                }
                ("d", _) => Err(err("`d` takes one argument".into())),
                ("diff", _) => Err(err("`diff` takes an expression and a variable".into())),
                _ => Err(err(format!("unknown function `{name}`"))),
            },
            ExprKind::Tuple(_) => Err(err("tuples are only allowed as `certify` arguments".into())),
        }
    }

    fn lookup(&self, name: &str) -> Option<TForm> {
        if let Some(Value::Field { value, .. }) = self.env.get(name) {
            return Some(value.clone());
        }
        let n = self.nvars();
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return Some(self.lift(PForm::from_function(&Jet::var(n, self.degree, i)), 0));
        }
        if name == "t" {
            let one = PForm::from_function(&Jet::one(n, self.degree));
            return Some(self.lift(one, 1));
        }
        let rest = name.strip_prefix('d')?;
        let i = self.vars.iter().position(|v| v == rest)?;
        Some(self.lift(PForm::basis(n, self.degree, i), 0))
    }

    fn power(&self, base: &TForm, mut k: u32) -> TForm {
        let mut result = self.constant(Rational::one());
        let mut square = base.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.wedge(&square).expect("0-forms");
            }
            k >>= 1;
            if k > 0 {
                square = square.wedge(&square).expect("0-forms");
            }
        }
        result.truncate(self.torder, base.trust())
    }

    /// Looks up a named value.
    pub fn field(&self, name: &str) -> Option<(DefKind, &TForm)> {
        match self.env.get(name)? {
            Value::Field { kind, value } => Some((*kind, value)),
            Value::Curve { .. } => None,
        }
    }

    pub fn curve(&self, name: &str) -> Option<&[Jet]> {
        match self.env.get(name)? {
            Value::Curve { coords, .. } => Some(coords),
            Value::Field { .. } => None,
        }
    }
}

pub fn is_t_free(value: &TForm) -> bool {
    value.coeffs().iter().skip(1).all(PForm::is_zero)
}

/// The value as a function, if it is a 0-form.
pub fn as_tpoly(value: &TForm) -> Option<TPoly> {
    (value.degree() == 0).then(|| TPoly::from_coeffs(value.coeffs().iter().map(PForm::function).collect()))
}

fn constant_value(value: &TForm) -> Option<Rational> {
    if value.degree() != 0 || !is_t_free(value) {
        return None;
    }
    let f = value.coeff(0).function();
    let c = f.constant_term();
    (f.terms().all(|(m, _)| m.is_one()) && !c.is_zero()).then_some(c)
}

fn scale(value: &TForm, c: &Rational) -> TForm {
    TForm::from_coeffs(value.coeffs().iter().map(|p| p.scale(c)).collect())
}

pub fn describe(value: &TForm) -> String {
    match value.degree() {
        0 => "a function".into(),
        p => format!("a {p}-form"),
    }
}
