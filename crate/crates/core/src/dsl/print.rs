//! Canonical text for jets, forms and t-polynomials in the problem-file syntax.
//!
//! Terms are listed by basis tuple (`dx` before `dy`), then by decreasing
//! graded-lex monomial; rationals are in lowest terms with positive
//! denominator. Re-parsing the text reproduces the value exactly.

use num_traits::Signed;

use crate::forms::{IndexTuple, PForm, TForm};
use crate::ring::rational::abs_is_one;
use crate::ring::{format_rational, Jet, Monomial, Rational, TPoly};

fn monomial_factors(m: &Monomial, names: &[String]) -> Vec<String> {
    m.exponents()
        .iter()
        .zip(names)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, name)| if e == 1 { name.clone() } else { format!("{name}^{e}") })
        .collect()
}

fn basis_factors(tuple: &IndexTuple, names: &[String]) -> Vec<String> {
    tuple.indices().map(|i| format!("d{}", names[i])).collect()
}

fn term(c: &Rational, factors: &[String]) -> String {
    if factors.is_empty() {
        return format_rational(c);
    }
    let body = factors.join("*");
    if abs_is_one(c) {
        if c.is_negative() {
            format!("-{body}")
        } else {
            body
        }
    } else {
        format!("{}*{body}", format_rational(c))
    }
}

fn join_terms(terms: impl IntoIterator<Item = String>) -> String {
    let mut out = String::new();
    for t in terms {
        if out.is_empty() {
            out = t;
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

pub fn print_jet(f: &Jet, names: &[String]) -> String {
    join_terms(f.terms().rev().map(|(m, c)| term(c, &monomial_factors(m, names))))
}

/// `0*dx_1*...*dx_p`, so a zero form still reads back as a `p`-form.
fn zero_form(degree: usize, names: &[String]) -> String {
    let mut factors = vec!["0".to_string()];
    factors.extend(names.iter().take(degree).map(|n| format!("d{n}")));
    factors.join("*")
}

pub fn print_form(w: &PForm, names: &[String]) -> String {
    if w.degree() > 0 && w.is_zero() {
        return zero_form(w.degree(), names);
    }
    let mut terms = Vec::new();
    for (tuple, c) in w.components() {
        let basis = basis_factors(tuple, names);
        for (m, value) in c.terms().rev() {
            let mut factors = monomial_factors(m, names);
            factors.extend(basis.iter().cloned());
            terms.push(term(value, &factors));
        }
    }
    join_terms(terms)
}

/// `c_0 + t*(c_1) + t^2*(c_2) + ...` with zero coefficients omitted.
fn print_series(parts: Vec<String>) -> String {
    let mut pieces = Vec::new();
    for (j, body) in parts.into_iter().enumerate() {
        if body == "0" || body.starts_with("0*") {
            continue;
        }
        pieces.push(match j {
            0 => body,
            1 => format!("t*({body})"),
            _ => format!("t^{j}*({body})"),
        });
    }
    if pieces.is_empty() {
        "0".into()
    } else {
        pieces.join(" + ")
    }
}

pub fn print_tpoly(p: &TPoly, names: &[String]) -> String {
    print_series(p.coeffs().iter().map(|c| print_jet(c, names)).collect())
}

pub fn print_tform(w: &TForm, names: &[String]) -> String {
    if w.degree() > 0 && w.is_zero() {
        return zero_form(w.degree(), names);
    }
    print_series(
        w.coeffs()
            .iter()
            .map(|c| {
                if c.degree() == 0 {
                    print_jet(&c.function(), names)
                } else {
                    print_form(c, names)
                }
            })
            .collect(),
    )
}

/// A monomial alone, `1` for the constant monomial.
pub fn print_monomial(m: &Monomial, names: &[String]) -> String {
    let factors = monomial_factors(m, names);
    if factors.is_empty() {
        "1".into()
    } else {
        factors.join("*")
    }
}
