//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Expected values come from the
//! schoolbook oracle below, which shares no code with the library beyond
//! reading terms out of jets and forms.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use germ_forge::dsl::{parse_problem, run_task, Overrides, Status};
use germ_forge::forms::{differential, pullback_weighted, PForm, TForm, WeightVector};
use germ_forge::normalizer::{check_cascade, normalize, DeformationFamily, NormalizeOutcome};
use germ_forge::quasihom::{detect_quasihomogeneity, embed_as_deformation, multiplicity_criterion, Verdict};
use germ_forge::ring::{int, Jet, Monomial, Rational, TPoly};
use germ_forge::solver::{solve_relative, DecompositionParts, GradedLinearSystem, SolveOutcome};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod oracle {
    use super::*;

    pub type Poly = BTreeMap<Vec<u32>, Rational>;
    /// Sorted index tuple to coefficient.
    pub type Form = BTreeMap<Vec<usize>, Poly>;

    pub fn poly(j: &Jet) -> Poly {
        j.terms().map(|(m, c)| (m.exponents().to_vec(), c.clone())).collect()
    }

    pub fn form(w: &PForm) -> Form {
        w.components().map(|(t, c)| (t.indices().collect(), poly(c))).collect()
    }

    pub fn function(p: Poly) -> Form {
        clean([(vec![], p)].into_iter().collect())
    }

    pub fn to_jet(p: &Poly, n: usize, degree: u32) -> Jet {
        let mut j = Jet::zero(n, degree);
        for (m, c) in p {
            if m.iter().sum::<u32>() <= degree {
                j.add_term(Monomial::from_exponents(m), c.clone());
            }
        }
        j
    }

    pub fn to_form(w: &Form, p: usize, n: usize, trust: u32) -> PForm {
        PForm::from_components(p, n, trust, w.iter().map(|(t, c)| (t.clone(), to_jet(c, n, trust))))
    }

    fn add_scaled(target: &mut Poly, p: &Poly, s: &Rational) {
        for (m, c) in p {
            let e = target.entry(m.clone()).or_insert_with(Rational::zero);
            *e += c * s;
        }
        target.retain(|_, c| !c.is_zero());
    }

    pub fn add(a: &Poly, b: &Poly) -> Poly {
        let mut out = a.clone();
        add_scaled(&mut out, b, &Rational::one());
        out
    }

    pub fn mul(a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                let m: Vec<u32> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                let e = out.entry(m).or_insert_with(Rational::zero);
                *e += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn diff(p: &Poly, i: usize) -> Poly {
        let mut out = Poly::new();
        for (m, c) in p {
            if m[i] > 0 {
                let mut lowered = m.clone();
                lowered[i] -= 1;
                out.insert(lowered, c * int(m[i] as i64));
            }
        }
        out
    }

    /// Sorts `indices` by adjacent swaps, returning the sign; `None` on a repeat.
    pub fn sort_sign(indices: &[usize]) -> Option<(Vec<usize>, i64)> {
        let mut v = indices.to_vec();
        let mut sign = 1;
        for pass in 0..v.len() {
            for j in 0..v.len().saturating_sub(pass + 1) {
                if v[j] > v[j + 1] {
                    v.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            None
        } else {
            Some((v, sign))
        }
    }

    fn clean(mut w: Form) -> Form {
        for p in w.values_mut() {
            p.retain(|_, c| !c.is_zero());
        }
        w.retain(|_, p| !p.is_empty());
        w
    }

    fn accumulate(out: &mut Form, indices: &[usize], p: &Poly, sign: i64) {
        if let Some((sorted, s)) = sort_sign(indices) {
            let slot = out.entry(sorted).or_default();
            add_scaled(slot, p, &int(sign * s));
        }
    }

    pub fn wedge(a: &Form, b: &Form) -> Form {
        let mut out = Form::new();
        for (ia, ca) in a {
            for (ib, cb) in b {
                let joined: Vec<usize> = ia.iter().chain(ib).copied().collect();
                accumulate(&mut out, &joined, &mul(ca, cb), 1);
            }
        }
        clean(out)
    }

    pub fn d(w: &Form, n: usize) -> Form {
        let mut out = Form::new();
        for (idx, c) in w {
            for i in 0..n {
                let mut joined = vec![i];
                joined.extend(idx);
                accumulate(&mut out, &joined, &diff(c, i), 1);
            }
        }
        clean(out)
    }

    pub fn form_add(a: &Form, b: &Form) -> Form {
        let mut out = a.clone();
        for (idx, p) in b {
            let slot = out.entry(idx.clone()).or_default();
            add_scaled(slot, p, &Rational::one());
        }
        clean(out)
    }

    pub fn scale(a: &Form, s: i64) -> Form {
        a.iter()
            .map(|(i, p)| (i.clone(), p.iter().map(|(m, c)| (m.clone(), c * int(s))).collect()))
            .collect()
    }

    /// Drops every term of total degree above `degree`.
    pub fn truncate(w: &Form, degree: u32) -> Form {
        let mut out = w.clone();
        for p in out.values_mut() {
            p.retain(|m, _| m.iter().sum::<u32>() <= degree);
        }
        clean(out)
    }

    pub fn order(w: &Form) -> Option<u32> {
        w.values().flat_map(|p| p.keys()).map(|m| m.iter().sum()).min()
    }

    /// `x^m dx_I -> t^(w.m + sum_I w_i) x^m dx_I`, keyed by the power of `t`.
    pub fn pullback(w: &Form, weights: &[u32]) -> BTreeMap<u64, Form> {
        let mut out: BTreeMap<u64, Form> = BTreeMap::new();
        for (idx, p) in w {
            for (m, c) in p {
                let power: u64 = m.iter().zip(weights).map(|(&e, &d)| e as u64 * d as u64).sum::<u64>()
                    + idx.iter().map(|&i| weights[i] as u64).sum::<u64>();
                let slot = out.entry(power).or_default().entry(idx.clone()).or_default();
                slot.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// `sum_(a + b = j) omega_a ^ dF_b` for `j <= k`, each truncated at `trust`.
    pub fn first_integral_residual(omegas: &[Form], f: &[Poly], n: usize, trust: u32) -> Vec<Form> {
        (0..omegas.len())
            .map(|j| {
                let mut acc = Form::new();
                for (a, w) in omegas.iter().enumerate().take(j + 1) {
                    if let Some(fb) = f.get(j - a) {
                        acc = form_add(&acc, &wedge(w, &d(&function(fb.clone()), n)));
                    }
                }
                truncate(&acc, trust)
            })
            .collect()
    }

    /// `sum_(a + b = j) omega_a ^ d omega_b` for each `j`, truncated at `trust`.
    pub fn cascade(omegas: &[Form], n: usize, trust: u32) -> Vec<Form> {
        (0..omegas.len())
            .map(|j| {
                let mut acc = Form::new();
                for a in 0..=j {
                    acc = form_add(&acc, &wedge(&omegas[a], &d(&omegas[j - a], n)));
                }
                truncate(&acc, trust)
            })
            .collect()
    }
}

use oracle::{Form, Poly};

struct Check {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Check {
    Check {
        passed,
        detail: detail.into(),
    }
}

fn vars(n: usize, degree: u32) -> Vec<Jet> {
    (0..n).map(|i| Jet::var(n, degree, i)).collect()
}

fn sphere(d: u32) -> Jet {
    let v = vars(3, d);
    &(&v[0].pow(2) + &v[1].pow(2)) + &v[2].pow(2)
}

fn cube_sum(d: u32) -> Jet {
    let v = vars(3, d);
    &(&v[0].pow(3) + &v[1].pow(3)) + &v[2].pow(3)
}

fn random_poly(rng: &mut ChaCha8Rng, d: u32, min_degree: u32, max_degree: u32, terms: usize) -> Jet {
    let monomials: Vec<Monomial> = (min_degree..=max_degree)
        .flat_map(|k| Monomial::all_of_degree(3, k))
        .collect();
    let mut p = Jet::zero(3, d);
    for _ in 0..terms {
        let m = monomials[rng.gen_range(0..monomials.len())].clone();
        let num = rng.gen_range(-4i64..=4);
        let den = rng.gen_range(1i64..=3);
        p.add_term(m, Rational::new(num.into(), den.into()));
    }
    p
}

fn series_forms(t: &TForm) -> Vec<Form> {
    t.coeffs().iter().map(oracle::form).collect()
}

fn tpoly_polys(p: &TPoly) -> Vec<Poly> {
    p.coeffs().iter().map(oracle::poly).collect()
}

/// The exact linear functional of a certificate applied to `dh + a df` for
/// every monomial `h` and `a` up to `max_degree` must vanish, and applied to
/// `rho` must leave the stated nonzero constant.
fn row_is_inconsistent(
    row: &[(germ_forge::solver::EquationLabel, Rational)],
    residual: &Rational,
    rho: &PForm,
    f: &Jet,
    max_degree: u32,
) -> bool {
    let n = f.nvars();
    let functional = |w: &Form| -> Rational {
        let mut total = Rational::zero();
        for (label, y) in row {
            if let Some(p) = w.get(&vec![label.component]) {
                if let Some(c) = p.get(&label.monomial) {
                    total += c * y;
                }
            }
        }
        total
    };
    let df = oracle::d(&oracle::function(oracle::poly(f)), n);
    for k in 0..=max_degree + 1 {
        for m in Monomial::all_of_degree(n, k) {
            let mono: Poly = [(m.exponents().to_vec(), Rational::one())].into_iter().collect();
            let dh = oracle::d(&oracle::function(mono.clone()), n);
            let a_df: Form = df.iter().map(|(i, p)| (i.clone(), oracle::mul(&mono, p))).collect();
            if !functional(&dh).is_zero() || !functional(&a_df).is_zero() {
                return false;
            }
        }
    }
    !residual.is_zero() && functional(&oracle::form(rho)) == *residual
}

fn cusp_family(d: u32, k: usize) -> (DeformationFamily, Jet) {
    let v = vars(3, d);
    let (x, y) = (&v[0], &v[1]);
    let f0 = &y.pow(2) + &x.pow(3);
    let w1 = PForm::one_form(&[(x * y).scale(&int(-3)), x.pow(2).scale(&int(2)), Jet::zero(3, d)]);
    let mut omegas = vec![w1];
    omegas.resize(k, PForm::zero(1, 3, d));
    (DeformationFamily::new(f0.clone(), omegas).unwrap(), f0)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let (family, f0) = cusp_family(6, 1);
    let outcome = normalize(&family).unwrap();
    let elapsed = start.elapsed();
    let NormalizeOutcome::Obstructed { certificate, rho } = outcome else {
        return check(false, format!("expected an obstruction, got {outcome:?}"));
    };
    let system = GradedLinearSystem::relative(&rho, &f0);
    let library_check = system.check_certificate(&certificate);
    let oracle_check = row_is_inconsistent(&certificate.row, &certificate.residual, &rho, &f0, system.trust());
    let ok = certificate.t_order == Some(1)
        && certificate.degree == 1
        && library_check
        && oracle_check
        && elapsed < Duration::from_secs(1);
    check(
        ok,
        format!(
            "cusp family: t-order {:?}, degree {}, row inconsistent (system {library_check}, oracle {oracle_check}), {} ms",
            certificate.t_order,
            certificate.degree,
            elapsed.as_millis()
        ),
    )
}

/// Families `u d(f0 + t g + t^2 g2) / u(x, 0)` at `D = 8`, `K = 2`.
fn random_families(count: usize, seed: u64) -> Vec<DeformationFamily> {
    const D: u32 = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let choices = [sphere(D), cube_sum(D), {
        let v = vars(3, D);
        &(&v[0].pow(2) + &v[1].pow(3)) + &v[2].pow(5)
    }];
    (0..count)
        .map(|i| {
            let f0 = choices[i % 3].clone();
            let big_f = TPoly::from_coeffs(vec![
                f0.clone(),
                random_poly(&mut rng, D, 1, 4, 3),
                random_poly(&mut rng, D, 1, 4, 3),
            ]);
            let mut u0 = random_poly(&mut rng, D, 1, 3, 2);
            let c = rng.gen_range(1i64..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
            u0.add_term(Monomial::one(3), int(c));
            let u = TPoly::from_coeffs(vec![
                u0.clone(),
                random_poly(&mut rng, D, 0, 3, 3),
                random_poly(&mut rng, D, 0, 3, 3),
            ]);
            let series = TForm::differential_of(&big_f)
                .mul_tpoly(&u)
                .mul_function(&u0.invert_unit().unwrap());
            DeformationFamily::from_series(f0, &series).unwrap()
        })
        .collect()
}

fn criterion_2(families: &[DeformationFamily]) -> Check {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut trusts = Vec::new();
    for (i, family) in families.iter().enumerate() {
        match normalize(family).unwrap() {
            NormalizeOutcome::Normalized(r) => {
                let omegas = series_forms(&family.series());
                let residual = oracle::first_integral_residual(&omegas, &tpoly_polys(&r.f), 3, r.trust);
                if residual.iter().any(|w| !w.is_empty()) {
                    failures.push(format!("#{i} residual nonzero"));
                }
                trusts.push(r.trust);
            }
            other => failures.push(format!("#{i}: {}", short(&other))),
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && families.len() >= 100 && elapsed < Duration::from_secs(60);
    check(
        ok,
        format!(
            "{} random families normalized, omega_t ^ d_x F = 0 by oracle within trust {}..{}, {:.1} s{}",
            families.len() - failures.len(),
            trusts.iter().min().unwrap_or(&0),
            trusts.iter().max().unwrap_or(&0),
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; failures: {failures:?}") }
        ),
    )
}

fn short(outcome: &NormalizeOutcome) -> String {
    match outcome {
        NormalizeOutcome::Normalized(_) => "normalized".into(),
        NormalizeOutcome::NotIntegrable(r) => format!("not integrable at {:?}", r.failing_order),
        NormalizeOutcome::Obstructed { certificate, .. } => {
            format!("obstructed at {:?} degree {}", certificate.t_order, certificate.degree)
        }
    }
}

fn criterion_3(families: &[DeformationFamily]) -> Check {
    let mut agree = 0;
    for family in families {
        let report = check_cascade(family).unwrap();
        let trust = family.series().wedge(&family.series().exterior_d().unwrap()).unwrap().trust();
        let by_oracle = oracle::cascade(&series_forms(&family.series()), 3, trust);
        if report.passed && by_oracle.iter().all(Form::is_empty) {
            agree += 1;
        }
    }
    const D: u32 = 6;
    let v = vars(3, D);
    let f0 = sphere(D);
    let corrupt = PForm::basis(3, D, 1).mul_function(&v[2]);
    let family = DeformationFamily::new(f0, vec![corrupt]).unwrap();
    let report = check_cascade(&family).unwrap();
    let omegas = series_forms(&family.series());
    let expected = oracle::cascade(&omegas, 3, D - 2);
    let found = report.residual.as_ref().map(|r| oracle::truncate(&oracle::form(r), D - 2));
    let ok = agree == families.len()
        && !report.passed
        && report.failing_order == Some(1)
        && expected[0].is_empty()
        && found.as_ref() == Some(&expected[1])
        && !expected[1].is_empty();
    check(
        ok,
        format!(
            "{agree}/{} accepted families pass the cascade by library and oracle; corrupted family fails at t-order {:?} with residual {} (oracle {})",
            families.len(),
            report.failing_order,
            describe(found.as_ref()),
            describe(Some(&expected[1]))
        ),
    )
}

fn describe(w: Option<&Form>) -> String {
    let Some(w) = w else {
        return "none".into();
    };
    let names = ["x", "y", "z"];
    let mut parts = Vec::new();
    for (idx, p) in w {
        for (m, c) in p {
            let mono: Vec<String> = m
                .iter()
                .zip(names)
                .filter(|(e, _)| **e > 0)
                .map(|(e, n)| if *e == 1 { n.to_string() } else { format!("{n}^{e}") })
                .collect();
            let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", names[i])).collect();
            parts.push(format!("{c}*{}", mono.into_iter().chain(basis).collect::<Vec<_>>().join("*")));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn criterion_4() -> Check {
    const D: u32 = 8;
    const COUNT: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut solved = 0;
    let mut rechecked = 0;
    let mut problems = Vec::new();
    for i in 0..COUNT {
        let h = random_poly(&mut rng, D, 1, 5, 4);
        let a = random_poly(&mut rng, D, 0, 5, 3);
        let mut f = random_poly(&mut rng, D, 1, 5, 3);
        if f.is_zero() {
            f.add_term(Monomial::var(3, i % 3), int(1));
        }
        let trust = D - 1;
        let (hp, ap, fp) = (oracle::poly(&h), oracle::poly(&a), oracle::poly(&f));
        let df = oracle::d(&oracle::function(fp.clone()), 3);
        let eta_oracle = oracle::truncate(
            &oracle::form_add(
                &oracle::d(&oracle::function(hp), 3),
                &oracle::wedge(&oracle::function(ap), &df),
            ),
            trust,
        );
        let eta = oracle::to_form(&eta_oracle, 1, 3, trust);
        match solve_relative(&eta, &f) {
            Ok(SolveOutcome::Solved(dec)) => {
                solved += 1;
                let DecompositionParts::Relative { h, a } = &dec.parts else {
                    problems.push(format!("#{i}: wrong kind"));
                    continue;
                };
                let rebuilt = oracle::truncate(
                    &oracle::form_add(
                        &oracle::d(&oracle::function(oracle::poly(h)), 3),
                        &oracle::wedge(&oracle::function(oracle::poly(a)), &df),
                    ),
                    dec.trust,
                );
                if dec.residual.is_zero() && rebuilt == oracle::truncate(&eta_oracle, dec.trust) {
                    rechecked += 1;
                } else {
                    problems.push(format!("#{i}: recomposition differs"));
                }
            }
            Ok(SolveOutcome::Obstructed(c)) => problems.push(format!("#{i}: obstructed in degree {}", c.degree)),
            Err(e) => problems.push(format!("#{i}: {e}")),
        }
    }
    check(
        solved == COUNT && rechecked == COUNT,
        format!(
            "{solved}/{COUNT} exact 1-forms dh + a df decomposed, {rechecked} recompositions equal by oracle{}",
            if problems.is_empty() { String::new() } else { format!("; {problems:?}") }
        ),
    )
}

fn criterion_5() -> Check {
    const D: u32 = 8;
    let v = vars(3, D);
    let f = cube_sum(D);
    let one_plus_x = &Jet::one(3, D) + &v[0];
    let omega = differential(&f)
        .mul_function(&one_plus_x)
        .add(&PForm::basis(3, D - 1, 0).mul_function(&f));
    let first = multiplicity_criterion(&omega, &f).unwrap();
    let nu_df_oracle = oracle::order(&oracle::d(&oracle::function(oracle::poly(&f)), 3));
    let nu_omega_oracle = oracle::order(&oracle::form(&omega));
    let split_ok = first.split.as_ref().is_some_and(|dec| {
        let DecompositionParts::Invariant { a, eta } = &dec.parts else {
            return false;
        };
        let df = oracle::d(&oracle::function(oracle::poly(&f)), 3);
        let rebuilt = oracle::form_add(
            &oracle::wedge(&oracle::function(oracle::poly(a)), &df),
            &oracle::wedge(&oracle::function(oracle::poly(&f)), &oracle::form(eta)),
        );
        a.constant_term() == int(1)
            && oracle::truncate(&rebuilt, dec.trust) == oracle::truncate(&oracle::form(&omega), dec.trust)
    });
    let witnesses_ok = first.singularity.witnesses.iter().all(|w| {
        let mut sum = Poly::new();
        for (c, i) in w.multipliers.iter().zip(0..3) {
            sum = oracle::add(&sum, &oracle::mul(&oracle::poly(c), &oracle::diff(&oracle::poly(&f), i)));
        }
        sum.retain(|m, _| m.iter().sum::<u32>() <= first.singularity.trust);
        sum == [(w.monomial.exponents().to_vec(), Rational::one())].into_iter().collect::<Poly>()
    }) && first.singularity.witnesses.len() == Monomial::all_of_degree(3, first.singularity.k_found.unwrap_or(0)).len();
    let first_ok = first.a_is_unit == Some(true)
        && first.nu_omega == Some(2)
        && first.nu_df == Some(2)
        && nu_omega_oracle == Some(2)
        && nu_df_oracle == Some(2)
        && first.isolated
        && witnesses_ok
        && split_ok
        && first.verdict == Verdict::Expected
        && first.first_integral_expected;

    let g = sphere(D);
    let omega2 = PForm::basis(3, D - 1, 0)
        .mul_function(&g)
        .add(&differential(&g).mul_function(&v[0].pow(3)));
    let second = multiplicity_criterion(&omega2, &g).unwrap();
    let nu2 = oracle::order(&oracle::form(&omega2));
    let nudg = oracle::order(&oracle::d(&oracle::function(oracle::poly(&g)), 3));
    let second_ok = !second.first_integral_expected
        && second.verdict == Verdict::NotExpected
        && second.nu_omega == Some(2)
        && second.nu_df == Some(1)
        && nu2 == Some(2)
        && nudg == Some(1);
    check(
        first_ok && second_ok,
        format!(
            "(1+x)df + f dx: a(0) unit {:?}, nu {:?}/{:?}, isolated {} (k = {:?}, witnesses {witnesses_ok}), verdict {:?}; f dx + x^3 df on the sphere: nu {:?} vs {:?}, verdict {:?}",
            first.a_is_unit,
            first.nu_omega,
            first.nu_df,
            first.isolated,
            first.singularity.k_found,
            first.verdict,
            second.nu_omega,
            second.nu_df,
            second.verdict
        ),
    )
}

fn criterion_6() -> Check {
    const D: u32 = 10;
    let f = cube_sum(D);
    let omega = differential(&f).add(&PForm::basis(3, D - 1, 0).mul_function(&f));
    let Some(w) = detect_quasihomogeneity(&f, 10).weights else {
        return check(false, "no weights detected");
    };
    let e = match embed_as_deformation(&omega, &f, &w, None) {
        Ok(e) => e,
        Err(err) => return check(false, format!("embedding failed: {err}")),
    };
    let trust = e.series.trust();
    let pulled = oracle::pullback(&oracle::truncate(&oracle::form(&omega), trust), w.weights());
    let at_one = pulled.values().fold(Form::new(), |acc, x| oracle::form_add(&acc, x));
    let family_at_one = series_forms(&e.family.series())
        .iter()
        .fold(Form::new(), |acc, x| oracle::form_add(&acc, x));
    let shifted_ok = pulled.keys().all(|&p| p >= w.level() as u64)
        && series_forms(&e.series)
            .iter()
            .enumerate()
            .all(|(j, c)| pulled.get(&(j as u64 + w.level() as u64)).map_or(c.is_empty(), |p| p == c));
    let evaluates = at_one == oracle::form(&omega.truncate(trust)) && family_at_one == at_one && shifted_ok;
    let cascade = check_cascade(&e.family).unwrap().passed;
    let NormalizeOutcome::Normalized(r) = normalize(&e.family).unwrap() else {
        return check(false, "embedded family did not normalize");
    };
    let f_at_one = tpoly_polys(&r.f).iter().fold(Poly::new(), |acc, p| oracle::add(&acc, p));
    let residual = oracle::truncate(
        &oracle::wedge(&oracle::form(&omega), &oracle::d(&oracle::function(f_at_one), 3)),
        r.trust,
    );
    let ok = evaluates && cascade && residual.is_empty();
    check(
        ok,
        format!(
            "weights {:?} level {}, family t-order {}, t = 1 gives omega exactly: {evaluates}, cascade {cascade}, normalized, omega ^ dF(., 1) = 0 through degree {}: {}",
            w.weights(),
            w.level(),
            e.family.t_order(),
            r.trust,
            residual.is_empty()
        ),
    )
}

fn criterion_7() -> Check {
    const D: u32 = 6;
    const COUNT: usize = 600;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let tuples = |p: usize| -> Vec<Vec<usize>> {
        match p {
            0 => vec![vec![]],
            1 => vec![vec![0], vec![1], vec![2]],
            2 => vec![vec![0, 1], vec![0, 2], vec![1, 2]],
            _ => vec![vec![0, 1, 2]],
        }
    };
    let random_form = |rng: &mut ChaCha8Rng, p: usize| -> PForm {
        let parts: Vec<(Vec<usize>, Jet)> = tuples(p)
            .into_iter()
            .map(|t| (t, random_poly(rng, D, 0, 4, 3)))
            .collect();
        PForm::from_components(p, 3, D, parts)
    };
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fail = |law: &'static str| *failures.entry(law).or_default() += 1;
    for _ in 0..COUNT {
        let p = rng.gen_range(0..=2usize);
        let q = rng.gen_range(0..=(2 - p));
        let a = random_form(&mut rng, p);
        let b = random_form(&mut rng, q);
        let (oa, ob) = (oracle::form(&a), oracle::form(&b));

        let da = a.exterior_d().unwrap();
        if oracle::form(&da) != oracle::truncate(&oracle::d(&oa, 3), D - 1) {
            fail("d");
        }
        if p < 2 && !da.exterior_d().unwrap().is_zero() {
            fail("d o d");
        }
        let ab = a.wedge(&b).unwrap();
        if oracle::form(&ab) != oracle::truncate(&oracle::wedge(&oa, &ob), D) {
            fail("wedge");
        }
        let s = if (p * q) % 2 == 0 { 1 } else { -1 };
        if oracle::form(&ab) != oracle::scale(&oracle::form(&b.wedge(&a).unwrap()), s) {
            fail("anticommutativity");
        }
        if p + q < 3 {
            let lhs = oracle::form(&ab.exterior_d().unwrap());
            let rhs = oracle::form_add(
                &oracle::wedge(&oracle::d(&oa, 3), &ob),
                &oracle::scale(&oracle::wedge(&oa, &oracle::d(&ob, 3)), if p % 2 == 0 { 1 } else { -1 }),
            );
            if lhs != oracle::truncate(&rhs, D - 1) {
                fail("leibniz");
            }
        }
        let weights: Vec<u32> = (0..3).map(|_| rng.gen_range(1..=3)).collect();
        let wv = WeightVector::new(1, weights.clone()).unwrap();
        let lhs = pullback_weighted(&da, &wv);
        let rhs = pullback_weighted(&a, &wv).exterior_d().unwrap();
        let by_oracle: BTreeMap<u64, Form> = oracle::pullback(&oa, &weights)
            .into_iter()
            .map(|(k, w)| (k, oracle::truncate(&oracle::d(&w, 3), D - 1)))
            .filter(|(_, w)| !w.is_empty())
            .collect();
        let collect = |t: &TForm| -> BTreeMap<u64, Form> {
            series_forms(t)
                .into_iter()
                .enumerate()
                .map(|(k, w)| (k as u64, oracle::truncate(&w, D - 1)))
                .filter(|(_, w)| !w.is_empty())
                .collect()
        };
        if collect(&lhs) != by_oracle || collect(&rhs) != by_oracle {
            fail("pullback");
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{COUNT} random form pairs: d, d o d, wedge, anticommutativity, Leibniz and weighted pullback against the oracle{}",
            if failures.is_empty() { String::new() } else { format!("; failures {failures:?}") }
        ),
    )
}

const PROBLEMS: &[&str] = &[
    "vars x y z;\ndegree 6;\ntorder 1;\npoly f0 = y^2 + x^3;\n\
     family Omega = d(f0) + t*x*(2*x*dy - 3*y*dx);\ntask normalize(Omega, f0);\n",
    "vars x y z;\ndegree 6;\ntorder 2;\npoly f0 = x^2 + y^2 + z^2;\nfamily W = d(f0);\ntask normalize(W, f0);\n",
    "vars x y z;\ndegree 8;\ntorder 2;\npoly f0 = x^2 + y^3 + z^5;\n\
     family W = (1 + t*y - t^2*x*z)*d(f0 + t*(x*y - 2/3*z^2) + t^2*x^3);\ntask normalize(W, f0);\n",
    "vars x y z;\ndegree 8;\npoly f = x^3 + y^3 + z^3;\nform eta = d(x*y*z) + (1 - y)*d(f);\n\
     task decompose-relative(eta, f);\n",
    "vars x y z;\ndegree 8;\npoly f = x^3 + y^3 + z^3;\nform w = (1 + x)*d(f) + f*dx;\n\
     task decompose-invariant(w, f);\n",
    "vars x y z;\ndegree 8;\npoly f = x^3 + y^3 + z^3;\nform w = (1 + x)*d(f) + f*dx;\ntask theorem3(w, f);\n",
    "vars x y z;\npoly f = x^3 + y^3 + z^3;\nform w = d(f) + f*dx;\ntask embed-qh(w, f);\n",
    "vars x y z;\ndegree 7;\npoly f = x^2 + y^3 + z^5;\ntask analyze-singularity(f);\n",
    "vars x y z;\ndegree 7;\ntask check-integrability(y*z*dx + x*z*dy + x*y*dz);\n",
    "vars x y z;\ndegree 7;\npoly f = x*y + z^3;\ntask certify(x*d(f), f);\n",
];

fn criterion_8() -> Check {
    let mut identical = 0;
    let mut successes = 0;
    let mut replayed = 0;
    let mut problems = Vec::new();
    for (i, text) in PROBLEMS.iter().enumerate() {
        let problem = parse_problem(text).unwrap();
        let first = run_task(&problem, Overrides::default()).unwrap();
        let second = run_task(&parse_problem(text).unwrap(), Overrides::default()).unwrap();
        if first.json() == second.json() {
            identical += 1;
        } else {
            problems.push(format!("#{i} differs between runs"));
        }
        if first.status != Status::Success {
            continue;
        }
        successes += 1;
        let Some(replay) = first.replay() else {
            problems.push(format!("#{i} has no replay"));
            continue;
        };
        let again = run_task(&parse_problem(replay).unwrap(), Overrides::default()).unwrap();
        if again.status == Status::Success {
            replayed += 1;
        } else {
            problems.push(format!("#{i} replay {:?}", again.status));
        }
    }
    check(
        identical == PROBLEMS.len() && replayed == successes && successes + 1 == PROBLEMS.len(),
        format!(
            "{identical}/{} documents byte-identical across runs, {replayed}/{successes} SUCCESS documents pass certify{}",
            PROBLEMS.len(),
            if problems.is_empty() { String::new() } else { format!("; {problems:?}") }
        ),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn main() -> ExitCode {
    let families = random_families(120, 2);
    let criteria: Vec<Criterion> = vec![
        ("cusp obstruction", Box::new(criterion_1)),
        ("normalization roundtrip", Box::new(|| criterion_2(&families))),
        ("cascade equations", Box::new(|| criterion_3(&families))),
        ("relative decomposition", Box::new(criterion_4)),
        ("invariant split and multiplicity criterion", Box::new(criterion_5)),
        ("quasi-homogeneous embedding", Box::new(criterion_6)),
        ("exterior calculus laws", Box::new(criterion_7)),
        ("determinism and certificate round-trip", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        let tag = if v.passed { "PASS" } else { "FAIL" };
        if !v.passed {
            failed += 1;
        }
        println!("{tag} [{}] {name}: {}", i + 1, v.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
