use std::collections::{BTreeMap, HashMap};

use super::*;

fn ctx3() -> ExprContext {
    ExprContext::explicit(3, &["a", "b", "c"]).unwrap()
}

fn p(s: &str) -> Expr {
    ctx3().parse(s).unwrap()
}

#[test]
fn parses_product_monomial() {
    let e = p("q2*v1*v3");
    assert!(e.is_polynomial());
    assert_eq!(e.numer().len(), 1);
    assert_eq!(e, &(&Expr::var(Var::q(2)) * &Expr::var(Var::v(1))) * &Expr::var(Var::v(3)));
}

#[test]
fn parses_zero() {
    assert!(p("0").is_zero());
    assert!(p("q1 - q1").is_zero());
}

#[test]
fn parses_rational_with_denominator() {
    let e = p("v1^2 - (1/q2)*v2*v3");
    assert_eq!(e.denom(), &Poly::var(Var::q(2)));
    assert_eq!(e, p("(q2*v1^2 - v2*v3)/q2"));
}

#[test]
fn parse_errors() {
    let ctx = ctx3();
    assert!(matches!(ctx.parse("q1 +"), Err(ExprError::Syntax { .. })));
    assert!(matches!(ctx.parse("q4"), Err(ExprError::UnknownIdentifier { .. })));
    assert!(matches!(ctx.parse("zeta*q1"), Err(ExprError::UnknownIdentifier { pos: 1, .. })));
    assert!(matches!(ctx.parse("d2q1"), Err(ExprError::JetOrderTooHigh { order: 2, max: 1, .. })));
    assert!(matches!(ctx.parse("t"), Err(ExprError::UnknownIdentifier { .. })));
    assert!(matches!(ctx.parse("q1^1.5"), Err(ExprError::Syntax { .. })));
    assert!(matches!(ctx.parse("1/(q1-q1)"), Err(ExprError::Syntax { .. })));
    assert!(matches!(ctx.parse("(q1"), Err(ExprError::Syntax { .. })));
    assert!(matches!(ctx.parse(""), Err(ExprError::Syntax { .. })));
    assert!(matches!(ctx.parse("q1 $ q2"), Err(ExprError::Syntax { pos: 4, .. })));
}

#[test]
fn aliases_and_exponents() {
    assert_eq!(p("d1q2"), p("v2"));
    assert_eq!(p("q1^-2"), p("1/q1^2"));
    assert_eq!(p("q1^(-1)*q1"), Expr::one());
    assert_eq!(p("-q1^2"), -p("q1*q1"));
    assert_eq!(p("2/4"), Expr::ratio(1, 2));
    let ictx = ExprContext::implicit(2, &[]).unwrap();
    assert_eq!(ictx.parse("d4q2 + t").unwrap(), &Expr::var(Var::jet(2, 4)) + &Expr::var(Var::time()));
}

#[test]
fn canonical_form_cancels() {
    let e = p("(q1^2 - q2^2)/(q1 + q2)");
    assert_eq!(e, p("q1 - q2"));
    assert!(e.is_polynomial());
    let f = p("(2*q1 + 2)/(4*q1*q2 + 4*q2)");
    assert_eq!(f, p("1/(2*q2)"));
    assert!(f.denom().leading().1.is_one());
}

#[test]
fn diff_examples() {
    assert_eq!(p("q2*v1*v3").diff(Var::v(1)), p("q2*v3"));
    assert_eq!(p("1/q2").diff(Var::q(2)), p("-1/q2^2"));
    assert_eq!(p("a*q1^2 + b*q1*q2").diff(Var::q(1)), p("2*a*q1 + b*q2"));
    // the derivative of the numerator may cancel against the denominator
    assert_eq!(p("(q2*v1 + 1)/q2").diff(Var::v(1)), Expr::one());
}

#[test]
fn subst_examples() {
    let s = Var::aux(0);
    let mut b = HashMap::new();
    b.insert(Var::v(1), &Expr::var(s) * &Expr::var(Var::v(1)));
    b.insert(Var::v(3), &Expr::var(s) * &Expr::var(Var::v(3)));
    let out = p("v1*v3").subst(&b).unwrap();
    assert_eq!(out, &(&Expr::var(s) * &Expr::var(s)) * &p("v1*v3"));

    let ictx = ExprContext::implicit(3, &[]).unwrap();
    let implicit = ictx.parse("d2q1 - q2*v1*v3").unwrap();
    let out = implicit.subst_one(Var::jet(1, 2), &ictx.parse("q2*v1*v3").unwrap()).unwrap();
    assert!(out.is_zero());

    let x = p("a*q1/q2");
    assert_eq!(x.subst(&HashMap::new()).unwrap(), x);
}

#[test]
fn subst_division_by_zero() {
    let e = p("1/q1");
    assert_eq!(e.subst_one(Var::q(1), &Expr::zero()), Err(ExprError::DivisionByZero));
}

#[test]
fn eval_examples() {
    let f = p("q2*v1*v3");
    assert!((&f.diff(Var::v(1)) - &f.diff(Var::v(1))).is_zero());
    let point: BTreeMap<Var, Rational> =
        [(Var::q(2), rat(2)), (Var::v(1), rat(3)), (Var::v(3), rat(5))].into_iter().collect();
    assert_eq!(f.eval(&point).unwrap(), rat(30));
    let pole = p("1/(q2 - 2)");
    assert_eq!(pole.eval(&point), Err(ExprError::Pole));
    assert!(matches!(p("q1").eval(&point), Err(ExprError::Unbound(_))));
}

#[test]
fn integrate_examples() {
    let s = Var::aux(0);
    let se = Expr::var(s);
    let s2 = &se * &se;
    assert_eq!(s2.integrate_poly(s).unwrap(), (&s2 * &se).scale(&ratio(1, 3)));

    // (1 - s) s^2 c over [0, 1] = c/12
    let c = p("c");
    let integrand = &(&(&Expr::one() - &se) * &s2) * &c;
    let anti = integrand.integrate_poly(s).unwrap();
    let definite = &anti.subst_one(s, &Expr::one()).unwrap() - &anti.subst_one(s, &Expr::zero()).unwrap();
    assert_eq!(definite, c.scale(&ratio(1, 12)));

    assert!(matches!(p("1/q2").integrate_poly(Var::q(2)), Err(ExprError::NotPolynomialIn(_))));
}

#[test]
fn print_round_trip_examples() {
    let ctx = ctx3();
    for s in [
        "0",
        "-7/3",
        "q2*v1*v3",
        "v1^2 - (1/q2)*v2*v3",
        "-1/2*q2^-1*v3",
        "(a - c/4)*q1^3 + b/(q1*q2 + 1)",
        "1/(q1 - q2)^2",
    ] {
        let e = ctx.parse(s).unwrap();
        let printed = ctx.print(&e);
        assert_eq!(ctx.parse(&printed).unwrap(), e, "{s} printed as {printed}");
    }
    assert_eq!(ctx.print(&ctx.parse("-(1/2)*v3/q2").unwrap()), "-1/2*v3/q2");
    assert_eq!(ctx.print(&ctx.parse("a - c^2/4").unwrap()), "a - 1/4*c^2");
}

#[test]
fn derivative_audit_samples() {
    let f = p("q1^3*v2 + a*q2");
    let (_, samples) = record_derivatives(8, 7, || {
        f.diff(Var::q(1));
        f.diff(Var::q(2));
        f.diff(Var::v(3));
    });
    assert_eq!(samples.len(), 2);
    let ((), none) = record_derivatives(8, 7, || ());
    assert!(none.is_empty());
}
