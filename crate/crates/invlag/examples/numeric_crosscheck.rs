//! Independent numeric confirmation of a symbolic verdict: passing cells
//! are re-evaluated term by term at random rational points and the
//! derivatives taken along the way are compared with finite differences.
//! Set INVLAG_SEED to fix the sample points.
//!
//! cargo run --example numeric_crosscheck

use invlag::conditions::check_dissipative;
use invlag::crosscheck::{crosscheck_derivatives, crosscheck_report, Sampler};
use invlag::expr::{record_derivatives, Expr, ExprContext};
use invlag::geometry::{Sode, SodeGeometry};
use invlag::tensor::TensorField;

fn main() {
    let ctx = ExprContext::explicit(3, &[]).expect("valid context");
    let sode = Sode::parse(ctx.clone(), &["q2*v1*v3", "v3^2", "v1^2 - v2*v3/q2"]).expect("valid system");
    let g = TensorField::diagonal(vec![Expr::int(4), Expr::one(), ctx.parse("2*q2").expect("parses")]);
    let d = ctx.parse("2*q2*v1^2*v3").expect("parses");

    let mut sampler = Sampler::from_env();
    let (report, samples) = record_derivatives(64, invlag::crosscheck::seed_from_env(), || {
        let geo = SodeGeometry::new(&sode).expect("geometry");
        check_dissipative(&geo, &g, &d).expect("well-formed")
    });
    println!("symbolic verdict: {}", if report.pass { "pass" } else { "fail" });
    let cells = crosscheck_report(&report, &mut sampler, 5);
    let derivs = crosscheck_derivatives(&samples, &mut sampler);
    println!("{} cells at {} points, failures {:?}", cells.checked, cells.evaluations, cells.failures);
    println!("{} derivatives against finite differences, failures {:?}", derivs.checked, derivs.failures);
}
