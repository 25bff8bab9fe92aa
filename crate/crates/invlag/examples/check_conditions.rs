//! Condition suites on the damped, gyroscopic two-dimensional oscillator:
//! which multipliers admit which kind of Lagrangian representation.
//!
//! cargo run --example check_conditions

use invlag::conditions::{check_classical, check_dissipative, check_multiplier_gyroscopic};
use invlag::expr::{Expr, ExprContext};
use invlag::geometry::{Sode, SodeGeometry};
use invlag::tensor::TensorField;

fn main() {
    let ctx = ExprContext::explicit(2, &["a", "b", "omega"]).expect("valid context");
    let sode = Sode::parse(ctx.clone(), &["-a*q1 - b*q2 - omega*v1", "b*q1 - a*q2 + omega*v2"]).expect("valid system");
    let geo = SodeGeometry::new(&sode).expect("geometry");
    let e = |s: &str| ctx.parse(s).expect("parses");

    let antidiagonal = TensorField::from_rows(vec![vec![Expr::zero(), Expr::one()], vec![Expr::one(), Expr::zero()]]);
    let identity = TensorField::identity(2);

    let classical = check_classical(&geo, &antidiagonal).expect("well-formed");
    println!("antidiagonal g, classical:\n{}", classical.display(&ctx));

    let failing = check_classical(&geo, &identity).expect("well-formed");
    let labels: Vec<&str> = failing.failing().map(|c| c.label.as_str()).collect();
    println!("identity g, classical fails on {labels:?}");

    let d = e("-a*(q1*v1 + q2*v2) + b*(q1*v2 - q2*v1) + omega*(v2^2 - v1^2)/2");
    let dissipative = check_dissipative(&geo, &identity, &d).expect("well-formed");
    println!("identity g with dissipation, verdict {}", if dissipative.pass { "pass" } else { "fail" });

    let gyroscopic = check_multiplier_gyroscopic(&geo, &identity).expect("well-formed");
    println!("identity g, gyroscopic multiplier conditions: {}", if gyroscopic.pass { "pass" } else { "fail" });
}
