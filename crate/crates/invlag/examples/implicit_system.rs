//! Generalized Helmholtz conditions for a system given in implicit form
//! fᵢ(t, q, q̇, q̈) = 0, and how an asymmetric velocity term breaks them.
//!
//! cargo run --example implicit_system

use invlag::conditions::{check_implicit, ImplicitSystem};
use invlag::expr::ExprContext;

fn main() {
    let ctx = ExprContext::implicit(2, &["omega"]).expect("valid context");
    let damped = ImplicitSystem::parse(ctx.clone(), &["d2q1 + omega*v1 + q1^3", "d2q2 + omega*v2"]).expect("second order");
    let report = check_implicit(&damped);
    println!("damped anharmonic oscillator: {}", if report.pass { "pass" } else { "fail" });

    let skewed = ImplicitSystem::parse(ctx.clone(), &["d2q1 + v2^2", "d2q2"]).expect("second order");
    let report = check_implicit(&skewed);
    let failing: Vec<&str> = report.failing().map(|c| c.label.as_str()).collect();
    println!("with q̇2² in the first equation, failing cells: {failing:?}");
}
