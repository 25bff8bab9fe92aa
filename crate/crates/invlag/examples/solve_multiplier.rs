//! Searching a finite ansatz for a nonsingular multiplier: one system where
//! a diagonal quadratic multiplier exists, one where every solution is
//! structurally singular.
//!
//! cargo run --example solve_multiplier

use invlag::conditions::Suite;
use invlag::expr::{ExprContext, Var};
use invlag::geometry::{Sode, SodeGeometry};
use invlag::solver::{find_nonsingular, forced_zero_entries, solve_problem, AnsatzProblem, SearchOptions, SearchOutcome};

fn main() {
    let ctx = ExprContext::explicit(3, &[]).expect("valid context");
    let sode = Sode::parse(ctx.clone(), &["q2*v1*v3", "v3^2", "v1^2 - v2*v3/q2"]).expect("valid system");
    let geo = SodeGeometry::new(&sode).expect("geometry");
    let ansatz = AnsatzProblem::polynomial_q(Suite::Thm3, 3, 2).expect("supported suite").diagonal();
    let (system, space) = solve_problem(&geo, &ansatz).expect("linear system");
    println!("{} unknowns, {} equations, solution space of dimension {}", system.unknowns.len(), system.equations.len(), space.dimension());
    match find_nonsingular(&geo, &ansatz, &space, SearchOptions { bound: 1, ..Default::default() }).expect("search") {
        SearchOutcome::Found(rep) => println!("g =\n{}det g = {}", rep.g.display(&ctx), ctx.print(&rep.det)),
        other => println!("no representative: {other:?}"),
    }

    let ctx4 = ExprContext::explicit(4, &["b"]).expect("valid context");
    let sode = Sode::parse(
        ctx4,
        &["b*v1*v4", "v2*v4", "(1 - b)*v1*v2 + b*q2*v1*v4 - b*q1*v2*v4 + (b + 1)*v3*v4", "0"],
    )
    .expect("valid system");
    let geo = SodeGeometry::new(&sode).expect("geometry");
    let invariant = AnsatzProblem::polynomial(Suite::Thm3, 4, &[Var::q(1), Var::q(2)], 1).expect("supported suite");
    let (_, space) = solve_problem(&geo, &invariant).expect("linear system");
    let forced: Vec<String> = forced_zero_entries(&invariant, &space).iter().map(|(i, j)| format!("g{}{}", i + 1, j + 1)).collect();
    println!("translation-invariant ansatz: forced to zero {forced:?}");
    println!("{:?}", find_nonsingular(&geo, &invariant, &space, SearchOptions::default()).expect("search"));
}
