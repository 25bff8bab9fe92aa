//! From (L, D) to the equations of motion and back: the reconstructed
//! certificate may differ from the original by a gauge term, but it
//! reproduces the same system.
//!
//! cargo run --example forward_round_trip

use invlag::conditions::check_dissipative;
use invlag::expr::ExprContext;
use invlag::geometry::SodeGeometry;
use invlag::reconstruct::{forward_sode, hessian, reconstruct_dissipative};

fn main() {
    let ctx = ExprContext::explicit(2, &[]).expect("valid context");
    let l = ctx.parse("v1^2 + v1*v2/2 + 3*v2^2/2 - q1^3/3 + q1*q2").expect("parses");
    let d = ctx.parse("q2*v1^3 - v1*v2/2").expect("parses");
    let sode = forward_sode(&ctx, &l, &d).expect("regular Lagrangian");
    for (i, f) in sode.f().iter().enumerate() {
        println!("q̈{} = {}", i + 1, ctx.print(f));
    }
    let geo = SodeGeometry::new(&sode).expect("geometry");
    let g = hessian(&l, 2);
    println!("conditions with g = Hessian(L): {}", check_dissipative(&geo, &g, &d).expect("well-formed").pass);

    let cert = reconstruct_dissipative(&geo, &g).expect("reconstructible");
    println!("{}", cert.display(&ctx));
    println!("reconstructed certificate reproduces the system: {}", cert.verify(&sode).expect("verifiable").pass);
}
