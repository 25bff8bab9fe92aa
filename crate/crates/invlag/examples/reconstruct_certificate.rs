//! Building a Lagrangian together with a dissipation function or a
//! gyroscopic 2-form from a multiplier that passes the conditions.
//!
//! cargo run --example reconstruct_certificate

use invlag::expr::{Expr, ExprContext};
use invlag::geometry::{Sode, SodeGeometry};
use invlag::reconstruct::{reconstruct_dissipative, reconstruct_gyroscopic};
use invlag::tensor::TensorField;

fn main() {
    let ctx = ExprContext::explicit(3, &[]).expect("valid context");
    let sode = Sode::parse(ctx.clone(), &["q2*v1*v3", "v3^2", "v1^2 - v2*v3/q2"]).expect("valid system");
    let geo = SodeGeometry::new(&sode).expect("geometry");
    let g = TensorField::diagonal(vec![Expr::int(4), Expr::one(), ctx.parse("2*q2").expect("parses")]);
    let cert = reconstruct_dissipative(&geo, &g).expect("g passes the dissipative conditions");
    println!("{}", cert.display(&ctx));
    println!("verified: {}\n", cert.verify(&sode).expect("verifiable").pass);

    let ctx2 = ExprContext::explicit(2, &["a", "b", "omega"]).expect("valid context");
    let sode = Sode::parse(ctx2.clone(), &["-a*q1 - b*q2 - omega*v1", "b*q1 - a*q2 + omega*v2"]).expect("valid system");
    let geo = SodeGeometry::new(&sode).expect("geometry");
    let g = TensorField::from_rows(vec![vec![Expr::zero(), Expr::one()], vec![Expr::one(), Expr::zero()]]);
    let cert = reconstruct_gyroscopic(&geo, &g).expect("g passes the gyroscopic conditions");
    println!("{}", cert.display(&ctx2));
    println!("verified: {}", cert.verify(&sode).expect("verifiable").pass);
}
