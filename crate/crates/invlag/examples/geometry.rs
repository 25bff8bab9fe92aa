//! The connection, Jacobi endomorphism and curvature of a SODE
//! (the bundled three-dimensional example).
//!
//! cargo run --example geometry

use invlag::expr::ExprContext;
use invlag::geometry::{Sode, SodeGeometry};

fn main() {
    let ctx = ExprContext::explicit(3, &[]).expect("valid context");
    let sode = Sode::parse(ctx.clone(), &["q2*v1*v3", "v3^2", "v1^2 - v2*v3/q2"]).expect("valid system");
    let geo = SodeGeometry::new(&sode).expect("curvature formulas agree");

    println!("connection Γⁱⱼ:\n{}", geo.connection.display(&ctx));
    println!("Jacobi endomorphism Φⁱⱼ:\n{}", geo.jacobi.display(&ctx));
    println!("curvature, as 2-form coefficients:");
    let form = geo.curvature_form();
    for k in 0..3 {
        for i in 0..3 {
            for j in i + 1..3 {
                let c = form.at3(k, i, j);
                if !c.is_zero() {
                    println!("  dq{}∧dq{} ⊗ ∂/∂q{}: {}", i + 1, j + 1, k + 1, ctx.print(c));
                }
            }
        }
    }
    let identity = geo.vertical_exterior_jacobi() == geo.curvature.map(|e| e.scale(&invlag::expr::rat(3)));
    println!("d_vΦ = 3R: {identity}");
}
