//! Exact rational-function arithmetic: parsing, canonical form,
//! differentiation, substitution and evaluation.
//!
//! cargo run --example expressions

use std::collections::{BTreeMap, HashMap};

use invlag::expr::{rat, Expr, ExprContext, Var};

fn main() {
    let ctx = ExprContext::explicit(3, &[]).expect("valid context");
    let f3 = ctx.parse("v1^2 - (1/q2)*v2*v3").expect("parses");
    println!("f3            = {}", ctx.print(&f3));
    println!("∂f3/∂q2       = {}", ctx.print(&f3.diff(Var::q(2))));
    println!("∂²f3/∂v2∂v3   = {}", ctx.print(&f3.diff(Var::v(2)).diff(Var::v(3))));

    // the fibre scaling v ↦ s·v used by the homotopy operators
    let s = Expr::var(Var::aux(0));
    let scaling: HashMap<Var, Expr> = (1..=3).map(|k| (Var::v(k), &s * &Expr::var(Var::v(k)))).collect();
    let scaled = f3.subst(&scaling).expect("no poles");
    println!("f3(q, s·v)    = {}", scaled);

    let point = BTreeMap::from([(Var::q(2), rat(2)), (Var::v(1), rat(3)), (Var::v(2), rat(1)), (Var::v(3), rat(5))]);
    println!("f3 at a point = {}", f3.eval(&point).expect("not a pole"));

    // canonical form makes the zero test structural
    let lhs = ctx.parse("(q1^2 - q2^2)/(q1 - q2)").expect("parses");
    let rhs = ctx.parse("q1 + q2").expect("parses");
    println!("(q1²−q2²)/(q1−q2) == q1+q2: {}", lhs == rhs);
}
