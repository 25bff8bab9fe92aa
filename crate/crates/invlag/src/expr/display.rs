use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::{Expr, ExprContext, Monomial, Poly, Rational};

/// Renders an [`Expr`] in the parser's own grammar.
///
/// Terms appear in descending monomial order; a non-trivial denominator
/// is written as `num/den` with parentheses only where precedence needs
/// them.
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    ctx: Option<&'a ExprContext>,
}

impl<'a> ExprDisplay<'a> {
    pub fn new(expr: &'a Expr, ctx: Option<&'a ExprContext>) -> Self {
        ExprDisplay { expr, ctx }
    }

    fn monomial(&self, m: &Monomial, out: &mut String) {
        for (i, &(v, e)) in m.factors().iter().enumerate() {
            if i > 0 {
                out.push('*');
            }
            match self.ctx {
                Some(ctx) => out.push_str(&ctx.var_name(v)),
                None => write!(out, "{v}").unwrap(),
            }
            if e > 1 {
                write!(out, "^{e}").unwrap();
            }
        }
    }

    fn magnitude(&self, m: &Monomial, c: &Rational, out: &mut String) {
        let c = c.abs();
        if m.is_one() {
            write!(out, "{c}").unwrap();
        } else if c.is_one() {
            self.monomial(m, out);
        } else {
            write!(out, "{c}*").unwrap();
            self.monomial(m, out);
        }
    }

    fn poly(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in p.terms().rev().enumerate() {
            match (i, c.is_negative()) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            self.magnitude(m, c, &mut out);
        }
        out
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.expr.numer();
        let den = self.expr.denom();
        if den.is_one() {
            return f.write_str(&self.poly(num));
        }
        let num_s = if num.len() == 1 { self.poly(num) } else { format!("({})", self.poly(num)) };
        let single_factor = den.len() == 1 && den.leading().0.factors().len() == 1;
        let den_s = if single_factor { self.poly(den) } else { format!("({})", self.poly(den)) };
        write!(f, "{num_s}/{den_s}")
    }
}
