//! Exact symbolic kernel.
//!
//! Every coordinate expression is an [`Expr`]: a quotient of multivariate
//! polynomials with rational coefficients, kept in canonical form
//! (numerator and denominator coprime, denominator monic in the lex
//! order). Two expressions are equal exactly when their canonical forms
//! coincide, so [`Expr::is_zero`] decides identical vanishing.

mod audit;
mod context;
mod display;
mod parse;
pub mod poly;
mod var;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

pub use audit::{record_derivatives, DerivativeSample};
pub use context::ExprContext;
pub use display::ExprDisplay;
pub use poly::{rat, ratio, Monomial, Poly, Rational};
pub use var::{Var, VarKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at column {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("`{name}` has jet order {order}, above the allowed maximum {max}")]
    JetOrderTooHigh { name: String, order: u8, max: u8 },
    #[error("invalid parameter name `{0}`")]
    InvalidParameterName(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expression is not polynomial in {0}")]
    NotPolynomialIn(String),
    #[error("expression has a pole at the evaluation point")]
    Pole,
    #[error("no value given for {0}")]
    Unbound(String),
}

/// Canonical rational function.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Expr {
    pub fn zero() -> Self {
        Expr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(ratio(n, d))
    }

    pub fn constant(c: Rational) -> Self {
        Expr { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn var(v: Var) -> Self {
        Expr { num: Poly::var(v), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        Expr { num: p, den: Poly::one() }
    }

    /// Builds `num / den` and reduces it to canonical form.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        if let Some(c) = den.as_constant() {
            return Ok(Expr { num: num.scale(&c.recip()), den: Poly::one() });
        }
        let g = poly::gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        Ok(Self::normalized(num, den))
    }

    /// Scales a coprime pair so the denominator is monic.
    fn normalized(num: Poly, den: Poly) -> Self {
        let lc = den.leading().1.clone();
        if lc.is_one() {
            Expr { num, den }
        } else {
            let inv = lc.recip();
            Expr { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vs = self.num.vars();
        vs.extend(self.den.vars());
        vs
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    pub fn depends_on_any(&self, pred: impl Fn(Var) -> bool + Copy) -> bool {
        self.num.contains_any(pred) || self.den.contains_any(pred)
    }

    /// True when the denominator is free of every variable selected by `pred`.
    pub fn is_polynomial_in(&self, pred: impl Fn(Var) -> bool) -> bool {
        !self.den.contains_any(pred)
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        Ok(self * &other.recip()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i32) -> Result<Expr, ExprError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let k = e.unsigned_abs();
        Ok(Expr { num: base.num.pow(k), den: base.den.pow(k) })
    }

    /// Exact partial derivative.
    pub fn diff(&self, v: Var) -> Expr {
        let out = if self.den.is_one() {
            Expr { num: self.num.diff(v), den: Poly::one() }
        } else if !self.den.contains_var(v) {
            // the derivative can share a v-free factor with the denominator
            Expr::from_parts(self.num.diff(v), self.den.clone()).expect("non-zero denominator")
        } else {
            let num = self.num.diff(v).mul(&self.den).sub(&self.num.mul(&self.den.diff(v)));
            let den = self.den.mul(&self.den);
            Expr::from_parts(num, den).expect("square of a non-zero denominator")
        };
        audit::note(self, v, &out);
        out
    }

    /// Antiderivative in `v` with zero constant term. The denominator must
    /// not involve `v`.
    pub fn integrate_poly(&self, v: Var) -> Result<Expr, ExprError> {
        if self.den.contains_var(v) {
            return Err(ExprError::NotPolynomialIn(v.to_string()));
        }
        Expr::from_parts(self.num.integrate(v), self.den.clone())
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn subst(&self, bindings: &HashMap<Var, Expr>) -> Result<Expr, ExprError> {
        if bindings.is_empty() || !self.vars().iter().any(|v| bindings.contains_key(v)) {
            return Ok(self.clone());
        }
        let mut cache: HashMap<(Var, u32), Expr> = HashMap::new();
        let num = subst_poly(&self.num, bindings, &mut cache);
        let den = subst_poly(&self.den, bindings, &mut cache);
        num.checked_div(&den)
    }

    /// Substitutes a single variable.
    pub fn subst_one(&self, v: Var, value: &Expr) -> Result<Expr, ExprError> {
        let mut b = HashMap::new();
        b.insert(v, value.clone());
        self.subst(&b)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &BTreeMap<Var, Rational>) -> Result<Rational, ExprError> {
        let lookup = |v: Var| point.get(&v).cloned();
        let unbound = || {
            let missing = self.vars().into_iter().find(|v| !point.contains_key(v));
            ExprError::Unbound(missing.map(|v| v.to_string()).unwrap_or_default())
        };
        let d = self.den.eval(lookup).ok_or_else(unbound)?;
        if d.is_zero() {
            return Err(ExprError::Pole);
        }
        let n = self.num.eval(lookup).ok_or_else(unbound)?;
        Ok(n / d)
    }

    /// Floating evaluation; unbound variables read as 0.
    pub fn eval_f64(&self, point: &BTreeMap<Var, f64>) -> f64 {
        let value = |v: Var| point.get(&v).copied().unwrap_or(0.0);
        self.num.eval_f64(value) / self.den.eval_f64(value)
    }

    pub fn display<'a>(&'a self, ctx: &'a ExprContext) -> ExprDisplay<'a> {
        ExprDisplay::new(self, Some(ctx))
    }
}

fn subst_poly(p: &Poly, bindings: &HashMap<Var, Expr>, cache: &mut HashMap<(Var, u32), Expr>) -> Expr {
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        let mut t = Expr::constant(c.clone());
        for &(v, e) in m.factors() {
            let f = cache
                .entry((v, e))
                .or_insert_with(|| match bindings.get(&v) {
                    Some(x) => x.pow(e as i32).expect("non-negative power"),
                    None => Expr::from_poly(Poly::term(Monomial::var(v, e), Rational::one())),
                })
                .clone();
            t = &t * &f;
        }
        acc = &acc + &t;
    }
    acc
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ExprDisplay::new(self, None))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ExprDisplay::new(self, None))
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;

    fn add(self, rhs: &Expr) -> Expr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            if self.den.is_one() {
                return Expr { num: self.num.add(&rhs.num), den: Poly::one() };
            }
            return Expr::from_parts(self.num.add(&rhs.num), self.den.clone()).expect("non-zero denominator");
        }
        if self.den.is_one() {
            return Expr { num: self.num.mul(&rhs.den).add(&rhs.num), den: rhs.den.clone() };
        }
        if rhs.den.is_one() {
            return Expr { num: rhs.num.mul(&self.den).add(&self.num), den: self.den.clone() };
        }
        let g = poly::gcd(&self.den, &rhs.den);
        let a = self.den.div_exact(&g).expect("gcd divides");
        let b = rhs.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&b).add(&rhs.num.mul(&a));
        let den = self.den.mul(&b);
        Expr::from_parts(num, den).expect("non-zero denominator")
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;

    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;

    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Expr { num: self.num.mul(&rhs.num), den: Poly::one() };
        }
        let g1 = poly::gcd(&self.num, &rhs.den);
        let g2 = poly::gcd(&rhs.num, &self.den);
        let a = self.num.div_exact(&g1).expect("gcd divides");
        let d = rhs.den.div_exact(&g1).expect("gcd divides");
        let c = rhs.num.div_exact(&g2).expect("gcd divides");
        let b = self.den.div_exact(&g2).expect("gcd divides");
        Expr::normalized(a.mul(&c), b.mul(&d))
    }
}

impl Neg for &Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &'a Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests;
