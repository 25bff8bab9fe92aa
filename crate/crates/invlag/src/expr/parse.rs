//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' exponent)?
//! exponent := '-'? INT | '(' '-'? INT ')'
//! atom   := INT | IDENT | '(' expr ')'
//! ```
//!
//! Positions in errors are 1-based character columns.

use num_bigint::BigInt;

use super::context::{reserved, Reserved};
use super::{Expr, ExprContext, ExprError, Rational, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

impl Lexer {
    fn new(text: &str) -> Result<Self, ExprError> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                if i < chars.len() && (chars[i] == '.' || chars[i].is_ascii_alphabetic()) {
                    return Err(ExprError::Syntax { pos: i + 1, msg: format!("unexpected `{}` after number", chars[i]) });
                }
                toks.push((Tok::Int(digits.parse().expect("digits")), pos));
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            } else if "+-*/^()".contains(c) {
                toks.push((Tok::Op(c), pos));
                i += 1;
            } else {
                return Err(ExprError::Syntax { pos, msg: format!("unexpected character `{c}`") });
            }
        }
        toks.push((Tok::End, chars.len() + 1));
        Ok(Lexer { toks })
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    ctx: &'a ExprContext,
}

pub(crate) fn parse(text: &str, ctx: &ExprContext) -> Result<Expr, ExprError> {
    let lexer = Lexer::new(text)?;
    let mut p = Parser { toks: lexer.toks, at: 0, ctx };
    if p.peek() == &Tok::End {
        return Err(ExprError::Syntax { pos: 1, msg: "empty expression".into() });
    }
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.error(format!("unexpected {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: String) -> ExprError {
        ExprError::Syntax { pos: self.pos(), msg }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == &Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.peek() == &Tok::Op('/') {
                let pos = self.pos();
                self.bump();
                let rhs = self.unary()?;
                acc = acc.checked_div(&rhs).map_err(|_| ExprError::Syntax { pos, msg: "division by zero".into() })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() != &Tok::Op('^') {
            return Ok(base);
        }
        let pos = self.pos();
        self.bump();
        let e = self.exponent()?;
        base.pow(e).map_err(|_| ExprError::Syntax { pos, msg: "negative power of zero".into() })
    }

    fn exponent(&mut self) -> Result<i32, ExprError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let pos = self.pos();
        let k = match self.bump() {
            Tok::Int(n) => i32::try_from(n).map_err(|_| ExprError::Syntax { pos, msg: "exponent too large".into() })?,
            t => return Err(ExprError::Syntax { pos, msg: format!("expected integer exponent, found {}", describe(&t)) }),
        };
        if paren && !self.eat(')') {
            return Err(self.error("expected `)` after exponent".into()));
        }
        Ok(if neg { -k } else { k })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::constant(Rational::from_integer(n))),
            Tok::Ident(name) => self.ident(&name, pos),
            Tok::Op('(') => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(format!("expected `)`, found {}", describe(self.peek()))));
                }
                Ok(e)
            }
            t => Err(ExprError::Syntax { pos, msg: format!("unexpected {}", describe(&t)) }),
        }
    }

    fn ident(&self, name: &str, pos: usize) -> Result<Expr, ExprError> {
        let unknown = || ExprError::UnknownIdentifier { name: name.to_string(), pos };
        match reserved(name) {
            Some(Reserved::Time) if self.ctx.uses_time() => Ok(Expr::var(Var::time())),
            Some(Reserved::Time) => Err(unknown()),
            Some(Reserved::Jet { index, order }) => {
                if index == 0 || index > self.ctx.n() {
                    return Err(unknown());
                }
                if order > self.ctx.max_jet_order() {
                    return Err(ExprError::JetOrderTooHigh {
                        name: name.to_string(),
                        order,
                        max: self.ctx.max_jet_order(),
                    });
                }
                Ok(Expr::var(Var::jet(index, order)))
            }
            None => self.ctx.param(name).map(Expr::var).ok_or_else(unknown),
        }
    }
}
