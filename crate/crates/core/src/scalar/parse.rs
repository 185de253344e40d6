//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | ident | 'I' | 'exp' '(' expr ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use super::field::ScalarField;
use super::num::Q;
use super::Chart;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at {pos}")]
    UnknownVariable { pos: usize, name: String },
    #[error("exponent at {pos} is not a nonnegative integer")]
    NonIntegerExponent { pos: usize },
    #[error("argument of exp at {pos} is not a linear form in the chart variables")]
    NonLinearExp { pos: usize },
    #[error("division by zero at {pos}")]
    DivisionByZero { pos: usize },
}

impl ParseError {
    pub fn pos(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownVariable { pos, .. }
            | ParseError::NonIntegerExponent { pos }
            | ParseError::NonLinearExp { pos }
            | ParseError::DivisionByZero { pos } => *pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            if i < b.len() && (b[i] == b'.' || b[i].is_ascii_alphabetic() || b[i] == b'_') {
                return Err(ParseError::Syntax { pos: i, msg: "malformed number".into() });
            }
            out.push((s, Tok::Int(src[s..i].parse().unwrap())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((s, Tok::Ident(src[s..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    chart: &'a Chart,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax { pos: self.pos(), msg: format!("expected `{c}`") })
        }
    }

    fn expr(&mut self) -> Result<ScalarField, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarField, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    acc = acc.checked_div(&d).ok_or(ParseError::DivisionByZero { pos })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarField, ParseError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ScalarField, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => {
                let e: u32 = n.try_into().map_err(|_| ParseError::NonIntegerExponent { pos })?;
                Ok(base.pow(e))
            }
            _ => Err(ParseError::NonIntegerExponent { pos }),
        }
    }

    fn atom(&mut self) -> Result<ScalarField, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(ScalarField::constant(self.chart, Q::from_integer(n))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) if name == "I" => {
                Ok(ScalarField::constant_c(self.chart, Complex::new(Q::zero(), Q::one())))
            }
            Tok::Ident(name) if name == "exp" => {
                self.expect('(')?;
                let arg_pos = self.pos();
                let arg = self.expr()?;
                self.expect(')')?;
                let form = linear_form(&arg).ok_or(ParseError::NonLinearExp { pos: arg_pos })?;
                Ok(ScalarField::from_poly(
                    self.chart,
                    super::poly::ExpPoly::exp_of_form(self.chart.nvars(), form),
                ))
            }
            Tok::Ident(name) => match self.chart.index_of(&name) {
                Some(i) => Ok(ScalarField::var(self.chart, i)),
                None => Err(ParseError::UnknownVariable { pos, name }),
            },
            Tok::End => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Sym(c) => Err(ParseError::Syntax { pos, msg: format!("unexpected `{c}`") }),
        }
    }
}

/// Coefficients of a homogeneous rational linear form, if `f` is one.
fn linear_form(f: &ScalarField) -> Option<Vec<Q>> {
    if !f.is_polynomial() {
        return None;
    }
    let n = f.chart().nvars();
    let mut form = vec![Q::zero(); n];
    for (k, c) in f.numer().terms() {
        if !k.form_is_zero() || !c.im.is_zero() || k.degree() != 1 {
            return None;
        }
        let i = k.mono.iter().position(|&a| a == 1)?;
        form[i] = c.re.clone();
    }
    Some(form)
}

pub fn parse(src: &str, chart: &Chart) -> Result<ScalarField, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, chart };
    let f = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(f)
}
