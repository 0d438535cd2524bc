//! Infix expression syntax shared by scalar parameters, exterior forms and
//! the manifest format: `+ - * / ^`, integer literals, identifiers and
//! parentheses. Evaluation is delegated to a [`Domain`].

use num_bigint::BigInt;

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(BigInt),
    Ident(String),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, i32),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = bytes[start..i].iter().collect();
            out.push((start, Tok::Num(s.parse().unwrap())));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(bytes[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError { offset: i, message: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: msg.to_string() })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat('/') {
                lhs = Ast::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.factor()?)));
        }
        if self.eat('+') {
            return self.factor();
        }
        let base = self.primary()?;
        if self.eat('^') {
            let neg = self.eat('-');
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: i32 = match i32::try_from(n) {
                        Ok(e) => e,
                        Err(_) => return self.err("exponent too large"),
                    };
                    Ok(Ast::Pow(Box::new(base), if neg { -e } else { e }))
                }
                _ => self.err("expected integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Ast, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Ast::Num(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Ast::Ident(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(_) => self.err("expected a number, identifier or '('"),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse(src: &str) -> Result<Ast, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, len: src.len() };
    let ast = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(ast)
}

impl Ast {
    pub fn identifiers(&self, out: &mut Vec<String>) {
        match self {
            Ast::Num(_) => {}
            Ast::Ident(s) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) => {
                a.identifiers(out);
                b.identifiers(out);
            }
            Ast::Neg(a) | Ast::Pow(a, _) => a.identifiers(out),
        }
    }
}

/// Interpretation of the expression syntax in some algebra.
pub trait Domain {
    type Value;
    type Error;

    fn number(&self, n: &BigInt) -> Result<Self::Value, Self::Error>;
    fn ident(&self, name: &str) -> Result<Self::Value, Self::Error>;
    fn add(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, Self::Error>;
    fn sub(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, Self::Error>;
    fn mul(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, Self::Error>;
    fn div(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, Self::Error>;
    fn neg(&self, a: Self::Value) -> Result<Self::Value, Self::Error>;
    fn pow(&self, a: Self::Value, e: i32) -> Result<Self::Value, Self::Error>;
}

pub fn eval<D: Domain>(ast: &Ast, d: &D) -> Result<D::Value, D::Error> {
    match ast {
        Ast::Num(n) => d.number(n),
        Ast::Ident(s) => d.ident(s),
        Ast::Add(a, b) => d.add(eval(a, d)?, eval(b, d)?),
        Ast::Sub(a, b) => d.sub(eval(a, d)?, eval(b, d)?),
        Ast::Mul(a, b) => d.mul(eval(a, d)?, eval(b, d)?),
        Ast::Div(a, b) => d.div(eval(a, d)?, eval(b, d)?),
        Ast::Neg(a) => d.neg(eval(a, d)?),
        Ast::Pow(a, e) => d.pow(eval(a, d)?, *e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let a = parse("-x^2 + 3*y/2").unwrap();
        let expected = Ast::Add(
            Box::new(Ast::Neg(Box::new(Ast::Pow(Box::new(Ast::Ident("x".into())), 2)))),
            Box::new(Ast::Div(
                Box::new(Ast::Mul(
                    Box::new(Ast::Num(3.into())),
                    Box::new(Ast::Ident("y".into())),
                )),
                Box::new(Ast::Num(2.into())),
            )),
        );
        assert_eq!(a, expected);
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse("x + (y").unwrap_err();
        assert_eq!(e.offset, 6);
        assert!(parse("x $ y").is_err());
        assert!(parse("x y").is_err());
    }
}
