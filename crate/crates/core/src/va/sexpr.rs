//! Canonical text for expressions and λ-polynomials, and a reader for the
//! same s-expression syntax.
//!
//! ```text
//! PE1                      generator
//! (T PE1)  (T^3 E2)        derivatives
//! (nop a b c)              :a:bc::
//! (S x)  (+ x y)  (- x y)  (- x)
//! (* 1/2 x)  (* [k/l] x)   scalar multiples; [..] holds any scalar expression
//! (prod 1 x y)             the 1-product x_(1)y
//! vac                      vacuum
//! ```

use std::fmt::Write as _;

use crate::scalar::{Ring, Scalar, ScalarError};

use super::engine::Engine;
use super::expr::{Expr, LambdaPoly, Letter};

pub fn letter_text(engine: &Engine, l: Letter) -> String {
    let name = &engine.presentation().generators()[l.gen()].name;
    match l.deriv() {
        0 => name.clone(),
        1 => format!("(T {name})"),
        d => format!("(T^{d} {name})"),
    }
}

pub fn word_text(engine: &Engine, w: &[Letter]) -> String {
    match w.len() {
        0 => "vac".into(),
        1 => letter_text(engine, w[0]),
        _ => {
            let mut s = String::from("(nop");
            for &l in w {
                s.push(' ');
                s.push_str(&letter_text(engine, l));
            }
            s.push(')');
            s
        }
    }
}

fn scalar_atom(c: &Scalar) -> String {
    let t = c.to_string();
    if t.chars().all(|ch| ch.is_ascii_digit() || ch == '/' || ch == '-') {
        t
    } else {
        format!("[{t}]")
    }
}

pub fn expr_text(engine: &Engine, e: &Expr) -> String {
    let terms = e.sorted_terms();
    let render = |(w, c): (&super::Word, &Scalar)| {
        let wt = word_text(engine, w);
        if c.is_one() {
            wt
        } else if c.neg_ref().is_one() {
            format!("(- {wt})")
        } else {
            format!("(* {} {wt})", scalar_atom(c))
        }
    };
    match terms.len() {
        0 => "0".into(),
        1 => render(terms[0]),
        _ => {
            let mut s = String::from("(+");
            for t in terms {
                s.push(' ');
                s.push_str(&render(t));
            }
            s.push(')');
            s
        }
    }
}

/// `(lpoly (n coeff) ..)`, or `0`.
pub fn lambda_text(engine: &Engine, p: &LambdaPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::from("(lpoly");
    for (n, c) in p.iter() {
        let _ = write!(s, " ({n} {})", expr_text(engine, c));
    }
    s.push(')');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SexprError {
    #[error("unexpected end of input")]
    Eof,
    #[error("unexpected `{0}` at offset {1}")]
    Unexpected(String, usize),
    #[error("unknown name `{0}`")]
    Unknown(String),
    #[error("`{0}`: {1}")]
    Arity(String, String),
    #[error("product of two non-scalar expressions; use (nop ..)")]
    NonScalarProduct,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone)]
enum Tree {
    Atom(String, usize),
    Bracketed(String),
    List(Vec<Tree>),
}

fn tokenize(src: &str) -> Result<Tree, SexprError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut pos = 0;
    let t = read(&chars, &mut pos)?;
    skip_ws(&chars, &mut pos);
    if let Some(&(off, c)) = chars.get(pos) {
        return Err(SexprError::Unexpected(c.to_string(), off));
    }
    Ok(t)
}

fn skip_ws(chars: &[(usize, char)], pos: &mut usize) {
    while chars.get(*pos).is_some_and(|(_, c)| c.is_whitespace()) {
        *pos += 1;
    }
}

fn read(chars: &[(usize, char)], pos: &mut usize) -> Result<Tree, SexprError> {
    skip_ws(chars, pos);
    let &(off, c) = chars.get(*pos).ok_or(SexprError::Eof)?;
    match c {
        '(' => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    None => return Err(SexprError::Eof),
                    Some((_, ')')) => {
                        *pos += 1;
                        return Ok(Tree::List(items));
                    }
                    _ => items.push(read(chars, pos)?),
                }
            }
        }
        ')' => Err(SexprError::Unexpected(")".into(), off)),
        '[' => {
            *pos += 1;
            let mut depth = 1;
            let mut s = String::new();
            while let Some(&(_, ch)) = chars.get(*pos) {
                *pos += 1;
                match ch {
                    '[' => depth += 1,
                    ']' => {
                        depth -= 1;
                        if depth == 0 {
                            return Ok(Tree::Bracketed(s));
                        }
                    }
                    _ => {}
                }
                s.push(ch);
            }
            Err(SexprError::Eof)
        }
        _ => {
            let mut s = String::new();
            while let Some(&(_, ch)) = chars.get(*pos) {
                if ch.is_whitespace() || ch == '(' || ch == ')' || ch == '[' {
                    break;
                }
                s.push(ch);
                *pos += 1;
            }
            Ok(Tree::Atom(s, off))
        }
    }
}

#[derive(Debug, Clone)]
pub enum Value {
    Scalar(Scalar),
    Expr(Expr),
}

impl Value {
    fn into_expr(self) -> Expr {
        match self {
            Value::Scalar(s) => Expr::scalar(s),
            Value::Expr(e) => e,
        }
    }
}

/// Reads an expression; `lookup` resolves names other than generators
/// (field names, aliases).
pub fn parse_expr(engine: &Engine, src: &str, lookup: &dyn Fn(&str) -> Option<Expr>) -> Result<Expr, SexprError> {
    let tree = tokenize(src)?;
    Ok(eval(engine, &tree, lookup)?.into_expr())
}

fn parse_number(ring: &Ring, s: &str) -> Option<Scalar> {
    let ok = !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || c == '/' || c == '-') && s != "-";
    if ok {
        ring.parse(s).ok()
    } else {
        None
    }
}

fn eval(engine: &Engine, t: &Tree, lookup: &dyn Fn(&str) -> Option<Expr>) -> Result<Value, SexprError> {
    let ring = engine.ring();
    match t {
        Tree::Bracketed(s) => Ok(Value::Scalar(ring.parse(s)?)),
        Tree::Atom(a, _) => {
            if a == "vac" {
                return Ok(Value::Expr(engine.vacuum()));
            }
            if let Some(e) = engine.gen(a).or_else(|| lookup(a)) {
                return Ok(Value::Expr(e));
            }
            if let Some(s) = parse_number(ring, a).or_else(|| ring.var(a)) {
                return Ok(Value::Scalar(s));
            }
            Err(SexprError::Unknown(a.clone()))
        }
        Tree::List(items) => {
            let Some(Tree::Atom(head, off)) = items.first() else {
                return Err(SexprError::Unexpected("list without operator".into(), 0));
            };
            let args = &items[1..];
            let ev = |t: &Tree| eval(engine, t, lookup);
            let arity = |msg: &str| SexprError::Arity(head.clone(), msg.into());
            match head.as_str() {
                "nop" => {
                    if args.is_empty() {
                        return Err(arity("needs arguments"));
                    }
                    let mut vals: Vec<Expr> = args.iter().map(|a| ev(a).map(Value::into_expr)).collect::<Result<_, _>>()?;
                    let mut cur = vals.pop().unwrap();
                    while let Some(v) = vals.pop() {
                        cur = engine.nop(&v, &cur);
                    }
                    Ok(Value::Expr(cur))
                }
                "S" | "T" if args.len() == 1 => {
                    let x = ev(&args[0])?.into_expr();
                    Ok(Value::Expr(if head == "S" { engine.apply_s(&x) } else { engine.apply_t(&x) }))
                }
                h if h.starts_with("T^") && args.len() == 1 => {
                    let n: u32 = h[2..].parse().map_err(|_| SexprError::Unknown(h.into()))?;
                    let x = ev(&args[0])?.into_expr();
                    Ok(Value::Expr(engine.apply_t_pow(&x, n)))
                }
                "+" => {
                    let mut acc = Value::Scalar(ring.zero());
                    for a in args {
                        acc = add(acc, ev(a)?, false);
                    }
                    Ok(acc)
                }
                "-" => match args.len() {
                    0 => Err(arity("needs arguments")),
                    1 => Ok(add(Value::Scalar(ring.zero()), ev(&args[0])?, true)),
                    _ => {
                        let mut acc = ev(&args[0])?;
                        for a in &args[1..] {
                            acc = add(acc, ev(a)?, true);
                        }
                        Ok(acc)
                    }
                },
                "*" => {
                    let mut scalar = ring.one();
                    let mut expr: Option<Expr> = None;
                    for a in args {
                        match ev(a)? {
                            Value::Scalar(s) => scalar = scalar.mul_ref(&s),
                            Value::Expr(e) => {
                                if expr.is_some() {
                                    return Err(SexprError::NonScalarProduct);
                                }
                                expr = Some(e);
                            }
                        }
                    }
                    Ok(match expr {
                        Some(e) => Value::Expr(e.scale(&scalar)),
                        None => Value::Scalar(scalar),
                    })
                }
                "prod" if args.len() == 3 => {
                    let n = match &args[0] {
                        Tree::Atom(a, _) => a.parse::<usize>().map_err(|_| arity("first argument is an integer"))?,
                        _ => return Err(arity("first argument is an integer")),
                    };
                    let x = ev(&args[1])?.into_expr();
                    let y = ev(&args[2])?.into_expr();
                    Ok(Value::Expr(engine.nproduct(n, &x, &y)))
                }
                _ => Err(SexprError::Unexpected(head.clone(), *off)),
            }
        }
    }
}

fn add(a: Value, b: Value, negate: bool) -> Value {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(if negate { x.sub_ref(&y) } else { x.add_ref(&y) }),
        (a, b) => {
            let (a, b) = (a.into_expr(), b.into_expr());
            Value::Expr(if negate { a.sub(&b) } else { a.add(&b) })
        }
    }
}
