//! Exact coefficients: rational functions over Q in declared parameters,
//! extended by formal square-root symbols.
//!
//! A [`Ring`] is declared once from a list of [`Param`]s. A parameter of kind
//! `root-of(expr)` is a new symbol `r` with the rewrite `r^2 -> expr`. Root
//! declarations must be stratified: the defining expression may only mention
//! parameters that are not (transitively) defined in terms of `r`.
//!
//! A [`Scalar`] is stored as `num / den` in canonical form:
//! * every root symbol occurs with exponent at most one in `num`;
//! * `den` contains no root symbol at all (it is rationalized by conjugates);
//! * `gcd(num, den) = 1` and `den` has leading coefficient one.
//!
//! Under these rules equality of scalars is structural equality.

pub mod poly;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{self, Ast, Domain};
pub use poly::{gcd, modp, Exps, Poly, Rat, MAX_VARS};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("duplicate parameter name `{0}`")]
    DuplicateName(String),
    #[error("cyclic root definition involving {0:?}")]
    Cyclic(Vec<String>),
    #[error("unknown parameter `{0}`")]
    UnknownName(String),
    #[error("invalid parameter name `{0}`")]
    InvalidName(String),
    #[error("too many parameters (at most {MAX_VARS})")]
    TooManyParams,
    #[error("root-of({0}) must be a polynomial that is not a perfect square")]
    BadRootBase(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Free,
    Positive,
    /// Square root of the given expression.
    RootOf(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

impl Param {
    pub fn free(name: &str) -> Self {
        Param { name: name.to_string(), kind: ParamKind::Free }
    }

    pub fn positive(name: &str) -> Self {
        Param { name: name.to_string(), kind: ParamKind::Positive }
    }

    pub fn root_of(name: &str, base: &str) -> Self {
        Param { name: name.to_string(), kind: ParamKind::RootOf(base.to_string()) }
    }
}

static RING_IDS: AtomicU64 = AtomicU64::new(1);

struct RingData {
    id: u64,
    params: Vec<Param>,
    /// `roots[i]` is the base polynomial when variable `i` is a root symbol.
    roots: Vec<Option<Poly>>,
    root_mask: u32,
    /// Monic linear non-monomial root bases; tried first when cancelling.
    hints: Vec<Poly>,
}

/// A declared parameter ring. Cheap to clone.
#[derive(Clone)]
pub struct Ring(Arc<RingData>);

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.params.iter().map(|p| &p.name)).finish()
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Ring {}

fn valid_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_')
}

impl Ring {
    /// Declares a ring. Variables are reordered so that every root symbol
    /// comes after the parameters its base mentions (declaration order is
    /// kept otherwise).
    pub fn declare(params: Vec<Param>) -> Result<Ring, ScalarError> {
        if params.len() > MAX_VARS {
            return Err(ScalarError::TooManyParams);
        }
        for (i, p) in params.iter().enumerate() {
            if !valid_name(&p.name) {
                return Err(ScalarError::InvalidName(p.name.clone()));
            }
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(ScalarError::DuplicateName(p.name.clone()));
            }
        }
        let mut deps: Vec<Vec<usize>> = Vec::with_capacity(params.len());
        let mut asts: Vec<Option<Ast>> = Vec::with_capacity(params.len());
        for p in &params {
            match &p.kind {
                ParamKind::RootOf(src) => {
                    let ast = expr::parse(src)?;
                    let mut ids = Vec::new();
                    ast.identifiers(&mut ids);
                    let mut d = Vec::new();
                    for id in ids {
                        match params.iter().position(|q| q.name == id) {
                            Some(j) => d.push(j),
                            None => return Err(ScalarError::UnknownName(id)),
                        }
                    }
                    deps.push(d);
                    asts.push(Some(ast));
                }
                _ => {
                    deps.push(Vec::new());
                    asts.push(None);
                }
            }
        }
        // stable topological order
        let mut order: Vec<usize> = Vec::with_capacity(params.len());
        let mut placed = vec![false; params.len()];
        while order.len() < params.len() {
            let next = (0..params.len())
                .find(|&i| !placed[i] && deps[i].iter().all(|&j| placed[j]));
            match next {
                Some(i) => {
                    placed[i] = true;
                    order.push(i);
                }
                None => {
                    let stuck = (0..params.len())
                        .filter(|&i| !placed[i])
                        .map(|i| params[i].name.clone())
                        .collect();
                    return Err(ScalarError::Cyclic(stuck));
                }
            }
        }
        let sorted: Vec<Param> = order.iter().map(|&i| params[i].clone()).collect();
        let mut ring = Ring(Arc::new(RingData {
            id: RING_IDS.fetch_add(1, Ordering::Relaxed),
            params: sorted.clone(),
            roots: vec![None; sorted.len()],
            root_mask: 0,
            hints: Vec::new(),
        }));
        let mut roots: Vec<Option<Poly>> = vec![None; sorted.len()];
        let mut root_mask = 0u32;
        let mut hints = Vec::new();
        for (pos, &orig) in order.iter().enumerate() {
            let Some(ast) = &asts[orig] else { continue };
            let value = expr::eval(ast, &ring)?;
            let src = match &sorted[pos].kind {
                ParamKind::RootOf(s) => s.clone(),
                _ => unreachable!(),
            };
            if !value.den.is_one() || value.num.is_zero() || is_monomial_square(&value.num) {
                return Err(ScalarError::BadRootBase(src));
            }
            let base = value.num;
            if base.len() > 1 && base.terms().iter().all(|(e, _)| e.total_degree() <= 1) {
                hints.push(base.monic());
            }
            roots[pos] = Some(base);
            root_mask |= 1 << pos;
            // later bases may refer to this root
            ring = Ring(Arc::new(RingData {
                id: RING_IDS.fetch_add(1, Ordering::Relaxed),
                params: sorted.clone(),
                roots: roots.clone(),
                root_mask,
                hints: hints.clone(),
            }));
        }
        Ok(ring)
    }

    pub fn params(&self) -> &[Param] {
        &self.0.params
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.params.iter().position(|p| p.name == name)
    }

    pub fn is_root(&self, i: usize) -> bool {
        self.0.root_mask & (1 << i) != 0
    }

    pub fn root_base(&self, i: usize) -> Option<Scalar> {
        self.0.roots[i].as_ref().map(|b| self.from_poly(b.clone()))
    }

    /// Positive or root parameters that have positive rational values at
    /// every admissible point.
    pub fn is_positive(&self, i: usize) -> bool {
        matches!(self.0.params[i].kind, ParamKind::Positive)
    }

    pub fn var(&self, name: &str) -> Option<Scalar> {
        self.index_of(name).map(|i| self.from_poly(Poly::var(i)))
    }

    pub fn zero(&self) -> Scalar {
        Scalar { ring: self.clone(), num: Poly::zero(), den: Poly::one() }
    }

    pub fn one(&self) -> Scalar {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> Scalar {
        self.from_poly(Poly::from_int(n))
    }

    pub fn rat(&self, q: Rat) -> Scalar {
        self.from_poly(Poly::constant(q))
    }

    pub fn frac(&self, n: i64, d: i64) -> Scalar {
        self.rat(Rat::new(n.into(), d.into()))
    }

    pub fn from_poly(&self, p: Poly) -> Scalar {
        Scalar { ring: self.clone(), num: self.reduce(p), den: Poly::one() }
    }

    pub fn from_parts(&self, num: Poly, den: Poly) -> Result<Scalar, ScalarError> {
        let (num, den) = self.normalize(num, den)?;
        Ok(Scalar { ring: self.clone(), num, den })
    }

    pub fn parse(&self, src: &str) -> Result<Scalar, ScalarError> {
        let ast = expr::parse(src)?;
        expr::eval(&ast, self)
    }

    /// Applies the rewrites `r^2 -> base` until every root exponent is < 2.
    fn reduce(&self, p: Poly) -> Poly {
        let mask = self.0.root_mask;
        if p.var_mask() & mask == 0 {
            return p;
        }
        let mut p = p;
        loop {
            let needs = p.terms().iter().any(|(e, _)| {
                (0..MAX_VARS).any(|i| mask & (1 << i) != 0 && e.0[i] >= 2)
            });
            if !needs {
                return p;
            }
            let mut keep = Vec::with_capacity(p.len());
            let mut extra = Poly::zero();
            for (e, c) in p.into_terms() {
                let high = (0..MAX_VARS).rev().find(|&i| mask & (1 << i) != 0 && e.0[i] >= 2);
                match high {
                    None => keep.push((e, c)),
                    Some(r) => {
                        let mut f = e;
                        let q = f.0[r] / 2;
                        f.0[r] %= 2;
                        let base = self.0.roots[r].as_ref().unwrap();
                        extra = extra.add(&base.pow(q as u32).mul_term(&f, &c));
                    }
                }
            }
            p = Poly::from_terms(keep).add(&extra);
        }
    }

    fn normalize(&self, num: Poly, den: Poly) -> Result<(Poly, Poly), ScalarError> {
        let mut num = self.reduce(num);
        let mut den = self.reduce(den);
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok((Poly::zero(), Poly::one()));
        }
        let mask = self.0.root_mask;
        while den.var_mask() & mask != 0 {
            let r = 31 - (den.var_mask() & mask).leading_zeros() as usize;
            let cs = den.coeffs_in(r);
            let a = cs[0].clone();
            let b = cs.get(1).cloned().unwrap_or_else(Poly::zero);
            let conj = a.sub(&b.mul(&Poly::var(r)));
            num = self.reduce(num.mul(&conj));
            den = self.reduce(den.mul(&conj));
            if den.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
        }
        Ok(self.cancel(num, den))
    }

    fn cancel(&self, num: Poly, den: Poly) -> (Poly, Poly) {
        if num.is_zero() {
            return (Poly::zero(), Poly::one());
        }
        if let Some(c) = den.constant_value() {
            return if c.is_one() { (num, den) } else { (num.scale(&c.recip()), Poly::one()) };
        }
        let m = num.min_exps().meet(&den.min_exps());
        let (mut num, mut den) = if m.is_one() {
            (num, den)
        } else {
            (num.div_monomial(&m), den.div_monomial(&m))
        };
        if !den.is_monomial() {
            let mut rest = den.div_monomial(&den.min_exps());
            for h in &self.0.hints {
                while let Some(q) = rest.div_exact(h) {
                    rest = q;
                }
            }
            if rest.is_constant() {
                for h in &self.0.hints {
                    loop {
                        let Some(dq) = den.div_exact(h) else { break };
                        let Some(nq) = num.div_exact(h) else { break };
                        den = dq;
                        num = nq;
                    }
                }
            } else {
                let g = gcd(&num, &den);
                if !g.is_one() {
                    num = num.div_exact(&g).expect("gcd divides numerator");
                    den = den.div_exact(&g).expect("gcd divides denominator");
                }
            }
        }
        let lc = den.lead_coeff();
        if lc.is_one() {
            (num, den)
        } else {
            let inv = lc.recip();
            (num.scale(&inv), den.scale(&inv))
        }
    }

    fn rng_values(&self, seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15)
    }

    /// A rational point: non-root parameters get perfect-square values so
    /// that single-parameter roots are rational. Roots whose base is not a
    /// rational square at the point are left unassigned (`None`). Repeated
    /// draws try to make every root available; the best draw is returned.
    pub fn rational_point(&self, seed: u64) -> Vec<Option<Rat>> {
        let mut rng = self.rng_values(seed);
        let mut best: Option<(usize, Vec<Option<Rat>>)> = None;
        for _ in 0..400 {
            let mut vals: Vec<Option<Rat>> = vec![None; self.0.params.len()];
            for i in 0..vals.len() {
                if !self.is_root(i) {
                    let n: i64 = rng.gen_range(1..=12);
                    let d: i64 = if rng.gen_bool(0.3) { rng.gen_range(1..=4) } else { 1 };
                    vals[i] = Some(Rat::new((n * n).into(), (d * d).into()));
                }
            }
            let mut missing = 0;
            for i in 0..vals.len() {
                if let Some(b) = &self.0.roots[i] {
                    vals[i] = b.eval(&vals).and_then(|v| rat_sqrt(&v));
                    if vals[i].is_none() {
                        missing += 1;
                    }
                }
            }
            if missing == 0 {
                return vals;
            }
            if best.as_ref().is_none_or(|b| missing < b.0) {
                best = Some((missing, vals));
            }
        }
        best.unwrap().1
    }

    /// A point modulo 2^61-1 assigning every parameter, roots included.
    pub fn modular_point(&self, seed: u64) -> Vec<u64> {
        let mut rng = self.rng_values(seed.wrapping_add(77));
        loop {
            let mut vals: Vec<Option<u64>> = vec![None; self.0.params.len()];
            for i in 0..vals.len() {
                if !self.is_root(i) {
                    let x = rng.gen_range(2..modp::P);
                    vals[i] = Some(modp::mul(x, x));
                }
            }
            let mut ok = true;
            for i in 0..vals.len() {
                if let Some(b) = &self.0.roots[i] {
                    match b.eval_mod(&vals).and_then(modp::sqrt) {
                        Some(r) if r != 0 => vals[i] = Some(r),
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if ok {
                return vals.into_iter().map(|v| v.unwrap()).collect();
            }
        }
    }
}

fn is_monomial_square(p: &Poly) -> bool {
    if !p.is_monomial() {
        return false;
    }
    let (e, c) = &p.terms()[0];
    e.0.iter().all(|&x| x % 2 == 0) && rat_sqrt(c).is_some()
}

fn int_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Nonnegative rational square root when it exists.
pub fn rat_sqrt(q: &Rat) -> Option<Rat> {
    Some(Rat::new(int_sqrt(q.numer())?, int_sqrt(q.denom())?))
}

impl Domain for Ring {
    type Value = Scalar;
    type Error = ScalarError;

    fn number(&self, n: &BigInt) -> Result<Scalar, ScalarError> {
        Ok(self.rat(Rat::from_integer(n.clone())))
    }

    fn ident(&self, name: &str) -> Result<Scalar, ScalarError> {
        self.var(name).ok_or_else(|| ScalarError::UnknownName(name.to_string()))
    }

    fn add(&self, a: Scalar, b: Scalar) -> Result<Scalar, ScalarError> {
        Ok(a + b)
    }

    fn sub(&self, a: Scalar, b: Scalar) -> Result<Scalar, ScalarError> {
        Ok(a - b)
    }

    fn mul(&self, a: Scalar, b: Scalar) -> Result<Scalar, ScalarError> {
        Ok(a * b)
    }

    fn div(&self, a: Scalar, b: Scalar) -> Result<Scalar, ScalarError> {
        a.checked_div(&b)
    }

    fn neg(&self, a: Scalar) -> Result<Scalar, ScalarError> {
        Ok(-a)
    }

    fn pow(&self, a: Scalar, e: i32) -> Result<Scalar, ScalarError> {
        a.pow(e)
    }
}

/// An element of a [`Ring`] in canonical form.
#[derive(Clone)]
pub struct Scalar {
    ring: Ring,
    num: Poly,
    den: Poly,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.num == other.num && self.den == other.den
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl Scalar {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    /// The value when the scalar is a rational constant.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    fn check_ring(&self, other: &Scalar) {
        assert!(self.ring == other.ring, "scalars from different rings");
    }

    pub fn scale(&self, q: &Rat) -> Scalar {
        if q.is_zero() {
            return self.ring.zero();
        }
        Scalar { ring: self.ring.clone(), num: self.num.scale(q), den: self.den.clone() }
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(self.mul_ref(&other.inv()?))
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        self.ring.from_parts(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i32) -> Result<Scalar, ScalarError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = self.ring.one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul_ref(&base);
        }
        Ok(acc)
    }

    fn add_impl(&self, other: &Scalar, negate: bool) -> Scalar {
        self.check_ring(other);
        let combine = |a: &Poly, b: &Poly| if negate { a.sub(b) } else { a.add(b) };
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { other.neg_ref() } else { other.clone() };
        }
        if self.den == other.den {
            let num = combine(&self.num, &other.num);
            if num.is_zero() {
                return self.ring.zero();
            }
            if self.den.is_one() {
                return Scalar { ring: self.ring.clone(), num, den: Poly::one() };
            }
            let (num, den) = self.ring.cancel(num, self.den.clone());
            return Scalar { ring: self.ring.clone(), num, den };
        }
        if self.den.is_monomial() && other.den.is_monomial() {
            // cancel only strips a monomial here, which is cheap
            let num = combine(&self.num.mul(&other.den), &other.num.mul(&self.den));
            let (num, den) = self.ring.cancel(num, self.den.mul(&other.den));
            return Scalar { ring: self.ring.clone(), num, den };
        }
        // Henrici: with g = gcd(d1, d2), the sum n1 d2/g + n2 d1/g is coprime
        // to (d1/g)(d2/g), so only g can cancel
        let g = gcd(&self.den, &other.den);
        let div = |p: &Poly| if g.is_one() { p.clone() } else { p.div_exact(&g).expect("gcd divides denominator") };
        let (d1, d2) = (div(&self.den), div(&other.den));
        let num = combine(&self.num.mul(&d2), &other.num.mul(&d1));
        if num.is_zero() {
            return self.ring.zero();
        }
        let (num, g) = self.ring.cancel(num, g);
        let den = d1.mul(&d2).mul(&g);
        Scalar { ring: self.ring.clone(), num, den }
    }

    pub fn add_ref(&self, other: &Scalar) -> Scalar {
        self.add_impl(other, false)
    }

    pub fn sub_ref(&self, other: &Scalar) -> Scalar {
        self.add_impl(other, true)
    }

    pub fn mul_ref(&self, other: &Scalar) -> Scalar {
        self.check_ring(other);
        if self.is_zero() || other.is_zero() {
            return self.ring.zero();
        }
        if self.den.is_monomial() && other.den.is_monomial() {
            let num = self.ring.reduce(self.num.mul(&other.num));
            if self.den.is_one() && other.den.is_one() {
                return Scalar { ring: self.ring.clone(), num, den: Poly::one() };
            }
            let (num, den) = self.ring.cancel(num, self.den.mul(&other.den));
            return Scalar { ring: self.ring.clone(), num, den };
        }
        let raw = self.num.mul(&other.num);
        let num = self.ring.reduce(raw.clone());
        if num != raw {
            // root reduction can create factors shared with the denominators;
            // cancelling factor by factor keeps the gcds small
            let (num, d1) = self.ring.cancel(num, self.den.clone());
            let (num, d2) = self.ring.cancel(num, other.den.clone());
            return Scalar { ring: self.ring.clone(), num, den: d1.mul(&d2) };
        }
        // cross-cancel n1 against d2 and n2 against d1; what remains is coprime
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let div = |p: &Poly, g: &Poly| if g.is_one() { p.clone() } else { p.div_exact(g).expect("gcd divides") };
        let num = div(&self.num, &g1).mul(&div(&other.num, &g2));
        // monic factors, so the product is monic as well
        let den = div(&self.den, &g2).mul(&div(&other.den, &g1));
        Scalar { ring: self.ring.clone(), num, den }
    }

    pub fn neg_ref(&self) -> Scalar {
        Scalar { ring: self.ring.clone(), num: self.num.neg(), den: self.den.clone() }
    }

    /// Exact value at a rational point; `None` if a needed parameter is
    /// unassigned or the denominator vanishes there.
    pub fn eval(&self, point: &[Option<Rat>]) -> Option<Rat> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(point)? / d)
    }

    pub fn eval_mod(&self, point: &[u64]) -> Option<u64> {
        let pt: Vec<Option<u64>> = point.iter().map(|&v| Some(v)).collect();
        let d = self.den.eval_mod(&pt)?;
        Some(modp::mul(self.num.eval_mod(&pt)?, modp::inv(d)?))
    }

    /// Exact n-th root when the scalar is a product of powers of primes,
    /// non-root parameters, root symbols and root bases, and the root can be
    /// written with the declared root symbols. Sign follows the positive
    /// branch for even `n`.
    pub fn try_nth_root(&self, n: u32) -> Option<Scalar> {
        if self.is_zero() || n == 0 {
            return None;
        }
        let ring = &self.ring;
        let mut rad = Radical::default();
        rad.absorb_poly(ring, &self.num, &Rat::one())?;
        rad.absorb_poly(ring, &self.den, &-Rat::one())?;
        if rad.negative && n.is_multiple_of(2) {
            return None;
        }
        let nq = Rat::from_integer(n.into());
        let mut out = if rad.negative { ring.int(-1) } else { ring.one() };
        let mut halves: Vec<Atom> = Vec::new();
        for (atom, e) in &rad.atoms {
            let q = e / &nq;
            let twice = &q * Rat::from_integer(2.into());
            if !twice.is_integer() {
                return None;
            }
            let whole = q.floor().to_integer().to_i32()?;
            if !(&q - q.floor()).is_zero() {
                halves.push(atom.clone());
            }
            out = out.mul_ref(&atom.value(ring).pow(whole).ok()?);
        }
        // cover sqrt(product of half atoms) with declared root symbols
        while !halves.is_empty() {
            let mut found = None;
            for r in 0..ring.0.params.len() {
                if !ring.is_root(r) {
                    continue;
                }
                let mut rr = Radical::default();
                if rr.absorb_poly(ring, &Poly::var(r), &Rat::one()).is_none() || rr.negative {
                    continue;
                }
                let mut atoms: Vec<Atom> = Vec::new();
                let mut clean = true;
                for (a, e) in &rr.atoms {
                    if *e != Rat::new(1.into(), 2.into()) {
                        clean = false;
                    }
                    atoms.push(a.clone());
                }
                if clean && !atoms.is_empty() && atoms.iter().all(|a| halves.contains(a)) {
                    found = Some((r, atoms));
                    break;
                }
            }
            let (r, atoms) = found?;
            halves.retain(|a| !atoms.contains(a));
            out = out.mul_ref(&ring.from_poly(Poly::var(r)));
        }
        Some(out)
    }

    pub fn try_sqrt(&self) -> Option<Scalar> {
        self.try_nth_root(2)
    }

    /// Canonical text, parseable by [`Ring::parse`].
    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Prime(BigInt),
    Var(usize),
    /// A non-monomial root base, identified by its root symbol.
    Base(usize),
}

impl Atom {
    fn value(&self, ring: &Ring) -> Scalar {
        match self {
            Atom::Prime(p) => ring.rat(Rat::from_integer(p.clone())),
            Atom::Var(i) => ring.from_poly(Poly::var(*i)),
            Atom::Base(r) => ring.from_poly(ring.0.roots[*r].clone().unwrap()),
        }
    }
}

/// A monomial expressed as signed product of atoms with rational exponents.
#[derive(Default, Debug)]
struct Radical {
    negative: bool,
    atoms: std::collections::BTreeMap<Atom, Rat>,
}

impl Radical {
    fn push(&mut self, a: Atom, e: Rat) {
        let slot = self.atoms.entry(a.clone()).or_insert_with(Rat::zero);
        *slot += e;
        if slot.is_zero() {
            self.atoms.remove(&a);
        }
    }

    fn absorb_int(&mut self, n: &BigInt, e: &Rat) -> Option<()> {
        let mut n = n.abs();
        let mut p = BigInt::from(2);
        let limit = BigInt::from(1_000_000);
        while &p * &p <= n {
            if p > limit {
                self.push(Atom::Prime(n), e.clone());
                return Some(());
            }
            while (&n % &p).is_zero() {
                n /= &p;
                self.push(Atom::Prime(p.clone()), e.clone());
            }
            p += 1;
        }
        if !n.is_one() {
            self.push(Atom::Prime(n), e.clone());
        }
        Some(())
    }

    fn absorb_poly(&mut self, ring: &Ring, p: &Poly, e: &Rat) -> Option<()> {
        if p.is_monomial() {
            let (ex, c) = &p.terms()[0];
            if c.is_negative() {
                self.negative ^= !(e.is_integer() && e.to_integer().is_even());
            }
            self.absorb_int(c.numer(), e)?;
            self.absorb_int(c.denom(), &-e)?;
            for (i, &k) in ex.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let ek = e * Rat::from_integer(k.into());
                if ring.is_root(i) {
                    let base = ring.0.roots[i].as_ref().unwrap();
                    let half = &ek / Rat::from_integer(2.into());
                    if base.is_monomial() {
                        self.absorb_poly(ring, base, &half)?;
                    } else {
                        self.push(Atom::Base(i), half);
                    }
                } else {
                    self.push(Atom::Var(i), ek);
                }
            }
            return Some(());
        }
        // monomial content times a declared non-monomial root base
        let m = p.min_exps();
        let rest = p.div_monomial(&m);
        let lc = rest.lead_coeff();
        let monic = rest.monic();
        let r = (0..ring.0.params.len())
            .find(|&r| ring.0.roots[r].as_ref().is_some_and(|b| b.monic() == monic))?;
        let blc = ring.0.roots[r].as_ref().unwrap().lead_coeff();
        self.absorb_poly(ring, &Poly::monomial(m, lc / blc), e)?;
        self.push(Atom::Base(r), e.clone());
        Some(())
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.add_ref(&rhs)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.sub_ref(&rhs)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.mul_ref(&rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.add_ref(rhs)
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.sub_ref(rhs)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.mul_ref(rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

fn fmt_monomial(ring: &Ring, e: &Exps) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.0.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let name = &ring.0.params[i].name;
        if k == 1 {
            parts.push(name.clone());
        } else {
            parts.push(format!("{name}^{k}"));
        }
    }
    parts.join("*")
}

fn fmt_rat(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Formats a polynomial as a sum of signed terms.
fn fmt_poly(ring: &Ring, p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (idx, (e, c)) in p.terms().iter().enumerate() {
        let mono = fmt_monomial(ring, e);
        if mono.is_empty() {
            let text = fmt_rat(&c.abs());
            if idx == 0 {
                if c.is_negative() {
                    s.push('-');
                }
                s.push_str(&text);
            } else {
                s.push_str(if c.is_negative() { " - " } else { " + " });
                s.push_str(&text);
            }
            continue;
        }
        let abs = c.abs();
        let coeff = if abs.is_one() {
            String::new()
        } else if abs.is_integer() {
            format!("{}*", fmt_rat(&abs))
        } else if idx == 0 && c.is_negative() {
            format!("({})*", fmt_rat(c))
        } else {
            format!("({})*", fmt_rat(&abs))
        };
        if idx == 0 {
            if c.is_negative() && !(coeff.starts_with('(')) {
                s.push('-');
            }
        } else {
            s.push_str(if c.is_negative() { " - " } else { " + " });
        }
        s.push_str(&coeff);
        s.push_str(&mono);
    }
    s
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = fmt_poly(&self.ring, &self.num);
        if self.den.is_one() {
            return f.write_str(&num);
        }
        let num = if self.num.len() > 1 { format!("({num})") } else { num };
        let den = fmt_poly(&self.ring, &self.den);
        let simple_den = self.den.len() == 1
            && self.den.terms()[0].1.is_one()
            && self.den.terms()[0].0.var_mask().count_ones() == 1;
        if simple_den {
            write!(f, "{num}/{den}")
        } else {
            write!(f, "{num}/({den})")
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Ring {
        Ring::declare(vec![
            Param::positive("l"),
            Param::root_of("rl", "l"),
            Param::free("k"),
            Param::root_of("kappa", "k"),
            Param::root_of("rt2", "2"),
            Param::positive("s"),
            Param::root_of("rsl", "s + l"),
        ])
        .unwrap()
    }

    #[test]
    fn root_reduction() {
        let r = ring();
        assert_eq!(r.parse("rt2^2").unwrap(), r.int(2));
        assert_eq!(r.parse("rl^3").unwrap(), r.parse("l*rl").unwrap());
        assert!(r.parse("x*x - x^2").is_err());
        assert!(r.parse("l*l - l^2").unwrap().is_zero());
    }

    #[test]
    fn rationalized_denominators() {
        let r = ring();
        let a = r.parse("1/(1 + rt2)").unwrap();
        assert_eq!(a, r.parse("rt2 - 1").unwrap());
        let b = r.parse("rsl/(s + l)").unwrap();
        assert_eq!(b, r.parse("1/rsl").unwrap());
        assert_eq!(b.denominator(), &r.parse("s + l").unwrap().numerator().monic());
    }

    #[test]
    fn printing_roundtrip() {
        let r = ring();
        for src in ["(-7/6)*l/kappa", "3/(l + s) - rl", "-2*k + 1/2", "(1 - rt2)/(k^2*s)"] {
            let x = r.parse(src).unwrap();
            let again = r.parse(&x.to_string()).unwrap();
            assert_eq!(x, again, "{src} printed as {x}");
        }
    }

    #[test]
    fn nth_roots() {
        let r = ring();
        let x = r.parse("l^3*k/4").unwrap();
        assert_eq!(x.try_sqrt().unwrap(), r.parse("l*rl*kappa/2").unwrap());
        let y = r.parse("2*l^9").unwrap().pow(9).unwrap();
        assert_eq!(y.try_nth_root(9).unwrap(), r.parse("2*l^9").unwrap());
        let z = r.parse("(s + l)/(l*s^2)").unwrap();
        assert_eq!(z.try_sqrt().unwrap(), r.parse("rsl/(rl*s)").unwrap());
        assert!(r.parse("3").unwrap().try_sqrt().is_none());
    }
}
