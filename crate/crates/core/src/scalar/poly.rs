//! Sparse multivariate polynomials over the rationals.
//!
//! Terms are kept sorted in descending lexicographic order on the exponent
//! vector (variable 0 is the most significant), with no zero coefficients.
//! The polynomial ring here is *free*; root rewriting lives in [`super::Ring`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Rat = BigRational;

/// Upper bound on the number of declared parameters in one ring.
pub const MAX_VARS: usize = 24;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Exps(pub [u8; MAX_VARS]);

impl fmt::Debug for Exps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&e| e != 0).map_or(0, |i| i + 1);
        write!(f, "{:?}", &self.0[..last])
    }
}

impl Exps {
    pub fn one() -> Self {
        Exps([0; MAX_VARS])
    }

    pub fn var(i: usize) -> Self {
        let mut e = Self::one();
        e.0[i] = 1;
        e
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &Exps) -> Exps {
        let mut out = *self;
        for (o, &x) in out.0.iter_mut().zip(other.0.iter()) {
            *o = o.checked_add(x).expect("exponent overflow in polynomial product");
        }
        out
    }

    pub fn pow(&self, n: u32) -> Exps {
        let mut out = *self;
        for o in out.0.iter_mut() {
            let v = (*o as u32) * n;
            *o = u8::try_from(v).expect("exponent overflow in polynomial power");
        }
        out
    }

    pub fn divides(&self, other: &Exps) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Exps) -> Exps {
        let mut out = *other;
        for (o, &x) in out.0.iter_mut().zip(self.0.iter()) {
            *o -= x;
        }
        out
    }

    pub fn meet(&self, other: &Exps) -> Exps {
        let mut out = *self;
        for (o, &x) in out.0.iter_mut().zip(other.0.iter()) {
            *o = (*o).min(x);
        }
        out
    }

    pub fn join(&self, other: &Exps) -> Exps {
        let mut out = *self;
        for (o, &x) in out.0.iter_mut().zip(other.0.iter()) {
            *o = (*o).max(x);
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&x| x as u32).sum()
    }

    pub fn var_mask(&self) -> u32 {
        let mut m = 0u32;
        for (i, &x) in self.0.iter().enumerate() {
            if x != 0 {
                m |= 1 << i;
            }
        }
        m
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Exps, Rat)>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.terms.iter()).finish()
    }
}

fn desc(a: &Exps, b: &Exps) -> Ordering {
    b.cmp(a)
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(Exps::one(), c)] }
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(Rat::from_integer(BigInt::from(n)))
    }

    pub fn monomial(e: Exps, c: Rat) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(e, c)] }
        }
    }

    pub fn var(i: usize) -> Self {
        Self::monomial(Exps::var(i), Rat::one())
    }

    /// Builds a polynomial from arbitrary terms: sorts, merges and drops zeros.
    pub fn from_terms(mut terms: Vec<(Exps, Rat)>) -> Self {
        terms.sort_unstable_by(|a, b| desc(&a.0, &b.0));
        let mut out: Vec<(Exps, Rat)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => {
                    if let Some(last) = out.last() {
                        if last.1.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((e, c));
                }
            }
        }
        if let Some(last) = out.last() {
            if last.1.is_zero() {
                out.pop();
            }
        }
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Exps, Rat)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Exps, Rat)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            Some(Rat::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn lead(&self) -> Option<&(Exps, Rat)> {
        self.terms.first()
    }

    pub fn lead_coeff(&self) -> Rat {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(Rat::zero)
    }

    pub fn var_mask(&self) -> u32 {
        self.terms.iter().fold(0, |m, (e, _)| m | e.var_mask())
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn scale(&self, q: &Rat) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, c * q)).collect() }
    }

    pub fn mul_term(&self, e: &Exps, q: &Rat) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        // multiplying by a monomial preserves the order
        Poly { terms: self.terms.iter().map(|(f, c)| (f.mul(e), c * q)).collect() }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0, c));
        }
        Poly { terms: out }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.terms.len() == 1 {
            let (e, c) = &self.terms[0];
            return other.mul_term(e, c);
        }
        if other.terms.len() == 1 {
            let (e, c) = &other.terms[0];
            return self.mul_term(e, c);
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                terms.push((e1.mul(e2), c1 * c2));
            }
        }
        Poly::from_terms(terms)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.terms.len() == 1 {
            let (de, dc) = &d.terms[0];
            let inv = dc.recip();
            let mut out = Vec::with_capacity(self.terms.len());
            for (e, c) in &self.terms {
                if !de.divides(e) {
                    return None;
                }
                out.push((de.quotient_of(e), c * &inv));
            }
            return Some(Poly { terms: out });
        }
        // every quotient term lies in the box [lo, hi] given by the
        // per-variable minimal and maximal degrees
        let (plo, phi) = self.degree_box();
        let (dlo, dhi) = d.degree_box();
        if !dhi.divides(&phi) || !dlo.divides(&plo) {
            return None;
        }
        let hi = dhi.quotient_of(&phi);
        let lo = dlo.quotient_of(&plo);
        let (de, dc) = d.terms[0].clone();
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((re, rc)) = rem.terms.first().cloned() {
            if !de.divides(&re) {
                return None;
            }
            let qe = de.quotient_of(&re);
            if !qe.divides(&hi) || !lo.divides(&qe) {
                return None;
            }
            let qc = rc / &dc;
            rem = rem.sub(&d.mul_term(&qe, &qc));
            quot.push((qe, qc));
        }
        Some(Poly { terms: quot })
    }

    /// Componentwise minimal and maximal exponents over all terms.
    pub fn degree_box(&self) -> (Exps, Exps) {
        let mut it = self.terms.iter();
        match it.next() {
            None => (Exps::one(), Exps::one()),
            Some((e, _)) => it.fold((*e, *e), |(lo, hi), (f, _)| (lo.meet(f), hi.join(f))),
        }
    }

    pub fn div_monomial(&self, e: &Exps) -> Poly {
        Poly { terms: self.terms.iter().map(|(f, c)| (e.quotient_of(f), c.clone())).collect() }
    }

    /// Componentwise minimum of the exponents (the monomial content).
    pub fn min_exps(&self) -> Exps {
        let mut it = self.terms.iter();
        match it.next() {
            None => Exps::one(),
            Some((e, _)) => it.fold(*e, |m, (f, _)| m.meet(f)),
        }
    }

    pub fn degree_in(&self, v: usize) -> u8 {
        self.terms.iter().map(|(e, _)| e.0[v]).max().unwrap_or(0)
    }

    /// Coefficients as a polynomial in `v`: `out[i]` multiplies `v^i`.
    pub fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Exps, Rat)>> = vec![Vec::new(); deg + 1];
        for (e, c) in &self.terms {
            let mut f = *e;
            let d = f.0[v] as usize;
            f.0[v] = 0;
            buckets[d].push((f, c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_coeffs_in(v: usize, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (d, p) in coeffs.iter().enumerate() {
            let mut shift = Exps::one();
            shift.0[v] = u8::try_from(d).expect("degree overflow");
            for (e, c) in &p.terms {
                terms.push((e.mul(&shift), c.clone()));
            }
        }
        Poly::from_terms(terms)
    }

    pub fn monic(&self) -> Poly {
        match self.terms.first() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Rational content: positive rational `q` with `self / q` having coprime
    /// integer coefficients.
    pub fn rational_content(&self) -> Rat {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for (_, c) in &self.terms {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            Rat::one()
        } else {
            Rat::new(num, den)
        }
    }

    pub fn eval(&self, vals: &[Option<Rat>]) -> Option<Rat> {
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.0.iter().enumerate() {
                if k != 0 {
                    let v = vals.get(i)?.as_ref()?;
                    t *= num_traits::pow(v.clone(), k as usize);
                }
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn eval_mod(&self, vals: &[Option<u64>]) -> Option<u64> {
        let mut acc = 0u64;
        for (e, c) in &self.terms {
            let mut t = modp::from_rat(c)?;
            for (i, &k) in e.0.iter().enumerate() {
                if k != 0 {
                    let v = (*vals.get(i)?)?;
                    t = modp::mul(t, modp::pow(v, k as u64));
                }
            }
            acc = modp::add(acc, t);
        }
        Some(acc)
    }
}

/// Pseudo-remainder of `a` by `b` with respect to variable `v`.
fn prem(a: &Poly, b: &Poly, v: usize) -> Poly {
    let db = b.degree_in(v);
    let bc = b.coeffs_in(v);
    let lb = bc[db as usize].clone();
    let mut r = a.clone();
    loop {
        if r.is_zero() {
            return r;
        }
        let dr = r.degree_in(v);
        if dr < db {
            return r;
        }
        let lr = r.coeffs_in(v).pop().unwrap();
        let mut shift = Exps::one();
        shift.0[v] = dr - db;
        let t = b.mul(&lr).mul_term(&shift, &Rat::one());
        r = r.mul(&lb).sub(&t);
        let q = r.rational_content();
        if !q.is_one() {
            r = r.scale(&q.recip());
        }
    }
}

fn content_in(p: &Poly, v: usize) -> Poly {
    let mut g = Poly::zero();
    for c in p.coeffs_in(v) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

/// Monic greatest common divisor in the free polynomial ring `Q[x_0, ...]`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.min_exps();
    let mb = b.min_exps();
    let m = ma.meet(&mb);
    let a = a.div_monomial(&ma);
    let b = b.div_monomial(&mb);
    let mono = Poly::monomial(m, Rat::one());
    if a.is_constant() || b.is_constant() {
        return mono;
    }
    if a.div_exact(&b).is_some() {
        return b.monic().mul(&mono);
    }
    if b.div_exact(&a).is_some() {
        return a.monic().mul(&mono);
    }
    let common = a.var_mask() & b.var_mask();
    if common == 0 {
        return mono;
    }
    // degree zero in every shared variable means a constant gcd
    if (0..MAX_VARS).filter(|&v| common & (1 << v) != 0).all(|v| coprime_in(&a, &b, v)) {
        return mono;
    }
    let v = (0..MAX_VARS)
        .filter(|&v| common & (1 << v) != 0)
        .min_by_key(|&v| a.degree_in(v) as u32 + b.degree_in(v) as u32)
        .unwrap();
    let ca = content_in(&a, v);
    let cb = content_in(&b, v);
    let c = gcd(&ca, &cb);
    if coprime_in(&a, &b, v) {
        return mono.mul(&c).monic();
    }
    let mut r0 = a.div_exact(&ca).expect("content divides");
    let mut r1 = b.div_exact(&cb).expect("content divides");
    if r0.degree_in(v) < r1.degree_in(v) {
        std::mem::swap(&mut r0, &mut r1);
    }
    let prim = loop {
        if r1.degree_in(v) == 0 {
            break Poly::one();
        }
        let r = prem(&r0, &r1, v);
        if r.is_zero() {
            let cr = content_in(&r1, v);
            break r1.div_exact(&cr).expect("content divides");
        }
        let cr = content_in(&r, v);
        r0 = r1;
        r1 = r.div_exact(&cr).expect("content divides");
    };
    mono.mul(&c).mul(&prim).monic()
}

/// Univariate images of `a` and `b` in `v` at a few random points modulo p;
/// `true` proves that their gcd has degree zero in `v`.
fn coprime_in(a: &Poly, b: &Poly, v: usize) -> bool {
    let ca = a.coeffs_in(v);
    let cb = b.coeffs_in(v);
    let mut state = 0x2545_f491_4f6c_dd1du64 ^ (a.len() as u64) << 32 ^ b.len() as u64;
    for _ in 0..3 {
        let point: Vec<Option<u64>> = (0..MAX_VARS)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                Some(state % modp::P)
            })
            .collect();
        let img = |cs: &[Poly]| -> Option<Vec<u64>> {
            cs.iter().map(|c| c.eval_mod(&point)).collect()
        };
        let (Some(ia), Some(ib)) = (img(&ca), img(&cb)) else { return false };
        // leading coefficients must survive the specialization
        if ia.last() == Some(&0) || ib.last() == Some(&0) {
            continue;
        }
        return modp::poly_gcd_degree(ia, ib) == 0;
    }
    false
}

/// Arithmetic modulo the Mersenne prime 2^61 - 1.
pub mod modp {
    use super::Rat;
    use num_bigint::BigInt;
    use num_traits::{ToPrimitive, Zero};

    pub const P: u64 = (1u64 << 61) - 1;

    pub fn add(a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= P {
            s - P
        } else {
            s
        }
    }

    pub fn sub(a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + P - b
        }
    }

    pub fn mul(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % P as u128) as u64
    }

    pub fn pow(mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn inv(a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(pow(a, P - 2))
        }
    }

    /// Square root when it exists (P = 3 mod 4).
    pub fn sqrt(a: u64) -> Option<u64> {
        if a == 0 {
            return Some(0);
        }
        let r = pow(a, (P + 1) / 4);
        if mul(r, r) == a {
            Some(r)
        } else {
            None
        }
    }

    pub fn from_int(n: &BigInt) -> u64 {
        let p = BigInt::from(P);
        let mut r = n % &p;
        if r < BigInt::zero() {
            r += &p;
        }
        r.to_u64().unwrap()
    }

    fn trim(p: &mut Vec<u64>) {
        while p.last() == Some(&0) {
            p.pop();
        }
    }

    /// Degree of the gcd of two dense univariate polynomials
    /// (coefficients in increasing degree).
    pub fn poly_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
        trim(&mut a);
        trim(&mut b);
        loop {
            if b.is_empty() {
                return a.len().saturating_sub(1);
            }
            if a.len() < b.len() {
                std::mem::swap(&mut a, &mut b);
                continue;
            }
            let lb = inv(*b.last().unwrap()).unwrap();
            while a.len() >= b.len() && !a.is_empty() {
                let f = mul(*a.last().unwrap(), lb);
                let shift = a.len() - b.len();
                for (i, &bc) in b.iter().enumerate() {
                    a[i + shift] = sub(a[i + shift], mul(f, bc));
                }
                trim(&mut a);
            }
            std::mem::swap(&mut a, &mut b);
        }
    }

    pub fn from_rat(q: &Rat) -> Option<u64> {
        let n = from_int(q.numer());
        let d = from_int(q.denom());
        Some(mul(n, inv(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }

    fn x(i: usize) -> Poly {
        Poly::var(i)
    }

    #[test]
    fn exact_division_roundtrip() {
        let a = x(0).add(&x(1)).add(&Poly::from_int(3));
        let b = x(0).sub(&x(2));
        let p = a.mul(&b);
        assert_eq!(p.div_exact(&a), Some(b.clone()));
        assert_eq!(p.div_exact(&b), Some(a));
        assert_eq!(x(0).div_exact(&x(1)), None);
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let f = x(0).add(&x(1));
        let g = x(0).mul(&x(2)).sub(&Poly::from_int(2));
        let h = x(1).pow(2).add(&x(2));
        let a = f.mul(&g).mul(&x(3));
        let b = f.mul(&h).mul(&x(3)).mul(&x(3));
        assert_eq!(gcd(&a, &b), f.mul(&x(3)).monic());
        assert!(gcd(&g, &h).is_one());
    }

    #[test]
    fn gcd_of_powers() {
        let f = x(0).add(&x(1));
        let a = f.pow(3).mul(&x(2).add(&Poly::one()));
        let b = f.pow(2).mul(&x(2).sub(&Poly::one()));
        assert_eq!(gcd(&a, &b), f.pow(2).monic());
    }

    #[test]
    fn modular_sqrt() {
        let a = modp::mul(12345, 12345);
        let r = modp::sqrt(a).unwrap();
        assert_eq!(modp::mul(r, r), a);
        assert_eq!(modp::from_rat(&(q(1) / q(2))), modp::inv(2));
    }
}
