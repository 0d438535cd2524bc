//! Letters, normally ordered words, and finite linear combinations of words.
//!
//! A letter is `T^d g` for a generator `g`. A canonical word
//! `l1 l2 .. lr` stands for the right-nested product `:l1 :l2 :.. lr:::`
//! with `l1 <= l2 <= .. <= lr` and no repeated odd letter. Letters compare
//! by conformal weight, then generator index, then derivative order, so the
//! word order is a total order and canonical words form a PBW basis.

use std::cmp::Ordering;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::scalar::{Rat, Ring, Scalar};

/// `T^d g` packed as `weight2 | gen | d` so that the derived order is
/// (weight, generator, derivative).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u32);

const GEN_BITS: u32 = 10;
const D_BITS: u32 = 10;
const MASK10: u32 = (1 << 10) - 1;

impl Letter {
    /// `weight2` is twice the conformal weight of the generator itself.
    pub fn new(gen: usize, d: u32, weight2: u32) -> Letter {
        assert!(gen < (1 << GEN_BITS) && d < (1 << D_BITS));
        let w = weight2 + 2 * d;
        assert!(w < (1 << 12), "letter weight overflow");
        Letter((w << (GEN_BITS + D_BITS)) | ((gen as u32) << D_BITS) | d)
    }

    pub fn gen(self) -> usize {
        ((self.0 >> D_BITS) & MASK10) as usize
    }

    pub fn deriv(self) -> u32 {
        self.0 & MASK10
    }

    /// Twice the conformal weight, derivatives included.
    pub fn weight2(self) -> u32 {
        self.0 >> (GEN_BITS + D_BITS)
    }

    pub fn raise(self, k: u32) -> Letter {
        let w = self.weight2() + 2 * k;
        let d = self.deriv() + k;
        assert!(d < (1 << D_BITS) && w < (1 << 12));
        Letter((w << (GEN_BITS + D_BITS)) | ((self.gen() as u32) << D_BITS) | d)
    }
}

impl std::fmt::Debug for Letter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T^{}g{}", self.deriv(), self.gen())
    }
}

pub type Word = SmallVec<[Letter; 8]>;

pub fn word_weight2(w: &[Letter]) -> u32 {
    w.iter().map(|l| l.weight2()).sum()
}

/// A finite combination of canonical words with scalar coefficients.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Expr {
    terms: FxHashMap<Word, Scalar>,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::default()
    }

    pub fn from_word(w: Word, c: Scalar) -> Expr {
        let mut e = Expr::zero();
        e.add_term(w, c);
        e
    }

    pub fn vacuum(ring: &Ring) -> Expr {
        Expr::from_word(Word::new(), ring.one())
    }

    pub fn scalar(c: Scalar) -> Expr {
        Expr::from_word(Word::new(), c)
    }

    pub fn letter(l: Letter, ring: &Ring) -> Expr {
        let mut w = Word::new();
        w.push(l);
        Expr::from_word(w, ring.one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn ring(&self) -> Option<&Ring> {
        self.terms.values().next().map(|s| s.ring())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    /// Terms in word order, for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(&Word, &Scalar)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| cmp_words(a.0, b.0));
        v
    }

    pub fn coeff(&self, w: &[Letter]) -> Option<&Scalar> {
        self.terms.get(w)
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let s = o.get().add_ref(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Expr, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        for (w, s) in &other.terms {
            self.add_term(w.clone(), s.mul_ref(c));
        }
    }

    pub fn add_assign(&mut self, other: &Expr) {
        if self.terms.is_empty() {
            self.terms = other.terms.clone();
            return;
        }
        for (w, s) in &other.terms {
            self.add_term(w.clone(), s.clone());
        }
    }

    pub fn add_owned(&mut self, other: Expr) {
        if self.terms.len() < other.terms.len() {
            let mine = std::mem::replace(self, other);
            for (w, s) in mine.terms {
                self.add_term(w, s);
            }
            return;
        }
        for (w, s) in other.terms {
            self.add_term(w, s);
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut e = self.clone();
        e.add_assign(other);
        e
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        let mut e = self.clone();
        for (w, s) in &other.terms {
            e.add_term(w.clone(), s.neg_ref());
        }
        e
    }

    pub fn neg(&self) -> Expr {
        Expr { terms: self.terms.iter().map(|(w, s)| (w.clone(), s.neg_ref())).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(w, s)| (w.clone(), s.mul_ref(c))).collect() }
    }

    pub fn scale_rat(&self, q: &Rat) -> Expr {
        if num_traits::Zero::is_zero(q) {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(w, s)| (w.clone(), s.scale(q))).collect() }
    }

    /// Coefficient of the vacuum word.
    pub fn constant(&self) -> Option<&Scalar> {
        self.terms.get(&Word::new()[..])
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Twice the largest conformal weight among the terms.
    pub fn max_weight2(&self) -> u32 {
        self.terms.keys().map(|w| word_weight2(w)).max().unwrap_or(0)
    }

    /// Retains terms satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(&Word) -> bool) -> Expr {
        Expr { terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, s)| (w.clone(), s.clone())).collect() }
    }
}

pub fn cmp_words(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for (w, s) in self.sorted_terms() {
            m.entry(&w, &s.to_string());
        }
        m.finish()
    }
}

/// A polynomial in λ with [`Expr`] coefficients; entry `n` is the
/// coefficient of `λ^n`, i.e. `a_(n) b / n!` for a bracket `[a_λ b]`.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct LambdaPoly {
    coeffs: Vec<Expr>,
}

impl LambdaPoly {
    pub fn zero() -> LambdaPoly {
        LambdaPoly::default()
    }

    pub fn from_coeffs(coeffs: Vec<Expr>) -> LambdaPoly {
        let mut p = LambdaPoly { coeffs };
        p.trim();
        p
    }

    pub fn constant(e: Expr) -> LambdaPoly {
        LambdaPoly::from_coeffs(vec![e])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// One past the highest power with a nonzero coefficient.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, n: usize) -> Expr {
        self.coeffs.get(n).cloned().unwrap_or_default()
    }

    pub fn coeff_ref(&self, n: usize) -> Option<&Expr> {
        self.coeffs.get(n)
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add_at(&mut self, n: usize, e: &Expr) {
        if e.is_zero() {
            return;
        }
        if self.coeffs.len() <= n {
            self.coeffs.resize_with(n + 1, Expr::zero);
        }
        self.coeffs[n].add_assign(e);
        self.trim();
    }

    pub fn add_owned_at(&mut self, n: usize, e: Expr) {
        if e.is_zero() {
            return;
        }
        if self.coeffs.len() <= n {
            self.coeffs.resize_with(n + 1, Expr::zero);
        }
        self.coeffs[n].add_owned(e);
        self.trim();
    }

    pub fn add_assign(&mut self, other: &LambdaPoly) {
        for (n, c) in other.coeffs.iter().enumerate() {
            self.add_at(n, c);
        }
    }

    pub fn add_owned(&mut self, other: LambdaPoly) {
        for (n, c) in other.coeffs.into_iter().enumerate() {
            self.add_owned_at(n, c);
        }
    }

    pub fn add(&self, other: &LambdaPoly) -> LambdaPoly {
        let mut p = self.clone();
        p.add_assign(other);
        p
    }

    pub fn sub(&self, other: &LambdaPoly) -> LambdaPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LambdaPoly {
        LambdaPoly { coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> LambdaPoly {
        LambdaPoly::from_coeffs(self.coeffs.iter().map(|c| c.scale(s)).collect())
    }

    pub fn scale_rat(&self, q: &Rat) -> LambdaPoly {
        LambdaPoly::from_coeffs(self.coeffs.iter().map(|c| c.scale_rat(q)).collect())
    }

    /// Maps every coefficient, keeping the power.
    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> LambdaPoly {
        LambdaPoly::from_coeffs(self.coeffs.iter().map(f).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Expr)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }
}

impl std::fmt::Debug for LambdaPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for (n, c) in self.iter() {
            m.entry(&n, c);
        }
        m.finish()
    }
}

/// `binomial(n, k)` as a rational.
pub fn binomial(n: u32, k: u32) -> Rat {
    let mut r = Rat::from_integer(1.into());
    for i in 0..k {
        r = r * Rat::from_integer((n - i).into()) / Rat::from_integer((i + 1).into());
    }
    r
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}
