//! Normal forms, normally ordered products, λ-brackets, `T` and `S` in the
//! vertex superalgebra freely generated by a [`Presentation`].
//!
//! Rules used (`p(a,b) = (-1)^{|a||b|}`, `c_j` the `λ^j` coefficient):
//!
//! * sesquilinearity: `[T^m a_λ T^n b] = (-λ)^m (λ+T)^n [a_λ b]`;
//! * skew-symmetry: `[a_λ b] = -p(a,b) [b_{-λ-T} a]`;
//! * Wick: `[a_λ :bc:] = :[a_λ b]c: + p(a,b):b[a_λ c]: + ∫_0^λ [[a_λ b]_μ c] dμ`;
//! * letter exchange: `:x:yW:: = p(x,y):y:xW:: + :(∫_{-T}^0 [x_λ y] dλ) W:`;
//! * quasi-associativity: `::aR:B: = :a:RB:: + Σ_j :(T^{(j+1)}a)(R_(j)B): + p(a,R) Σ_j :(T^{(j+1)}R)(a_(j)B):`.

use std::hash::BuildHasherDefault;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;
use rustc_hash::FxHasher;

use crate::scalar::{Rat, Ring, Scalar};

use super::expr::{binomial, rat, word_weight2, Expr, LambdaPoly, Letter, Word};
use super::presentation::{single, Presentation, PresentationError};

type Memo<K, V> = DashMap<K, Arc<V>, BuildHasherDefault<FxHasher>>;

/// Counters for memo traffic.
#[derive(Debug, Default)]
pub struct Stats {
    pub bracket_hits: AtomicU64,
    pub bracket_misses: AtomicU64,
    pub nop_hits: AtomicU64,
    pub nop_misses: AtomicU64,
}

pub struct Engine {
    pres: Arc<Presentation>,
    ring: Ring,
    nop_lw: Memo<(Letter, Word), Expr>,
    nop_ww: Memo<(Word, Word), Expr>,
    br: Memo<(Word, Word), LambdaPoly>,
    tw: Memo<Word, Expr>,
    sw: Memo<Word, Expr>,
    pub stats: Stats,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("generators", &self.pres.len()).finish()
    }
}

impl Engine {
    /// Builds an engine and checks `S(S(g)) = T(g)` on every generator.
    pub fn new(pres: Presentation) -> Result<Engine, PresentationError> {
        let ring = pres.ring().clone();
        let e = Engine {
            pres: Arc::new(pres),
            ring,
            nop_lw: Memo::default(),
            nop_ww: Memo::default(),
            br: Memo::default(),
            tw: Memo::default(),
            sw: Memo::default(),
            stats: Stats::default(),
        };
        for (i, g) in e.pres.generators().iter().enumerate() {
            let s = e.pres.s_of(i);
            let ok_parity = s.terms().all(|(w, _)| e.pres.word_odd(w) != g.odd);
            let ok_weight = s.terms().all(|(w, _)| word_weight2(w) == g.weight2 + 1);
            if !ok_parity || !ok_weight {
                return Err(PresentationError::SAction(g.name.clone()));
            }
            let gen = e.pres.gen_expr(i);
            if e.apply_s(&e.apply_s(&gen)) != e.apply_t(&gen) {
                return Err(PresentationError::SSquare(g.name.clone()));
            }
        }
        Ok(e)
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn gen(&self, name: &str) -> Option<Expr> {
        self.pres.index_of(name).map(|i| self.pres.gen_expr(i))
    }

    pub fn vacuum(&self) -> Expr {
        Expr::vacuum(&self.ring)
    }

    /// Number of memoized entries, summed over all tables.
    pub fn memo_size(&self) -> usize {
        self.nop_lw.len() + self.nop_ww.len() + self.br.len() + self.tw.len() + self.sw.len()
    }

    /// Drops all memoized products and brackets.
    pub fn clear_memo(&self) {
        self.nop_lw.clear();
        self.nop_ww.clear();
        self.br.clear();
        self.tw.clear();
        self.sw.clear();
    }

    fn odd(&self, l: Letter) -> bool {
        self.pres.is_odd(l)
    }

    fn word_odd(&self, w: &[Letter]) -> bool {
        self.pres.word_odd(w)
    }

    fn one(&self) -> Scalar {
        self.ring.one()
    }

    // ---------------------------------------------------------------- T, S

    fn translate_word(&self, w: &[Letter]) -> Arc<Expr> {
        if w.is_empty() {
            return Arc::new(Expr::zero());
        }
        if w.len() == 1 {
            return Arc::new(Expr::letter(w[0].raise(1), &self.ring));
        }
        if let Some(v) = self.tw.get(w) {
            return v.clone();
        }
        let mut out = Expr::zero();
        for i in 0..w.len() {
            let mid = Expr::letter(w[i].raise(1), &self.ring);
            out.add_owned(self.rebuild(&w[..i], &mid, &w[i + 1..]));
        }
        let out = Arc::new(out);
        self.tw.insert(Word::from_slice(w), out.clone());
        out
    }

    /// `:p1 :p2 .. :mid suffix:..::` normalized.
    fn rebuild(&self, prefix: &[Letter], mid: &Expr, suffix: &[Letter]) -> Expr {
        let mut cur = self.nop_expr_word(mid, suffix);
        for &l in prefix.iter().rev() {
            cur = self.nop_letter_expr(l, &cur);
        }
        cur
    }

    pub fn apply_t(&self, e: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (w, c) in e.terms() {
            out.add_scaled(&self.translate_word(w), c);
        }
        out
    }

    pub fn apply_t_pow(&self, e: &Expr, m: u32) -> Expr {
        let mut cur = e.clone();
        for _ in 0..m {
            cur = self.apply_t(&cur);
        }
        cur
    }

    fn s_word(&self, w: &[Letter]) -> Arc<Expr> {
        if w.is_empty() {
            return Arc::new(Expr::zero());
        }
        if let Some(v) = self.sw.get(w) {
            return v.clone();
        }
        let mut out = Expr::zero();
        let mut odd_before = false;
        for i in 0..w.len() {
            let l = w[i];
            let s_gen = self.pres.s_of(l.gen());
            let mid = if l.deriv() == 0 { s_gen.clone() } else { self.apply_t_pow(s_gen, l.deriv()) };
            let e = self.rebuild(&w[..i], &mid, &w[i + 1..]);
            if odd_before {
                out.add_owned(e.neg());
            } else {
                out.add_owned(e);
            }
            odd_before ^= self.odd(l);
        }
        let out = Arc::new(out);
        self.sw.insert(Word::from_slice(w), out.clone());
        out
    }

    /// The odd derivation `S`.
    pub fn apply_s(&self, e: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (w, c) in e.terms() {
            out.add_scaled(&self.s_word(w), c);
        }
        out
    }

    // ------------------------------------------------------ normal ordering

    fn nop_letter_word(&self, x: Letter, w: &[Letter]) -> Arc<Expr> {
        let Some(&y) = w.first() else {
            return Arc::new(Expr::letter(x, &self.ring));
        };
        if x < y || (x == y && !self.odd(x)) {
            let mut nw = Word::with_capacity(w.len() + 1);
            nw.push(x);
            nw.extend_from_slice(w);
            return Arc::new(Expr::from_word(nw, self.one()));
        }
        let key = (x, Word::from_slice(w));
        if let Some(v) = self.nop_lw.get(&key) {
            self.stats.nop_hits.fetch_add(1, Ordering::Relaxed);
            return v.clone();
        }
        self.stats.nop_misses.fetch_add(1, Ordering::Relaxed);
        let rest = &w[1..];
        let q = self.integral_minus_t(&self.bracket_letters(x, y));
        let out = if x == y {
            // 2:x:xW:: = :QW: for an odd letter
            self.nop_expr_word(&q, rest).scale_rat(&rat(1, 2))
        } else {
            let inner = self.nop_letter_word(x, rest);
            let mut swapped = self.nop_letter_expr(y, &inner);
            if self.odd(x) && self.odd(y) {
                swapped = swapped.neg();
            }
            swapped.add_owned(self.nop_expr_word(&q, rest));
            swapped
        };
        let out = Arc::new(out);
        self.nop_lw.insert(key, out.clone());
        out
    }

    fn nop_letter_expr(&self, x: Letter, e: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (w, c) in e.terms() {
            let r = self.nop_letter_word(x, w);
            if c.is_one() {
                out.add_assign(&r);
            } else {
                out.add_scaled(&r, c);
            }
        }
        out
    }

    fn nop_expr_word(&self, e: &Expr, w: &[Letter]) -> Expr {
        let mut out = Expr::zero();
        for (u, c) in e.terms() {
            out.add_scaled(&self.nop_word_word(u, w), c);
        }
        out
    }

    fn nop_expr_expr(&self, a: &Expr, b: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (u, c) in a.terms() {
            for (w, d) in b.terms() {
                out.add_scaled(&self.nop_word_word(u, w), &c.mul_ref(d));
            }
        }
        out
    }

    fn nop_word_word(&self, a: &[Letter], b: &[Letter]) -> Arc<Expr> {
        if a.is_empty() {
            return Arc::new(Expr::from_word(Word::from_slice(b), self.one()));
        }
        if b.is_empty() {
            return Arc::new(Expr::from_word(Word::from_slice(a), self.one()));
        }
        if a.len() == 1 {
            return self.nop_letter_word(a[0], b);
        }
        let key = (Word::from_slice(a), Word::from_slice(b));
        if let Some(v) = self.nop_ww.get(&key) {
            self.stats.nop_hits.fetch_add(1, Ordering::Relaxed);
            return v.clone();
        }
        self.stats.nop_misses.fetch_add(1, Ordering::Relaxed);
        let a0 = a[0];
        let r = &a[1..];
        let mut out = self.nop_letter_expr(a0, &self.nop_word_word(r, b));
        let rb = self.bracket_ww(r, b);
        for (j, c) in rb.iter() {
            let t = self.nop_letter_expr(a0.raise(j as u32 + 1), c);
            out.add_owned(t.scale_rat(&rat(1, j as i64 + 1)));
        }
        let ab = self.bracket_ww(&a[..1], b);
        if !ab.is_zero() {
            let neg = self.odd(a0) && self.word_odd(r);
            // T^{(j+1)}R a_(j)B = T^{j+1}R c_j / (j+1)
            let mut tr = Expr::from_word(Word::from_slice(r), self.one());
            let mut power = 0;
            for (j, c) in ab.iter() {
                while power < j + 1 {
                    tr = self.apply_t(&tr);
                    power += 1;
                }
                let t = self.nop_expr_expr(&tr, c).scale_rat(&rat(1, j as i64 + 1));
                out.add_owned(if neg { t.neg() } else { t });
            }
        }
        let out = Arc::new(out);
        self.nop_ww.insert(key, out.clone());
        out
    }

    /// Normally ordered product `:ab:`.
    pub fn nop(&self, a: &Expr, b: &Expr) -> Expr {
        let pairs: Vec<(&Word, &Scalar, &Word, &Scalar)> =
            a.terms().flat_map(|(u, c)| b.terms().map(move |(w, d)| (u, c, w, d))).collect();
        pairs
            .par_iter()
            .fold(Expr::zero, |mut acc, (u, c, w, d)| {
                acc.add_scaled(&self.nop_word_word(u, w), &c.mul_ref(d));
                acc
            })
            .reduce(Expr::zero, |mut x, y| {
                x.add_owned(y);
                x
            })
    }

    /// `∫_{-T}^0 p(λ) dλ = Σ_j (-1)^j T^{j+1} c_j / (j+1)`.
    pub fn integral_minus_t(&self, p: &LambdaPoly) -> Expr {
        let mut out = Expr::zero();
        for (j, c) in p.iter() {
            let t = self.apply_t_pow(c, j as u32 + 1);
            let mut q = rat(1, j as i64 + 1);
            if j % 2 == 1 {
                q = -q;
            }
            out.add_owned(t.scale_rat(&q));
        }
        out
    }

    // ------------------------------------------------------------ brackets

    fn bracket_letters(&self, x: Letter, y: Letter) -> LambdaPoly {
        let base = self.pres.bracket(x.gen(), y.gen());
        let (m, n) = (x.deriv(), y.deriv());
        if m == 0 && n == 0 {
            return base.clone();
        }
        let mut out = LambdaPoly::zero();
        for (p, c) in base.iter() {
            // (-λ)^m (λ+T)^n λ^p c
            for k in 0..=n {
                let mut q = binomial(n, k);
                if m % 2 == 1 {
                    q = -q;
                }
                let t = self.pres.translate_affine(c, k);
                out.add_owned_at(p + m as usize + (n - k) as usize, t.scale_rat(&q));
            }
        }
        out
    }

    fn bracket_ww(&self, a: &[Letter], b: &[Letter]) -> Arc<LambdaPoly> {
        if a.is_empty() || b.is_empty() {
            return Arc::new(LambdaPoly::zero());
        }
        if a.len() == 1 && b.len() == 1 {
            return Arc::new(self.bracket_letters(a[0], b[0]));
        }
        let key = (Word::from_slice(a), Word::from_slice(b));
        if let Some(v) = self.br.get(&key) {
            self.stats.bracket_hits.fetch_add(1, Ordering::Relaxed);
            return v.clone();
        }
        self.stats.bracket_misses.fetch_add(1, Ordering::Relaxed);
        let out = if b.len() >= 2 {
            self.wick(a, b)
        } else {
            let rev = self.bracket_ww(b, a);
            let neg_sign = !(self.word_odd(a) && self.word_odd(b));
            self.skew(&rev, neg_sign)
        };
        let out = Arc::new(out);
        self.br.insert(key, out.clone());
        out
    }

    fn wick(&self, a: &[Letter], y: &[Letter]) -> LambdaPoly {
        let total = word_weight2(a) + word_weight2(y);
        let b = &y[..1];
        let c = &y[1..];
        debug_assert!(word_weight2(a) + word_weight2(b) < total && word_weight2(a) + word_weight2(c) < total);
        let ab = self.bracket_ww(a, b);
        let ac = self.bracket_ww(a, c);
        let mut out = LambdaPoly::zero();
        for (n, cn) in ab.iter() {
            out.add_owned_at(n, self.nop_expr_word(cn, c));
        }
        let neg = self.word_odd(a) && self.odd(b[0]);
        for (n, dn) in ac.iter() {
            let t = self.nop_letter_expr(b[0], dn);
            out.add_owned_at(n, if neg { t.neg() } else { t });
        }
        for (n, cn) in ab.iter() {
            for (u, s) in cn.terms() {
                debug_assert!(word_weight2(u) + word_weight2(c) < total, "bracket recursion must lower weight");
                let inner = self.bracket_ww(u, c);
                for (m, e) in inner.iter() {
                    let q = rat(1, m as i64 + 1);
                    out.add_owned_at(n + m + 1, e.scale(s).scale_rat(&q));
                }
            }
        }
        out
    }

    /// Given `p = [b_λ a]`, returns `[a_λ b] = ∓ Σ_n (-λ-T)^n p_n`; the
    /// sign is `-` when `neg` is set.
    pub fn skew(&self, p: &LambdaPoly, neg: bool) -> LambdaPoly {
        let mut out = LambdaPoly::zero();
        for (n, c) in p.iter() {
            let mut t = c.clone();
            let mut powers = vec![c.clone()];
            for _ in 0..n {
                t = self.apply_t(&t);
                powers.push(t.clone());
            }
            for k in 0..=n as u32 {
                let mut q = binomial(n as u32, k);
                if n % 2 == 1 {
                    q = -q;
                }
                if neg {
                    q = -q;
                }
                out.add_owned_at(k as usize, powers[n - k as usize].scale_rat(&q));
            }
        }
        out
    }

    /// `[a_λ b]`, computed in parallel over pairs of words.
    pub fn bracket(&self, a: &Expr, b: &Expr) -> LambdaPoly {
        let pairs: Vec<(&Word, &Scalar, &Word, &Scalar)> =
            a.terms().flat_map(|(u, c)| b.terms().map(move |(w, d)| (u, c, w, d))).collect();
        pairs
            .par_iter()
            .fold(LambdaPoly::zero, |mut acc, (u, c, w, d)| {
                let r = self.bracket_ww(u, w);
                if !r.is_zero() {
                    acc.add_owned(r.scale(&c.mul_ref(d)));
                }
                acc
            })
            .reduce(LambdaPoly::zero, |mut x, y| {
                x.add_owned(y);
                x
            })
    }

    /// `a_(n) b`.
    pub fn nproduct(&self, n: usize, a: &Expr, b: &Expr) -> Expr {
        let c = self.bracket(a, b).coeff(n);
        let mut f = Rat::from_integer(1.into());
        for i in 2..=n {
            f *= Rat::from_integer((i as i64).into());
        }
        c.scale_rat(&f)
    }

    /// `[a_λ b]` with `a` fixed and the skew partner reconstructed:
    /// returns `-p(a,b)[b_{-λ-T} a]` from a bracket `[b_λ a]`.
    pub fn skew_of(&self, ba: &LambdaPoly, a_odd: bool, b_odd: bool) -> LambdaPoly {
        self.skew(ba, !(a_odd && b_odd))
    }

    /// `T^m` applied to every coefficient of a λ-polynomial.
    pub fn translate_poly(&self, p: &LambdaPoly) -> LambdaPoly {
        p.map(|c| self.apply_t(c))
    }

    pub fn apply_s_poly(&self, p: &LambdaPoly) -> LambdaPoly {
        p.map(|c| self.apply_s(c))
    }

    /// Parity of a homogeneous expression (`None` when mixed or zero).
    pub fn parity(&self, e: &Expr) -> Option<bool> {
        let mut it = e.terms().map(|(w, _)| self.word_odd(w));
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Builds the canonical form of `:l1 :l2 .. lr::` from letters in any order.
    pub fn from_letters(&self, letters: &[Letter]) -> Expr {
        let mut cur = self.vacuum();
        for &l in letters.iter().rev() {
            cur = self.nop_letter_expr(l, &cur);
        }
        cur
    }

    pub fn single(&self, l: Letter) -> Expr {
        Expr::from_word(single(l), self.one())
    }
}
