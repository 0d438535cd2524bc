//! Presentations of freely generated vertex superalgebras: generators with
//! parity and weight, λ-brackets affine in the generators, and the odd
//! derivation `S` on generators.

use crate::liealg::QuadraticLieAlgebra;
use crate::scalar::{Ring, Scalar};

use super::expr::{binomial, Expr, LambdaPoly, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PresentationError {
    #[error("duplicate generator name `{0}`")]
    Duplicate(String),
    #[error("generator `{0}` must have positive weight")]
    Weight(String),
    #[error("bracket [{0}_λ {1}] is not affine in the generators")]
    NotAffine(String, String),
    #[error("bracket [{0}_λ {1}] has the wrong parity")]
    Parity(String, String),
    #[error("bracket [{0}_λ {1}] contradicts skew-symmetry with the given [{1}_λ {0}]")]
    Skew(String, String),
    #[error("S({0}) has the wrong parity or weight")]
    SAction(String),
    #[error("S(S({0})) differs from T({0})")]
    SSquare(String),
    #[error("the level normalizes to zero")]
    ZeroLevel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub odd: bool,
    /// Twice the conformal weight.
    pub weight2: u32,
}

#[derive(Clone, Debug)]
pub struct Presentation {
    ring: Ring,
    gens: Vec<Generator>,
    table: Vec<Vec<LambdaPoly>>,
    given: Vec<Vec<bool>>,
    s_action: Vec<Expr>,
}

impl Presentation {
    pub fn new(ring: &Ring, gens: Vec<Generator>) -> Result<Self, PresentationError> {
        for (i, g) in gens.iter().enumerate() {
            if g.weight2 == 0 {
                return Err(PresentationError::Weight(g.name.clone()));
            }
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(PresentationError::Duplicate(g.name.clone()));
            }
        }
        let n = gens.len();
        Ok(Presentation {
            ring: ring.clone(),
            table: vec![vec![LambdaPoly::zero(); n]; n],
            given: vec![vec![false; n]; n],
            s_action: vec![Expr::zero(); n],
            gens,
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn letter(&self, gen: usize, d: u32) -> Letter {
        Letter::new(gen, d, self.gens[gen].weight2)
    }

    pub fn gen_expr(&self, gen: usize) -> Expr {
        Expr::letter(self.letter(gen, 0), &self.ring)
    }

    pub fn is_odd(&self, l: Letter) -> bool {
        self.gens[l.gen()].odd
    }

    pub fn word_odd(&self, w: &[Letter]) -> bool {
        w.iter().filter(|l| self.is_odd(**l)).count() % 2 == 1
    }

    pub fn bracket(&self, a: usize, b: usize) -> &LambdaPoly {
        &self.table[a][b]
    }

    pub fn s_of(&self, a: usize) -> &Expr {
        &self.s_action[a]
    }

    fn check_affine(&self, a: usize, b: usize, p: &LambdaPoly) -> Result<(), PresentationError> {
        let odd = self.gens[a].odd ^ self.gens[b].odd;
        let names = || (self.gens[a].name.clone(), self.gens[b].name.clone());
        for (_, c) in p.iter() {
            for (w, _) in c.terms() {
                if w.len() > 1 || w.iter().any(|l| l.gen() >= self.gens.len()) {
                    let (x, y) = names();
                    return Err(PresentationError::NotAffine(x, y));
                }
                if self.word_odd(w) != odd {
                    let (x, y) = names();
                    return Err(PresentationError::Parity(x, y));
                }
            }
        }
        Ok(())
    }

    /// Sets `[a_λ b]`. Missing ordered pairs are filled in by
    /// [`Presentation::complete`].
    pub fn set_bracket(&mut self, a: usize, b: usize, p: LambdaPoly) -> Result<(), PresentationError> {
        self.check_affine(a, b, &p)?;
        self.table[a][b] = p;
        self.given[a][b] = true;
        Ok(())
    }

    pub fn set_s(&mut self, a: usize, e: Expr) {
        self.s_action[a] = e;
    }

    /// `-(-1)^{|a||b|} [b_{-λ-T} a]` for an affine bracket value.
    pub fn skew_affine(&self, p: &LambdaPoly, sign_odd: bool) -> LambdaPoly {
        let mut out = LambdaPoly::zero();
        for (n, c) in p.iter() {
            // (-λ - T)^n c = (-1)^n Σ_k C(n,k) λ^k T^{n-k} c
            for k in 0..=n as u32 {
                let mut q = binomial(n as u32, k);
                if n % 2 == 1 {
                    q = -q;
                }
                if !sign_odd {
                    q = -q;
                }
                let shifted = self.translate_affine(c, n as u32 - k);
                out.add_owned_at(k as usize, shifted.scale_rat(&q));
            }
        }
        out
    }

    /// `T^m` of an expression whose words have length at most one.
    pub fn translate_affine(&self, e: &Expr, m: u32) -> Expr {
        if m == 0 {
            return e.clone();
        }
        let mut out = Expr::zero();
        for (w, s) in e.terms() {
            if let Some(l) = w.first() {
                let mut nw = Word::new();
                nw.push(l.raise(m));
                out.add_term(nw, s.clone());
            }
        }
        out
    }

    /// Fills unset ordered pairs by skew-symmetry and checks given pairs
    /// against it.
    pub fn complete(&mut self) -> Result<(), PresentationError> {
        let n = self.gens.len();
        for a in 0..n {
            for b in 0..n {
                let both_odd = self.gens[a].odd && self.gens[b].odd;
                let from_ba = self.skew_affine(&self.table[b][a], both_odd);
                if self.given[a][b] {
                    if self.given[b][a] && from_ba != self.table[a][b] {
                        return Err(PresentationError::Skew(self.gens[a].name.clone(), self.gens[b].name.clone()));
                    }
                } else if self.given[b][a] {
                    self.table[a][b] = from_ba;
                    self.given[a][b] = true;
                }
            }
        }
        Ok(())
    }
}

/// The universal superaffine vertex algebra of a quadratic Lie algebra at
/// level `k`: even generators `a` of weight 1 and odd `Πa` of weight 1/2 with
/// `[a_λ b] = [a,b] + λ(a|b)k`, `[a_λ Πb] = Π[a,b]`, `[Πa_λ Πb] = (b|a)k`,
/// `S(Πa) = a`, `S(a) = TΠa`.
///
/// Odd generators come first (indices `0..n`), named `odd_name(basis name)`.
pub fn superaffine(
    g: &QuadraticLieAlgebra,
    k: &Scalar,
    odd_name: impl Fn(&str) -> String,
) -> Result<Presentation, PresentationError> {
    if k.is_zero() {
        return Err(PresentationError::ZeroLevel);
    }
    let ring = g.ring().clone();
    let n = g.dim();
    let mut gens = Vec::with_capacity(2 * n);
    for name in g.names() {
        gens.push(Generator { name: odd_name(name), odd: true, weight2: 1 });
    }
    for name in g.names() {
        gens.push(Generator { name: name.clone(), odd: false, weight2: 2 });
    }
    let mut p = Presentation::new(&ring, gens)?;
    let pi = |i: usize| i;
    let ev = |i: usize| n + i;
    for i in 0..n {
        for j in 0..n {
            let mut br = Expr::zero();
            let mut pbr = Expr::zero();
            for (m, c) in g.bracket(i, j) {
                br.add_term(single(p.letter(ev(*m), 0)), c.clone());
                pbr.add_term(single(p.letter(pi(*m), 0)), c.clone());
            }
            let central = g.pairing(i, j).mul_ref(k);
            let even = LambdaPoly::from_coeffs(vec![br, Expr::scalar(central.clone())]);
            p.set_bracket(ev(i), ev(j), even)?;
            p.set_bracket(ev(i), pi(j), LambdaPoly::constant(pbr))?;
            let odd = LambdaPoly::constant(Expr::scalar(g.pairing(j, i).mul_ref(k)));
            p.set_bracket(pi(i), pi(j), odd)?;
        }
    }
    p.complete()?;
    for i in 0..n {
        p.set_s(pi(i), p.gen_expr(ev(i)));
        p.set_s(ev(i), Expr::letter(p.letter(pi(i), 1), &ring));
    }
    Ok(p)
}

pub(crate) fn single(l: Letter) -> Word {
    let mut w = Word::new();
    w.push(l);
    w
}
