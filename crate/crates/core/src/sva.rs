//! The λ-bracket table of SV_a, its singular-vector relation, and the
//! checker comparing engine-computed brackets of candidate fields against it.
//!
//! Table entries are templates: sums of `c(a) λ^n T^t m` where `c(a)` is a
//! polynomial in the deformation parameter and `m` is the vacuum, a field,
//! or a normally ordered pair of (derivatives of) fields. Two entries,
//! `[X_λ M]` and `[M_λ M]`, have terms with no field operand; they are
//! marked incomplete and resolved by fitting the computed bracket to field
//! monomials.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::embed::{Embedding, Field};
use crate::linalg;
use num_traits::Zero;

use crate::scalar::poly::Exps;
use crate::scalar::{Rat, Ring, Scalar};
use crate::va::expr::{rat, word_weight2};
use crate::va::axioms::{self, Poly2};
use crate::va::{sexpr, Engine, Expr, LambdaPoly, Word};

/// `c0 + c1 a + c2 a^2` with rational `ci`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ACoeff(pub [Rat; 3]);

impl ACoeff {
    pub fn constant(q: Rat) -> ACoeff {
        ACoeff([q, Rat::zero(), Rat::zero()])
    }

    pub fn linear(q: Rat) -> ACoeff {
        ACoeff([Rat::zero(), q, Rat::zero()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, a: &Scalar) -> Scalar {
        let ring = a.ring();
        let mut acc = ring.rat(self.0[0].clone());
        if !Zero::is_zero(&self.0[1]) {
            acc = &acc + &a.scale(&self.0[1]);
        }
        if !Zero::is_zero(&self.0[2]) {
            acc = &acc + &(a * a).scale(&self.0[2]);
        }
        acc
    }

    /// Only the part that survives at `a = 0`.
    pub fn at_zero(&self) -> ACoeff {
        ACoeff::constant(self.0[0].clone())
    }
}

impl fmt::Display for ACoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, q) in self.0.iter().enumerate() {
            if Zero::is_zero(q) {
                continue;
            }
            let var = ["", "a", "a^2"][i];
            let qs = q.to_string();
            parts.push(match (i, qs.as_str()) {
                (0, _) => qs,
                (_, "1") => var.to_string(),
                (_, "-1") => format!("-{var}"),
                _ => format!("{qs}*{var}"),
            });
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}

/// A field with a number of derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FLetter {
    pub field: Field,
    pub d: u32,
}

impl FLetter {
    pub fn weight2(self) -> u32 {
        self.field.weight2() + 2 * self.d
    }
}

impl fmt::Display for FLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.d {
            0 => write!(f, "{}", self.field.name()),
            1 => write!(f, "T{}", self.field.name()),
            d => write!(f, "T^{d}{}", self.field.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Mono {
    Vac,
    One(Field),
    Two(FLetter, FLetter),
}

impl Mono {
    pub fn two(a: Field, b: Field) -> Mono {
        Mono::Two(FLetter { field: a, d: 0 }, FLetter { field: b, d: 0 })
    }

    pub fn weight2(&self) -> u32 {
        match self {
            Mono::Vac => 0,
            Mono::One(f) => f.weight2(),
            Mono::Two(a, b) => a.weight2() + b.weight2(),
        }
    }

    pub fn odd(&self) -> bool {
        match self {
            Mono::Vac => false,
            Mono::One(f) => f.odd(),
            Mono::Two(a, b) => a.field.odd() ^ b.field.odd(),
        }
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mono::Vac => write!(f, "1"),
            Mono::One(x) => write!(f, "{}", x.name()),
            Mono::Two(a, b) => write!(f, ":{a} {b}:"),
        }
    }
}

/// `coeff λ^lambda T^t mono`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub lambda: usize,
    pub t: u32,
    pub coeff: ACoeff,
    pub mono: Mono,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coeff)?;
        if self.lambda == 1 {
            write!(f, "*lambda")?;
        } else if self.lambda > 1 {
            write!(f, "*lambda^{}", self.lambda)?;
        }
        match self.t {
            0 => {}
            1 => write!(f, "*T")?,
            t => write!(f, "*T^{t}")?,
        }
        if self.mono != Mono::Vac || (self.lambda == 0 && self.t == 0) {
            write!(f, "*{}", self.mono)?;
        }
        Ok(())
    }
}

pub fn template_text(terms: &[Term]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" + ")
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub left: Field,
    pub right: Field,
    pub terms: Vec<Term>,
    /// Coefficients quoted without the field they multiply. Each hole is
    /// `coeff λ^lambda T^t` applied to one unknown field shared by all holes.
    pub holes: Vec<Hole>,
}

impl Entry {
    pub fn is_complete(&self) -> bool {
        self.holes.is_empty()
    }

    /// The entry with every hole filled by `f`.
    pub fn filled(&self, f: Field) -> Vec<Term> {
        let mut terms = self.terms.clone();
        terms.extend(self.holes.iter().map(|h| term(h.lambda, h.t, h.coeff.clone(), Mono::One(f))));
        terms
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hole {
    pub lambda: usize,
    pub t: u32,
    pub coeff: ACoeff,
}

fn hole(lambda: usize, t: u32, coeff: ACoeff) -> Hole {
    Hole { lambda, t, coeff }
}

fn term(lambda: usize, t: u32, coeff: ACoeff, mono: Mono) -> Term {
    Term { lambda, t, coeff, mono }
}

fn c(n: i64, d: i64) -> ACoeff {
    ACoeff::constant(rat(n, d))
}

fn ca(n: i64, d: i64) -> ACoeff {
    ACoeff::linear(rat(n, d))
}

/// The SV_a λ-bracket table, one entry per unordered pair of generators.
pub fn table() -> Vec<Entry> {
    use Field::*;
    let one = Mono::One;
    let vac = Mono::Vac;
    let e = |left, right, terms: Vec<Term>| Entry { left, right, terms, holes: Vec::new() };
    let mut central_ll = c(21, 24);
    central_ll.0[2] = rat(1, 4);
    let mut central_gg = c(7, 2);
    central_gg.0[2] = rat(1, 1);
    let mut v = vec![
        e(L, L, vec![term(0, 1, c(1, 1), one(L)), term(1, 0, c(2, 1), one(L)), term(3, 0, central_ll, vac.clone())]),
        e(L, G, vec![term(0, 1, c(1, 1), one(G)), term(1, 0, c(3, 2), one(G))]),
        e(G, G, vec![term(0, 0, c(2, 1), one(L)), term(2, 0, central_gg, vac.clone())]),
        e(L, Phi, vec![term(0, 1, c(1, 1), one(Phi)), term(1, 0, c(3, 2), one(Phi))]),
        e(L, X, vec![term(3, 0, c(-7, 24), vac.clone()), term(0, 1, c(1, 1), one(X)), term(1, 0, c(2, 1), one(X))]),
        e(G, Phi, vec![term(2, 0, ca(1, 2), vac.clone()), term(0, 0, c(1, 1), one(K))]),
        e(G, X, vec![term(1, 0, c(-1, 2), one(G)), term(1, 0, ca(1, 1), one(Phi)), term(0, 0, c(1, 1), one(M))]),
        e(Phi, Phi, vec![term(2, 0, c(-7, 2), vac.clone()), term(0, 0, c(6, 1), one(X))]),
        e(Phi, X, vec![term(0, 1, c(-5, 2), one(Phi)), term(1, 0, c(-15, 2), one(Phi))]),
        e(X, X, vec![term(3, 0, c(35, 24), vac.clone()), term(0, 1, c(-5, 1), one(X)), term(1, 0, c(-10, 1), one(X))]),
        e(L, K, vec![term(3, 0, ca(1, 4), vac.clone()), term(0, 1, c(1, 1), one(K)), term(1, 0, c(2, 1), one(K))]),
        e(
            L,
            M,
            vec![
                term(2, 0, c(-1, 4), one(G)),
                term(2, 0, ca(1, 2), one(Phi)),
                term(0, 1, c(1, 1), one(M)),
                term(1, 0, c(5, 2), one(M)),
            ],
        ),
        e(G, K, vec![term(0, 1, c(1, 1), one(Phi)), term(1, 0, c(3, 1), one(Phi))]),
        e(
            G,
            M,
            vec![
                term(3, 0, c(-7, 12), vac.clone()),
                term(1, 0, c(1, 1), one(L)),
                term(1, 0, ca(-1, 1), one(K)),
                term(0, 1, c(1, 1), one(X)),
                term(1, 0, c(4, 1), one(X)),
            ],
        ),
        e(
            Phi,
            K,
            vec![
                term(0, 1, ca(3, 1), one(Phi)),
                term(1, 0, ca(6, 1), one(Phi)),
                term(0, 1, c(-3, 2), one(G)),
                term(1, 0, c(-3, 1), one(G)),
                term(0, 0, c(-3, 1), one(M)),
            ],
        ),
        e(
            Phi,
            M,
            vec![
                term(3, 0, ca(-5, 4), vac.clone()),
                term(0, 1, ca(3, 1), one(X)),
                term(1, 0, ca(6, 1), one(X)),
                term(0, 1, c(-1, 2), one(K)),
                term(1, 0, c(9, 2), one(K)),
                term(0, 0, c(3, 1), Mono::two(Phi, G)),
            ],
        ),
        e(
            X,
            K,
            vec![
                term(3, 0, ca(-5, 4), vac.clone()),
                term(0, 1, ca(3, 1), one(X)),
                term(1, 0, ca(6, 1), one(X)),
                term(1, 0, c(-3, 1), one(K)),
                term(0, 0, c(-3, 1), Mono::two(Phi, G)),
            ],
        ),
        Entry {
            left: X,
            right: M,
            terms: vec![
                term(0, 0, ca(4, 7), Mono::two(X, Phi)),
                term(0, 2, ca(-27, 14), one(Phi)),
                term(1, 1, ca(-3, 1), one(Phi)),
                term(2, 0, ca(-3, 1), one(Phi)),
                term(0, 2, c(1, 4), one(G)),
                term(1, 1, c(-9, 4), one(G)),
                term(2, 0, c(-9, 4), one(G)),
                term(0, 0, c(4, 1), Mono::two(X, G)),
            ],
            holes: vec![hole(0, 1, c(1, 2)), hole(1, 0, c(-5, 1))],
        },
        e(
            K,
            K,
            vec![
                term(3, 0, c(-7, 2), vac.clone()),
                term(0, 1, ca(3, 1), one(K)),
                term(1, 0, ca(6, 1), one(K)),
                term(0, 1, c(3, 1), one(X)),
                term(1, 0, c(6, 1), one(X)),
                term(0, 1, c(-3, 1), one(L)),
                term(1, 0, c(-6, 1), one(L)),
            ],
        ),
        e(
            K,
            M,
            vec![
                term(0, 1, ca(3, 1), one(M)),
                term(1, 0, ca(6, 1), one(M)),
                term(1, 1, c(-11, 2), one(Phi)),
                term(2, 0, c(-15, 2), one(Phi)),
                term(0, 0, c(3, 1), Mono::two(G, K)),
                term(0, 0, c(-6, 1), Mono::two(L, Phi)),
            ],
        ),
        Entry {
            left: M,
            right: M,
            terms: vec![
                term(4, 0, c(-35, 24), vac),
                term(1, 1, ca(-3, 1), one(K)),
                term(2, 0, ca(-3, 1), one(K)),
                term(0, 2, ca(11, 5), one(X)),
                term(1, 1, ca(10, 1), one(X)),
                term(2, 0, ca(10, 1), one(X)),
                term(0, 0, c(-6, 1), Mono::two(G, M)),
                term(0, 0, c(12, 1), Mono::two(L, X)),
                term(0, 0, c(2, 5), Mono::two(X, X)),
                term(0, 0, c(-1, 1), Mono::two(K, K)),
            ],
            holes: vec![hole(0, 2, c(-5, 2)), hole(1, 1, c(9, 2)), hole(2, 0, c(9, 2))],
        },
    ];
    v.sort_by_key(|e| (e.left.index().max(e.right.index()), e.left.index().min(e.right.index())));
    v
}

/// `a((9/7)T²Φ - (8/7):ΦX:) + 4:GX: - 2:ΦK: - 4TM - T²G`, which vanishes in SV_a.
pub fn singular_relation() -> Vec<Term> {
    use Field::*;
    vec![
        term(0, 2, ca(9, 7), Mono::One(Phi)),
        term(0, 0, ca(-8, 7), Mono::two(Phi, X)),
        term(0, 0, c(4, 1), Mono::two(G, X)),
        term(0, 0, c(-2, 1), Mono::two(Phi, K)),
        term(0, 1, c(-4, 1), Mono::One(M)),
        term(0, 2, c(-1, 1), Mono::One(G)),
    ]
}

/// Evaluates monomials on concrete fields.
pub struct Instantiator<'a> {
    pub engine: &'a Engine,
    /// Field values indexed by `Field::index`.
    pub fields: &'a [Expr],
}

impl Instantiator<'_> {
    fn letter(&self, l: FLetter) -> Expr {
        self.engine.apply_t_pow(&self.fields[l.field.index()].clone(), l.d)
    }

    pub fn mono(&self, m: &Mono) -> Expr {
        match m {
            Mono::Vac => self.engine.vacuum(),
            Mono::One(f) => self.fields[f.index()].clone(),
            Mono::Two(a, b) => self.engine.nop(&self.letter(*a), &self.letter(*b)),
        }
    }

    pub fn term_expr(&self, t: &Term, a: &Scalar) -> Expr {
        let m = self.mono(&t.mono);
        self.engine.apply_t_pow(&m, t.t).scale(&t.coeff.eval(a))
    }

    pub fn template(&self, terms: &[Term], a: &Scalar) -> LambdaPoly {
        let mut out = LambdaPoly::zero();
        for t in terms {
            out.add_owned_at(t.lambda, self.term_expr(t, a));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Match,
    Corrected,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub pair: String,
    pub status: Status,
    pub expected: String,
    /// Engine bracket minus the instantiated template, in generator words.
    pub residual: String,
    /// For incomplete entries: the fitted entry in terms of the fields.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolved: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub resolved_terms: Option<Vec<Term>>,
    #[serde(skip)]
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub a: String,
    pub central_charge_expected: String,
    pub central_charge_from_gg: String,
    pub central_charge_from_ll: String,
    pub central_charge_ok: bool,
    pub singular_relation_residual: String,
    pub pairs: Vec<PairReport>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

/// Fills the holes of an incomplete entry. A single field that makes the
/// entry exact is preferred; otherwise the difference between the computed
/// bracket and the displayed part is fitted to field monomials.
fn resolve_holes(
    inst: &Instantiator<'_>,
    entry: &Entry,
    computed: &LambdaPoly,
    displayed_residual: &LambdaPoly,
    a: &Scalar,
    rep: &mut PairReport,
) {
    let hole_weight2 = |h: &Hole| {
        (entry.left.weight2() + entry.right.weight2()).checked_sub(2 + 2 * h.lambda as u32 + 2 * h.t)
    };
    let odd = entry.left.odd() ^ entry.right.odd();
    let fits: Vec<Field> = Field::ALL
        .into_iter()
        .filter(|f| f.odd() == odd && entry.holes.iter().all(|h| hole_weight2(h) == Some(f.weight2())))
        .collect();
    for f in fits {
        let terms = entry.filled(f);
        let residual = computed.sub(&inst.template(&terms, a));
        if residual.is_zero() {
            record_resolution(rep, terms, format!("missing operand is {}", f.name()), a);
            return;
        }
    }
    match fit_bracket(inst, entry.left, entry.right, displayed_residual, a) {
        Ok(correction) => {
            let mut terms = entry.terms.clone();
            terms.extend(correction.iter().cloned());
            let note = format!(
                "no single field fills the holes; the displayed part is completed by {}",
                template_text(&correction)
            );
            record_resolution(rep, terms, note, a);
        }
        Err(msg) => {
            rep.status = Status::Fail;
            rep.note = Some(msg);
        }
    }
}

fn record_resolution(rep: &mut PairReport, terms: Vec<Term>, mut note: String, a: &Scalar) {
    let mut terms = simplify(&terms);
    if a.is_zero() {
        // the a-dependent part is invisible here
        terms = at_a_zero(&terms);
        note.push_str("; a = 0, so only the a-free part is determined");
    }
    rep.status = Status::Corrected;
    rep.resolved = Some(template_text(&terms));
    rep.note = Some(note);
    rep.resolved_terms = Some(terms);
}

fn pair_name(e: &Entry) -> String {
    format!("[{}_λ {}]", e.left.name(), e.right.name())
}

/// Compares all brackets of `emb`'s fields with the table at parameter `a`.
pub fn check_fields(emb: &Embedding, a: &Scalar) -> VerificationReport {
    let fields: Vec<Expr> = Field::ALL.iter().map(|f| emb.field(*f).clone()).collect();
    check(&emb.engine, &fields, a)
}

/// Compares the brackets of arbitrary candidate fields (indexed by
/// `Field::index`) with the table at parameter `a`.
pub fn check(engine: &Engine, fields: &[Expr], a: &Scalar) -> VerificationReport {
    assert_eq!(fields.len(), Field::ALL.len(), "one expression per field");
    let inst = Instantiator { engine, fields };
    let entries = table();
    let pairs: Vec<PairReport> = entries
        .par_iter()
        .map(|entry| {
            let t0 = Instant::now();
            let computed = engine.bracket(&fields[entry.left.index()], &fields[entry.right.index()]);
            let expected = inst.template(&entry.terms, a);
            let residual = computed.sub(&expected);
            let mut rep = PairReport {
                pair: pair_name(entry),
                status: Status::Match,
                expected: template_text(&entry.terms),
                residual: sexpr::lambda_text(engine, &residual),
                resolved: None,
                note: None,
                resolved_terms: None,
                millis: 0,
            };
            if entry.is_complete() {
                if !residual.is_zero() {
                    rep.status = Status::Fail;
                }
            } else {
                resolve_holes(&inst, entry, &computed, &residual, a, &mut rep);
            }
            rep.millis = t0.elapsed().as_millis();
            rep
        })
        .collect();
    let ring = engine.ring();
    let expected_c = &ring.frac(21, 2) + &(a * a).scale(&rat(3, 1));
    let gg = engine.bracket(&fields[Field::G.index()], &fields[Field::G.index()]);
    let ll = engine.bracket(&fields[Field::L.index()], &fields[Field::L.index()]);
    let vac_coeff = |p: &LambdaPoly, n: usize| p.coeff(n).constant().cloned().unwrap_or_else(|| ring.zero());
    let c_gg = vac_coeff(&gg, 2).scale(&rat(3, 1));
    let c_ll = vac_coeff(&ll, 3).scale(&rat(12, 1));
    let central_ok = c_gg == expected_c && c_ll == expected_c;
    let singular = singular_relation()
        .iter()
        .fold(Expr::zero(), |mut acc, t| {
            acc.add_owned(inst.term_expr(t, a));
            acc
        });
    let first_failure = pairs.iter().find(|p| p.status == Status::Fail).map(|p| p.pair.clone()).or_else(|| {
        if !singular.is_zero() {
            Some("singular relation".into())
        } else if !central_ok {
            Some("central charge".into())
        } else {
            None
        }
    });
    VerificationReport {
        a: a.to_string(),
        central_charge_expected: expected_c.to_string(),
        central_charge_from_gg: c_gg.to_string(),
        central_charge_from_ll: c_ll.to_string(),
        central_charge_ok: central_ok,
        singular_relation_residual: sexpr::expr_text(engine, &singular),
        passed: first_failure.is_none(),
        first_failure,
        pairs,
    }
}

// ------------------------------------------------------------------ fitting

/// Candidate monomials `T^t m` of a given weight and parity: the vacuum,
/// single fields with derivatives, then ordered pairs.
fn candidates(weight2: u32, odd: bool) -> Vec<(u32, Mono)> {
    let mut out: Vec<(u32, Mono)> = Vec::new();
    let mut push = |t: u32, m: Mono| {
        if !out.iter().any(|(t2, m2)| *t2 == t && *m2 == m) {
            out.push((t, m));
        }
    };
    if !odd && weight2 == 0 {
        push(0, Mono::Vac);
    }
    for f in Field::ALL {
        if f.odd() == odd && f.weight2() <= weight2 && (weight2 - f.weight2()).is_multiple_of(2) {
            push((weight2 - f.weight2()) / 2, Mono::One(f));
        }
    }
    let letters: Vec<FLetter> = Field::ALL
        .iter()
        .flat_map(|&field| (0..=2).map(move |d| FLetter { field, d }))
        .filter(|l| l.weight2() < weight2)
        .collect();
    for &x in &letters {
        for &y in &letters {
            if x.weight2() + y.weight2() == weight2 && (x.field.odd() ^ y.field.odd()) == odd {
                push(0, Mono::Two(x, y));
            }
        }
    }
    out
}

/// Sparse row reduction over word coordinates, remembering how each basis
/// vector is combined from the candidates.
struct Span {
    basis: Vec<(Word, Expr, Vec<Scalar>)>,
}

impl Span {
    fn reduce(&self, v: &Expr, combo: &mut Vec<Scalar>) -> Expr {
        let mut v = v.clone();
        for (pivot, b, bc) in &self.basis {
            if let Some(x) = v.coeff(pivot).cloned() {
                let f = x.checked_div(b.coeff(pivot).unwrap()).unwrap();
                v = v.sub(&b.scale(&f));
                for (i, s) in bc.iter().enumerate() {
                    if !s.is_zero() {
                        combo[i] = &combo[i] - &(s * &f);
                    }
                }
            }
        }
        v
    }
}

/// Writes `computed` as a combination of field monomials, with coefficients
/// polynomial in `a`.
pub fn fit_bracket(
    inst: &Instantiator<'_>,
    left: Field,
    right: Field,
    computed: &LambdaPoly,
    a: &Scalar,
) -> Result<Vec<Term>, String> {
    let ring = inst.engine.ring();
    let total = left.weight2() + right.weight2();
    let odd = left.odd() ^ right.odd();
    let mut terms = Vec::new();
    let top = computed.len().max(total as usize / 2 + 1);
    for n in 0..top {
        if 2 * n as u32 + 2 > total {
            if !computed.coeff(n).is_zero() {
                return Err(format!("nonzero λ^{n} coefficient beyond the weight bound"));
            }
            continue;
        }
        let w2 = total - 2 * n as u32 - 2;
        let cands = candidates(w2, odd);
        let target = computed.coeff(n);
        let mut span = Span { basis: Vec::new() };
        let mut chosen: Vec<usize> = Vec::new();
        for (ci, (t, m)) in cands.iter().enumerate() {
            if m.weight2() + 2 * t != w2 {
                continue;
            }
            let v = inst.engine.apply_t_pow(&inst.mono(m), *t);
            debug_assert!(v.terms().all(|(w, _)| word_weight2(w) == w2));
            let mut combo = vec![ring.zero(); cands.len()];
            combo[ci] = ring.one();
            let r = span.reduce(&v, &mut combo);
            if r.is_zero() {
                continue;
            }
            let pivot = r.sorted_terms()[0].0.clone();
            span.basis.push((pivot, r, combo));
            chosen.push(ci);
        }
        let mut combo = vec![ring.zero(); cands.len()];
        let rest = span.reduce(&target, &mut combo);
        if !rest.is_zero() {
            return Err(format!("λ^{n} coefficient is not a combination of field monomials"));
        }
        for ci in chosen {
            // target - Σ combo_i v_i = 0, so coefficient of candidate i is -combo_i
            let coeff = combo[ci].neg_ref();
            if coeff.is_zero() {
                continue;
            }
            let poly = as_poly_in_a(&coeff, a).ok_or_else(|| format!("coefficient {coeff} is not polynomial in a"))?;
            terms.push(Term { lambda: n, t: cands[ci].0, coeff: poly, mono: cands[ci].1.clone() });
        }
    }
    Ok(terms)
}

/// Finds rationals `c0, c1, c2` with `s = c0 + c1 a + c2 a^2`.
pub fn as_poly_in_a(s: &Scalar, a: &Scalar) -> Option<ACoeff> {
    if let Some(q) = s.as_rational() {
        return Some(ACoeff::constant(q));
    }
    if a.is_zero() {
        return None;
    }
    let ring = s.ring();
    let a2 = a * a;
    let den = a.denominator().mul(a2.denominator()).mul(s.denominator());
    let den = ring.from_poly(den);
    // with denominators cleared, compare coefficients monomial by monomial
    let polys: Vec<Scalar> = [ring.one(), a.clone(), a2, s.clone()].iter().map(|v| v * &den).collect();
    if polys.iter().any(|p| !p.denominator().is_one()) {
        return None;
    }
    let mut monos: Vec<Exps> = polys.iter().flat_map(|p| p.numerator().terms().iter().map(|(e, _)| *e)).collect();
    monos.sort();
    monos.dedup();
    let qring = Ring::declare(vec![]).ok()?;
    let coeff_of = |p: &Scalar, e: Exps| {
        p.numerator().terms().iter().find(|(e2, _)| *e2 == e).map(|(_, q)| q.clone()).unwrap_or_else(Rat::zero)
    };
    let matrix: Vec<Vec<Scalar>> =
        monos.iter().map(|&e| (0..3).map(|j| qring.rat(coeff_of(&polys[j], e))).collect()).collect();
    let rhs: Vec<Scalar> = monos.iter().map(|&e| qring.rat(coeff_of(&polys[3], e))).collect();
    // a^2 may be rational, in which case only c0 + c2 a^2 is determined;
    // fold it into c0 by dropping the a^2 column
    let sol = match linalg::solve_unique(matrix.clone(), rhs.clone(), &qring) {
        Ok(sol) => sol,
        Err(_) => {
            let m2: Vec<Vec<Scalar>> = matrix.iter().map(|r| r[..2].to_vec()).collect();
            let mut s2 = linalg::solve_unique(m2, rhs, &qring).ok()?;
            s2.push(qring.zero());
            s2
        }
    };
    let q = |s: &Scalar| s.as_rational();
    Some(ACoeff([q(&sol[0])?, q(&sol[1])?, q(&sol[2])?]))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("{0} has operands missing; resolve it first (see `resolved_table`)")]
    Incomplete(String),
    #[error("no entry for [{0}_λ {1}]")]
    Missing(&'static str, &'static str),
}

/// `[x_λ y]` as a template, using skew-symmetry
/// `[x_λ y] = -p(x,y) [y_{-λ-T} x]` when only `[y_λ x]` is listed.
pub fn expected_bracket(table: &[Entry], x: Field, y: Field) -> Result<Vec<Term>, TableError> {
    let (entry, reversed) = match table.iter().find(|e| e.left == x && e.right == y) {
        Some(e) => (e, false),
        None => {
            let e = table.iter().find(|e| e.left == y && e.right == x).ok_or(TableError::Missing(x.name(), y.name()))?;
            (e, true)
        }
    };
    if !entry.is_complete() {
        return Err(TableError::Incomplete(pair_name(entry)));
    }
    if !reversed {
        return Ok(entry.terms.clone());
    }
    let sign = if x.odd() && y.odd() { rat(1, 1) } else { rat(-1, 1) };
    let mut out = Vec::new();
    for t in &entry.terms {
        // (-λ-T)^n = (-1)^n Σ_j C(n,j) λ^j T^(n-j)
        let n = t.lambda as u32;
        for j in 0..=n {
            let mut f = crate::va::expr::binomial(n, j) * &sign;
            if n % 2 == 1 {
                f = -f;
            }
            let coeff = ACoeff([&t.coeff.0[0] * &f, &t.coeff.0[1] * &f, &t.coeff.0[2] * &f]);
            out.push(term(j as usize, t.t + n - j, coeff, t.mono.clone()));
        }
    }
    Ok(simplify(&out))
}

/// A table with every incomplete entry replaced by its resolution.
pub fn resolved_table(resolutions: &[(Field, Field, Vec<Term>)]) -> Vec<Entry> {
    let mut t = table();
    for (l, r, terms) in resolutions {
        if let Some(e) = t.iter_mut().find(|e| e.left == *l && e.right == *r) {
            e.terms = terms.clone();
            e.holes.clear();
        }
    }
    t
}

/// `[x_λ y]` read off a complete table, using skew-symmetry when only
/// `[y_λ x]` is listed.
pub fn table_bracket(inst: &Instantiator<'_>, table: &[Entry], x: Field, y: Field, a: &Scalar) -> Option<LambdaPoly> {
    if let Some(e) = table.iter().find(|e| e.left == x && e.right == y) {
        return e.is_complete().then(|| inst.template(&e.terms, a));
    }
    let e = table.iter().find(|e| e.left == y && e.right == x)?;
    if !e.is_complete() {
        return None;
    }
    Some(inst.engine.skew_of(&inst.template(&e.terms, a), y.odd(), x.odd()))
}

/// Skew-symmetry of a diagonal table entry: `[x_λ x] + p(x,x)[x_{-λ-T} x]`.
pub fn table_skew_residual(inst: &Instantiator<'_>, table: &[Entry], x: Field, a: &Scalar) -> Option<LambdaPoly> {
    let p = table_bracket(inst, table, x, x, a)?;
    Some(p.sub(&inst.engine.skew_of(&p, x.odd(), x.odd())))
}

/// The Jacobi identity on `(x, y, z)` with the inner brackets taken from
/// the table and the outer ones computed on the fields.
pub fn table_jacobi(
    inst: &Instantiator<'_>,
    table: &[Entry],
    x: Field,
    y: Field,
    z: Field,
    a: &Scalar,
) -> Option<Poly2> {
    let yz = table_bracket(inst, table, y, z, a)?;
    let xz = table_bracket(inst, table, x, z, a)?;
    let xy = table_bracket(inst, table, x, y, a)?;
    let f = |g: Field| &inst.fields[g.index()];
    Some(axioms::jacobi_with(inst.engine, f(x), f(y), f(z), &yz, &xz, &xy))
}

/// Merges terms with the same `λ` power, derivative count and monomial,
/// drops zero terms, and sorts by descending `λ` power then `T` power.
pub fn simplify(terms: &[Term]) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for t in terms {
        match out.iter_mut().find(|o| o.lambda == t.lambda && o.t == t.t && o.mono == t.mono) {
            Some(o) => {
                for i in 0..3 {
                    o.coeff.0[i] = &o.coeff.0[i] + &t.coeff.0[i];
                }
            }
            None => out.push(t.clone()),
        }
    }
    out.retain(|t| !t.coeff.is_zero());
    out.sort_by_key(|t| (std::cmp::Reverse(t.lambda), std::cmp::Reverse(t.t), t.mono.to_string()));
    out
}

/// The template with every `a`-dependent part removed.
pub fn at_a_zero(terms: &[Term]) -> Vec<Term> {
    terms
        .iter()
        .filter_map(|t| {
            let c = t.coeff.at_zero();
            (!c.is_zero()).then(|| Term { coeff: c, ..t.clone() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_every_pair_once() {
        let t = table();
        assert_eq!(t.len(), 21);
        for x in Field::ALL {
            for y in Field::ALL {
                let n = t.iter().filter(|e| (e.left, e.right) == (x, y) || (e.left, e.right) == (y, x)).count();
                assert_eq!(n, 1, "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn template_weights_are_consistent() {
        for e in table() {
            let total = e.left.weight2() + e.right.weight2();
            for t in &e.terms {
                assert_eq!(t.mono.weight2() + 2 * t.t + 2 * t.lambda as u32 + 2, total, "{e:?}");
                assert_eq!(t.mono.odd(), e.left.odd() ^ e.right.odd());
            }
        }
    }

    #[test]
    fn coefficient_text() {
        let mut x = c(21, 24);
        x.0[2] = rat(1, 4);
        assert_eq!(x.to_string(), "7/8 + 1/4*a^2");
        assert_eq!(ca(-3, 1).to_string(), "-3*a");
    }
}
