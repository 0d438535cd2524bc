//! The SV_a fields inside the superaffine vertex algebra of the twisted
//! double of a G2 geometry.
//!
//! The double is rewritten in the adapted basis `E_i = g^{ij} v_j + v^i`,
//! `F_i = -g^{ij} v_j + v^i` (so `(E_i|F_j) = 0`), and the odd vectors are
//! `e^i = (1/√2) ΠE_i`. Then
//!
//! ```text
//! Φ = (1/3k) √(2/k) φ_ijk :e^i :e^j e^k::   (all ordered triples)
//! K = SΦ,  X = Φ_(0)Φ / 6,  M = SX,  G = -Φ_(1)K / 3 + 2aΦ,  L = SG / 2
//! a = -(7/6) τ0 / √k
//! ```

use std::sync::OnceLock;

use crate::forms::ExtForm;
use crate::g2::TorsionClasses;
use crate::liealg::{LieError, QuadraticLieAlgebra};
use crate::manifest::{Geometry, ManifestError};
use crate::scalar::{Rat, Scalar, ScalarError};
use crate::va::{superaffine, Engine, Expr, PresentationError};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("the G2-structure is not integrable (τ2 = {0})")]
    NotIntegrable(String),
    #[error("the twisting three-form is not closed (dH = {0})")]
    HNotClosed(String),
}

impl EmbedError {
    pub fn is_geometric(&self) -> bool {
        match self {
            EmbedError::Manifest(m) => m.is_geometric(),
            EmbedError::Lie(_) | EmbedError::NotIntegrable(_) | EmbedError::HNotClosed(_) => true,
            EmbedError::Presentation(PresentationError::ZeroLevel) => true,
            _ => false,
        }
    }
}

/// The six generators of SV_a, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    G,
    L,
    Phi,
    K,
    X,
    M,
}

impl Field {
    pub const ALL: [Field; 6] = [Field::G, Field::L, Field::Phi, Field::K, Field::X, Field::M];

    pub fn name(self) -> &'static str {
        match self {
            Field::G => "G",
            Field::L => "L",
            Field::Phi => "Phi",
            Field::K => "K",
            Field::X => "X",
            Field::M => "M",
        }
    }

    pub fn from_name(s: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn odd(self) -> bool {
        matches!(self, Field::G | Field::Phi | Field::M)
    }

    /// Twice the conformal weight.
    pub fn weight2(self) -> u32 {
        match self {
            Field::G | Field::Phi => 3,
            Field::L | Field::K | Field::X => 4,
            Field::M => 5,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Perturbations used by negative controls.
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Multiplies Φ (and everything derived from it) by this factor.
    pub phi_scale: Option<Rat>,
    /// Twists the double by `-H` instead of `H`.
    pub flip_h: bool,
}

/// How the bracket `[e^n, e^j]` inside `G0` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G0Reading {
    /// `(Se^n)_(0) e^j`, a weight-1/2 odd field.
    SZeroProduct,
    /// `(Se^j)_(0) e^n`, the same product with the arguments exchanged.
    SZeroProductSwapped,
    /// `(1/√2) Π[E_n, E_j]`: the Lie bracket with a single normalization factor.
    PiBracket,
}

/// Grouping of the level factors in `G0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G0Grouping {
    /// `(1/k)(2 g :(Se)e: + (4/3k) g g :e:e[e,e]::)`.
    Nested,
    /// `(1/k) 2 g :(Se)e: + (4/3k) g g :e:e[e,e]::`.
    Inner,
}

pub struct Embedding {
    pub geometry: Geometry,
    pub torsion: TorsionClasses,
    pub h: ExtForm,
    pub double: QuadraticLieAlgebra,
    pub engine: Engine,
    /// `e^1 .. e^7`.
    pub e: Vec<Expr>,
    pub a: Scalar,
    options: BuildOptions,
    fields: [OnceLock<Expr>; 6],
}

impl std::fmt::Debug for Embedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Embedding").field("label", &self.geometry.g2.label).field("a", &self.a.to_string()).finish()
    }
}

const DIM: usize = 7;

pub fn adapted_names() -> Vec<String> {
    (1..=DIM).map(|i| format!("E{i}")).chain((1..=DIM).map(|i| format!("F{i}"))).collect()
}

impl Embedding {
    pub fn build(geometry: &Geometry) -> Result<Embedding, EmbedError> {
        Self::build_with(geometry, BuildOptions::default())
    }

    pub fn build_with(geometry: &Geometry, options: BuildOptions) -> Result<Embedding, EmbedError> {
        let report = geometry.torsion()?;
        if !report.classes.tau2.is_zero() {
            return Err(EmbedError::NotIntegrable(report.classes.tau2.to_string()));
        }
        let mut h = geometry.h_form()?;
        let dh = geometry.lie.d(&h);
        if !dh.is_zero() {
            return Err(EmbedError::HNotClosed(dh.to_string()));
        }
        if options.flip_h {
            h = h.neg();
        }
        let ring = geometry.ring.clone();
        let double = QuadraticLieAlgebra::double(&geometry.lie, &h)?;
        let ginv = geometry.g2.metric.inverse();
        let mut p = vec![vec![ring.zero(); 2 * DIM]; 2 * DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                p[i][j] = ginv[i][j].clone();
                p[DIM + i][j] = ginv[i][j].neg_ref();
            }
            p[i][DIM + i] = ring.one();
            p[DIM + i][DIM + i] = ring.one();
        }
        let adapted = double.change_basis(&p, adapted_names())?;
        let pres = superaffine(&adapted, &geometry.k, |n| format!("P{n}"))?;
        let engine = Engine::new(pres)?;
        let inv_rt2 = ring.parse("rt2/2")?;
        let e = (1..=DIM).map(|i| engine.gen(&format!("PE{i}")).expect("adapted generator").scale(&inv_rt2)).collect();
        let a = geometry.a_parameter(&report.classes.tau0)?;
        Ok(Embedding {
            geometry: geometry.clone(),
            torsion: report.classes,
            h,
            double: adapted,
            engine,
            e,
            a,
            options,
            fields: Default::default(),
        })
    }

    pub fn ring(&self) -> &crate::scalar::Ring {
        &self.geometry.ring
    }

    pub fn k(&self) -> &Scalar {
        &self.geometry.k
    }

    fn compute(&self, f: Field) -> Expr {
        let en = &self.engine;
        match f {
            Field::Phi => {
                let ring = self.ring();
                let k = self.k();
                // (1/3k) √(2/k) = rt2 / (3 k κ)
                let mut pref = ring.parse("rt2").unwrap().checked_div(&(&(k * &self.geometry.kappa) * &ring.int(3))).unwrap();
                if let Some(q) = &self.options.phi_scale {
                    pref = pref.scale(q);
                }
                let phi = &self.geometry.g2.phi;
                let mut out = Expr::zero();
                for i in 0..DIM {
                    for j in 0..DIM {
                        for l in 0..DIM {
                            let c = phi.evaluate(&[i, j, l]);
                            if c.is_zero() {
                                continue;
                            }
                            let inner = en.nop(&self.e[j], &self.e[l]);
                            out.add_scaled(&en.nop(&self.e[i], &inner), &c);
                        }
                    }
                }
                out.scale(&pref)
            }
            Field::K => en.apply_s(self.field(Field::Phi)),
            Field::X => {
                let phi = self.field(Field::Phi);
                en.nproduct(0, phi, phi).scale_rat(&Rat::new(1.into(), 6.into()))
            }
            Field::M => en.apply_s(self.field(Field::X)),
            Field::G => {
                let p1k = en.nproduct(1, self.field(Field::Phi), self.field(Field::K));
                let two_a = &self.a * &self.ring().int(2);
                p1k.scale_rat(&Rat::new((-1).into(), 3.into())).add(&self.field(Field::Phi).scale(&two_a))
            }
            Field::L => en.apply_s(self.field(Field::G)).scale_rat(&Rat::new(1.into(), 2.into())),
        }
    }

    pub fn field(&self, f: Field) -> &Expr {
        if let Some(v) = self.fields[f.index()].get() {
            return v;
        }
        let v = self.compute(f);
        let _ = self.fields[f.index()].set(v);
        self.fields[f.index()].get().unwrap()
    }

    /// Names usable in expressions: `e1..e7` and the six fields.
    pub fn lookup(&self, name: &str) -> Option<Expr> {
        if let Some(f) = Field::from_name(name) {
            return Some(self.field(f).clone());
        }
        let i: usize = name.strip_prefix('e')?.parse().ok()?;
        (1..=DIM).contains(&i).then(|| self.e[i - 1].clone())
    }

    /// `(4√2/k) T(τ1_i e^i)`.
    pub fn dilaton_correction(&self) -> Expr {
        let ring = self.ring();
        let mut lee = Expr::zero();
        for i in 0..DIM {
            let c = self.torsion.tau1.coeff(1 << i);
            lee.add_scaled(&self.e[i], &c);
        }
        let pref = ring.parse("4*rt2").unwrap().checked_div(self.k()).unwrap();
        self.engine.apply_t(&lee).scale(&pref)
    }

    /// The dilaton-free supersymmetry generator `G0` built from the metric
    /// and the twisted bracket only.
    pub fn g0_field(&self, reading: G0Reading, grouping: G0Grouping) -> Expr {
        let en = &self.engine;
        let ring = self.ring();
        let g = self.geometry.g2.metric.g();
        let k = self.k();
        let se: Vec<Expr> = self.e.iter().map(|x| en.apply_s(x)).collect();
        let bracket = |n: usize, j: usize| -> Expr {
            match reading {
                G0Reading::SZeroProduct => en.nproduct(0, &se[n], &self.e[j]),
                G0Reading::SZeroProductSwapped => en.nproduct(0, &se[j], &self.e[n]),
                G0Reading::PiBracket => {
                    // (1/√2)Π[E_n, E_j] = Π-image of (Se^n)_(0)e^j times √2
                    en.nproduct(0, &se[n], &self.e[j]).scale(&ring.parse("rt2").unwrap())
                }
            }
        };
        let mut first = Expr::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                if g[i][j].is_zero() {
                    continue;
                }
                first.add_scaled(&en.nop(&se[i], &self.e[j]), &g[i][j]);
            }
        }
        let mut second = Expr::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                if g[i][j].is_zero() {
                    continue;
                }
                for m in 0..DIM {
                    for n in 0..DIM {
                        if g[m][n].is_zero() {
                            continue;
                        }
                        let b = bracket(n, j);
                        if b.is_zero() {
                            continue;
                        }
                        let inner = en.nop(&self.e[m], &b);
                        second.add_scaled(&en.nop(&self.e[i], &inner), &(&g[i][j] * &g[m][n]));
                    }
                }
            }
        }
        let inv_k = k.inv().unwrap();
        let four_thirds_k = ring.frac(4, 3).checked_div(k).unwrap();
        let first = first.scale(&(&inv_k * &ring.int(2)));
        let second = match grouping {
            G0Grouping::Nested => second.scale(&(&inv_k * &four_thirds_k)),
            G0Grouping::Inner => second.scale(&four_thirds_k),
        };
        first.add(&second)
    }

    /// `G - G0 - (4√2/k) T(τ1_i e^i)`.
    pub fn dilaton_residual(&self, reading: G0Reading, grouping: G0Grouping) -> Expr {
        self.field(Field::G).sub(&self.g0_field(reading, grouping)).sub(&self.dilaton_correction())
    }
}
