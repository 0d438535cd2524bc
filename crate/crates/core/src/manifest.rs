//! Geometry manifests (TOML, schema `g2va/manifest-1`) and the built-in
//! presets `phi1`..`phi5`.
//!
//! ```toml
//! schema = "g2va/manifest-1"
//! name = "example"
//! params = [{ name = "l", kind = "positive" }, { name = "rl", kind = "root-of(l)" }]
//! structure = ["dv4 = v56", "dv5 = -v46", "dv6 = v45"]
//! metric = { diagonal = ["1", "1", "1", "l", "l", "l", "1"] }   # optional
//! level = "formal"                                              # or a rational, e.g. "2"
//!
//! [g2]
//! construction = "phi"          # or "su2" (omega = [3], eta = [3]) / "su3"
//! phi = "v123 - v145 - ..."
//!
//! [expected]                    # optional, compared by `torsion`
//! tau0 = "0"
//! ```
//!
//! The level adds the parameters `k` and `kappa = root-of(k)` (formal), or a
//! constant `k` with `kappa` its simplified square root. `rt2 = root-of(2)`
//! is always available.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::forms::{ExtForm, FormError};
use crate::g2::{self, G2Error, G2Structure, Metric, Su2Structure, Su3Structure, TorsionClasses};
use crate::liealg::{LieAlgebra, LieError, QuadraticLieAlgebra};
use crate::scalar::{Param, ParamKind, Rat, Ring, Scalar, ScalarError};

pub const SCHEMA: &str = "g2va/manifest-1";
const DIM: usize = 7;

pub const PRESETS: [(&str, &str); 5] = [
    ("phi1", include_str!("../presets/phi1.toml")),
    ("phi2", include_str!("../presets/phi2.toml")),
    ("phi3", include_str!("../presets/phi3.toml")),
    ("phi4", include_str!("../presets/phi4.toml")),
    ("phi5", include_str!("../presets/phi5.toml")),
];

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest syntax: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unsupported schema `{0}` (expected {SCHEMA})")]
    Schema(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("bad parameter kind `{0}`")]
    Kind(String),
    #[error("metric needs `diagonal` or `full`")]
    Metric,
    #[error("bad level `{0}`")]
    Level(String),
    #[error("in `{field}`: {source}")]
    Field { field: String, source: FormError },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    G2(#[from] G2Error),
}

impl ManifestError {
    /// Whether the failure is a geometric precondition rather than input syntax.
    pub fn is_geometric(&self) -> bool {
        matches!(self, ManifestError::Lie(_) | ManifestError::G2(_))
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MetricSpec {
    #[serde(default)]
    pub diagonal: Option<Vec<String>>,
    #[serde(default)]
    pub full: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Rotation {
    pub cos: String,
    pub sin: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "construction", rename_all = "lowercase")]
pub enum G2Spec {
    Su2 {
        omega: [String; 3],
        eta: [String; 3],
    },
    Su3 {
        omega: String,
        omega_plus: String,
        omega_minus: String,
        eta: String,
        #[serde(default)]
        rotation: Option<Rotation>,
    },
    Phi {
        phi: String,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct Expected {
    pub tau0: Option<String>,
    pub tau1: Option<String>,
    pub tau2: Option<String>,
    pub tau3: Option<String>,
    pub h: Option<String>,
    pub a: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub params: Vec<ParamSpec>,
    #[serde(default)]
    pub structure: Vec<String>,
    #[serde(default)]
    pub metric: Option<MetricSpec>,
    #[serde(default)]
    pub level: Option<String>,
    pub g2: G2Spec,
    /// Replaces the characteristic torsion when building the double.
    #[serde(default)]
    pub h_override: Option<String>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub expected: Option<Expected>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let m: Manifest = toml::from_str(text)?;
        if m.schema != SCHEMA {
            return Err(ManifestError::Schema(m.schema));
        }
        Ok(m)
    }

    pub fn preset(name: &str) -> Result<Self, ManifestError> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| ManifestError::UnknownPreset(name.to_string()))?;
        Self::parse(text)
    }
}

/// Level of the superaffine vertex algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Level {
    Formal,
    Rational(Rat),
}

impl Level {
    pub fn parse(text: &str) -> Result<Level, ManifestError> {
        let t = text.trim();
        if t == "formal" {
            return Ok(Level::Formal);
        }
        let bad = || ManifestError::Level(text.to_string());
        let q = match t.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Rat::new(n, d)
            }
            None => Rat::from_integer(t.parse().map_err(|_| bad())?),
        };
        if q.is_zero() {
            return Err(bad());
        }
        Ok(Level::Rational(q))
    }
}

/// Splits `n = m^2 * s` with `s` squarefree (sign kept in `s`).
fn squarefree_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.abs();
    let mut m = BigInt::one();
    let mut s = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut e = 0;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            m *= &p;
        }
        if e % 2 == 1 {
            s *= &p;
        }
        p += 1;
    }
    s *= rest;
    if n.is_negative() {
        s = -s;
    }
    (m, s)
}

/// Named forms available to expressions in the `[expected]` section.
pub type FormEnv = HashMap<String, ExtForm>;

#[derive(Debug, Clone)]
pub struct Geometry {
    pub manifest: Manifest,
    pub ring: Ring,
    pub level: Level,
    pub k: Scalar,
    pub kappa: Scalar,
    pub lie: LieAlgebra,
    pub g2: G2Structure,
    /// Forms named during construction: `phi`, `psi`, `omega`, ...
    pub named: FormEnv,
}

fn field_err(field: &str) -> impl Fn(FormError) -> ManifestError + '_ {
    move |source| ManifestError::Field { field: field.to_string(), source }
}

impl Geometry {
    /// Declares the ring, reads the Lie algebra and assembles the
    /// G2-structure. `level` overrides the manifest's level.
    pub fn build(manifest: &Manifest, level: Option<Level>) -> Result<Geometry, ManifestError> {
        let level = match (level, &manifest.level) {
            (Some(l), _) => l,
            (None, Some(text)) => Level::parse(text)?,
            (None, None) => Level::Formal,
        };
        let mut params = Vec::new();
        for p in &manifest.params {
            let kind = match p.kind.trim() {
                "free" => ParamKind::Free,
                "positive" => ParamKind::Positive,
                other => match other.strip_prefix("root-of(").and_then(|s| s.strip_suffix(')')) {
                    Some(base) => ParamKind::RootOf(base.to_string()),
                    None => return Err(ManifestError::Kind(p.kind.clone())),
                },
            };
            params.push(Param { name: p.name.clone(), kind });
        }
        let has = |params: &[Param], n: &str| params.iter().any(|p| p.name == n);
        if !has(&params, "rt2") {
            params.push(Param::root_of("rt2", "2"));
        }
        let mut kappa_text = "kappa".to_string();
        let mut k_text = "k".to_string();
        match &level {
            Level::Formal => {
                if !has(&params, "k") {
                    params.push(Param::free("k"));
                }
                if !has(&params, "kappa") {
                    params.push(Param::root_of("kappa", "k"));
                }
            }
            Level::Rational(q) => {
                // sqrt(n/d) = sqrt(n d) / d = m sqrt(s) / d
                let (m, s) = squarefree_split(&(q.numer() * q.denom()));
                let d = q.denom().clone();
                k_text = format!("({}/{})", q.numer(), q.denom());
                kappa_text = if s.is_one() {
                    format!("({m}/{d})")
                } else if s == BigInt::from(2) {
                    format!("({m}/{d})*rt2")
                } else {
                    if !has(&params, "kappa") {
                        params.push(Param::root_of("kappa", &s.to_string()));
                    }
                    format!("({m}/{d})*kappa")
                };
            }
        }
        let ring = Ring::declare(params)?;
        let k = ring.parse(&k_text)?;
        let kappa = ring.parse(&kappa_text)?;
        let dim = DIM;
        let eqs: Vec<&str> = manifest.structure.iter().map(|s| s.as_str()).collect();
        let lie = LieAlgebra::from_structure_equations(&ring, dim, &eqs)?;
        let mut named = FormEnv::new();
        let form = |src: &str, field: &str, deg: usize, named: &FormEnv| {
            ExtForm::parse_homogeneous(src, &ring, dim, named, deg).map_err(field_err(field))
        };
        let metric = match &manifest.metric {
            None => None,
            Some(spec) => {
                let rows: Vec<Vec<Scalar>> = if let Some(diag) = &spec.diagonal {
                    let d: Result<Vec<Scalar>, _> = diag.iter().map(|s| ring.parse(s)).collect();
                    let d = d?;
                    (0..d.len())
                        .map(|i| (0..d.len()).map(|j| if i == j { d[i].clone() } else { ring.zero() }).collect())
                        .collect()
                } else if let Some(full) = &spec.full {
                    let mut rows = Vec::new();
                    for row in full {
                        let r: Result<Vec<Scalar>, _> = row.iter().map(|s| ring.parse(s)).collect();
                        rows.push(r?);
                    }
                    rows
                } else {
                    return Err(ManifestError::Metric);
                };
                Some(Metric::new(rows)?)
            }
        };
        let label = manifest.name.clone();
        let g2 = match &manifest.g2 {
            G2Spec::Su2 { omega, eta } => {
                let w = [
                    form(&omega[0], "g2.omega[0]", 2, &named)?,
                    form(&omega[1], "g2.omega[1]", 2, &named)?,
                    form(&omega[2], "g2.omega[2]", 2, &named)?,
                ];
                let e = [
                    form(&eta[0], "g2.eta[0]", 1, &named)?,
                    form(&eta[1], "g2.eta[1]", 1, &named)?,
                    form(&eta[2], "g2.eta[2]", 1, &named)?,
                ];
                for i in 0..3 {
                    named.insert(format!("omega{}", i + 1), w[i].clone());
                    named.insert(format!("eta{}", i + 1), e[i].clone());
                }
                let su2 = Su2Structure::new(w)?;
                g2::g2_from_su2(&label, &su2, &e, metric)?
            }
            G2Spec::Su3 { omega, omega_plus, omega_minus, eta, rotation } => {
                let w = form(omega, "g2.omega", 2, &named)?;
                let re = form(omega_plus, "g2.omega_plus", 3, &named)?;
                let im = form(omega_minus, "g2.omega_minus", 3, &named)?;
                let e = form(eta, "g2.eta", 1, &named)?;
                let mut su3 = Su3Structure::new(w, re, im)?;
                if let Some(rot) = rotation {
                    su3 = su3.rotate(&ring.parse(&rot.cos)?, &ring.parse(&rot.sin)?)?;
                }
                named.insert("omega".into(), su3.omega.clone());
                named.insert("omega_plus".into(), su3.re.clone());
                named.insert("omega_minus".into(), su3.im.clone());
                named.insert("eta".into(), e.clone());
                g2::g2_from_su3(&label, &su3, &e, metric)?
            }
            G2Spec::Phi { phi } => {
                let p = form(phi, "g2.phi", 3, &named)?;
                G2Structure::new(&label, p, metric)?
            }
        };
        named.insert("phi".into(), g2.phi.clone());
        named.insert("psi".into(), g2.psi.clone());
        Ok(Geometry { manifest: manifest.clone(), ring, level, k, kappa, lie, g2, named })
    }

    pub fn torsion(&self) -> Result<TorsionReport, ManifestError> {
        let classes = g2::torsion_decompose(&self.g2, &self.lie)?;
        let integrable = classes.tau2.is_zero();
        let h = match &self.manifest.h_override {
            Some(src) => Some(
                ExtForm::parse_homogeneous(src, &self.ring, DIM, &self.named, 3).map_err(field_err("h_override"))?,
            ),
            None if integrable => Some(g2::torsion_three_form(&self.g2, &classes)?),
            None => None,
        };
        let dh = h.as_ref().map(|h| self.lie.d(h));
        Ok(TorsionReport { classes, h, dh })
    }

    /// The three-form twisting the double: the override when given,
    /// otherwise the characteristic torsion.
    pub fn h_form(&self) -> Result<ExtForm, ManifestError> {
        if let Some(src) = &self.manifest.h_override {
            return ExtForm::parse_homogeneous(src, &self.ring, DIM, &self.named, 3).map_err(field_err("h_override"));
        }
        let t = self.torsion()?;
        match t.h {
            Some(h) => Ok(h),
            None => Err(G2Error::NotIntegrable(t.classes.tau2.to_string()).into()),
        }
    }

    /// The quadratic Lie algebra `k ⊕ k*` twisted by [`Geometry::h_form`].
    pub fn double(&self) -> Result<QuadraticLieAlgebra, ManifestError> {
        Ok(QuadraticLieAlgebra::double(&self.lie, &self.h_form()?)?)
    }

    /// `a = -(7/6) τ0 / sqrt(k)`.
    pub fn a_parameter(&self, tau0: &Scalar) -> Result<Scalar, ScalarError> {
        let c = self.ring.frac(-7, 6);
        (&c * tau0).checked_div(&self.kappa)
    }

    pub fn parse_form(&self, src: &str, field: &str) -> Result<ExtForm, ManifestError> {
        ExtForm::parse(src, &self.ring, DIM, &self.named).map_err(field_err(field))
    }

    pub fn parse_scalar(&self, src: &str) -> Result<Scalar, ManifestError> {
        Ok(self.ring.parse(src)?)
    }
}

#[derive(Debug, Clone)]
pub struct TorsionReport {
    pub classes: TorsionClasses,
    /// The twisting three-form: the manifest override when present,
    /// otherwise the characteristic torsion (absent when `τ2 ≠ 0`).
    pub h: Option<ExtForm>,
    pub dh: Option<ExtForm>,
}

impl TorsionReport {
    pub fn integrable_with_closed_h(&self) -> bool {
        self.classes.tau2.is_zero() && self.dh.as_ref().is_some_and(|d| d.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squarefree_parts() {
        let (m, s) = squarefree_split(&BigInt::from(72));
        assert_eq!((m, s), (BigInt::from(6), BigInt::from(2)));
        let (m, s) = squarefree_split(&BigInt::from(-9));
        assert_eq!((m, s), (BigInt::from(3), BigInt::from(-1)));
    }

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            let m = Manifest::preset(name).unwrap();
            assert_eq!(m.name, name);
        }
        assert!(Level::parse("0").is_err());
        assert_eq!(Level::parse("2").unwrap(), Level::Rational(Rat::from_integer(2.into())));
    }
}
