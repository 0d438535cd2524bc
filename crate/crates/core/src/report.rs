//! Run reports. The `report` part is a pure function of the input and is
//! byte-stable across runs and thread counts; timings and the timestamp
//! live in `header`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::embed::{BuildOptions, EmbedError, Embedding, G0Grouping, G0Reading};
use crate::manifest::{Geometry, Level, ManifestError, TorsionReport};
use crate::sva::{self, Status, VerificationReport};
use crate::va::sexpr;

pub const REPORT_SCHEMA: &str = "g2va/report-1";

#[derive(Debug, Clone, Serialize)]
pub struct TorsionSummary {
    pub tau0: String,
    pub tau1: String,
    pub tau2: String,
    pub tau3: String,
    pub h: Option<String>,
    pub dh: Option<String>,
    pub integrable: bool,
    pub h_closed: bool,
}

impl TorsionSummary {
    pub fn new(t: &TorsionReport) -> TorsionSummary {
        TorsionSummary {
            tau0: t.classes.tau0.to_string(),
            tau1: t.classes.tau1.to_string(),
            tau2: t.classes.tau2.to_string(),
            tau3: t.classes.tau3.to_string(),
            h: t.h.as_ref().map(|h| h.to_string()),
            dh: t.dh.as_ref().map(|d| d.to_string()),
            integrable: t.classes.tau2.is_zero(),
            h_closed: t.dh.as_ref().is_some_and(|d| d.is_zero()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DilatonSummary {
    /// `(4√2/k) T(τ1_i e^i)`.
    pub correction: String,
    /// `G - G0 - correction`.
    pub residual: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionBody {
    pub schema: &'static str,
    pub manifest: String,
    pub description: String,
    pub torsion: TorsionSummary,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Key of the manifest's `[expected]` section to whether it matches.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<String, bool>,
}

impl TorsionBody {
    pub fn expected_ok(&self) -> bool {
        self.expected.values().all(|&ok| ok)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyBody {
    pub schema: &'static str,
    pub manifest: String,
    pub level: String,
    pub k: String,
    pub a: String,
    pub torsion: TorsionSummary,
    pub dilaton: DilatonSummary,
    pub verification: VerificationReport,
    /// `e1..e7` and the six SV_a fields.
    pub fields: BTreeMap<String, FieldSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSummary {
    /// Number of normally ordered monomials in the canonical form.
    pub terms: usize,
    /// Canonical s-expression text, present when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub generated_unix: u64,
    pub jobs: usize,
    pub timings_ms: BTreeMap<String, u128>,
}

impl Header {
    pub fn new(jobs: usize, timings_ms: BTreeMap<String, u128>) -> Header {
        let generated_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Header { tool: "g2va", version: env!("CARGO_PKG_VERSION"), generated_unix, jobs, timings_ms }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Document<B> {
    pub header: Header,
    pub report: B,
}

pub fn level_text(l: &Level) -> String {
    match l {
        Level::Formal => "formal".into(),
        Level::Rational(q) => q.to_string(),
    }
}

pub fn torsion(geometry: &Geometry) -> Result<TorsionBody, ManifestError> {
    let t = geometry.torsion()?;
    Ok(TorsionBody {
        schema: REPORT_SCHEMA,
        manifest: geometry.manifest.name.clone(),
        description: geometry.manifest.description.clone(),
        torsion: TorsionSummary::new(&t),
        notes: geometry.manifest.notes.clone(),
        expected: compare_expected(geometry, &t)?,
    })
}

fn compare_expected(geometry: &Geometry, t: &TorsionReport) -> Result<BTreeMap<String, bool>, ManifestError> {
    let mut out = BTreeMap::new();
    let Some(exp) = &geometry.manifest.expected else {
        return Ok(out);
    };
    let c = &t.classes;
    let forms = [("tau1", &exp.tau1, Some(&c.tau1)), ("tau2", &exp.tau2, Some(&c.tau2)), ("tau3", &exp.tau3, Some(&c.tau3)), ("h", &exp.h, t.h.as_ref())];
    if let Some(src) = &exp.tau0 {
        out.insert("tau0".to_string(), geometry.parse_scalar(src)? == c.tau0);
    }
    for (key, src, got) in forms {
        if let Some(src) = src {
            let want = geometry.parse_form(src, key)?;
            // "0" parses as a 0-form; compare by vanishing in that case
            let ok = match got {
                Some(g) if want.is_zero() => g.is_zero(),
                Some(g) => *g == want,
                None => false,
            };
            out.insert(key.to_string(), ok);
        }
    }
    if let Some(src) = &exp.a {
        let a = geometry.a_parameter(&c.tau0)?;
        out.insert("a".to_string(), geometry.parse_scalar(src)? == a);
    }
    Ok(out)
}

/// Builds the fields, checks them against the table and checks the
/// dilaton-corrected form of `G`. Returns the body and per-stage timings.
pub fn verify(
    geometry: &Geometry,
    options: BuildOptions,
    a_override: Option<crate::Scalar>,
) -> Result<(VerifyBody, BTreeMap<String, u128>), EmbedError> {
    verify_with(geometry, options, a_override, false)
}

/// [`verify`], optionally carrying the full text of every field.
pub fn verify_with(
    geometry: &Geometry,
    options: BuildOptions,
    a_override: Option<crate::Scalar>,
    field_text: bool,
) -> Result<(VerifyBody, BTreeMap<String, u128>), EmbedError> {
    let mut timings = BTreeMap::new();
    let t0 = Instant::now();
    let torsion_report = geometry.torsion()?;
    let emb = Embedding::build_with(geometry, options)?;
    for f in crate::embed::Field::ALL {
        emb.field(f);
    }
    timings.insert("fields".into(), t0.elapsed().as_millis());
    let t1 = Instant::now();
    let a = a_override.unwrap_or_else(|| emb.a.clone());
    let verification = sva::check_fields(&emb, &a);
    timings.insert("table".into(), t1.elapsed().as_millis());
    for p in &verification.pairs {
        timings.insert(format!("pair {}", p.pair), p.millis);
    }
    let t2 = Instant::now();
    let residual = emb.dilaton_residual(G0Reading::SZeroProductSwapped, G0Grouping::Nested);
    let dilaton = DilatonSummary {
        correction: sexpr::expr_text(&emb.engine, &emb.dilaton_correction()),
        residual: sexpr::expr_text(&emb.engine, &residual),
        passed: residual.is_zero(),
    };
    timings.insert("dilaton".into(), t2.elapsed().as_millis());
    let summary = |e: &crate::va::Expr| FieldSummary {
        terms: e.len(),
        text: field_text.then(|| sexpr::expr_text(&emb.engine, e)),
    };
    let mut fields = BTreeMap::new();
    for (i, e) in emb.e.iter().enumerate() {
        fields.insert(format!("e{}", i + 1), summary(e));
    }
    for f in crate::embed::Field::ALL {
        fields.insert(f.name().to_string(), summary(emb.field(f)));
    }
    let body = VerifyBody {
        schema: REPORT_SCHEMA,
        manifest: geometry.manifest.name.clone(),
        level: level_text(&geometry.level),
        k: geometry.k.to_string(),
        a: a.to_string(),
        torsion: TorsionSummary::new(&torsion_report),
        dilaton,
        verification,
        fields,
        notes: geometry.manifest.notes.clone(),
    };
    Ok((body, timings))
}

pub fn torsion_text(b: &TorsionBody) -> String {
    let t = &b.torsion;
    let mut s = String::new();
    let _ = writeln!(s, "manifest {}", b.manifest);
    let _ = writeln!(s, "  tau0 = {}", t.tau0);
    let _ = writeln!(s, "  tau1 = {}", t.tau1);
    let _ = writeln!(s, "  tau2 = {}", t.tau2);
    let _ = writeln!(s, "  tau3 = {}", t.tau3);
    let _ = writeln!(s, "  H    = {}", t.h.as_deref().unwrap_or("(undefined, tau2 != 0)"));
    let _ = writeln!(s, "  dH   = {}", t.dh.as_deref().unwrap_or("(undefined)"));
    let verdict = if t.integrable && t.h_closed { "integrable, H closed" } else { "NOT integrable with closed H" };
    let _ = writeln!(s, "  {verdict}");
    for n in &b.notes {
        let _ = writeln!(s, "  note: {n}");
    }
    for (key, ok) in &b.expected {
        let _ = writeln!(s, "  expected {key:<5} {}", if *ok { "match" } else { "MISMATCH" });
    }
    s
}

pub fn verify_text(b: &VerifyBody) -> String {
    let v = &b.verification;
    let mut s = String::new();
    let _ = writeln!(s, "manifest {}  level {}  a = {}", b.manifest, b.level, b.a);
    for p in &v.pairs {
        let tag = match p.status {
            Status::Match => "match",
            Status::Corrected => "corrected",
            Status::Fail => "FAIL",
        };
        let _ = writeln!(s, "  {:<14} {tag}", p.pair);
        if let Some(r) = &p.resolved {
            let _ = writeln!(s, "      resolved: {r}");
        }
        if let Some(n) = &p.note {
            let _ = writeln!(s, "      note: {n}");
        }
        if p.status == Status::Fail {
            let _ = writeln!(s, "      residual: {}", p.residual);
        }
    }
    let _ = writeln!(
        s,
        "  central charge: expected {}, from [G G] {}, from [L L] {}",
        v.central_charge_expected, v.central_charge_from_gg, v.central_charge_from_ll
    );
    let _ = writeln!(s, "  singular relation: {}", v.singular_relation_residual);
    let _ = writeln!(s, "  dilaton correction: {}", b.dilaton.correction);
    let _ = writeln!(s, "  dilaton residual: {}", b.dilaton.residual);
    match &v.first_failure {
        None => {
            let _ = writeln!(s, "PASS");
        }
        Some(f) => {
            let _ = writeln!(s, "FAIL at {f}");
        }
    }
    s
}
