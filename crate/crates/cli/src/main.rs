//! `g2va`: torsion analysis and SV_a verification for G2 manifests.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 parse or usage error,
//! 3 geometric precondition (not integrable, H not closed, degenerate data).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use g2va::embed::{BuildOptions, EmbedError, Embedding};
use g2va::manifest::{Geometry, Level, Manifest, ManifestError, PRESETS};
use g2va::report::{self, Document, Header};
use g2va::va::sexpr;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "g2va", version, about = "Exact SV_a verification for G2-structures with torsion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in presets.
    Presets,
    /// Torsion classes, characteristic torsion H and dH.
    Torsion {
        #[command(flatten)]
        source: Source,
        /// Print the JSON document instead of text.
        #[arg(long)]
        json: bool,
        /// Also write the JSON document to this path.
        #[arg(long, env = "G2VA_REPORT")]
        report: Option<PathBuf>,
    },
    /// Build the SV_a fields and check every bracket of the table.
    Verify {
        #[command(flatten)]
        source: Source,
        /// `formal`, or a nonzero rational such as `2` or `3/2`.
        #[arg(long)]
        level: Option<String>,
        /// Worker threads for the bracket table (0 = all cores).
        #[arg(long, env = "G2VA_JOBS", default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        json: bool,
        #[arg(long, env = "G2VA_REPORT")]
        report: Option<PathBuf>,
        /// Include the full canonical text of every field in the report.
        #[arg(long)]
        fields: bool,
    },
    /// λ-bracket of two expressions in the preset's vertex algebra.
    Bracket {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        level: Option<String>,
        /// Left operand, e.g. `Phi`, `e1`, `(nop e1 e2)`, `(S X)`.
        left: String,
        right: String,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in preset name (see `g2va presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Path to a manifest file.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

enum Failure {
    Verification(String),
    Parse(String),
    Geometric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Geometric(_) => 3,
        }
    }
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        if e.is_geometric() {
            Failure::Geometric(e.to_string())
        } else {
            Failure::Parse(e.to_string())
        }
    }
}

impl From<EmbedError> for Failure {
    fn from(e: EmbedError) -> Self {
        if e.is_geometric() {
            Failure::Geometric(e.to_string())
        } else {
            Failure::Parse(e.to_string())
        }
    }
}

fn load(source: &Source) -> Result<Manifest, Failure> {
    match (&source.preset, &source.manifest) {
        (Some(name), _) => Ok(Manifest::preset(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
            Ok(Manifest::parse(&text)?)
        }
        (None, None) => Err(Failure::Parse("one of --preset or --manifest is required".into())),
    }
}

fn geometry(source: &Source, level: Option<&str>) -> Result<Geometry, Failure> {
    let m = load(source)?;
    let level = level.map(Level::parse).transpose()?;
    Ok(Geometry::build(&m, level)?)
}

fn write_report<T: Serialize>(doc: &T, path: Option<&Path>, print: bool) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(doc).expect("report serializes");
    if let Some(p) = path {
        fs::write(p, format!("{json}\n")).map_err(|e| Failure::Parse(format!("{}: {e}", p.display())))?;
    }
    if print {
        println!("{json}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Presets => {
            for (name, text) in PRESETS {
                let m = Manifest::parse(text)?;
                println!("{name:<6} {}", m.description);
            }
            Ok(())
        }
        Command::Torsion { source, json, report } => {
            let geo = geometry(&source, None)?;
            let body = report::torsion(&geo)?;
            if !json {
                print!("{}", report::torsion_text(&body));
            }
            let ok = body.torsion.integrable && body.torsion.h_closed;
            write_report(&Document { header: Header::new(1, Default::default()), report: &body }, report.as_deref(), json)?;
            if !ok {
                Err(Failure::Geometric(format!("{} is not integrable with closed H", body.manifest)))
            } else if !body.expected_ok() {
                let bad: Vec<&str> = body.expected.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.as_str()).collect();
                Err(Failure::Verification(format!("[expected] mismatch: {}", bad.join(", "))))
            } else {
                Ok(())
            }
        }
        Command::Verify { source, level, jobs, json, report, fields } => {
            let geo = geometry(&source, level.as_deref())?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Failure::Parse(format!("--jobs: {e}")))?;
            let threads = pool.current_num_threads();
            let (body, timings) = pool.install(|| report::verify_with(&geo, BuildOptions::default(), None, fields))?;
            if !json {
                print!("{}", report::verify_text(&body));
            }
            write_report(&Document { header: Header::new(threads, timings), report: &body }, report.as_deref(), json)?;
            match &body.verification.first_failure {
                None => Ok(()),
                Some(f) => Err(Failure::Verification(format!("first failure: {f}"))),
            }
        }
        Command::Bracket { source, level, left, right } => {
            let geo = geometry(&source, level.as_deref())?;
            let emb = Embedding::build(&geo)?;
            let lookup = |name: &str| if name == "vacuum" { Some(emb.engine.vacuum()) } else { emb.lookup(name) };
            let parse = |src: &str| {
                sexpr::parse_expr(&emb.engine, src, &lookup).map_err(|e| Failure::Parse(format!("`{src}`: {e}")))
            };
            let (a, b) = (parse(&left)?, parse(&right)?);
            println!("{}", sexpr::lambda_text(&emb.engine, &emb.engine.bracket(&a, &b)));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Verification(m) | Failure::Parse(m) | Failure::Geometric(m) => m,
            };
            eprintln!("g2va: {msg}");
            ExitCode::from(f.code())
        }
    }
}
