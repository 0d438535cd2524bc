//! The `g2va` binary: subcommands, report files and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn g2va(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2va"))
        .args(args)
        .env_remove("G2VA_JOBS")
        .env_remove("G2VA_REPORT")
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn presets_lists_five_geometries() {
    let o = g2va(&["presets"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for n in ["phi1", "phi2", "phi3", "phi4", "phi5"] {
        assert!(out.lines().any(|l| l.starts_with(n)), "{out}");
    }
}

#[test]
fn torsion_of_phi2() {
    let o = g2va(&["torsion", "--preset", "phi2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("tau0 = (6/7)*rl/l"), "{out}");
    assert!(out.contains("tau1 = 0"), "{out}");
}

#[test]
fn torsion_of_phi4() {
    let o = g2va(&["torsion", "--preset", "phi4", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["report"]["torsion"]["tau0"], "0");
    assert_eq!(doc["report"]["torsion"]["tau1"], "(1/4)*rs*rl*rc7*rsl/(s*l)*v7");
}

#[test]
fn flat_space_has_no_torsion() {
    let o = g2va(&["torsion", "--manifest", &data("flat.toml"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["tau0", "tau1", "tau2", "tau3", "h"] {
        assert_eq!(doc["report"]["torsion"][key], "0", "{key}");
    }
}

#[test]
fn expected_section_is_compared() {
    let o = g2va(&["torsion", "--preset", "phi3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["tau0", "tau1", "tau2", "tau3", "h", "a"] {
        assert_eq!(doc["report"]["expected"][key], true, "{key}");
    }
    let dir = tempfile::tempdir().unwrap();
    let wrong = dir.path().join("wrong.toml");
    let text = std::fs::read_to_string(data("flat.toml")).unwrap();
    std::fs::write(&wrong, format!("{text}\n[expected]\ntau0 = \"1\"\ntau1 = \"0\"\n")).unwrap();
    let o = g2va(&["torsion", "--manifest", wrong.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("expected tau0  MISMATCH"), "{out}");
    assert!(out.contains("expected tau1  match"), "{out}");
}

#[test]
fn verify_phi3_at_formal_level() {
    let o = g2va(&["verify", "--preset", "phi3", "--level", "formal"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("a = -rs*kappa/(s*k)"), "{out}");
    assert!(out.trim_end().ends_with("PASS"));
}

#[test]
fn verify_phi1_at_level_two() {
    let o = g2va(&["verify", "--preset", "phi1", "--level", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("a = 0"));
}

#[test]
fn verify_report_carries_fields_and_notes() {
    let o = g2va(&["verify", "--preset", "phi1", "--json", "--fields"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let fields = &doc["report"]["fields"];
    for key in ["e1", "e7", "G", "L", "Phi", "K", "X", "M"] {
        assert!(fields[key]["terms"].as_u64().unwrap() > 0, "{key}");
        assert!(fields[key]["text"].is_string(), "{key}");
    }
    assert!(doc["report"]["notes"][0].as_str().unwrap().contains("eta3"));
    let o = g2va(&["verify", "--preset", "phi1", "--json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["report"]["fields"]["Phi"]["text"].is_null());
}

#[test]
fn open_torsion_is_rejected_before_verification() {
    let o = g2va(&["verify", "--manifest", &data("open_h.toml")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not closed"));
    let o = g2va(&["torsion", "--manifest", &data("open_h.toml")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn parse_errors_exit_with_two() {
    assert_eq!(g2va(&["verify", "--preset", "phi9"]).status.code(), Some(2));
    assert_eq!(g2va(&["verify", "--preset", "phi1", "--level", "0"]).status.code(), Some(2));
    assert_eq!(g2va(&["bracket", "--preset", "phi1", "Phi", "(nop e1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "schema = \"other\"\nname = \"x\"\n[g2]\nconstruction = \"phi\"\nphi = \"v123\"\n").unwrap();
    assert_eq!(g2va(&["torsion", "--manifest", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn bracket_queries() {
    let o = g2va(&["bracket", "--preset", "phi1", "vacuum", "Phi"]);
    assert_eq!(stdout(&o).trim(), "0");
    let o = g2va(&["bracket", "--preset", "phi1", "e1", "e1"]);
    assert_eq!(stdout(&o).trim(), "(lpoly (0 (* [(1/2)*k/c1] vac)))");
    // the λ^2 coefficient of [Φ_λ Φ] is -7/2 times the vacuum
    let o = g2va(&["bracket", "--preset", "phi3", "Phi", "Phi"]);
    assert!(stdout(&o).contains("(2 (* -7/2 vac))"), "{}", stdout(&o));
}

#[test]
fn report_is_independent_of_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, file: &str| {
        let path = dir.path().join(file);
        let o = g2va(&["verify", "--preset", "phi2", "--jobs", jobs, "--report", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(doc["header"]["tool"], "g2va");
        doc["report"].clone()
    };
    let one = run("1", "one.json");
    let two = run("2", "two.json");
    assert_eq!(one, two);
    assert_eq!(one["verification"]["passed"], true);
    let pairs = one["verification"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 21);
    let mm = pairs.iter().find(|p| p["pair"] == "[M_λ M]").unwrap();
    assert_eq!(mm["status"], "corrected");
    assert!(mm["resolved"].as_str().unwrap().contains("(-5/2)*T^2*L"));
}

#[test]
fn report_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    let o = Command::new(env!("CARGO_BIN_EXE_g2va"))
        .args(["torsion", "--preset", "phi5"])
        .env("G2VA_REPORT", &path)
        .output()
        .unwrap();
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(doc["report"]["manifest"], "phi5");
}
