//! The SV_a table as data, and checks of individual entries against the
//! fields built from the geometries.

use g2va::embed::{BuildOptions, Embedding, Field};
use g2va::manifest::{Geometry, Manifest};
use g2va::report;
use g2va::sva::{self, ACoeff, Instantiator, Mono, Status, TableError, Term};
use g2va::va::expr::rat;
use g2va::va::Expr;

fn embedding(name: &str) -> Embedding {
    Embedding::build(&Geometry::build(&Manifest::preset(name).unwrap(), None).unwrap()).unwrap()
}

fn fields(emb: &Embedding) -> Vec<Expr> {
    Field::ALL.iter().map(|f| emb.field(*f).clone()).collect()
}

fn t(lambda: usize, t: u32, c: (i64, i64), mono: Mono) -> Term {
    Term { lambda, t, coeff: ACoeff::constant(rat(c.0, c.1)), mono }
}

#[test]
fn l_g_entry_is_primary_of_weight_three_halves() {
    let got = sva::simplify(&sva::expected_bracket(&sva::table(), Field::L, Field::G).unwrap());
    let want = vec![t(1, 0, (3, 2), Mono::One(Field::G)), t(0, 1, (1, 1), Mono::One(Field::G))];
    assert_eq!(got, want);
}

#[test]
fn phi_phi_entry() {
    let got = sva::simplify(&sva::expected_bracket(&sva::table(), Field::Phi, Field::Phi).unwrap());
    let want = vec![t(2, 0, (-7, 2), Mono::Vac), t(0, 0, (6, 1), Mono::One(Field::X))];
    assert_eq!(got, want);
}

#[test]
fn g_phi_at_a_zero_is_k() {
    let terms = sva::expected_bracket(&sva::table(), Field::G, Field::Phi).unwrap();
    assert_eq!(sva::at_a_zero(&terms), vec![t(0, 0, (1, 1), Mono::One(Field::K))]);
    let emb = embedding("phi1");
    let f = fields(&emb);
    let inst = Instantiator { engine: &emb.engine, fields: &f };
    let p = inst.template(&terms, &emb.ring().zero());
    assert_eq!(p.coeff(0), f[Field::K.index()]);
    assert!(p.coeff(2).is_zero());
}

#[test]
fn incomplete_entries_need_a_resolution() {
    let table = sva::table();
    assert!(matches!(sva::expected_bracket(&table, Field::X, Field::M), Err(TableError::Incomplete(_))));
    assert!(matches!(sva::expected_bracket(&table, Field::M, Field::X), Err(TableError::Incomplete(_))));
    assert!(matches!(sva::expected_bracket(&table, Field::M, Field::M), Err(TableError::Incomplete(_))));
}

#[test]
fn reversed_entries_follow_from_skew_symmetry() {
    // [M_λ X] is not listed; its template comes from skew-symmetry of the
    // resolved [X_λ M] and must agree with the bracket computed directly
    let emb = embedding("phi2");
    let rep = sva::check_fields(&emb, &emb.a);
    let xm = rep.pairs.iter().find(|p| p.pair == "[X_λ M]").unwrap().resolved_terms.clone().unwrap();
    let table = sva::resolved_table(&[(Field::X, Field::M, xm)]);
    let f = fields(&emb);
    let inst = Instantiator { engine: &emb.engine, fields: &f };
    for (x, y) in [(Field::M, Field::X), (Field::G, Field::L), (Field::K, Field::Phi), (Field::M, Field::K)] {
        let terms = sva::expected_bracket(&table, x, y).unwrap();
        let computed = emb.engine.bracket(&f[x.index()], &f[y.index()]);
        assert!(computed.sub(&inst.template(&terms, &emb.a)).is_zero(), "[{x:?} {y:?}]");
    }
}

#[test]
fn zero_fields_fail_on_the_virasoro_central_term() {
    let emb = embedding("phi1");
    let zero = vec![Expr::zero(); 6];
    let rep = sva::check(&emb.engine, &zero, &emb.a);
    assert!(!rep.passed);
    let ll = rep.pairs.iter().find(|p| p.pair == "[L_λ L]").unwrap();
    assert_eq!(ll.status, Status::Fail);
    assert!(ll.residual.contains("vac"), "{}", ll.residual);
}

#[test]
fn l_phi_has_no_central_term() {
    // [L_λ Φ] is odd and the vacuum is even, so no λ^n |0> can appear
    let emb = embedding("phi3");
    let p = emb.engine.bracket(emb.field(Field::L), emb.field(Field::Phi));
    for (_, c) in p.iter() {
        assert!(c.constant().is_none());
    }
}

#[test]
fn g_is_recovered_from_phi_and_k() {
    // Φ_(1)K = 6aΦ - 3G, read off the λ^1 term of [Φ_λ K]
    for name in ["phi2", "phi4"] {
        let emb = embedding(name);
        let lhs = emb.engine.nproduct(1, emb.field(Field::Phi), emb.field(Field::K));
        let rhs = emb.field(Field::Phi).scale(&emb.a.scale(&rat(6, 1))).sub(&emb.field(Field::G).scale_rat(&rat(3, 1)));
        assert_eq!(lhs, rhs, "{name}");
    }
}

#[test]
fn a_free_presets_match_the_undeformed_table() {
    let emb = embedding("phi4");
    assert!(emb.a.is_zero());
    let rep = sva::check_fields(&emb, &emb.ring().zero());
    assert!(rep.passed);
    assert_eq!(rep.central_charge_from_gg, "21/2");
}

#[test]
fn singular_relation_is_sensitive_to_the_fields() {
    let emb = embedding("phi2");
    let mut f = fields(&emb);
    f[Field::M.index()] = f[Field::M.index()].scale_rat(&rat(2, 1));
    let rep = sva::check(&emb.engine, &f, &emb.a);
    assert_ne!(rep.singular_relation_residual, "0");
}

#[test]
fn report_body_is_deterministic_across_thread_counts() {
    let geo = Geometry::build(&Manifest::preset("phi1").unwrap(), None).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let (body, _) = pool.install(|| report::verify(&geo, BuildOptions::default(), None)).unwrap();
        serde_json::to_string(&body).unwrap()
    };
    assert_eq!(run(1), run(3));
}
