//! The λ-bracket engine on small presentations and on random words of the
//! superaffine algebra of a twisted double.

use std::sync::LazyLock;

use g2va::forms::ExtForm;
use g2va::liealg::{LieAlgebra, QuadraticLieAlgebra};
use g2va::manifest::{Geometry, Manifest};
use g2va::va::{axioms, superaffine, Engine, Expr, Letter};
use g2va::{Param, Ring};
use proptest::prelude::*;

fn abelian(dim: usize) -> (Ring, Engine) {
    let ring = Ring::declare(vec![Param::free("k")]).unwrap();
    let lie = LieAlgebra::from_structure_equations(&ring, dim, &[]).unwrap();
    let double = QuadraticLieAlgebra::double(&lie, &ExtForm::zero(&ring, dim)).unwrap();
    let k = ring.var("k").unwrap();
    let engine = Engine::new(superaffine(&double, &k, |n| format!("P{n}")).unwrap()).unwrap();
    (ring, engine)
}

static HOPF: LazyLock<Engine> = LazyLock::new(|| {
    let geo = Geometry::build(&Manifest::preset("phi1").unwrap(), None).unwrap();
    Engine::new(superaffine(&geo.double().unwrap(), &geo.k, |n| format!("P{n}")).unwrap()).unwrap()
});

fn g(e: &Engine, name: &str) -> Expr {
    e.gen(name).unwrap_or_else(|| panic!("no generator {name}"))
}

#[test]
fn odd_pairing_is_half_the_level() {
    let (ring, e) = abelian(1);
    let p = e.bracket(&g(&e, "Pv1"), &g(&e, "Pv1*"));
    assert_eq!(p.degree(), Some(0));
    assert_eq!(p.coeff(0), Expr::scalar(ring.parse("k/2").unwrap()));
}

#[test]
fn twisted_double_brackets() {
    let e = &*HOPF;
    let ring = e.ring();
    let l = ring.var("l").unwrap();
    let want = g(e, "v6*").scale(&l).sub(&g(e, "v6"));
    let p = e.bracket(&g(e, "v4"), &g(e, "v5"));
    assert_eq!(p.degree(), Some(0));
    assert_eq!(p.coeff(0), want);
    let want = g(e, "Pv6*").scale(&l).sub(&g(e, "Pv6"));
    assert_eq!(e.bracket(&g(e, "v4"), &g(e, "Pv5")).coeff(0), want);
}

#[test]
fn wick_formula_with_central_inner_bracket() {
    let (ring, e) = abelian(2);
    let bc = e.nop(&g(&e, "Pv1"), &g(&e, "Pv2"));
    let p = e.bracket(&g(&e, "Pv1*"), &bc);
    assert_eq!(p.degree(), Some(0));
    assert_eq!(p.coeff(0), g(&e, "Pv2").scale(&ring.parse("k/2").unwrap()));
}

#[test]
fn vacuum_rules() {
    let e = &*HOPF;
    let vac = e.vacuum();
    for name in ["v1", "Pv4", "v7*"] {
        let x = g(e, name);
        assert!(e.bracket(&x, &vac).is_zero());
        assert_eq!(e.nop(&vac, &x), x);
        assert_eq!(e.nop(&x, &vac), x);
    }
}

#[test]
fn odd_square_with_zero_self_bracket_vanishes() {
    let (_, e) = abelian(1);
    let x = g(&e, "Pv1");
    assert!(e.bracket(&x, &x).is_zero());
    assert!(e.nop(&x, &x).is_zero());
}

#[test]
fn s_squares_to_t_on_generators() {
    let e = &*HOPF;
    for i in 0..e.presentation().len() {
        let x = e.presentation().gen_expr(i);
        assert!(axioms::s_squared(e, &x).is_zero());
    }
}

#[test]
fn n_products_vanish_above_the_weight_bound() {
    let e = &*HOPF;
    let x = e.nop(&g(e, "Pv1"), &g(e, "v4"));
    let y = e.nop(&g(e, "Pv5"), &e.apply_t(&g(e, "Pv6")));
    // weights 3/2 and 5/2
    assert!(!e.bracket(&x, &y).is_zero());
    for n in 4..7 {
        assert!(e.nproduct(n, &x, &y).is_zero(), "n = {n}");
    }
}

fn word(e: &Engine, spec: &[(usize, u32)]) -> Expr {
    let pres = e.presentation();
    let letters: Vec<Letter> = spec.iter().map(|&(g, d)| pres.letter(g % pres.len(), d)).collect();
    e.from_letters(&letters)
}

fn word_strategy() -> impl Strategy<Value = Vec<(usize, u32)>> {
    prop::collection::vec((0usize..28, 0u32..3), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quasi_commutativity(a in word_strategy(), b in word_strategy()) {
        let e = &*HOPF;
        let (x, y) = (word(e, &a), word(e, &b));
        prop_assert!(axioms::quasi_commutativity(e, &x, &y).is_zero());
    }

    #[test]
    fn s_and_t_are_derivations(a in word_strategy(), b in word_strategy()) {
        let e = &*HOPF;
        let (x, y) = (word(e, &a), word(e, &b));
        prop_assert!(axioms::s_derivation_nop(e, &x, &y).is_zero());
        prop_assert!(axioms::s_derivation_bracket(e, &x, &y).is_zero());
        prop_assert!(axioms::t_derivation(e, &x, &y).is_zero());
    }

    #[test]
    fn sesquilinearity_and_skew_symmetry(a in word_strategy(), b in word_strategy()) {
        let e = &*HOPF;
        let (x, y) = (word(e, &a), word(e, &b));
        let (l, r) = axioms::sesquilinearity(e, &x, &y);
        prop_assert!(l.is_zero());
        prop_assert!(r.is_zero());
        prop_assert!(axioms::skew_symmetry(e, &x, &y).is_zero());
    }

    #[test]
    fn jacobi_on_short_words(
        a in prop::collection::vec((0usize..28, 0u32..2), 1..3),
        b in prop::collection::vec((0usize..28, 0u32..2), 1..2),
        c in prop::collection::vec((0usize..28, 0u32..2), 1..3),
    ) {
        let e = &*HOPF;
        let (x, y, z) = (word(e, &a), word(e, &b), word(e, &c));
        prop_assert!(axioms::jacobi(e, &x, &y, &z).is_empty());
    }
}
