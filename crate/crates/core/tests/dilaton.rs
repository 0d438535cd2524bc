//! Readings of the torsion-free supersymmetry generator `G0`. Only one
//! reading of the bracket `[e^n, e^j]` and of the level grouping makes the
//! dilaton residual vanish.

use g2va::embed::{Embedding, G0Grouping, G0Reading};
use g2va::manifest::{Geometry, Manifest};
use g2va::va::Expr;

fn embedding(name: &str) -> Embedding {
    Embedding::build(&Geometry::build(&Manifest::preset(name).unwrap(), None).unwrap()).unwrap()
}

#[test]
fn swapped_zero_product_with_nested_levels_is_the_only_reading() {
    let emb = embedding("phi3");
    assert!(emb.dilaton_residual(G0Reading::SZeroProductSwapped, G0Grouping::Nested).is_zero());
    for (r, g) in [
        (G0Reading::SZeroProduct, G0Grouping::Nested),
        (G0Reading::PiBracket, G0Grouping::Nested),
        (G0Reading::SZeroProductSwapped, G0Grouping::Inner),
    ] {
        assert!(!emb.dilaton_residual(r, g).is_zero(), "{r:?} {g:?}");
    }
}

#[test]
fn natural_order_flips_only_the_cubic_term() {
    // G0 = quadratic + cubic, and exchanging the arguments of the zero
    // product negates the cubic part, so the two readings sum to twice the
    // quadratic part (2/k) g_ij :(Se^i)e^j:
    let emb = embedding("phi1");
    let en = &emb.engine;
    let g = emb.geometry.g2.metric.g();
    let mut quadratic = Expr::zero();
    for i in 0..7 {
        for j in 0..7 {
            quadratic.add_scaled(&en.nop(&en.apply_s(&emb.e[i]), &emb.e[j]), &g[i][j]);
        }
    }
    let two_over_k = emb.ring().int(2).checked_div(&emb.geometry.k).unwrap();
    let natural = emb.g0_field(G0Reading::SZeroProduct, G0Grouping::Nested);
    let swapped = emb.g0_field(G0Reading::SZeroProductSwapped, G0Grouping::Nested);
    assert_ne!(natural, swapped);
    assert_eq!(natural.add(&swapped), quadratic.scale(&(&two_over_k * &emb.ring().int(2))));
}
