//! Residuals of the vertex-algebra identities, used as independent checks
//! of the engine. Each function returns zero exactly when the identity holds.

use std::collections::BTreeMap;

use super::engine::Engine;
use super::expr::{binomial, Expr, LambdaPoly};

/// A polynomial in two variables `λ^i μ^j` with expression coefficients.
pub type Poly2 = BTreeMap<(usize, usize), Expr>;

fn add2(p: &mut Poly2, i: usize, j: usize, e: Expr) {
    if e.is_zero() {
        return;
    }
    let slot = p.entry((i, j)).or_default();
    slot.add_owned(e);
    if slot.is_zero() {
        p.remove(&(i, j));
    }
}

fn parity(engine: &Engine, e: &Expr) -> bool {
    engine.parity(e).unwrap_or(false)
}

/// `[x_λ [y_μ z]] - p(x,y)[y_μ [x_λ z]] - [[x_λ y]_{λ+μ} z]`.
pub fn jacobi(engine: &Engine, x: &Expr, y: &Expr, z: &Expr) -> Poly2 {
    jacobi_with(engine, x, y, z, &engine.bracket(y, z), &engine.bracket(x, z), &engine.bracket(x, y))
}

/// The Jacobi residual with the inner brackets `[y_μ z]`, `[x_λ z]` and
/// `[x_λ y]` supplied by the caller, for instance from a bracket table.
pub fn jacobi_with(
    engine: &Engine,
    x: &Expr,
    y: &Expr,
    z: &Expr,
    yz: &LambdaPoly,
    xz: &LambdaPoly,
    xy: &LambdaPoly,
) -> Poly2 {
    let mut out = Poly2::new();
    let sign_neg = parity(engine, x) && parity(engine, y);
    for (m, b) in yz.iter() {
        for (n, c) in engine.bracket(x, b).iter() {
            add2(&mut out, n, m, c.clone());
        }
    }
    for (n, a) in xz.iter() {
        for (m, c) in engine.bracket(y, a).iter() {
            add2(&mut out, n, m, if sign_neg { c.clone() } else { c.neg() });
        }
    }
    for (p, d) in xy.iter() {
        for (q, c) in engine.bracket(d, z).iter() {
            for r in 0..=q {
                let coeff = binomial(q as u32, r as u32);
                add2(&mut out, p + r, q - r, c.scale_rat(&coeff).neg());
            }
        }
    }
    out
}

/// `[x_λ y] + p(x,y)[y_{-λ-T} x]`.
pub fn skew_symmetry(engine: &Engine, x: &Expr, y: &Expr) -> LambdaPoly {
    let both_odd = parity(engine, x) && parity(engine, y);
    let rebuilt = engine.skew(&engine.bracket(y, x), !both_odd);
    engine.bracket(x, y).sub(&rebuilt)
}

/// `:xy: - p(x,y):yx: - ∫_{-T}^0 [x_λ y] dλ`.
pub fn quasi_commutativity(engine: &Engine, x: &Expr, y: &Expr) -> Expr {
    let both_odd = parity(engine, x) && parity(engine, y);
    let yx = engine.nop(y, x);
    let mut r = engine.nop(x, y);
    r = if both_odd { r.add(&yx) } else { r.sub(&yx) };
    r.sub(&engine.integral_minus_t(&engine.bracket(x, y)))
}

/// `S(:xy:) - :(Sx)y: - (-1)^{|x|}:x(Sy):`.
pub fn s_derivation_nop(engine: &Engine, x: &Expr, y: &Expr) -> Expr {
    let lhs = engine.apply_s(&engine.nop(x, y));
    let a = engine.nop(&engine.apply_s(x), y);
    let b = engine.nop(x, &engine.apply_s(y));
    let b = if parity(engine, x) { b.neg() } else { b };
    lhs.sub(&a).sub(&b)
}

/// `S[x_λ y] - [Sx_λ y] - (-1)^{|x|}[x_λ Sy]`.
pub fn s_derivation_bracket(engine: &Engine, x: &Expr, y: &Expr) -> LambdaPoly {
    let lhs = engine.apply_s_poly(&engine.bracket(x, y));
    let a = engine.bracket(&engine.apply_s(x), y);
    let b = engine.bracket(x, &engine.apply_s(y));
    let b = if parity(engine, x) { b.neg() } else { b };
    lhs.sub(&a).sub(&b)
}

/// `T(:xy:) - :(Tx)y: - :x(Ty):`.
pub fn t_derivation(engine: &Engine, x: &Expr, y: &Expr) -> Expr {
    let lhs = engine.apply_t(&engine.nop(x, y));
    lhs.sub(&engine.nop(&engine.apply_t(x), y)).sub(&engine.nop(x, &engine.apply_t(y)))
}

/// `[Tx_λ y] + λ[x_λ y]` and `[x_λ Ty] - (λ+T)[x_λ y]`, summed into one
/// residual pair.
pub fn sesquilinearity(engine: &Engine, x: &Expr, y: &Expr) -> (LambdaPoly, LambdaPoly) {
    let base = engine.bracket(x, y);
    let mut shifted = LambdaPoly::zero();
    for (n, c) in base.iter() {
        shifted.add_at(n + 1, c);
    }
    let left = engine.bracket(&engine.apply_t(x), y).add(&shifted);
    let right = engine.bracket(x, &engine.apply_t(y)).sub(&shifted).sub(&engine.translate_poly(&base));
    (left, right)
}

/// `S² - T` on an expression.
pub fn s_squared(engine: &Engine, x: &Expr) -> Expr {
    engine.apply_s(&engine.apply_s(x)).sub(&engine.apply_t(x))
}
