//! Lie algebras given by structure equations, and the quadratic double
//! `k ⊕ k*` twisted by a closed three-form.
//!
//! Brackets are recovered from the structure equations with the convention
//! `dα(X, Y) = -α([X, Y])` for left-invariant one-forms.

use std::collections::HashMap;

use crate::forms::{ExtForm, FormError};
use crate::linalg::{self, LinalgError, Matrix};
use crate::scalar::{Ring, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LieError {
    #[error("structure equation `{0}` is not of the form `dvK = <two-form>`")]
    BadEquation(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("Jacobi identity fails on ({0}, {1}, {2})")]
    Jacobi(String, String, String),
    #[error("three-form is not closed: dH = {0}")]
    NotClosed(String),
    #[error("pairing is not ad-invariant on ({0}, {1}, {2})")]
    NotInvariant(String, String, String),
    #[error("pairing is degenerate or not symmetric")]
    BadPairing,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug)]
pub struct LieAlgebra {
    ring: Ring,
    names: Vec<String>,
    /// `c[i][j][m]`: coefficient of `v_m` in `[v_i, v_j]`.
    c: Vec<Vec<Vec<Scalar>>>,
    /// `d` of every basis form, indexed by mask.
    d_basis: Vec<ExtForm>,
}

impl LieAlgebra {
    /// Parses equations like `dv4 = v56` (unlisted `dv^k` vanish).
    pub fn from_structure_equations(ring: &Ring, dim: usize, eqs: &[&str]) -> Result<Self, LieError> {
        let named = HashMap::new();
        let mut dv: Vec<ExtForm> = vec![ExtForm::zero(ring, dim); dim];
        for eq in eqs {
            let (lhs, rhs) = eq.split_once('=').ok_or_else(|| LieError::BadEquation(eq.to_string()))?;
            let lhs = lhs.trim();
            let k: usize = lhs
                .strip_prefix("dv")
                .and_then(|s| s.parse().ok())
                .filter(|&k| (1..=dim).contains(&k))
                .ok_or_else(|| LieError::BadEquation(eq.to_string()))?;
            let form = ExtForm::parse_homogeneous(rhs, ring, dim, &named, 2)
                .map_err(|_| LieError::BadEquation(eq.to_string()))?;
            dv[k - 1] = dv[k - 1].add(&form);
        }
        Self::from_differentials(ring, dv)
    }

    pub fn from_differentials(ring: &Ring, dv: Vec<ExtForm>) -> Result<Self, LieError> {
        let dim = dv.len();
        let mut c = vec![vec![vec![ring.zero(); dim]; dim]; dim];
        for (k, form) in dv.iter().enumerate() {
            for (mask, a) in form.terms() {
                let idx = crate::forms::mask_indices(mask);
                let (i, j) = (idx[0], idx[1]);
                c[i][j][k] = -a;
                c[j][i][k] = a.clone();
            }
        }
        let names = (1..=dim).map(|i| format!("v{i}")).collect();
        let mut alg = LieAlgebra { ring: ring.clone(), names, c, d_basis: Vec::new() };
        alg.check_jacobi()?;
        alg.d_basis = alg.compute_d_basis(&dv);
        Ok(alg)
    }

    fn compute_d_basis(&self, dv: &[ExtForm]) -> Vec<ExtForm> {
        let dim = self.dim();
        let mut out = vec![ExtForm::zero(&self.ring, dim); 1 << dim];
        // d(v^i ∧ rest) = dv^i ∧ rest - v^i ∧ d(rest), by increasing mask
        for mask in 1u32..(1 << dim) {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let rest_form = ExtForm::from_terms(&self.ring, dim, [(rest, self.ring.one())]);
            let vi = ExtForm::basis(&self.ring, dim, &[i]);
            let term = dv[i].wedge(&rest_form).sub(&vi.wedge(&out[rest as usize]));
            out[mask as usize] = term;
        }
        out
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// `[v_i, v_j]` as coefficients on `v_m`.
    pub fn bracket(&self, i: usize, j: usize) -> &[Scalar] {
        &self.c[i][j]
    }

    pub fn structure_constant(&self, i: usize, j: usize, m: usize) -> &Scalar {
        &self.c[i][j][m]
    }

    fn bracket_vec(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let n = self.dim();
        let mut out = vec![self.ring.zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let f = &x[i] * &y[j];
                for m in 0..n {
                    if !self.c[i][j][m].is_zero() {
                        out[m] = &out[m] + &(&f * &self.c[i][j][m]);
                    }
                }
            }
        }
        out
    }

    fn check_jacobi(&self) -> Result<(), LieError> {
        let n = self.dim();
        let unit = |i: usize| -> Vec<Scalar> {
            (0..n).map(|k| if k == i { self.ring.one() } else { self.ring.zero() }).collect()
        };
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (x, y, z) = (unit(i), unit(j), unit(k));
                    let a = self.bracket_vec(&x, &self.bracket_vec(&y, &z));
                    let b = self.bracket_vec(&y, &self.bracket_vec(&z, &x));
                    let c = self.bracket_vec(&z, &self.bracket_vec(&x, &y));
                    if (0..n).any(|m| !(&(&a[m] + &b[m]) + &c[m]).is_zero()) {
                        return Err(LieError::Jacobi(
                            self.names[i].clone(),
                            self.names[j].clone(),
                            self.names[k].clone(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Chevalley-Eilenberg differential of a left-invariant form.
    pub fn d(&self, f: &ExtForm) -> ExtForm {
        let mut out = ExtForm::zero(&self.ring, self.dim());
        for (mask, c) in f.terms() {
            let b = &self.d_basis[mask as usize];
            if !b.is_zero() {
                out = out.add(&b.scale(c));
            }
        }
        out
    }

    pub fn d_of_basis(&self, mask: u32) -> &ExtForm {
        &self.d_basis[mask as usize]
    }
}

/// A Lie algebra with an ad-invariant symmetric nondegenerate pairing.
#[derive(Clone, Debug)]
pub struct QuadraticLieAlgebra {
    ring: Ring,
    names: Vec<String>,
    /// Sparse brackets: `bracket[i][j]` lists `(m, c)` with `[x_i, x_j] = Σ c x_m`.
    bracket: Vec<Vec<Vec<(usize, Scalar)>>>,
    pairing: Matrix,
}

impl QuadraticLieAlgebra {
    /// Builds and verifies (symmetry, nondegeneracy, ad-invariance, Jacobi).
    pub fn new(ring: &Ring, names: Vec<String>, dense: Vec<Vec<Vec<Scalar>>>, pairing: Matrix) -> Result<Self, LieError> {
        let bracket = dense
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(m, c)| (m, c.clone())).collect())
                    .collect()
            })
            .collect();
        let q = QuadraticLieAlgebra { ring: ring.clone(), names, bracket, pairing };
        q.verify()?;
        Ok(q)
    }

    /// The double `k ⊕ k*` with bracket
    /// `[v+α, w+β] = [v,w] - β([v,·]) + α([w,·]) + i_w i_v H`
    /// and pairing `(v_i | v^j) = δ/2`. Basis order: `v1..vn, v1*..vn*`.
    pub fn double(k: &LieAlgebra, h: &ExtForm) -> Result<Self, LieError> {
        let dh = k.d(h);
        if !dh.is_zero() {
            return Err(LieError::NotClosed(dh.to_string()));
        }
        let ring = k.ring();
        let n = k.dim();
        let mut dense = vec![vec![vec![ring.zero(); 2 * n]; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    dense[i][j][m] = k.c[i][j][m].clone();
                    // i_{v_j} i_{v_i} H = H(v_i, v_j, ·)
                    dense[i][j][n + m] = h.evaluate(&[i, j, m]);
                    // [v_i, v^j] = -v^j([v_i, ·])
                    dense[i][n + j][n + m] = -&k.c[i][m][j];
                    // [v^i, v_j] = v^i([v_j, ·])
                    dense[n + i][j][n + m] = k.c[j][m][i].clone();
                }
            }
        }
        let half = ring.frac(1, 2);
        let mut pairing = vec![vec![ring.zero(); 2 * n]; 2 * n];
        for i in 0..n {
            pairing[i][n + i] = half.clone();
            pairing[n + i][i] = half.clone();
        }
        let mut names: Vec<String> = k.names().to_vec();
        names.extend(k.names().iter().map(|s| format!("{s}*")));
        Self::new(ring, names, dense, pairing)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bracket(&self, i: usize, j: usize) -> &[(usize, Scalar)] {
        &self.bracket[i][j]
    }

    pub fn bracket_dense(&self, i: usize, j: usize) -> Vec<Scalar> {
        let mut v = vec![self.ring.zero(); self.dim()];
        for (m, c) in &self.bracket[i][j] {
            v[*m] = c.clone();
        }
        v
    }

    pub fn pairing(&self, i: usize, j: usize) -> &Scalar {
        &self.pairing[i][j]
    }

    pub fn pairing_matrix(&self) -> &Matrix {
        &self.pairing
    }

    fn bracket_vec(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let n = self.dim();
        let mut out = vec![self.ring.zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let f = &x[i] * &y[j];
                for (m, c) in &self.bracket[i][j] {
                    out[*m] = &out[*m] + &(&f * c);
                }
            }
        }
        out
    }

    fn pair_vec(&self, x: &[Scalar], y: &[Scalar]) -> Scalar {
        let mut acc = self.ring.zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if !yj.is_zero() && !self.pairing[i][j].is_zero() {
                    acc = &acc + &(&(xi * yj) * &self.pairing[i][j]);
                }
            }
        }
        acc
    }

    fn unit(&self, i: usize) -> Vec<Scalar> {
        (0..self.dim()).map(|k| if k == i { self.ring.one() } else { self.ring.zero() }).collect()
    }

    pub fn verify(&self) -> Result<(), LieError> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if self.pairing[i][j] != self.pairing[j][i] {
                    return Err(LieError::BadPairing);
                }
                let a = self.bracket_dense(i, j);
                let b = self.bracket_dense(j, i);
                if a.iter().zip(&b).any(|(x, y)| !(x + y).is_zero()) {
                    return Err(LieError::BadPairing);
                }
            }
        }
        if linalg::determinant(&self.pairing, &self.ring).is_zero() {
            return Err(LieError::BadPairing);
        }
        for i in 0..n {
            for j in 0..n {
                let xy = self.bracket_dense(i, j);
                for k in 0..n {
                    let xz = self.bracket_dense(i, k);
                    let s = &self.pair_vec(&xy, &self.unit(k)) + &self.pair_vec(&self.unit(j), &xz);
                    if !s.is_zero() {
                        return Err(LieError::NotInvariant(
                            self.names[i].clone(),
                            self.names[j].clone(),
                            self.names[k].clone(),
                        ));
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (x, y, z) = (self.unit(i), self.unit(j), self.unit(k));
                    let a = self.bracket_vec(&x, &self.bracket_vec(&y, &z));
                    let b = self.bracket_vec(&y, &self.bracket_vec(&z, &x));
                    let c = self.bracket_vec(&z, &self.bracket_vec(&x, &y));
                    if (0..n).any(|m| !(&(&a[m] + &b[m]) + &c[m]).is_zero()) {
                        return Err(LieError::Jacobi(
                            self.names[i].clone(),
                            self.names[j].clone(),
                            self.names[k].clone(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Re-expresses the algebra in the basis `x'_a = Σ_b p[a][b] x_b`.
    pub fn change_basis(&self, p: &Matrix, names: Vec<String>) -> Result<Self, LieError> {
        let n = self.dim();
        let pinv = linalg::inverse(p, &self.ring)?;
        let mut dense = vec![vec![vec![self.ring.zero(); n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                let old = self.bracket_vec(&p[a], &p[b]);
                // x_m = Σ_c pinv[m][c] x'_c
                for (m, cm) in old.iter().enumerate() {
                    if cm.is_zero() {
                        continue;
                    }
                    for c in 0..n {
                        if !pinv[m][c].is_zero() {
                            dense[a][b][c] = &dense[a][b][c] + &(cm * &pinv[m][c]);
                        }
                    }
                }
            }
        }
        let mut pairing = vec![vec![self.ring.zero(); n]; n];
        for a in 0..n {
            for b in 0..n {
                pairing[a][b] = self.pair_vec(&p[a], &p[b]);
            }
        }
        Self::new(&self.ring, names, dense, pairing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Param;

    #[test]
    fn d_squared_vanishes() {
        let r = Ring::declare(vec![]).unwrap();
        let k = LieAlgebra::from_structure_equations(
            &r,
            7,
            &["dv1 = v23", "dv2 = -v13", "dv3 = v12", "dv4 = v56", "dv5 = -v46", "dv6 = v45"],
        )
        .unwrap();
        for mask in 0u32..128 {
            assert!(k.d(k.d_of_basis(mask)).is_zero(), "d^2 on mask {mask}");
        }
    }

    #[test]
    fn jacobi_failure_is_reported() {
        let r = Ring::declare(vec![Param::free("x")]).unwrap();
        let e = LieAlgebra::from_structure_equations(&r, 3, &["dv1 = v23", "dv2 = v13", "dv3 = v12 + v23"]);
        assert!(matches!(e, Err(LieError::Jacobi(..))));
    }
}
