//! Metrics, Hodge star and G2-structures on a seven-dimensional Lie algebra,
//! with torsion-class decomposition and the characteristic torsion.

use crate::forms::{mask_indices, ExtForm};
use crate::liealg::LieAlgebra;
use crate::linalg::{self, LinalgError, Matrix};
use crate::scalar::{Rat, Ring, Scalar};

pub const DIM: usize = 7;
const FULL: u32 = (1 << DIM) - 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum G2Error {
    #[error("degenerate metric")]
    Degenerate,
    #[error("sqrt(det g) is not expressible in the parameter ring")]
    NoSquareRoot,
    #[error("metric is not positive definite at a sample point")]
    NotPositive,
    #[error("the G2 form induces the negative orientation")]
    Orientation,
    #[error("SU(2) relations fail: {0}")]
    Su2(String),
    #[error("SU(3) relations fail: {0}")]
    Su3(String),
    #[error("rotation does not satisfy cos^2 + sin^2 = 1")]
    Rotation,
    #[error("metric identity (1/6)(e_i ⌟ φ)∧(e_j ⌟ φ)∧φ = g_ij vol fails at ({0}, {1})")]
    MetricIdentity(usize, usize),
    #[error("φ ∧ ψ ≠ 7 vol")]
    Normalization,
    #[error("the metric (det B)^(1/9) normalization is not expressible in the parameter ring")]
    NoMetric,
    #[error("torsion system: {0}")]
    Torsion(LinalgError),
    #[error("structure is not integrable (τ2 = {0}), no characteristic connection")]
    NotIntegrable(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn masks_of_degree(p: u32) -> Vec<u32> {
    let mut v: Vec<u32> = (0..=FULL).filter(|m| m.count_ones() == p).collect();
    v.sort_by_key(|&m| mask_indices(m));
    v
}

#[derive(Clone, Debug)]
pub struct Metric {
    ring: Ring,
    g: Matrix,
    ginv: Matrix,
    sqrt_det: Scalar,
}

impl Metric {
    pub fn new(g: Matrix) -> Result<Self, G2Error> {
        let ring = g[0][0].ring().clone();
        let det = linalg::determinant(&g, &ring);
        if det.is_zero() {
            return Err(G2Error::Degenerate);
        }
        let ginv = linalg::inverse(&g, &ring)?;
        let sqrt_det = det.try_sqrt().ok_or(G2Error::NoSquareRoot)?;
        Ok(Metric { ring, g, ginv, sqrt_det })
    }

    pub fn diagonal(entries: &[Scalar]) -> Result<Self, G2Error> {
        let ring = entries[0].ring().clone();
        let n = entries.len();
        let g = (0..n)
            .map(|i| (0..n).map(|j| if i == j { entries[i].clone() } else { ring.zero() }).collect())
            .collect();
        Self::new(g)
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn inverse(&self) -> &Matrix {
        &self.ginv
    }

    pub fn sqrt_det(&self) -> &Scalar {
        &self.sqrt_det
    }

    pub fn vol(&self) -> ExtForm {
        ExtForm::from_terms(&self.ring, DIM, [(FULL, self.sqrt_det.clone())])
    }

    /// Checks positive-definiteness numerically (leading principal minors)
    /// at admissible rational points.
    pub fn check_positive(&self) -> Result<(), G2Error> {
        for seed in 0..8u64 {
            let pt = self.ring.rational_point(seed);
            let vals: Option<Vec<Vec<Rat>>> =
                self.g.iter().map(|row| row.iter().map(|x| x.eval(&pt)).collect()).collect();
            let Some(vals) = vals else { continue };
            for k in 1..=vals.len() {
                if rat_det(&vals, k) <= Rat::from_integer(0.into()) {
                    return Err(G2Error::NotPositive);
                }
            }
            return Ok(());
        }
        // no point where every entry is rational; nothing to check against
        Ok(())
    }

    /// `⟨v^I, v^J⟩` induced by `g^{-1}` on p-forms.
    fn inner_basis(&self, a: u32, b: u32) -> Scalar {
        let ia = mask_indices(a);
        let ib = mask_indices(b);
        let m: Matrix = ia.iter().map(|&i| ib.iter().map(|&j| self.ginv[i][j].clone()).collect()).collect();
        if m.is_empty() {
            return self.ring.one();
        }
        linalg::determinant(&m, &self.ring)
    }

    pub fn inner(&self, a: &ExtForm, b: &ExtForm) -> Scalar {
        let mut acc = self.ring.zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                if ma.count_ones() != mb.count_ones() {
                    continue;
                }
                let ip = self.inner_basis(ma, mb);
                if !ip.is_zero() {
                    acc = &acc + &(&(ca * cb) * &ip);
                }
            }
        }
        acc
    }

    /// Hodge star, characterized by `α ∧ ⋆β = ⟨α, β⟩ vol`.
    pub fn star(&self, f: &ExtForm) -> ExtForm {
        let mut out = ExtForm::zero(&self.ring, DIM);
        let diagonal = (0..DIM).all(|i| (0..DIM).all(|j| i == j || self.g[i][j].is_zero()));
        for (mi, c) in f.terms() {
            let p = mi.count_ones();
            let candidates = if diagonal { vec![mi] } else { masks_of_degree(p) };
            for mj in candidates {
                let ip = self.inner_basis(mj, mi);
                if ip.is_zero() {
                    continue;
                }
                let comp = FULL & !mj;
                let sign = crate::forms::sign_of_wedge(mj, comp);
                let coeff = &(&ip * &self.sqrt_det) * c;
                out.add_term(comp, if sign > 0 { coeff } else { -coeff });
            }
        }
        out
    }

    /// Metric dual vector of a one-form.
    pub fn sharp(&self, f: &ExtForm) -> Vec<Scalar> {
        (0..DIM)
            .map(|i| {
                let mut acc = self.ring.zero();
                for j in 0..DIM {
                    let c = f.coeff(1 << j);
                    if !c.is_zero() && !self.ginv[i][j].is_zero() {
                        acc = &acc + &(&self.ginv[i][j] * &c);
                    }
                }
                acc
            })
            .collect()
    }
}

fn rat_det(m: &[Vec<Rat>], k: usize) -> Rat {
    let mut a: Vec<Vec<Rat>> = m[..k].iter().map(|r| r[..k].to_vec()).collect();
    let mut det = Rat::from_integer(1.into());
    for c in 0..k {
        let Some(p) = (c..k).find(|&i| a[i][c] != Rat::from_integer(0.into())) else {
            return Rat::from_integer(0.into());
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for i in c + 1..k {
            let f = &a[i][c] / &a[c][c];
            for j in c..k {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    det
}

/// `(1/6)(e_i ⌟ φ)∧(e_j ⌟ φ)∧φ` as the coefficient of `v^{1..7}`.
pub fn metric_form_matrix(phi: &ExtForm) -> Matrix {
    let ring = phi.ring();
    let contractions: Vec<ExtForm> = (0..DIM).map(|i| phi.interior(i)).collect();
    let sixth = ring.frac(1, 6);
    let mut b = vec![vec![ring.zero(); DIM]; DIM];
    for i in 0..DIM {
        for j in i..DIM {
            let v = contractions[i].wedge(&contractions[j]).wedge(phi).coeff(FULL);
            let v = &v * &sixth;
            b[i][j] = v.clone();
            b[j][i] = v;
        }
    }
    b
}

#[derive(Clone, Debug)]
pub struct G2Structure {
    pub label: String,
    pub phi: ExtForm,
    pub psi: ExtForm,
    pub metric: Metric,
}

impl G2Structure {
    /// Builds from φ, verifying a candidate metric, or recovering the metric
    /// from `g_ij vol = (1/6)(e_i ⌟ φ)∧(e_j ⌟ φ)∧φ` when none is given.
    pub fn new(label: &str, phi: ExtForm, metric: Option<Metric>) -> Result<Self, G2Error> {
        let b = metric_form_matrix(&phi);
        let metric = match metric {
            Some(m) => m,
            None => {
                let ring = phi.ring().clone();
                let det = linalg::determinant(&b, &ring);
                if det.is_zero() {
                    return Err(G2Error::Degenerate);
                }
                // vol = c v^{1..7} with g = B / c, so c^9 = det B
                let c = det.try_nth_root(9).ok_or(G2Error::NoMetric)?;
                let cinv = c.inv().map_err(|_| G2Error::Degenerate)?;
                let g = b.iter().map(|row| row.iter().map(|x| x * &cinv).collect()).collect();
                Metric::new(g)?
            }
        };
        metric.check_positive()?;
        for i in 0..DIM {
            for j in 0..DIM {
                if b[i][j] != &metric.g[i][j] * &metric.sqrt_det {
                    // a sign flip of the whole matrix means the opposite orientation
                    if i == 0 && j == 0 && b[0][0] == -(&metric.g[0][0] * &metric.sqrt_det) {
                        return Err(G2Error::Orientation);
                    }
                    return Err(G2Error::MetricIdentity(i + 1, j + 1));
                }
            }
        }
        let psi = metric.star(&phi);
        let seven_vol = metric.vol().scale(&phi.ring().int(7));
        if phi.wedge(&psi) != seven_vol {
            return Err(G2Error::Normalization);
        }
        Ok(G2Structure { label: label.to_string(), phi, psi, metric })
    }

    pub fn ring(&self) -> &Ring {
        self.phi.ring()
    }
}

#[derive(Clone, Debug)]
pub struct Su2Structure {
    pub omega: [ExtForm; 3],
}

impl Su2Structure {
    pub fn new(omega: [ExtForm; 3]) -> Result<Self, G2Error> {
        for i in 0..3 {
            for j in 0..3 {
                let w = omega[i].wedge(&omega[j]);
                if i != j && !w.is_zero() {
                    return Err(G2Error::Su2(format!("ω{}∧ω{} ≠ 0", i + 1, j + 1)));
                }
            }
        }
        let sq: Vec<ExtForm> = omega.iter().map(|w| w.wedge(w)).collect();
        if sq[0].is_zero() || sq[0] != sq[1] || sq[0] != sq[2] {
            return Err(G2Error::Su2("ωi∧ωi must agree and be nonzero".into()));
        }
        Ok(Su2Structure { omega })
    }
}

/// `φ = η^{123} + Σ η^i ∧ ω_i`.
pub fn g2_from_su2(label: &str, su2: &Su2Structure, eta: &[ExtForm; 3], metric: Option<Metric>) -> Result<G2Structure, G2Error> {
    let mut phi = eta[0].wedge(&eta[1]).wedge(&eta[2]);
    for i in 0..3 {
        phi = phi.add(&eta[i].wedge(&su2.omega[i]));
    }
    G2Structure::new(label, phi, metric)
}

#[derive(Clone, Debug)]
pub struct Su3Structure {
    pub omega: ExtForm,
    pub re: ExtForm,
    pub im: ExtForm,
}

impl Su3Structure {
    pub fn new(omega: ExtForm, re: ExtForm, im: ExtForm) -> Result<Self, G2Error> {
        if !omega.wedge(&re).is_zero() || !omega.wedge(&im).is_zero() {
            return Err(G2Error::Su3("ω∧Ω ≠ 0".into()));
        }
        let lhs = omega.wedge(&omega).wedge(&omega).scale(&omega.ring().frac(1, 6));
        let rhs = re.wedge(&im).scale(&omega.ring().frac(1, 4));
        if lhs.is_zero() || lhs != rhs {
            return Err(G2Error::Su3("(1/6)ω³ ≠ (i/8)Ω∧Ω̄".into()));
        }
        Ok(Su3Structure { omega, re, im })
    }

    /// `e^{iθ}Ω` with `(cos θ, sin θ)` given as scalars.
    pub fn rotate(&self, cos: &Scalar, sin: &Scalar) -> Result<Self, G2Error> {
        if !(&(cos * cos) + &(sin * sin)).is_one() {
            return Err(G2Error::Rotation);
        }
        let re = self.re.scale(cos).sub(&self.im.scale(sin));
        let im = self.re.scale(sin).add(&self.im.scale(cos));
        Su3Structure::new(self.omega.clone(), re, im)
    }
}

/// `φ = η ∧ ω + Ω₊`.
pub fn g2_from_su3(label: &str, su3: &Su3Structure, eta: &ExtForm, metric: Option<Metric>) -> Result<G2Structure, G2Error> {
    let phi = eta.wedge(&su3.omega).add(&su3.re);
    G2Structure::new(label, phi, metric)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionClasses {
    pub tau0: Scalar,
    pub tau1: ExtForm,
    pub tau2: ExtForm,
    pub tau3: ExtForm,
}

/// Solves `dφ = τ0 ψ + 3 τ1∧φ + ⋆τ3`, `dψ = 4 τ1∧ψ + ⋆τ2` together with
/// `τ2∧ψ = 0`, `τ3∧φ = 0`, `τ3∧ψ = 0` as one exact linear system.
pub fn torsion_decompose(g2: &G2Structure, k: &LieAlgebra) -> Result<TorsionClasses, G2Error> {
    let ring = g2.ring().clone();
    let (phi, psi, m) = (&g2.phi, &g2.psi, &g2.metric);
    let dphi = k.d(phi);
    let dpsi = k.d(psi);
    let m1 = masks_of_degree(1);
    let m2 = masks_of_degree(2);
    let m3 = masks_of_degree(3);
    // unknown layout: τ0 | τ1 (7) | τ2 (21) | τ3 (35)
    let mut columns: Vec<[ExtForm; 5]> = Vec::new();
    let zero = ExtForm::zero(&ring, DIM);
    let unit = |mask: u32| ExtForm::from_terms(&ring, DIM, [(mask, ring.one())]);
    columns.push([psi.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone()]);
    for &b in &m1 {
        let t = unit(b);
        columns.push([
            t.wedge(phi).scale(&ring.int(3)),
            t.wedge(psi).scale(&ring.int(4)),
            zero.clone(),
            zero.clone(),
            zero.clone(),
        ]);
    }
    for &b in &m2 {
        let t = unit(b);
        columns.push([zero.clone(), m.star(&t), t.wedge(psi), zero.clone(), zero.clone()]);
    }
    for &b in &m3 {
        let t = unit(b);
        columns.push([m.star(&t), zero.clone(), zero.clone(), t.wedge(phi), t.wedge(psi)]);
    }
    let eq_masks = [masks_of_degree(4), masks_of_degree(5), masks_of_degree(6), masks_of_degree(6), masks_of_degree(7)];
    let rhs_forms = [dphi, dpsi, zero.clone(), zero.clone(), zero];
    let mut a: Matrix = Vec::new();
    let mut rhs = Vec::new();
    for (block, masks) in eq_masks.iter().enumerate() {
        for &mask in masks {
            a.push(columns.iter().map(|col| col[block].coeff(mask)).collect());
            rhs.push(rhs_forms[block].coeff(mask));
        }
    }
    let x = linalg::solve_unique(a, rhs, &ring).map_err(G2Error::Torsion)?;
    let tau0 = x[0].clone();
    let tau1 = ExtForm::from_terms(&ring, DIM, m1.iter().copied().zip(x[1..8].iter().cloned()));
    let tau2 = ExtForm::from_terms(&ring, DIM, m2.iter().copied().zip(x[8..29].iter().cloned()));
    let tau3 = ExtForm::from_terms(&ring, DIM, m3.iter().copied().zip(x[29..64].iter().cloned()));
    Ok(TorsionClasses { tau0, tau1, tau2, tau3 })
}

/// `H = (1/6) τ0 φ - τ1^♯ ⌟ ψ - τ3` for integrable structures.
pub fn torsion_three_form(g2: &G2Structure, tc: &TorsionClasses) -> Result<ExtForm, G2Error> {
    if !tc.tau2.is_zero() {
        return Err(G2Error::NotIntegrable(tc.tau2.to_string()));
    }
    let ring = g2.ring();
    let sharp = g2.metric.sharp(&tc.tau1);
    let h = g2
        .phi
        .scale(&(&tc.tau0 * &ring.frac(1, 6)))
        .sub(&g2.psi.interior_vec(&sharp))
        .sub(&tc.tau3);
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn star_of_v1_with_identity_metric() {
        let r = Ring::declare(vec![]).unwrap();
        let m = Metric::diagonal(&vec![r.one(); 7]).unwrap();
        let v1 = ExtForm::basis(&r, 7, &[0]);
        assert_eq!(m.star(&v1), ExtForm::basis(&r, 7, &[1, 2, 3, 4, 5, 6]));
        for p in 0..=7 {
            for mask in masks_of_degree(p) {
                let f = ExtForm::from_terms(&r, 7, [(mask, r.one())]);
                assert_eq!(m.star(&m.star(&f)), f);
            }
        }
    }

    #[test]
    fn flat_model_is_torsion_free() {
        let r = Ring::declare(vec![]).unwrap();
        let k = LieAlgebra::from_structure_equations(&r, 7, &[]).unwrap();
        let phi = ExtForm::parse("v123 - v145 - v167 - v246 + v257 - v347 - v356", &r, 7, &HashMap::new()).unwrap();
        let g2 = G2Structure::new("flat", phi, None).unwrap();
        assert!(g2.metric.g().iter().enumerate().all(|(i, row)| row
            .iter()
            .enumerate()
            .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })));
        let tc = torsion_decompose(&g2, &k).unwrap();
        assert!(tc.tau0.is_zero() && tc.tau1.is_zero() && tc.tau2.is_zero() && tc.tau3.is_zero());
        assert!(torsion_three_form(&g2, &tc).unwrap().is_zero());
    }
}
