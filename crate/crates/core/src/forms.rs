//! Exterior forms on an `n`-dimensional space with dual basis `v^1..v^n`.
//!
//! A basis element `v^{i1..ip}` (with `i1 < .. < ip`) is a bit mask. Wedge
//! products use the determinant convention, so `v^{12}(v_1, v_2) = 1`, and
//! the interior product is `v_i ⌟ v^I = (-1)^{#(I below i)} v^{I \ i}`.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;

use crate::expr::{self, Domain};
use crate::scalar::{Rat, Ring, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("unknown name `{0}` in form expression")]
    UnknownName(String),
    #[error("invalid basis form `{0}`")]
    BadBasis(String),
    #[error("division by a form of positive degree")]
    NonScalarDivision,
    #[error("expected a homogeneous form of degree {expected}")]
    Degree { expected: usize },
}

pub fn sign_of_wedge(a: u32, b: u32) -> i32 {
    // number of pairs (i in a, j in b) with i > j
    let mut count = 0;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        count += (a >> (j + 1)).count_ones();
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct ExtForm {
    ring: Ring,
    dim: usize,
    coeffs: BTreeMap<u32, Scalar>,
}

impl ExtForm {
    pub fn zero(ring: &Ring, dim: usize) -> Self {
        ExtForm { ring: ring.clone(), dim, coeffs: BTreeMap::new() }
    }

    pub fn scalar(s: Scalar, dim: usize) -> Self {
        let mut f = Self::zero(s.ring(), dim);
        f.add_term(0, s);
        f
    }

    /// The basis form `v^{i1..ip}` for 0-based indices.
    pub fn basis(ring: &Ring, dim: usize, indices: &[usize]) -> Self {
        let mut mask = 0u32;
        for &i in indices {
            assert!(i < dim, "basis index out of range");
            mask |= 1 << i;
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return Self::zero(ring, dim);
        }
        // sign of the permutation sorting `indices`
        let mut inv = 0;
        for a in 0..indices.len() {
            for b in a + 1..indices.len() {
                if indices[a] > indices[b] {
                    inv += 1;
                }
            }
        }
        let mut f = Self::zero(ring, dim);
        f.add_term(mask, if inv % 2 == 0 { ring.one() } else { ring.int(-1) });
        f
    }

    pub fn from_terms(ring: &Ring, dim: usize, terms: impl IntoIterator<Item = (u32, Scalar)>) -> Self {
        let mut f = Self::zero(ring, dim);
        for (m, s) in terms {
            f.add_term(m, s);
        }
        f
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Scalar)> {
        self.coeffs.iter().map(|(m, s)| (*m, s))
    }

    pub fn coeff(&self, mask: u32) -> Scalar {
        self.coeffs.get(&mask).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn add_term(&mut self, mask: u32, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&mask) {
            Some(c) => {
                *c = &*c + &s;
                if c.is_zero() {
                    self.coeffs.remove(&mask);
                }
            }
            None => {
                self.coeffs.insert(mask, s);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree when homogeneous (the zero form counts as homogeneous of any
    /// degree and reports `None`).
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.coeffs.keys();
        let d = it.next()?.count_ones();
        if it.all(|m| m.count_ones() == d) {
            Some(d as usize)
        } else {
            None
        }
    }

    pub fn is_homogeneous_of(&self, p: usize) -> bool {
        self.coeffs.keys().all(|m| m.count_ones() as usize == p)
    }

    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.coeffs.keys().all(|&m| m == 0) {
            Some(self.coeff(0))
        } else {
            None
        }
    }

    pub fn add(&self, other: &ExtForm) -> ExtForm {
        let mut out = self.clone();
        for (m, s) in other.terms() {
            out.add_term(m, s.clone());
        }
        out
    }

    pub fn sub(&self, other: &ExtForm) -> ExtForm {
        let mut out = self.clone();
        for (m, s) in other.terms() {
            out.add_term(m, -s);
        }
        out
    }

    pub fn neg(&self) -> ExtForm {
        self.scale(&self.ring.int(-1))
    }

    pub fn scale(&self, s: &Scalar) -> ExtForm {
        let mut out = ExtForm::zero(&self.ring, self.dim);
        if s.is_zero() {
            return out;
        }
        for (m, c) in self.terms() {
            out.add_term(m, c * s);
        }
        out
    }

    pub fn scale_rat(&self, q: Rat) -> ExtForm {
        self.scale(&self.ring.rat(q))
    }

    pub fn wedge(&self, other: &ExtForm) -> ExtForm {
        let mut out = ExtForm::zero(&self.ring, self.dim);
        for (a, x) in self.terms() {
            for (b, y) in other.terms() {
                if a & b != 0 {
                    continue;
                }
                let p = x * y;
                out.add_term(a | b, if sign_of_wedge(a, b) > 0 { p } else { -p });
            }
        }
        out
    }

    /// Interior product with the basis vector `v_i` (0-based).
    pub fn interior(&self, i: usize) -> ExtForm {
        let bit = 1u32 << i;
        let mut out = ExtForm::zero(&self.ring, self.dim);
        for (m, c) in self.terms() {
            if m & bit == 0 {
                continue;
            }
            let below = (m & (bit - 1)).count_ones();
            out.add_term(m & !bit, if below.is_multiple_of(2) { c.clone() } else { -c });
        }
        out
    }

    /// Interior product with the vector `Σ x_i v_i`.
    pub fn interior_vec(&self, x: &[Scalar]) -> ExtForm {
        let mut out = ExtForm::zero(&self.ring, self.dim);
        for (i, xi) in x.iter().enumerate() {
            if !xi.is_zero() {
                out = out.add(&self.interior(i).scale(xi));
            }
        }
        out
    }

    /// Value on the basis vectors `(v_{i1}, .., v_{ip})`.
    pub fn evaluate(&self, indices: &[usize]) -> Scalar {
        let mut f = self.clone();
        for &i in indices {
            f = f.interior(i);
        }
        // Y ⌟ (X ⌟ α) = α(X, Y, ..)
        f.coeff(0)
    }

    pub fn parse(src: &str, ring: &Ring, dim: usize, named: &HashMap<String, ExtForm>) -> Result<ExtForm, FormError> {
        let env = FormEnv { ring, dim, named };
        let ast = expr::parse(src).map_err(ScalarError::from)?;
        expr::eval(&ast, &env)
    }

    pub fn parse_homogeneous(
        src: &str,
        ring: &Ring,
        dim: usize,
        named: &HashMap<String, ExtForm>,
        degree: usize,
    ) -> Result<ExtForm, FormError> {
        let f = Self::parse(src, ring, dim, named)?;
        if f.is_homogeneous_of(degree) {
            Ok(f)
        } else {
            Err(FormError::Degree { expected: degree })
        }
    }
}

pub fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

pub fn mask_name(mask: u32) -> String {
    if mask == 0 {
        return "1".into();
    }
    let digits: String = mask_indices(mask).iter().map(|i| (i + 1).to_string()).collect();
    format!("v{digits}")
}

impl fmt::Display for ExtForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut keys: Vec<u32> = self.coeffs.keys().copied().collect();
        keys.sort_by_key(|&m| (m.count_ones(), mask_indices(m)));
        for (idx, m) in keys.iter().enumerate() {
            let c = &self.coeffs[m];
            let single = c.numerator().len() == 1;
            let mut text = c.to_string();
            let mut neg = false;
            if idx > 0 && single {
                if let Some(rest) = text.strip_prefix("(-") {
                    neg = true;
                    text = format!("({rest}");
                } else if let Some(rest) = text.strip_prefix('-') {
                    neg = true;
                    text = rest.to_string();
                }
            }
            let pure_fraction = text.contains('/') && !text.contains(|ch: char| ch.is_alphabetic() || ch == '(');
            if *m != 0 && (!single || pure_fraction) {
                text = format!("({text})");
            }
            if idx > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if *m == 0 {
                f.write_str(&text)?;
            } else if text == "1" {
                f.write_str(&mask_name(*m))?;
            } else if text == "-1" {
                write!(f, "-{}", mask_name(*m))?;
            } else {
                write!(f, "{text}*{}", mask_name(*m))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ExtForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtForm({self})")
    }
}

struct FormEnv<'a> {
    ring: &'a Ring,
    dim: usize,
    named: &'a HashMap<String, ExtForm>,
}

impl Domain for FormEnv<'_> {
    type Value = ExtForm;
    type Error = FormError;

    fn number(&self, n: &BigInt) -> Result<ExtForm, FormError> {
        Ok(ExtForm::scalar(self.ring.rat(Rat::from_integer(n.clone())), self.dim))
    }

    fn ident(&self, name: &str) -> Result<ExtForm, FormError> {
        if let Some(f) = self.named.get(name) {
            return Ok(f.clone());
        }
        if let Some(s) = self.ring.var(name) {
            return Ok(ExtForm::scalar(s, self.dim));
        }
        if let Some(digits) = name.strip_prefix('v') {
            if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                let mut idx = Vec::new();
                for c in digits.chars() {
                    let d = c.to_digit(10).unwrap() as usize;
                    if d == 0 || d > self.dim {
                        return Err(FormError::BadBasis(name.to_string()));
                    }
                    idx.push(d - 1);
                }
                return Ok(ExtForm::basis(self.ring, self.dim, &idx));
            }
        }
        Err(FormError::UnknownName(name.to_string()))
    }

    fn add(&self, a: ExtForm, b: ExtForm) -> Result<ExtForm, FormError> {
        Ok(ExtForm::add(&a, &b))
    }

    fn sub(&self, a: ExtForm, b: ExtForm) -> Result<ExtForm, FormError> {
        Ok(ExtForm::sub(&a, &b))
    }

    fn mul(&self, a: ExtForm, b: ExtForm) -> Result<ExtForm, FormError> {
        Ok(a.wedge(&b))
    }

    fn div(&self, a: ExtForm, b: ExtForm) -> Result<ExtForm, FormError> {
        let s = b.as_scalar().ok_or(FormError::NonScalarDivision)?;
        Ok(a.scale(&s.inv()?))
    }

    fn neg(&self, a: ExtForm) -> Result<ExtForm, FormError> {
        Ok(ExtForm::neg(&a))
    }

    fn pow(&self, a: ExtForm, e: i32) -> Result<ExtForm, FormError> {
        let s = a.as_scalar().ok_or(FormError::NonScalarDivision)?;
        Ok(ExtForm::scalar(s.pow(e)?, self.dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Param;

    fn setup() -> Ring {
        Ring::declare(vec![Param::positive("l")]).unwrap()
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let r = setup();
        let n = HashMap::new();
        let a = ExtForm::parse("v12 + l*v3", &r, 7, &n).unwrap();
        let b = ExtForm::parse("v4 - 2*v57", &r, 7, &n).unwrap();
        let ab = a.wedge(&b);
        let ba = b.wedge(&a);
        // mixed degrees: check on homogeneous parts
        let a1 = ExtForm::parse("l*v3", &r, 7, &n).unwrap();
        let b1 = ExtForm::parse("v4", &r, 7, &n).unwrap();
        assert_eq!(a1.wedge(&b1), b1.wedge(&a1).neg());
        assert!(!ab.is_zero() && !ba.is_zero());
        assert_eq!(ExtForm::parse("v21", &r, 7, &n).unwrap(), ExtForm::parse("-v12", &r, 7, &n).unwrap());
    }

    #[test]
    fn interior_and_evaluation() {
        let r = setup();
        let n = HashMap::new();
        let f = ExtForm::parse("v123", &r, 7, &n).unwrap();
        assert_eq!(f.interior(1), ExtForm::parse("-v13", &r, 7, &n).unwrap());
        assert!(f.evaluate(&[0, 1, 2]).is_one());
        assert_eq!(f.evaluate(&[1, 0, 2]), r.int(-1));
        assert_eq!(f.to_string(), "v123");
        let g = ExtForm::parse("(1/4)*(l*v456 - 3*v12)", &r, 7, &n).unwrap();
        assert_eq!(g.to_string(), "(-3/4)*v12 + (1/4)*l*v456");
    }
}
