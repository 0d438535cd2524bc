//! Exact Gaussian elimination over the scalar field.

use crate::scalar::{Ring, Scalar, ScalarError};

pub type Matrix = Vec<Vec<Scalar>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("singular matrix")]
    Singular,
    #[error("inconsistent linear system (row {0} reduces to 0 = nonzero)")]
    Inconsistent(usize),
    #[error("solution is not unique ({0} free unknowns)")]
    Underdetermined(usize),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn cost(s: &Scalar) -> usize {
    s.numerator().len() + s.denominator().len()
}

/// Row-reduces `[a | b]` in place and returns the pivot column of each
/// pivot row, in order.
fn eliminate(a: &mut Matrix, b: &mut [Vec<Scalar>]) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // cheapest nonzero pivot keeps expressions small
        let best = (r..rows).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| cost(&a[i][c]));
        let Some(p) = best else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].inv().expect("nonzero pivot");
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for x in b[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..cols {
                if !a[r][j].is_zero() {
                    let t = &f * &a[r][j];
                    a[i][j] = &a[i][j] - &t;
                }
            }
            for j in 0..b[i].len() {
                if !b[r][j].is_zero() {
                    let t = &f * &b[r][j];
                    b[i][j] = &b[i][j] - &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `a x = b` for a unique `x`. `a` may have more rows than columns.
pub fn solve_unique(mut a: Matrix, b: Vec<Scalar>, ring: &Ring) -> Result<Vec<Scalar>, LinalgError> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut rhs: Vec<Vec<Scalar>> = b.into_iter().map(|x| vec![x]).collect();
    let pivots = eliminate(&mut a, &mut rhs);
    for (i, row) in rhs.iter().enumerate().skip(pivots.len()) {
        if !row[0].is_zero() {
            return Err(LinalgError::Inconsistent(i));
        }
    }
    if pivots.len() < cols {
        return Err(LinalgError::Underdetermined(cols - pivots.len()));
    }
    let mut x = vec![ring.zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rhs[i][0].clone();
    }
    Ok(x)
}

pub fn inverse(m: &Matrix, ring: &Ring) -> Result<Matrix, LinalgError> {
    let n = m.len();
    let mut a = m.clone();
    let mut id: Vec<Vec<Scalar>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { ring.one() } else { ring.zero() }).collect())
        .collect();
    let pivots = eliminate(&mut a, &mut id);
    if pivots.len() < n {
        return Err(LinalgError::Singular);
    }
    Ok(id)
}

pub fn determinant(m: &Matrix, ring: &Ring) -> Scalar {
    let n = m.len();
    let mut a = m.clone();
    let mut det = ring.one();
    for c in 0..n {
        let Some(p) = (c..n).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| cost(&a[i][c])) else {
            return ring.zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det = &det * &a[c][c];
        let inv = a[c][c].inv().expect("nonzero pivot");
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
    }
    det
}

pub fn mat_mul(a: &Matrix, b: &Matrix, ring: &Ring) -> Matrix {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![ring.zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] = &out[i][j] + &(&a[i][l] * &b[l][j]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Param;

    #[test]
    fn inverse_roundtrip() {
        let r = Ring::declare(vec![Param::free("x"), Param::root_of("rt2", "2")]).unwrap();
        let p = |s: &str| r.parse(s).unwrap();
        let m = vec![vec![p("x"), p("1")], vec![p("rt2"), p("x + 1")]];
        let inv = inverse(&m, &r).unwrap();
        let id = mat_mul(&m, &inv, &r);
        assert!(id[0][0].is_one() && id[1][1].is_one() && id[0][1].is_zero() && id[1][0].is_zero());
        assert_eq!(determinant(&m, &r), p("x^2 + x - rt2"));
    }

    #[test]
    fn overdetermined_systems() {
        let r = Ring::declare(vec![Param::free("x")]).unwrap();
        let p = |s: &str| r.parse(s).unwrap();
        let a = vec![vec![p("1"), p("1")], vec![p("1"), p("-1")], vec![p("2"), p("0")]];
        let sol = solve_unique(a.clone(), vec![p("x"), p("x"), p("2*x")], &r).unwrap();
        assert_eq!(sol, vec![p("x"), p("0")]);
        assert_eq!(
            solve_unique(a, vec![p("x"), p("x"), p("1")], &r).unwrap_err(),
            LinalgError::Inconsistent(2)
        );
    }
}
