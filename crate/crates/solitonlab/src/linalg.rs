//! Small dense linear algebra over a generic scalar field.
//!
//! Everything here targets dimensions at most 9, so plain Gaussian
//! elimination with exact pivot search is adequate.

use crate::scalar::{cmp_s, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row.iter().cloned());
        }
        Mat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..self.cols {
                    acc = acc + self.at(i, j).clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    /// Determinant by elimination (panics unless square).
    pub fn det(&self) -> S {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = S::one();
        for col in 0..n {
            let pivot = (col..n).max_by(|&a, &b| {
                cmp_s(&m.at(a, col).abs(), &m.at(b, col).abs())
            });
            let pivot = match pivot {
                Some(p) if !m.at(p, col).is_zero() => p,
                _ => return S::zero(),
            };
            if pivot != col {
                m.swap_rows(pivot, col);
                det = -det;
            }
            let pv = m.at(col, col).clone();
            det = det * pv.clone();
            for r in col + 1..n {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone() / pv.clone();
                for c in col..n {
                    let sub = factor.clone() * m.at(col, c).clone();
                    *m.at_mut(r, c) = m.at(r, c).clone() - sub;
                }
            }
        }
        det
    }

    /// Rank by elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0usize;
        let mut row = 0usize;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let pivot = (row..m.rows).max_by(|&a, &b| {
                cmp_s(&m.at(a, col).abs(), &m.at(b, col).abs())
            });
            let pivot = match pivot {
                Some(p) if !m.at(p, col).is_zero() => p,
                _ => continue,
            };
            m.swap_rows(pivot, row);
            let pv = m.at(row, col).clone();
            for r in row + 1..m.rows {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone() / pv.clone();
                for c in col..m.cols {
                    let sub = factor.clone() * m.at(row, c).clone();
                    *m.at_mut(r, c) = m.at(r, c).clone() - sub;
                }
            }
            row += 1;
            rank += 1;
        }
        rank
    }

    /// Solve `A x = b`. Returns `None` when the system is singular or
    /// inconsistent. For consistent underdetermined systems a particular
    /// solution (free variables zero) is returned.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        assert_eq!(b.len(), self.rows);
        let mut m = Mat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *m.at_mut(i, j) = self.at(i, j).clone();
            }
            *m.at_mut(i, self.cols) = b[i].clone();
        }
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut row = 0usize;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            let pivot = (row..self.rows).max_by(|&a, &b| {
                cmp_s(&m.at(a, col).abs(), &m.at(b, col).abs())
            });
            let pivot = match pivot {
                Some(p) if !m.at(p, col).is_zero() => p,
                _ => continue,
            };
            m.swap_rows(pivot, row);
            let pv = m.at(row, col).clone();
            for r in 0..self.rows {
                if r == row || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone() / pv.clone();
                for c in col..=self.cols {
                    let sub = factor.clone() * m.at(row, c).clone();
                    *m.at_mut(r, c) = m.at(r, c).clone() - sub;
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        // Inconsistent row: 0 = nonzero.
        for r in row..self.rows {
            if !m.at(r, self.cols).is_zero() {
                return None;
            }
        }
        let mut x = vec![S::zero(); self.cols];
        for (r, c) in pivots {
            x[c] = m.at(r, self.cols).clone() / m.at(r, c).clone();
        }
        Some(x)
    }

    /// Matrix inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Mat<S>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = self.at(i, j).clone();
            }
            *m.at_mut(i, n + i) = S::one();
        }
        for col in 0..n {
            let pivot = (col..n).max_by(|&a, &b| {
                cmp_s(&m.at(a, col).abs(), &m.at(b, col).abs())
            })?;
            if m.at(pivot, col).is_zero() {
                return None;
            }
            m.swap_rows(pivot, col);
            let pv = m.at(col, col).clone();
            for c in 0..2 * n {
                *m.at_mut(col, c) = m.at(col, c).clone() / pv.clone();
            }
            for r in 0..n {
                if r == col || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for c in 0..2 * n {
                    let sub = factor.clone() * m.at(col, c).clone();
                    *m.at_mut(r, c) = m.at(r, c).clone() - sub;
                }
            }
        }
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                *inv.at_mut(i, j) = m.at(i, n + j).clone();
            }
        }
        Some(inv)
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

pub fn axpy<S: Scalar>(alpha: &S, x: &[S], y: &[S]) -> Vec<S> {
    x.iter()
        .zip(y)
        .map(|(a, b)| alpha.clone() * a.clone() + b.clone())
        .collect()
}

pub fn scale<S: Scalar>(alpha: &S, x: &[S]) -> Vec<S> {
    x.iter().map(|a| alpha.clone() * a.clone()).collect()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

/// Primitive integer vector parallel to the given rational vector.
/// Returns the primitive vector and the positive rational `t` with
/// `v = t * primitive`.
pub fn primitive_direction(v: &[crate::Rat]) -> Option<(Vec<BigInt>, crate::Rat)> {
    use num_rational::BigRational;
    if v.iter().all(|c| c.is_zero()) {
        return None;
    }
    let mut denom_lcm = BigInt::one();
    for c in v {
        denom_lcm = denom_lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|c| c.numer() * (&denom_lcm / c.denom()))
        .collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = g.gcd(i);
    }
    let prim: Vec<BigInt> = ints.iter().map(|i| i / &g).collect();
    // v = (g / denom_lcm) * prim
    let t = BigRational::new(g, denom_lcm);
    Some((prim, t))
}

/// Completes a primitive integer vector `e0` to a unimodular basis.
///
/// Returns `(basis, dual)` where `basis[0] = e0`, `basis` is a Z-basis of
/// the lattice, and `dual[i]` is the dual basis (rows of the inverse), so
/// `<dual[i], basis[j]> = delta_ij` with integer entries.
pub fn unimodular_completion(e0: &[BigInt]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let n = e0.len();
    // u: unimodular accumulator with u * e0 = (1, 0, .., 0)^T.
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut v = e0.to_vec();
    // Clear v[k] against v[0] by extended gcd row operations.
    for k in 1..n {
        if v[k].is_zero() {
            continue;
        }
        let e = v[0].extended_gcd(&v[k]);
        let (g, x, y) = (e.gcd, e.x, e.y);
        let a = &v[0] / &g;
        let b = &v[k] / &g;
        // New row0 = x*row0 + y*rowk ; new rowk = -b*row0 + a*rowk.
        let row0: Vec<BigInt> = (0..n).map(|j| &x * &u[0][j] + &y * &u[k][j]).collect();
        let rowk: Vec<BigInt> = (0..n).map(|j| -&b * &u[0][j] + &a * &u[k][j]).collect();
        u[0] = row0;
        u[k] = rowk;
        v[0] = g;
        v[k] = BigInt::zero();
    }
    if v[0].is_negative() {
        for x in u[0].iter_mut() {
            *x = -x.clone();
        }
        v[0] = -v[0].clone();
    }
    assert!(v[0].is_one(), "input must be primitive");
    // basis = columns of u^{-1}; compute over rationals then cast back.
    let urat: Vec<Vec<crate::Rat>> = u
        .iter()
        .map(|row| row.iter().map(|x| crate::Rat::from_integer(x.clone())).collect())
        .collect();
    let m = Mat::from_rows(&urat);
    let inv = m.inverse().expect("unimodular");
    let mut basis = Vec::with_capacity(n);
    for j in 0..n {
        let col: Vec<BigInt> = (0..n)
            .map(|i| {
                let q = inv.at(i, j);
                assert!(q.is_integer());
                q.to_integer()
            })
            .collect();
        basis.push(col);
    }
    (basis, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn det_and_solve() {
        let m = Mat::from_rows(&[vec![r(2), r(1)], vec![r(1), r(3)]]);
        assert_eq!(m.det(), r(5));
        let x = m.solve(&[r(3), r(4)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![r(3), r(4)]);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Mat::from_rows(&[
            vec![r(1), r(2), r(0)],
            vec![r(0), r(1), r(4)],
            vec![r(1), r(0), r(1)],
        ]);
        let inv = m.inverse().unwrap();
        let mut prod = Mat::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = r(0);
                for k in 0..3 {
                    acc = acc + m.at(i, k).clone() * inv.at(k, j).clone();
                }
                *prod.at_mut(i, j) = acc;
            }
        }
        assert_eq!(prod, Mat::identity(3));
    }

    #[test]
    fn unimodular_basis_from_primitive() {
        let e0: Vec<num_bigint::BigInt> = vec![3.into(), 5.into(), 7.into()];
        // 3,5,7 has gcd 1 so it is primitive.
        let (basis, dual) = unimodular_completion(&e0);
        assert_eq!(basis[0], e0);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = num_bigint::BigInt::from(0);
                for k in 0..3 {
                    acc += &dual[i][k] * &basis[j][k];
                }
                assert_eq!(acc, if i == j { 1.into() } else { 0.into() });
            }
        }
    }
}
