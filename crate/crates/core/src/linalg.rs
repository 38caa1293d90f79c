//! Dense row-major matrices over any [`Scalar`].
//!
//! Elimination routines pivot on the largest-magnitude candidate; for exact
//! scalars that only affects which nonzero pivot is taken, never the result.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Result of a reduced row-echelon pass.
#[derive(Debug, Clone)]
pub struct Echelon<T> {
    pub reduced: Matrix<T>,
    pub pivots: Vec<usize>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&v| T::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// `x^T self y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        dot(x, &self.mul_vec(y))
    }

    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Reduced row-echelon form.
    pub fn echelon(&self) -> Echelon<T> {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let best = (r..a.rows)
                .filter(|&i| !a[(i, c)].negligible())
                .max_by(|&i, &j| {
                    a[(i, c)]
                        .magnitude()
                        .partial_cmp(&a[(j, c)].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            let Some(p) = best else { continue };
            a.swap_rows(r, p);
            let inv = T::one() / a[(r, c)].clone();
            for j in c..a.cols {
                let v = a[(r, j)].clone() * inv.clone();
                a[(r, j)] = v;
            }
            for i in 0..a.rows {
                if i == r || a[(i, c)].is_zero() {
                    continue;
                }
                let factor = a[(i, c)].clone();
                for j in c..a.cols {
                    let v = a[(i, j)].clone() - factor.clone() * a[(r, j)].clone();
                    a[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { reduced: a, pivots }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let Echelon { reduced, pivots } = self.echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -reduced[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                T::one()
            } else {
                T::zero()
            }
        });
        let Echelon { reduced, pivots } = aug.echelon();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| reduced[(i, j + n)].clone()))
    }

    /// Solves `self * x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Self::from_fn(n, n + 1, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let Echelon { reduced, pivots } = aug.echelon();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some((0..n).map(|i| reduced[(i, n)].clone()).collect())
    }

    /// Determinant by elimination (exact for exact scalars).
    pub fn det(&self) -> T {
        assert!(self.is_square());
        let mut a = self.clone();
        let n = a.rows;
        let mut det = T::one();
        for c in 0..n {
            let best = (c..n).filter(|&i| !a[(i, c)].negligible()).max_by(|&i, &j| {
                a[(i, c)]
                    .magnitude()
                    .partial_cmp(&a[(j, c)].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let Some(p) = best else { return T::zero() };
            if p != c {
                a.swap_rows(c, p);
                det = -det;
            }
            let pivot = a[(c, c)].clone();
            det = det * pivot.clone();
            for i in c + 1..n {
                if a[(i, c)].is_zero() {
                    continue;
                }
                let factor = a[(i, c)].clone() / pivot.clone();
                for j in c..n {
                    let v = a[(i, j)].clone() - factor.clone() * a[(c, j)].clone();
                    a[(i, j)] = v;
                }
            }
        }
        det
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Largest absolute entry of `self - other`, as `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Inertia `(positive, negative, zero)` of a symmetric matrix, computed by
    /// symmetric congruence elimination.
    pub fn inertia(&self) -> (usize, usize, usize) {
        assert!(self.is_symmetric(), "inertia needs a symmetric matrix");
        let mut a = self.clone();
        let n = a.rows;
        let (mut pos, mut neg, mut zero) = (0, 0, 0);
        let mut active: Vec<usize> = (0..n).collect();
        while let Some(&first) = active.first() {
            let diag = active.iter().copied().find(|&i| !a[(i, i)].negligible());
            let pivot = match diag {
                Some(i) => i,
                None => {
                    // No usable diagonal entry: fold a coupled index into `first`
                    // via the congruence e_first <- e_first + e_j.
                    let partner = active
                        .iter()
                        .copied()
                        .find(|&j| j != first && !a[(first, j)].negligible());
                    match partner {
                        Some(j) => {
                            a.add_congruent(first, j);
                            first
                        }
                        None => {
                            zero += 1;
                            active.retain(|&i| i != first);
                            continue;
                        }
                    }
                }
            };
            let d = a[(pivot, pivot)].clone();
            match d.sign() {
                1 => pos += 1,
                -1 => neg += 1,
                _ => zero += 1,
            }
            active.retain(|&i| i != pivot);
            let pivot_row: Vec<T> = (0..n).map(|j| a[(pivot, j)].clone()).collect();
            for &i in &active {
                if pivot_row[i].is_zero() {
                    continue;
                }
                let factor = pivot_row[i].clone() / d.clone();
                for &j in &active {
                    let v = a[(i, j)].clone() - factor.clone() * pivot_row[j].clone();
                    a[(i, j)] = v;
                }
            }
            for &i in &active {
                a[(i, pivot)] = T::zero();
                a[(pivot, i)] = T::zero();
            }
        }
        (pos, neg, zero)
    }

    // row_i += row_j and col_i += col_j
    fn add_congruent(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            let v = self[(i, c)].clone() + self[(j, c)].clone();
            self[(i, c)] = v;
        }
        for r in 0..self.rows {
            let v = self[(r, i)].clone() + self[(r, j)].clone();
            self[(r, i)] = v;
        }
    }
}

pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub fn axpy<T: Scalar>(a: &T, x: &[T], y: &[T]) -> Vec<T> {
    x.iter()
        .zip(y)
        .map(|(xi, yi)| a.clone() * xi.clone() + yi.clone())
        .collect()
}

pub fn vec_sub<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| a.clone() - b.clone()).collect()
}

pub fn vec_add<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect()
}

pub fn vec_scale<T: Scalar>(a: &T, x: &[T]) -> Vec<T> {
    x.iter().map(|v| a.clone() * v.clone()).collect()
}

pub fn unit_vector<T: Scalar>(n: usize, i: usize) -> Vec<T> {
    (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out: Matrix<T> = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: vec_add(&self.data, &rhs.data),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: vec_sub(&self.data, &rhs.data),
        }
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|v| -v.clone())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;

    type Q = Matrix<BigRational>;

    #[test]
    fn inverse_and_det_exact() {
        let a = Q::from_ints(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, Q::identity(3));
        assert_eq!(a.det(), rat(18, 1));
    }

    #[test]
    fn singular_has_no_inverse() {
        let a = Q::from_ints(&[&[1, 2], &[2, 4]]);
        assert!(a.inverse().is_none());
        assert_eq!(a.rank(), 1);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).iter().all(|v| v == &rat(0, 1)));
    }

    #[test]
    fn inertia_of_hyperbolic_and_definite_forms() {
        let h = Q::from_ints(&[&[0, 1], &[1, 0]]);
        assert_eq!(h.inertia(), (1, 1, 0));
        let anti3 = Q::from_ints(&[&[0, 0, -1], &[0, -1, 0], &[-1, 0, 0]]);
        assert_eq!(anti3.inertia(), (1, 2, 0));
        let d = Q::from_ints(&[&[2, 0], &[0, 0]]);
        assert_eq!(d.inertia(), (1, 0, 1));
    }

    #[test]
    fn inertia_survives_congruence() {
        let g = Q::from_ints(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[1, 0, 0, 0]]);
        let p = Q::from_ints(&[&[1, 2, 0, -1], &[0, 1, 1, 0], &[1, 0, 1, 3], &[0, -1, 0, 1]]);
        let moved = &(&p.transpose() * &g) * &p;
        assert_eq!(moved.inertia(), (2, 2, 0));
    }

    #[test]
    fn float_solve_matches_exact() {
        let a = Matrix::<f64>::from_ints(&[&[4, 1], &[2, 3]]);
        let x = a.solve(&[1.0, 2.0]).unwrap();
        assert!((x[0] - 0.1).abs() < 1e-15 && (x[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn pow_matches_repeated_product() {
        let a = Q::from_ints(&[&[1, 1], &[1, 0]]);
        assert_eq!(a.pow(10), Q::from_ints(&[&[89, 55], &[55, 34]]));
        assert_eq!(a.pow(0), Q::identity(2));
    }
}
