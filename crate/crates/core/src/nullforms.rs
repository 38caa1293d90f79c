//! Canonical forms of generic nilpotent self-adjoint endomorphisms.
//!
//! Everything here is generic over [`Scalar`]; with `BigRational` every
//! identity is checked exactly. A generic nilpotent `A` on an `m`-dimensional
//! pseudo-Euclidean space admits a basis `e_1..e_m`, unique up to one overall
//! sign, with `A e_j = e_{j-1}` and `<e_i, e_{m+1-i}> = eps`, all other pairings
//! zero. Over the rationals the normalization `eps` may need a square root, so
//! the basis is returned together with the positive factor `s^2` by which the
//! antidiagonal pairings are scaled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, vec_scale, Matrix};
use crate::scalar::Scalar;

/// Nondegenerate symmetric bilinear form given by its Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProduct<T> {
    gram: Matrix<T>,
}

impl<T: Scalar> InnerProduct<T> {
    pub fn new(gram: Matrix<T>) -> Result<Self> {
        if !gram.is_square() || gram.rows() < 2 {
            return Err(Error::InvalidModel("Gram matrix must be square with m >= 2".into()));
        }
        if !gram.is_symmetric() {
            return Err(Error::InvalidModel("Gram matrix is not symmetric".into()));
        }
        if gram.det().negligible() {
            return Err(Error::InvalidModel("Gram matrix is degenerate".into()));
        }
        Ok(Self { gram })
    }

    /// `eps` on the antidiagonal, zero elsewhere.
    pub fn antidiagonal(m: usize, epsilon: i32) -> Self {
        let e = T::from_int(epsilon as i64);
        Self {
            gram: Matrix::from_fn(m, m, |i, j| if i + j == m - 1 { e.clone() } else { T::zero() }),
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix<T> {
        &self.gram
    }

    pub fn pair(&self, x: &[T], y: &[T]) -> T {
        self.gram.bilinear(x, y)
    }

    /// `(positive, negative)` inertia indices.
    pub fn signature(&self) -> (usize, usize) {
        let (p, n, _) = self.gram.inertia();
        (p, n)
    }

    pub fn is_semi_neutral(&self) -> bool {
        let (p, n) = self.signature();
        p.abs_diff(n) <= 1
    }
}

/// A nonzero, traceless, nilpotent, self-adjoint endomorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct NilpotentSelfAdjoint<T> {
    mat: Matrix<T>,
}

impl<T: Scalar> NilpotentSelfAdjoint<T> {
    pub fn new(mat: Matrix<T>, g: &InnerProduct<T>) -> Result<Self> {
        let m = g.dim();
        if mat.rows() != m || mat.cols() != m {
            return Err(Error::InvalidModel("A and the Gram matrix differ in size".into()));
        }
        if mat.is_zero() {
            return Err(Error::InvalidModel("A must be nonzero".into()));
        }
        if !mat.trace().negligible() {
            return Err(Error::InvalidModel("A must be traceless".into()));
        }
        let lhs = &mat.transpose() * g.gram();
        let rhs = g.gram() * &mat;
        if lhs.max_abs_diff(&rhs) > tolerance::<T>() {
            return Err(Error::InvalidModel("A is not self-adjoint".into()));
        }
        if !mat.pow(m as u32).is_zero() && (T::is_exact() || mat.pow(m as u32).max_abs() > 1e-9) {
            return Err(Error::NotNilpotent {
                m,
                kernel_dims: kernel_dims(&mat),
            });
        }
        Ok(Self { mat })
    }

    /// Single upper Jordan block: ones immediately above the diagonal.
    pub fn jordan_block(m: usize) -> Self {
        Self {
            mat: jordan_block(m),
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }
}

pub fn jordan_block<T: Scalar>(m: usize) -> Matrix<T> {
    Matrix::from_fn(m, m, |i, j| if j == i + 1 { T::one() } else { T::zero() })
}

fn tolerance<T: Scalar>() -> f64 {
    if T::is_exact() {
        0.0
    } else {
        1e-9
    }
}

/// Dimensions `d_j = dim Ker A^j / Ker A^{j-1}`, `j = 1..m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelFiltration {
    pub dims: Vec<usize>,
}

impl KernelFiltration {
    pub fn is_generic(&self) -> bool {
        self.dims.iter().all(|&d| d == 1)
    }
}

// dim Ker A^j for j = 0..=m
fn kernel_dims<T: Scalar>(a: &Matrix<T>) -> Vec<usize> {
    let m = a.rows();
    let mut power = Matrix::identity(m);
    let mut dims = vec![0];
    for _ in 0..m {
        power = &power * a;
        dims.push(m - power.rank());
    }
    dims
}

pub fn kernel_filtration<T: Scalar>(a: &Matrix<T>) -> Result<KernelFiltration> {
    assert!(a.is_square());
    let m = a.rows();
    let kd = kernel_dims(a);
    if kd[m] != m {
        return Err(Error::NotNilpotent { m, kernel_dims: kd });
    }
    let dims = kd.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(KernelFiltration { dims })
}

/// Genericity via `rank A = m - 1` and, independently, `A^{m-1} != 0`.
pub fn is_generic_nilpotent<T: Scalar>(a: &NilpotentSelfAdjoint<T>, _g: &InnerProduct<T>) -> Result<bool> {
    let m = a.dim();
    let by_rank = a.matrix().rank() == m - 1;
    let top = a.matrix().pow(m as u32 - 1);
    let by_power = if T::is_exact() {
        !top.is_zero()
    } else {
        top.max_abs() > 1e-9
    };
    if by_rank != by_power {
        return Err(Error::Internal(format!(
            "rank test ({by_rank}) and power test ({by_power}) disagree"
        )));
    }
    Ok(by_rank)
}

/// Coefficient `t` making `v + t u` null for the form, assuming `(u, u) = 0`.
pub fn null_coset_parameter<T: Scalar>(form: &Matrix<T>, v: &[T], u: &[T]) -> Result<T> {
    let vu = form.bilinear(v, u);
    if vu.negligible() {
        return Err(Error::CosetOrthogonal);
    }
    let vv = form.bilinear(v, v);
    Ok(-vv / (T::from_int(2) * vu))
}

/// The unique null vector of the form on the line `v + R u`.
pub fn unique_null_in_coset<T: Scalar>(form: &Matrix<T>, v: &[T], u: &[T]) -> Result<Vec<T>> {
    let t = null_coset_parameter(form, v, u)?;
    Ok(axpy(&t, u, v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalQuadruple<T> {
    pub m: usize,
    pub epsilon: i32,
    /// `basis[j-1] = e_j`.
    pub basis: Vec<Vec<T>>,
    /// Positive factor with `<e_i, e_{m+1-i}> = eps * scale_square`.
    pub scale_square: T,
}

impl<T: Scalar> CanonicalQuadruple<T> {
    /// Matrix whose columns are `e_1..e_m`.
    pub fn basis_matrix(&self) -> Matrix<T> {
        Matrix::from_columns(&self.basis)
    }

    /// Largest violation of `A e_j = e_{j-1}` and of the antidiagonal pairing.
    pub fn defect(&self, a: &Matrix<T>, g: &InnerProduct<T>) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let image = a.mul_vec(&self.basis[j]);
            for (k, v) in image.iter().enumerate() {
                let want = if j == 0 { T::zero() } else { self.basis[j - 1][k].clone() };
                worst = worst.max((v.clone() - want).magnitude());
            }
        }
        let target = T::from_int(self.epsilon as i64) * self.scale_square.clone();
        for i in 0..m {
            for k in 0..m {
                let want = if i + k == m - 1 { target.clone() } else { T::zero() };
                worst = worst.max((g.pair(&self.basis[i], &self.basis[k]) - want).magnitude());
            }
        }
        worst
    }
}

/// Seed candidates in search order: `e_i`, then `e_i + e_j` (i < j).
pub fn seed_candidates<T: Scalar>(m: usize) -> impl Iterator<Item = Vec<T>> {
    let singles = (0..m).map(move |i| crate::linalg::unit_vector(m, i));
    let pairs = (0..m).flat_map(move |i| {
        (i + 1..m).map(move |j| {
            let mut v = vec![T::zero(); m];
            v[i] = T::one();
            v[j] = T::one();
            v
        })
    });
    singles.chain(pairs)
}

/// Seeds `v` with `<A^{m-1} v, v> != 0`, in search order.
pub fn admissible_seeds<T: Scalar>(a: &Matrix<T>, g: &InnerProduct<T>) -> Vec<Vec<T>> {
    let m = a.rows();
    let top = a.pow(m as u32 - 1);
    seed_candidates(m)
        .filter(|v| !g.pair(&top.mul_vec(v), v).negligible())
        .collect()
}

pub fn canonical_basis<T: Scalar>(
    a: &NilpotentSelfAdjoint<T>,
    g: &InnerProduct<T>,
) -> Result<CanonicalQuadruple<T>> {
    if !is_generic_nilpotent(a, g)? {
        return Err(Error::NotGeneric {
            filtration: kernel_filtration(a.matrix())?.dims,
        });
    }
    let seed = admissible_seeds(a.matrix(), g)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Internal("seed search exhausted for a generic input".into()))?;
    canonical_basis_from_seed(a, g, &seed)
}

/// Runs the null-coset induction from a given admissible seed.
pub fn canonical_basis_from_seed<T: Scalar>(
    a: &NilpotentSelfAdjoint<T>,
    g: &InnerProduct<T>,
    seed: &[T],
) -> Result<CanonicalQuadruple<T>> {
    let m = a.dim();
    let am = a.matrix();
    let powers: Vec<Matrix<T>> = (0..m as u32).map(|j| am.pow(j)).collect();
    // form_j(x, y) = <A^j x, y>
    let forms: Vec<Matrix<T>> = powers.iter().map(|p| &p.transpose() * g.gram()).collect();

    let top = &forms[m - 1];
    let lead = top.bilinear(seed, seed);
    if lead.negligible() {
        return Err(Error::InvalidModel("seed is not admissible: <A^(m-1) v, v> = 0".into()));
    }
    let epsilon = lead.sign();
    // <A^{m-1} ., .> has rank one; all its nonzero diagonal entries share a sign.
    for i in 0..m {
        let s = top[(i, i)].sign();
        if s != 0 && s != epsilon {
            return Err(Error::Internal("<A^(m-1) ., .> is not semidefinite".into()));
        }
    }

    let mut v = seed.to_vec();
    for j in 2..=m {
        let direction = powers[j - 1].mul_vec(&v);
        v = unique_null_in_coset(&forms[m - j], &v, &direction)?;
    }

    let s2 = T::from_int(epsilon as i64) * top.bilinear(&v, &v);
    let (root, scale_square) = s2.split_square();
    v = vec_scale(&(T::one() / root), &v);
    if v.iter().find(|x| !x.negligible()).is_some_and(|x| x.sign() < 0) {
        v = vec_scale(&-T::one(), &v);
    }

    let basis: Vec<Vec<T>> = (1..=m).map(|j| powers[m - j].mul_vec(&v)).collect();
    let quad = CanonicalQuadruple {
        m,
        epsilon,
        basis,
        scale_square,
    };
    let defect = quad.defect(am, g);
    if defect > tolerance::<T>() {
        return Err(Error::Internal(format!("canonical basis defect {defect}")));
    }
    Ok(quad)
}

/// `q^k` for a possibly negative integer exponent.
pub fn int_power<T: Scalar>(q: &T, k: i64) -> T {
    let mut out = T::one();
    for _ in 0..k.unsigned_abs() {
        out = out * q.clone();
    }
    if k < 0 {
        T::one() / out
    } else {
        out
    }
}

/// The isometry `C` with `C e_j = q^{m+1-2j} e_j` (positive branch), expressed
/// in the original coordinates.
pub fn build_scaling_isometry<T: Scalar>(quad: &CanonicalQuadruple<T>, q: &T) -> Result<Matrix<T>> {
    if q.sign() <= 0 {
        return Err(Error::BadScale(q.to_string()));
    }
    let m = quad.m as i64;
    let e = quad.basis_matrix();
    let e_inv = e
        .inverse()
        .ok_or_else(|| Error::Internal("canonical basis is singular".into()))?;
    let diag: Vec<T> = (1..=m).map(|j| int_power(q, m + 1 - 2 * j)).collect();
    Ok(&(&e * &Matrix::diagonal(&diag)) * &e_inv)
}

/// Defects of `C A C^{-1} = q^2 A` and `C^T g C = g`.
pub fn scaling_isometry_defects<T: Scalar>(
    c: &Matrix<T>,
    a: &Matrix<T>,
    g: &InnerProduct<T>,
    q: &T,
) -> (f64, f64) {
    let q2 = q.clone() * q.clone();
    let conj = &(c * a) - &(&a.scale(&q2) * c);
    let iso = &(&c.transpose() * g.gram()) * c;
    (conj.max_abs(), iso.max_abs_diff(g.gram()))
}

/// Every linear isometry `C` with `C A = q^2 A C`.
///
/// Solves the linear condition exactly, confirms that its solution space is
/// `C_0 * span(I, A, ..., A^{m-1})` for the isometry `C_0` built from the
/// canonical basis, and then solves the quadratic isometry condition
/// `p(A)^2 = I` coefficient by coefficient.
pub fn scaling_isometries<T: Scalar>(
    a: &NilpotentSelfAdjoint<T>,
    g: &InnerProduct<T>,
    q: &T,
) -> Result<Vec<Matrix<T>>> {
    let m = a.dim();
    let am = a.matrix();
    let q2 = q.clone() * q.clone();
    // Unknown C, vectorised row-major; equation (CA - q^2 AC)_{ab} = 0.
    let n = m * m;
    let mut system: Matrix<T> = Matrix::zeros(n, n);
    for r in 0..m {
        for b in 0..m {
            let row = r * m + b;
            for k in 0..m {
                let idx = r * m + k;
                system[(row, idx)] = system[(row, idx)].clone() + am[(k, b)].clone();
                let idx = k * m + b;
                system[(row, idx)] = system[(row, idx)].clone() - q2.clone() * am[(r, k)].clone();
            }
        }
    }
    let solutions = system.nullspace();
    if solutions.len() != m {
        return Err(Error::Internal(format!(
            "linear solution space has dimension {} instead of {m}",
            solutions.len()
        )));
    }
    let quad = canonical_basis(a, g)?;
    let c0 = build_scaling_isometry(&quad, q)?;
    let c0_inv = c0
        .inverse()
        .ok_or_else(|| Error::Internal("scaling isometry is singular".into()))?;
    let powers: Vec<Matrix<T>> = (0..m as u32).map(|j| am.pow(j)).collect();
    let span = Matrix::from_fn(n, m, |idx, l| powers[l][(idx / m, idx % m)].clone());
    for sol in &solutions {
        let y = Matrix::from_fn(m, m, |i, j| sol[i * m + j].clone());
        let z = &c0_inv * &y;
        let flat: Vec<T> = z.to_rows().into_iter().flatten().collect();
        let aug = Matrix::from_fn(n, m + 1, |i, j| {
            if j < m {
                span[(i, j)].clone()
            } else {
                flat[i].clone()
            }
        });
        if aug.rank() != span.rank() {
            return Err(Error::Internal(
                "a solution of C A = q^2 A C lies outside C_0 span(A^j)".into(),
            ));
        }
    }
    // (c_0 + c_1 x + ...)^2 = 1 mod x^m: c_0 = +-1 and each later c_l is
    // forced by 2 c_0 c_l + sum_{0<i<l} c_i c_{l-i} = 0.
    let mut out = Vec::new();
    for c0_sign in [1i64, -1] {
        let mut coeffs = vec![T::from_int(c0_sign)];
        for l in 1..m {
            let mut acc = T::zero();
            for i in 1..l {
                acc = acc + coeffs[i].clone() * coeffs[l - i].clone();
            }
            coeffs.push(-acc / (T::from_int(2 * c0_sign)));
        }
        let mut poly = Matrix::zeros(m, m);
        for (l, c) in coeffs.iter().enumerate() {
            poly = &poly + &powers[l].scale(c);
        }
        out.push(&c0 * &poly);
    }
    Ok(out)
}

/// Dimension of `{X : XA = AX, X^T g + g X = 0}`.
pub fn commutant_skew_dimension<T: Scalar>(a: &Matrix<T>, g: &InnerProduct<T>) -> usize {
    let m = a.rows();
    let n = m * m;
    let gm = g.gram();
    let mut system: Matrix<T> = Matrix::zeros(2 * n, n);
    for r in 0..m {
        for b in 0..m {
            let row = r * m + b;
            for k in 0..m {
                // (XA - AX)_{rb}
                let idx = r * m + k;
                system[(row, idx)] = system[(row, idx)].clone() + a[(k, b)].clone();
                let idx = k * m + b;
                system[(row, idx)] = system[(row, idx)].clone() - a[(r, k)].clone();
                // (X^T g + g X)_{rb}
                let idx = k * m + r;
                system[(n + row, idx)] = system[(n + row, idx)].clone() + gm[(k, b)].clone();
                let idx = k * m + b;
                system[(n + row, idx)] = system[(n + row, idx)].clone() + gm[(r, k)].clone();
            }
        }
    }
    n - system.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;

    type Q = BigRational;

    fn two_blocks() -> (Matrix<Q>, InnerProduct<Q>) {
        let a = Matrix::from_ints(&[&[0, 1, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 0, 0]]);
        let g = InnerProduct::new(Matrix::from_ints(&[
            &[0, 1, 0, 0],
            &[1, 0, 0, 0],
            &[0, 0, 0, 1],
            &[0, 0, 1, 0],
        ]))
        .unwrap();
        (a, g)
    }

    #[test]
    fn filtration_of_full_block_and_two_blocks() {
        let full = kernel_filtration(&jordan_block::<Q>(3)).unwrap();
        assert_eq!(full.dims, vec![1, 1, 1]);
        let (a, _) = two_blocks();
        assert_eq!(kernel_filtration(&a).unwrap().dims, vec![2, 2, 0, 0]);
    }

    #[test]
    fn non_nilpotent_rejected() {
        let a = Matrix::<Q>::from_ints(&[&[1, 0], &[0, 0]]);
        assert!(matches!(kernel_filtration(&a), Err(Error::NotNilpotent { .. })));
    }

    #[test]
    fn genericity_tests() {
        let g = InnerProduct::<Q>::antidiagonal(3, 1);
        let a = NilpotentSelfAdjoint::new(jordan_block(3), &g).unwrap();
        assert!(is_generic_nilpotent(&a, &g).unwrap());

        let (a2, g2) = two_blocks();
        let a2 = NilpotentSelfAdjoint::new(a2, &g2).unwrap();
        assert!(!is_generic_nilpotent(&a2, &g2).unwrap());
        assert!(matches!(canonical_basis(&a2, &g2), Err(Error::NotGeneric { .. })));
    }

    #[test]
    fn self_adjointness_is_enforced() {
        let g = InnerProduct::<Q>::new(Matrix::identity(2)).unwrap();
        let err = NilpotentSelfAdjoint::new(jordan_block(2), &g).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
    }

    #[test]
    fn null_coset_on_hyperbolic_plane() {
        let form = Matrix::<Q>::from_ints(&[&[0, 1], &[1, 0]]);
        let v = vec![rat(1, 1), rat(1, 1)];
        let u = vec![rat(1, 1), rat(0, 1)];
        assert_eq!(null_coset_parameter(&form, &v, &u).unwrap(), rat(-1, 1));
        assert_eq!(unique_null_in_coset(&form, &v, &u).unwrap(), vec![rat(0, 1), rat(1, 1)]);

        let already_null = vec![rat(0, 1), rat(3, 1)];
        assert_eq!(unique_null_in_coset(&form, &already_null, &u).unwrap(), already_null);

        let orth = vec![rat(1, 1), rat(0, 1)];
        assert_eq!(unique_null_in_coset(&form, &orth, &u), Err(Error::CosetOrthogonal));
    }

    #[test]
    fn canonical_basis_of_standard_plane() {
        let g = InnerProduct::<Q>::antidiagonal(2, 1);
        let a = NilpotentSelfAdjoint::new(jordan_block(2), &g).unwrap();
        let quad = canonical_basis(&a, &g).unwrap();
        assert_eq!(quad.epsilon, 1);
        assert_eq!(quad.scale_square, rat(1, 1));
        assert_eq!(quad.basis_matrix(), Matrix::identity(2));
    }

    #[test]
    fn scale_square_is_reduced_to_square_free() {
        // g = 3 * antidiagonal: the pairing class is 3, which has no rational root.
        let g = InnerProduct::new(Matrix::<Q>::from_ints(&[&[0, 0, 3], &[0, 3, 0], &[3, 0, 0]])).unwrap();
        let a = NilpotentSelfAdjoint::new(jordan_block(3), &g).unwrap();
        let quad = canonical_basis(&a, &g).unwrap();
        assert_eq!(quad.scale_square, rat(3, 1));
        assert_eq!(quad.defect(a.matrix(), &g), 0.0);
    }

    #[test]
    fn scaling_isometry_in_canonical_coordinates() {
        let g = InnerProduct::<Q>::antidiagonal(3, 1);
        let a = NilpotentSelfAdjoint::new(jordan_block(3), &g).unwrap();
        let quad = canonical_basis(&a, &g).unwrap();
        let c = build_scaling_isometry(&quad, &rat(2, 1)).unwrap();
        assert_eq!(c, Matrix::diagonal(&[rat(4, 1), rat(1, 1), rat(1, 4)]));
        assert_eq!(scaling_isometry_defects(&c, a.matrix(), &g, &rat(2, 1)), (0.0, 0.0));
        assert!(build_scaling_isometry(&quad, &rat(-2, 1)).is_err());
        assert!(build_scaling_isometry(&quad, &rat(0, 1)).is_err());
    }

    #[test]
    fn commutant_dimensions() {
        for m in 2..=4 {
            let g = InnerProduct::<Q>::antidiagonal(m, -1);
            assert_eq!(commutant_skew_dimension(&jordan_block(m), &g), 0);
        }
        let (a, g) = two_blocks();
        assert!(commutant_skew_dimension(&a, &g) >= 1);
    }

    #[test]
    fn float_scalar_path_normalizes_scale() {
        let g = InnerProduct::<f64>::new(Matrix::from_ints(&[&[0, 0, 2], &[0, 2, 0], &[2, 0, 0]])).unwrap();
        let a = NilpotentSelfAdjoint::new(jordan_block(3), &g).unwrap();
        let quad = canonical_basis(&a, &g).unwrap();
        assert_eq!(quad.scale_square, 1.0);
        assert!(quad.defect(a.matrix(), &g) < 1e-12);
    }
}
