//! Integer polynomials with unit constant term and their companion matrices.
//!
//! Coefficients are stored constant term first. A GL(Z)-polynomial of degree
//! `d` has leading coefficient `(-1)^d` and constant term `+1` or `-1`; these
//! are exactly the polynomials `det(M - x I)` for unimodular integer `M`.

use std::fmt;

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial with arbitrary-precision integer coefficients, constant term first.
///
/// Serializes as an array of integers; coefficients outside the `i64` range
/// are written as decimal strings.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Coeff>", from = "Vec<Coeff>")]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coeff {
    Small(i64),
    Big(String),
}

impl From<IntPolynomial> for Vec<Coeff> {
    fn from(p: IntPolynomial) -> Self {
        p.coeffs
            .iter()
            .map(|c| c.to_i64().map_or_else(|| Coeff::Big(c.to_string()), Coeff::Small))
            .collect()
    }
}

impl From<Vec<Coeff>> for IntPolynomial {
    fn from(c: Vec<Coeff>) -> Self {
        IntPolynomial::new(
            c.into_iter()
                .map(|v| match v {
                    Coeff::Small(x) => BigInt::from(x),
                    Coeff::Big(s) => s.parse().unwrap_or_default(),
                })
                .collect(),
        )
    }
}

impl IntPolynomial {
    /// Trailing zero coefficients are dropped; the zero polynomial is empty.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::one();
        Self { coeffs: c }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    /// Coefficients as `i64`, or `None` on overflow.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(|c| c.to_i64()).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(vec![]);
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(BigInt::one()), |acc, _| acc.mul(self))
    }

    /// `P(x^k)`.
    pub fn compose_power(&self, k: usize) -> Self {
        assert!(k >= 1);
        let mut out = vec![BigInt::zero(); self.degree() * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * k] = c.clone();
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Coefficient reversal `x^d P(1/x)`.
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    /// Quotient when `divisor` divides `self` in `Z[x]`.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(self.clone());
        }
        if self.degree() < divisor.degree() {
            return None;
        }
        let dl = divisor.leading();
        let dd = divisor.degree();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); self.degree() - dd + 1];
        for i in (0..quot.len()).rev() {
            let top = &rem[i + dd];
            if top.is_zero() {
                continue;
            }
            let (q, r) = top.div_rem(&dl);
            if !r.is_zero() {
                return None;
            }
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &q * c;
            }
            quot[i] = q;
        }
        if rem.iter().all(|c| c.is_zero()) {
            Some(Self::new(quot))
        } else {
            None
        }
    }

    /// Pseudo-remainder of `self` by `divisor`.
    fn pseudo_rem(&self, divisor: &Self) -> Self {
        let mut rem = self.clone();
        let dl = divisor.leading();
        while !rem.is_zero() && rem.degree() >= divisor.degree() {
            let shift = rem.degree() - divisor.degree();
            let rl = rem.leading();
            let shifted = divisor.mul(&Self::monomial(shift)).scale(&rl);
            rem = rem.scale(&dl).sub(&shifted);
        }
        rem
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = self.content();
        if self.leading().is_negative() {
            c = -c;
        }
        Self::new(self.coeffs.iter().map(|x| x / &c).collect())
    }

    /// Primitive greatest common divisor with positive leading coefficient.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.primitive(), other.primitive());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive();
        }
        a.primitive()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * z + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, abs.is_one()) {
                (0, _) => write!(f, "{abs}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{abs}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{abs}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPolynomial({self})")
    }
}

pub fn is_glz(p: &IntPolynomial) -> bool {
    if p.is_zero() || p.degree() == 0 {
        return false;
    }
    let d = p.degree();
    let lead = if d % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    p.leading() == lead && p.constant_term().abs().is_one()
}

/// A polynomial satisfying [`is_glz`].
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "IntPolynomial", into = "IntPolynomial")]
pub struct GlzPolynomial(IntPolynomial);

impl GlzPolynomial {
    pub fn new(p: IntPolynomial) -> Result<Self> {
        if is_glz(&p) {
            Ok(Self(p))
        } else {
            Err(Error::NotGlz(p.to_string()))
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(IntPolynomial::from_i64(coeffs))
    }

    /// Multiplies by -1 if needed so the leading coefficient is `(-1)^d`.
    pub fn normalized(p: &IntPolynomial) -> Result<Self> {
        let d = p.degree();
        let want_positive = d % 2 == 0;
        let q = if p.leading().is_positive() == want_positive {
            p.clone()
        } else {
            p.neg()
        };
        Self::new(q)
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }

    /// `(-1)^d P`, the monic polynomial with the same roots.
    pub fn monic(&self) -> IntPolynomial {
        if self.degree() % 2 == 0 {
            self.0.clone()
        } else {
            self.0.neg()
        }
    }
}

impl TryFrom<IntPolynomial> for GlzPolynomial {
    type Error = Error;
    fn try_from(p: IntPolynomial) -> Result<Self> {
        Self::new(p)
    }
}

impl From<GlzPolynomial> for IntPolynomial {
    fn from(p: GlzPolynomial) -> Self {
        p.0
    }
}

impl fmt::Display for GlzPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for GlzPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GlzPolynomial({})", self.0)
    }
}

/// Square integer matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_fn(rows.len(), |i, j| BigInt::from(rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { BigInt::one() } else { BigInt::zero() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        Self::from_fn(n, |i, j| (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.n);
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn trace(&self) -> BigInt {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Faddeev-LeVerrier: coefficients of `det(x I - M)` (constant first) and
    /// the auxiliary matrix `M_n` with `M * M_n = -c_0 I`.
    fn leverrier(&self) -> (Vec<BigInt>, Self) {
        let n = self.n;
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::one();
        let mut aux = Self::from_fn(n, |_, _| BigInt::zero());
        for k in 1..=n {
            let am = self.mul(&aux);
            aux = Self::from_fn(n, |i, j| {
                let diag = if i == j { c[n - k + 1].clone() } else { BigInt::zero() };
                am.get(i, j) + diag
            });
            let tr = self.mul(&aux).trace();
            c[n - k] = -tr / BigInt::from(k);
        }
        (c, aux)
    }

    pub fn det(&self) -> BigInt {
        let (c, _) = self.leverrier();
        if self.n % 2 == 0 {
            c[0].clone()
        } else {
            -c[0].clone()
        }
    }
}

/// Integer matrix with determinant `+1` or `-1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UnimodularMatrix(IntMatrix);

impl UnimodularMatrix {
    pub fn new(m: IntMatrix) -> Result<Self> {
        let det = m.det();
        if det.abs().is_one() {
            Ok(Self(m))
        } else {
            Err(Error::NotUnimodular(det.to_string()))
        }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    /// Exact inverse as the adjugate times the determinant.
    pub fn inverse(&self) -> Self {
        let (c, aux) = self.0.leverrier();
        // M * aux = -c_0 I with c_0 = +-1.
        let s = -c[0].clone();
        Self(IntMatrix::from_fn(self.0.n, |i, j| aux.get(i, j) * &s))
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        Self(base.0.pow(k.unsigned_abs() as u32))
    }
}

/// Companion matrix of the monic version of `P`: ones on the subdiagonal,
/// last column the negated monic coefficients.
pub fn companion(p: &GlzPolynomial) -> UnimodularMatrix {
    let monic = p.monic();
    let d = p.degree();
    let m = IntMatrix::from_fn(d, |i, j| {
        if j == d - 1 {
            -monic.coeff(i)
        } else if i == j + 1 {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    });
    UnimodularMatrix(m)
}

/// `det(M - x I)`, which has leading coefficient `(-1)^d`.
pub fn char_poly(m: &UnimodularMatrix) -> GlzPolynomial {
    let (c, _) = m.0.leverrier();
    let p = IntPolynomial::new(c);
    let p = if m.0.n % 2 == 0 { p } else { p.neg() };
    GlzPolynomial::new(p).expect("characteristic polynomial of a unimodular matrix")
}

/// Characteristic polynomial of an arbitrary integer matrix, rejecting
/// non-unimodular input.
pub fn char_poly_checked(m: &IntMatrix) -> Result<GlzPolynomial> {
    Ok(char_poly(&UnimodularMatrix::new(m.clone())?))
}

/// `x^d P(1/x)`, sign-normalized to leading `(-1)^d`.
pub fn inversion_star(p: &GlzPolynomial) -> GlzPolynomial {
    GlzPolynomial::normalized(&p.0.reversed()).expect("reversal of a GLZ polynomial")
}

/// Polynomial whose roots are the `k`-th powers of the roots of `P`.
pub fn power_spectrum_poly(p: &GlzPolynomial, k: i64) -> Result<GlzPolynomial> {
    if k == 0 {
        return Err(Error::OutOfRange {
            name: "k",
            detail: "power must be nonzero".into(),
        });
    }
    Ok(char_poly(&companion(p).pow(k)))
}

/// `N(d) = max{n : phi(n) <= d}` for `d = 1..=16`.
pub const CYCLOTOMIC_ORDER_BOUND: [u32; 16] = [2, 6, 6, 12, 12, 18, 18, 30, 30, 30, 30, 42, 42, 42, 42, 60];

pub fn cyclotomic_order_bound(d: usize) -> Result<u32> {
    if d == 0 || d > CYCLOTOMIC_ORDER_BOUND.len() {
        return Err(Error::DegreeTooLarge {
            degree: d,
            bound: CYCLOTOMIC_ORDER_BOUND.len(),
        });
    }
    Ok(CYCLOTOMIC_ORDER_BOUND[d - 1])
}

/// Smallest `n <= limit` with `M^n = I` for the companion matrix of `P`.
///
/// Iterates `M^n e_1` first; `e_1` is cyclic for a companion matrix, so
/// `M^n e_1 = e_1` already forces `M^n = I`, which is then confirmed on the
/// full matrix power.
pub fn companion_period(p: &GlzPolynomial, limit: u32) -> Option<u32> {
    let monic = p.monic();
    let d = p.degree();
    let mut x = vec![BigInt::zero(); d];
    x[0] = BigInt::one();
    let m = companion(p);
    for n in 1..=limit {
        // x <- M x: shift up, feed the top entry back through the last column.
        let top = x[d - 1].clone();
        for i in (1..d).rev() {
            x[i] = &x[i - 1] - &top * monic.coeff(i);
        }
        x[0] = -&top * monic.coeff(0);
        if x[0].is_one() && x[1..].iter().all(|v| v.is_zero()) {
            return m.0.pow(n).is_identity().then_some(n);
        }
    }
    None
}

/// Order of the roots of unity when `P` is cyclotomic, `None` otherwise.
pub fn cyclotomic_order(p: &GlzPolynomial) -> Result<Option<u32>> {
    let factors = factor_irreducible(p.poly(), DEFAULT_FACTOR_DEGREE.max(p.degree()))?;
    if !factors.is_irreducible() {
        return Err(Error::Reducible {
            factors: factors.factor_coeffs(),
        });
    }
    let bound = cyclotomic_order_bound(p.degree())?;
    Ok(companion_period(p, bound))
}

pub fn is_cyclotomic(p: &GlzPolynomial) -> Result<bool> {
    Ok(cyclotomic_order(p)?.is_some())
}

/// The standard cyclotomic polynomial `Phi_n` (monic).
pub fn cyclotomic_polynomial(n: u32) -> IntPolynomial {
    assert!(n >= 1);
    let mut p = IntPolynomial::monomial(n as usize).sub(&IntPolynomial::from_i64(&[1]));
    for d in 1..n {
        if n % d == 0 {
            p = p
                .div_exact(&cyclotomic_polynomial(d))
                .expect("x^n - 1 is divisible by Phi_d for d | n");
        }
    }
    p
}

pub fn euler_phi(n: u32) -> u32 {
    (1..=n).filter(|&k| k.gcd(&n) == 1).count() as u32
}

pub const DEFAULT_FACTOR_DEGREE: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    /// Signed integer content.
    pub content: BigInt,
    /// Primitive irreducible factors with positive leading coefficient and
    /// their multiplicities, sorted by degree and then coefficients.
    pub factors: Vec<(IntPolynomial, usize)>,
}

impl Factorization {
    pub fn is_irreducible(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    pub fn product(&self) -> IntPolynomial {
        self.factors
            .iter()
            .fold(IntPolynomial::constant(self.content.clone()), |acc, (f, k)| {
                acc.mul(&f.pow(*k as u32))
            })
    }

    pub fn factor_coeffs(&self) -> Vec<Vec<i64>> {
        self.factors
            .iter()
            .flat_map(|(f, k)| std::iter::repeat_n(f.to_i64().unwrap_or_default(), *k))
            .collect()
    }
}

/// Complex roots with multiplicity, via companion eigenvalues polished by
/// Newton iteration. Repeated roots are split off first with `gcd(p, p')`, so
/// the eigenvalue step only sees square-free polynomials.
pub fn numeric_roots(p: &IntPolynomial) -> Result<Vec<Complex64>> {
    let mut rest = p.clone();
    let mut roots = Vec::new();
    while rest.degree() > 0 {
        let g = rest.gcd(&rest.derivative());
        let square_free = rest
            .div_exact(&g)
            .ok_or_else(|| Error::Internal(format!("gcd of {rest} and its derivative does not divide it")))?;
        roots.extend(numeric_roots_polished(&square_free, 4)?);
        rest = g;
    }
    sort_roots(&mut roots);
    Ok(roots)
}

fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

// Francis iteration can stall on companion matrices whose eigenvalues share a
// modulus (e.g. x^4 - x^2 + 1); a fixed orthogonal similarity breaks the tie.
fn companion_eigenvalues(comp: DMatrix<f64>) -> Option<Vec<Complex64>> {
    let d = comp.nrows();
    if let Some(s) = Schur::try_new(comp.clone(), f64::EPSILON, 2000) {
        return Some(s.complex_eigenvalues().iter().copied().collect());
    }
    for attempt in 1..=4u32 {
        let r = DMatrix::from_fn(d, d, |i, j| ((attempt as f64) * (i * 7 + j * 3 + 1) as f64).sin());
        let q = r.qr().q();
        let m = q.transpose() * &comp * &q;
        if let Some(s) = Schur::try_new(m, f64::EPSILON, 2000) {
            return Some(s.complex_eigenvalues().iter().copied().collect());
        }
    }
    None
}

fn numeric_roots_polished(p: &IntPolynomial, newton_steps: usize) -> Result<Vec<Complex64>> {
    let d = p.degree();
    if d == 0 {
        return Ok(Vec::new());
    }
    let c = p.to_f64();
    let lead = c[d];
    let comp = DMatrix::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let dp = p.derivative();
    let mut roots = companion_eigenvalues(comp)
        .ok_or_else(|| Error::Numerical(format!("eigenvalue iteration did not converge for {p}")))?;
    for r in roots.iter_mut() {
        for _ in 0..newton_steps {
            let fp = dp.eval_complex(*r);
            if fp.norm() == 0.0 {
                break;
            }
            let step = p.eval_complex(*r) / fp;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    sort_roots(&mut roots);
    Ok(roots)
}

// Coefficients (constant first) of prod (x - r).
fn expand_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::zero(); c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i + 1] += v;
            next[i] -= v * r;
        }
        c = next;
    }
    c
}

fn round_candidate(c: &[Complex64], scale: f64) -> Option<IntPolynomial> {
    let mut out = Vec::with_capacity(c.len());
    for v in c {
        let re = v.re * scale;
        let tol = 1e-6 * (1.0 + re.abs());
        if v.im.abs() * scale > tol || (re - re.round()).abs() > tol {
            return None;
        }
        out.push(BigInt::from(re.round() as i64));
    }
    Some(IntPolynomial::new(out))
}

fn positive_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let small = n.to_u64().unwrap_or(u64::MAX);
    if small > 1_000_000 {
        return vec![BigInt::one()];
    }
    (1..=small).filter(|d| small % d == 0).map(BigInt::from).collect()
}

// Irreducible factors of a primitive square-free polynomial.
fn split_square_free(s: &IntPolynomial) -> Result<Vec<IntPolynomial>> {
    if s.degree() <= 1 {
        return Ok(vec![s.primitive()]);
    }
    let mut remaining = s.primitive();
    let mut roots = numeric_roots(&remaining)?;
    let worst = |rs: &[Complex64], p: &IntPolynomial| {
        rs.iter()
            .map(|r| p.eval_complex(*r).norm() / (1.0 + r.norm()).powi(p.degree() as i32))
            .fold(0.0f64, f64::max)
    };
    if worst(&roots, &remaining) > 1e-9 {
        roots = numeric_roots_polished(&remaining, 50)?;
        if worst(&roots, &remaining) > 1e-9 {
            return Err(Error::Numerical(format!(
                "root refinement did not converge for {remaining}"
            )));
        }
    }
    let mut factors = Vec::new();
    let mut size = 1;
    'outer: while 2 * size <= roots.len() {
        let n = roots.len();
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let subset: Vec<Complex64> = idx.iter().map(|&i| roots[i]).collect();
            let expanded = expand_roots(&subset);
            for lead in positive_divisors(&remaining.leading()) {
                let scale = lead.to_f64().unwrap_or(1.0);
                if let Some(cand) = round_candidate(&expanded, scale) {
                    if let Some(q) = remaining.div_exact(&cand) {
                        factors.push(cand.primitive());
                        remaining = q.primitive();
                        for &i in idx.iter().rev() {
                            roots.remove(i);
                        }
                        continue 'outer;
                    }
                }
            }
            // next combination
            let mut i = size;
            loop {
                if i == 0 {
                    size += 1;
                    continue 'outer;
                }
                i -= 1;
                if idx[i] < n - size + i {
                    idx[i] += 1;
                    for j in i + 1..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    if remaining.degree() > 0 {
        factors.push(remaining.primitive());
    }
    Ok(factors)
}

fn sort_key(p: &IntPolynomial) -> (usize, Vec<BigInt>) {
    (p.degree(), p.coeffs().to_vec())
}

/// Factorization over the integers for degree at most `degree_bound`.
pub fn factor_irreducible(p: &IntPolynomial, degree_bound: usize) -> Result<Factorization> {
    if p.is_zero() {
        return Err(Error::OutOfRange {
            name: "polynomial",
            detail: "cannot factor the zero polynomial".into(),
        });
    }
    if p.degree() > degree_bound {
        return Err(Error::DegreeTooLarge {
            degree: p.degree(),
            bound: degree_bound,
        });
    }
    let prim = p.primitive();
    let content = p.coeffs().iter().find(|c| !c.is_zero()).map_or(BigInt::one(), |_| {
        let c = p.content();
        if p.leading().is_negative() {
            -c
        } else {
            c
        }
    });
    if prim.degree() == 0 {
        return Ok(Factorization {
            content,
            factors: Vec::new(),
        });
    }
    let g = prim.gcd(&prim.derivative());
    let square_free = prim.div_exact(&g).expect("gcd divides").primitive();
    let mut irreducible = split_square_free(&square_free)?;
    irreducible.sort_by_key(sort_key);
    let mut factors = Vec::new();
    let mut rest = prim.clone();
    for f in irreducible {
        let mut k = 0;
        while let Some(q) = rest.div_exact(&f) {
            rest = q;
            k += 1;
        }
        if k == 0 {
            return Err(Error::Internal(format!("factor {f} does not divide {p}")));
        }
        factors.push((f, k));
    }
    let out = Factorization { content, factors };
    if out.product() != *p {
        return Err(Error::Internal(format!("factorization of {p} does not multiply back")));
    }
    Ok(out)
}

/// `Q = P(x^k) / P(x)` together with the verified product identity
/// `P(x^{k^r}) = Q(x) Q(x^k) ... Q(x^{k^{r-1}}) P(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibilityChain {
    pub quotient: IntPolynomial,
    pub lhs: IntPolynomial,
    pub rhs: IntPolynomial,
}

impl DivisibilityChain {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn divisibility_identity(p: &GlzPolynomial, k: usize, r: u32) -> Result<DivisibilityChain> {
    if k < 2 || r < 1 {
        return Err(Error::OutOfRange {
            name: "k, r",
            detail: format!("need k >= 2 and r >= 1, got k = {k}, r = {r}"),
        });
    }
    let pp = p.poly();
    let quotient = pp.compose_power(k).div_exact(pp).ok_or_else(|| {
        Error::Hypothesis(format!("P(x^{k}) is not divisible by P = {pp}: a^{k} is not a root"))
    })?;
    let lhs = pp.compose_power(k.pow(r));
    let mut rhs = pp.clone();
    for i in 0..r {
        rhs = rhs.mul(&quotient.compose_power(k.pow(i)));
    }
    Ok(DivisibilityChain { quotient, lhs, rhs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RootGroupVerdict {
    /// Every root equals `generator^e` for the listed exponents.
    CyclicWitness { generator: (f64, f64), exponents: Vec<i64> },
    NoRelationFound { exponent_bound: u32, tol: f64 },
}

/// Numeric search for a single generator of the group generated by the roots.
///
/// Candidates are the roots and the quotients of pairs of roots. The probe
/// only ever confirms cyclicity; a failed search is reported as such.
pub fn cyclic_root_group_probe(p: &GlzPolynomial, exponent_bound: u32, tol: f64) -> Result<RootGroupVerdict> {
    let roots = numeric_roots(p.poly())?;
    let mut candidates = roots.clone();
    for a in &roots {
        for b in &roots {
            if a != b {
                candidates.push(a / b);
            }
        }
    }
    let e = exponent_bound as i64;
    for g in candidates {
        if (g - 1.0).norm() < tol {
            continue;
        }
        let powers: Vec<(i64, Complex64)> = (-e..=e).map(|k| (k, g.powi(k as i32))).collect();
        let exps: Option<Vec<i64>> = roots
            .iter()
            .map(|r| {
                powers
                    .iter()
                    .find(|(_, z)| (z - r).norm() <= tol * (1.0 + r.norm()))
                    .map(|(k, _)| *k)
            })
            .collect();
        if let Some(exponents) = exps {
            return Ok(RootGroupVerdict::CyclicWitness {
                generator: (g.re, g.im),
                exponents,
            });
        }
    }
    Ok(RootGroupVerdict::NoRelationFound { exponent_bound, tol })
}

/// Outcome of comparing [`is_cyclotomic`] against the list of `+-Phi_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclotomicCensus {
    pub degree_max: usize,
    pub coeff_bound: i64,
    pub candidates: u64,
    pub periodic: u64,
    pub reducible_periodic: u64,
    /// Detected cyclotomic polynomials as coefficient lists.
    pub found: Vec<Vec<i64>>,
    /// `(-1)^d Phi_n` for every `n` with `phi(n) <= degree_max`.
    pub expected: Vec<Vec<i64>>,
    pub discrepancies: Vec<Vec<i64>>,
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Reciprocal GLZ candidates of degree `d`: every cyclotomic polynomial has
/// roots on the unit circle closed under inversion, so it is palindromic or
/// antipalindromic with `|a_i| <= C(d, i)`.
pub fn reciprocal_candidates(d: usize, coeff_bound: i64) -> Vec<Vec<i64>> {
    let lead = if d % 2 == 0 { 1 } else { -1 };
    let mut out = Vec::new();
    for sign in [1i64, -1] {
        // a_i = sign * a_{d-i}; the free coefficients are a_1..a_{floor(d/2)}
        let half = d / 2;
        let bounds: Vec<i64> = (1..=half).map(|i| binomial(d, i).min(coeff_bound)).collect();
        let mut free: Vec<i64> = bounds.iter().map(|b| -b).collect();
        loop {
            let mut c = vec![0i64; d + 1];
            c[d] = lead;
            c[0] = sign * lead;
            let mut ok = true;
            for (i, &v) in free.iter().enumerate() {
                let i = i + 1;
                c[i] = v;
                if i == d - i {
                    if sign == -1 && v != 0 {
                        ok = false;
                    }
                } else {
                    c[d - i] = sign * v;
                }
            }
            if ok {
                out.push(c);
            }
            let mut pos = 0;
            loop {
                if pos == free.len() {
                    break;
                }
                if free[pos] < bounds[pos] {
                    free[pos] += 1;
                    break;
                }
                free[pos] = -bounds[pos];
                pos += 1;
            }
            if pos == free.len() {
                break;
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `(-1)^d Phi_n` for all `n` with `phi(n) <= degree_max`, sorted.
pub fn expected_cyclotomics(degree_max: usize) -> Vec<Vec<i64>> {
    let bound = cyclotomic_order_bound(degree_max).unwrap_or(60);
    let mut out: Vec<Vec<i64>> = (1..=bound)
        .filter(|&n| euler_phi(n) as usize <= degree_max)
        .map(|n| {
            let p = cyclotomic_polynomial(n);
            GlzPolynomial::normalized(&p)
                .expect("cyclotomic polynomials are GLZ")
                .poly()
                .to_i64()
                .expect("small coefficients")
        })
        .collect();
    out.sort();
    out
}

/// Runs the cyclotomic test over a candidate list and compares with the
/// generated list of `+-Phi_n` lying inside the same coefficient box.
pub fn census_over(candidates: &[Vec<i64>], degree_max: usize, coeff_bound: i64) -> Result<CyclotomicCensus> {
    use rayon::prelude::*;
    let results: Vec<Result<Option<(Vec<i64>, bool)>>> = candidates
        .par_iter()
        .map(|c| {
            let p = GlzPolynomial::from_i64(c)?;
            let bound = cyclotomic_order_bound(p.degree())?;
            if companion_period(&p, bound).is_none() {
                return Ok(None);
            }
            let irreducible = factor_irreducible(p.poly(), degree_max.max(DEFAULT_FACTOR_DEGREE))?.is_irreducible();
            Ok(Some((c.clone(), irreducible)))
        })
        .collect();
    let mut periodic = 0;
    let mut reducible_periodic = 0;
    let mut found = Vec::new();
    for r in results {
        if let Some((c, irreducible)) = r? {
            periodic += 1;
            if irreducible {
                found.push(c);
            } else {
                reducible_periodic += 1;
            }
        }
    }
    found.sort();
    let in_box = |c: &Vec<i64>| c.len() <= degree_max + 1 && c.iter().all(|v| v.abs() <= coeff_bound.max(1));
    let expected: Vec<Vec<i64>> = expected_cyclotomics(degree_max).into_iter().filter(in_box).collect();
    let mut discrepancies: Vec<Vec<i64>> = found
        .iter()
        .filter(|c| !expected.contains(c))
        .chain(expected.iter().filter(|c| !found.contains(c)))
        .cloned()
        .collect();
    discrepancies.sort();
    Ok(CyclotomicCensus {
        degree_max,
        coeff_bound,
        candidates: candidates.len() as u64,
        periodic,
        reducible_periodic,
        found,
        expected,
        discrepancies,
    })
}

/// Census over all reciprocal candidates of degree `1..=degree_max`.
pub fn cyclotomic_census(degree_max: usize, coeff_bound: i64) -> Result<CyclotomicCensus> {
    cyclotomic_order_bound(degree_max)?;
    let candidates: Vec<Vec<i64>> = (1..=degree_max)
        .flat_map(|d| reciprocal_candidates(d, coeff_bound))
        .collect();
    census_over(&candidates, degree_max, coeff_bound)
}

/// Every GLZ polynomial of degree `1..=degree_max` with `|a_i| <= coeff_bound`.
pub fn full_box_candidates(degree_max: usize, coeff_bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for d in 1..=degree_max {
        let lead = if d % 2 == 0 { 1 } else { -1 };
        let inner = d - 1;
        let span = (2 * coeff_bound + 1) as u64;
        let total = span.pow(inner as u32);
        for constant in [1i64, -1] {
            for mut code in 0..total {
                let mut c = vec![0i64; d + 1];
                c[0] = constant;
                c[d] = lead;
                for slot in c.iter_mut().take(d).skip(1) {
                    *slot = (code % span) as i64 - coeff_bound;
                    code /= span;
                }
                out.push(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn glz(c: &[i64]) -> GlzPolynomial {
        GlzPolynomial::from_i64(c).unwrap()
    }

    #[test]
    fn glz_membership() {
        assert!(is_glz(&IntPolynomial::from_i64(&[1, -3, 1])));
        assert!(is_glz(&IntPolynomial::from_i64(&[-1, -3, 1])));
        assert!(!is_glz(&IntPolynomial::from_i64(&[2, -3, 1])));
        assert!(!is_glz(&IntPolynomial::from_i64(&[1, 1])));
    }

    #[test]
    fn companion_and_char_poly() {
        let p = glz(&[1, -3, 1]);
        let m = companion(&p);
        assert_eq!(m.matrix().det(), BigInt::one());
        assert_eq!(char_poly(&m), p);
        let id = UnimodularMatrix::new(IntMatrix::identity(3)).unwrap();
        // -(x - 1)^3
        assert_eq!(char_poly(&id), glz(&[1, -3, 3, -1]));
        let bad = IntMatrix::from_i64(&[&[2, 0], &[0, 1]]);
        assert!(matches!(char_poly_checked(&bad), Err(Error::NotUnimodular(_))));
    }

    #[test]
    fn repeated_roots_are_resolved() {
        // (x + 1)^3 (x - 2) (x^2 + 1)^2
        let p = IntPolynomial::from_i64(&[1, 1])
            .pow(3)
            .mul(&IntPolynomial::from_i64(&[-2, 1]))
            .mul(&IntPolynomial::from_i64(&[1, 0, 1]).pow(2));
        let roots = numeric_roots(&p).unwrap();
        assert_eq!(roots.len(), 8);
        let near = |z: Complex64| roots.iter().filter(|r| (**r - z).norm() < 1e-12).count();
        assert_eq!(near(Complex64::new(-1.0, 0.0)), 3);
        assert_eq!(near(Complex64::new(2.0, 0.0)), 1);
        assert_eq!(near(Complex64::new(0.0, 1.0)), 2);
        assert_eq!(near(Complex64::new(0.0, -1.0)), 2);
    }

    #[test]
    fn inversion_examples() {
        let p = glz(&[1, 0, 1, -1]);
        assert_eq!(inversion_star(&p), glz(&[1, -1, 0, -1]));
        let q = glz(&[1, -3, 1]);
        assert_eq!(inversion_star(&q), q);
    }

    #[test]
    fn power_spectrum_examples() {
        let p = glz(&[1, -3, 1]);
        assert_eq!(power_spectrum_poly(&p, 2).unwrap(), glz(&[1, -7, 1]));
        assert_eq!(power_spectrum_poly(&p, 1).unwrap(), p);
        let r = glz(&[1, 0, 1, -1]);
        assert_eq!(power_spectrum_poly(&r, -1).unwrap(), inversion_star(&r));
        assert!(power_spectrum_poly(&p, 0).is_err());
    }

    #[test]
    fn unimodular_inverse_is_exact() {
        let m = companion(&glz(&[1, 2, -5, 3, 1]));
        let inv = m.inverse();
        assert!(m.matrix().mul(inv.matrix()).is_identity());
    }

    #[test]
    fn cyclotomic_detection() {
        assert_eq!(cyclotomic_order(&glz(&[1, -1, 1])).unwrap(), Some(6));
        assert!(!is_cyclotomic(&glz(&[1, -3, 1])).unwrap());
        let lehmer = glz(&[1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]);
        assert!(!is_cyclotomic(&lehmer).unwrap());
        let reducible = glz(&[-1, 0, 1]);
        assert!(matches!(is_cyclotomic(&reducible), Err(Error::Reducible { .. })));
    }

    #[test]
    fn order_bound_table_matches_totients() {
        for d in 1..=16u32 {
            let brute = (1..=2 * 16 * 16u32).filter(|&n| euler_phi(n) <= d).max().unwrap();
            assert_eq!(cyclotomic_order_bound(d as usize).unwrap(), brute, "d = {d}");
        }
    }

    #[test]
    fn factor_products() {
        let a = IntPolynomial::from_i64(&[1, -3, 1]);
        let b = IntPolynomial::from_i64(&[1, -1, 1]);
        let f = factor_irreducible(&a.mul(&b), 10).unwrap();
        assert_eq!(f.factors, vec![(a.clone(), 1), (b.clone(), 1)]);

        let single = factor_irreducible(&a, 10).unwrap();
        assert!(single.is_irreducible());

        let x_minus_1 = IntPolynomial::from_i64(&[-1, 1]);
        let x_plus_1 = IntPolynomial::from_i64(&[1, 1]);
        let rep = x_minus_1.pow(2).mul(&x_plus_1);
        let f = factor_irreducible(&rep, 10).unwrap();
        assert_eq!(f.factors, vec![(x_minus_1, 2), (x_plus_1, 1)]);

        let big = IntPolynomial::monomial(11);
        assert!(matches!(factor_irreducible(&big, 10), Err(Error::DegreeTooLarge { .. })));
    }

    #[test]
    fn factor_non_monic_and_content() {
        let a = IntPolynomial::from_i64(&[1, 2]); // 2x + 1
        let b = IntPolynomial::from_i64(&[-1, 3]); // 3x - 1
        let p = a.mul(&b).scale(&BigInt::from(-4));
        let f = factor_irreducible(&p, 10).unwrap();
        assert_eq!(f.content, BigInt::from(-4));
        assert_eq!(f.product(), p);
        assert_eq!(f.factors.len(), 2);
    }

    #[test]
    fn divisibility_examples() {
        let phi7 = GlzPolynomial::normalized(&cyclotomic_polynomial(7)).unwrap();
        for r in 1..=2 {
            assert!(divisibility_identity(&phi7, 2, r).unwrap().holds());
        }
        let p = glz(&[1, -3, 1]);
        assert!(matches!(divisibility_identity(&p, 2, 1), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn root_group_probe() {
        let plus = glz(&[1, -3, 1]);
        assert!(matches!(
            cyclic_root_group_probe(&plus, 12, 1e-9).unwrap(),
            RootGroupVerdict::CyclicWitness { .. }
        ));
        let phi7 = GlzPolynomial::normalized(&cyclotomic_polynomial(7)).unwrap();
        assert!(matches!(
            cyclic_root_group_probe(&phi7, 12, 1e-9).unwrap(),
            RootGroupVerdict::CyclicWitness { .. }
        ));
        // Roots a and -1/a generate <a, -1>, which has torsion and an element
        // of infinite order, so no single generator exists.
        let minus = glz(&[-1, -3, 1]);
        assert!(matches!(
            cyclic_root_group_probe(&minus, 12, 1e-9).unwrap(),
            RootGroupVerdict::NoRelationFound { .. }
        ));
        let salem = glz(&[1, -1, -1, -1, 1]);
        assert!(matches!(
            cyclic_root_group_probe(&salem, 12, 1e-9).unwrap(),
            RootGroupVerdict::NoRelationFound { .. }
        ));
    }

    #[test]
    fn small_census_and_full_box_agree() {
        let census = cyclotomic_census(4, 3).unwrap();
        assert!(census.discrepancies.is_empty(), "{:?}", census.discrepancies);
        let boxed = census_over(&full_box_candidates(4, 3), 4, 3).unwrap();
        assert!(boxed.discrepancies.is_empty(), "{:?}", boxed.discrepancies);
        assert_eq!(census.found, boxed.found);
    }

    #[test]
    fn display() {
        assert_eq!(IntPolynomial::from_i64(&[1, -3, 1]).to_string(), "x^2 - 3x + 1");
        assert_eq!(IntPolynomial::from_i64(&[-1, 0, 0, -1]).to_string(), "-x^3 - 1");
    }
}
