//! Scalar abstractions shared by the exact and floating-point kernels.
//!
//! [`Scalar`] covers every field the linear algebra runs over: arbitrary
//! precision rationals for the exact canonical-form work, `f32`/`f64` for the
//! ODE and isometry checks. [`Real`] adds the transcendental functions the
//! numerical modules need.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// A field element usable by [`crate::linalg::Matrix`].
pub trait Scalar:
    Clone + Debug + Display + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// True when arithmetic is exact, so zero tests need no tolerance.
    fn is_exact() -> bool;

    /// Zero test used for pivoting and rank decisions.
    fn negligible(&self) -> bool;

    /// Absolute value as `f64`, used to rank pivot candidates.
    fn magnitude(&self) -> f64;

    fn to_f64(&self) -> f64;

    /// -1, 0 or 1.
    fn sign(&self) -> i32;

    /// For a positive `x`, returns `(r, rest)` with `x = r^2 * rest` and `r > 0`,
    /// with `rest` reduced as far as the field allows (1 for floats, a
    /// square-free integer for rationals).
    fn split_square(&self) -> (Self, Self);
}

/// Floating-point scalars for the numerical modules.
pub trait Real: Scalar + Float + FromPrimitive + Copy {
    /// Converts a literal; all `f64` literals used by this crate are
    /// representable in every implementor.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal out of range")
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn from_int(v: i64) -> Self {
                v as $t
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }
            fn is_exact() -> bool {
                false
            }
            fn negligible(&self) -> bool {
                self.abs() <= $tol
            }
            fn magnitude(&self) -> f64 {
                self.abs() as f64
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn sign(&self) -> i32 {
                if *self > 0.0 {
                    1
                } else if *self < 0.0 {
                    -1
                } else {
                    0
                }
            }
            fn split_square(&self) -> (Self, Self) {
                (self.sqrt(), 1.0)
            }
        }
        impl Real for $t {}
    };
}

float_scalar!(f64, 1e-11);
float_scalar!(f32, 1e-5);

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn is_exact() -> bool {
        true
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn sign(&self) -> i32 {
        match self.numer().sign() {
            Sign::Plus => 1,
            Sign::Minus => -1,
            Sign::NoSign => 0,
        }
    }
    fn split_square(&self) -> (Self, Self) {
        assert!(self.is_positive(), "split_square needs a positive rational");
        // p/q = (p*q) / q^2, so it suffices to split the integer p*q.
        let n = self.numer() * self.denom();
        let (root, rest) = split_square_int(&n);
        (
            BigRational::new(root, self.denom().clone()),
            BigRational::from_integer(rest),
        )
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Splits a positive integer as `n = root^2 * rest`.
///
/// Trial division runs up to 10^6. A leftover cofactor is treated as
/// square-free unless it is itself a perfect square; this is complete for
/// cofactors below 10^18.
pub fn split_square_int(n: &BigInt) -> (BigInt, BigInt) {
    assert!(n.is_positive());
    let mut rest = n.clone();
    let mut root = BigInt::one();
    let mut free = BigInt::one();
    let mut p: u64 = 2;
    while p <= TRIAL_LIMIT {
        let pb = BigInt::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut exp = 0u32;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            exp += 1;
        }
        if exp > 0 {
            root *= pb.pow(exp / 2);
            if exp % 2 == 1 {
                free *= &pb;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        let s = rest.sqrt();
        if &s * &s == rest {
            root *= s;
        } else {
            free *= rest;
        }
    }
    (root, free)
}

/// Parses `"p/q"` or `"p"` into a rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => text.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Shorthand for building exact rationals in code and tests.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::from_ratio(num, den)
}
