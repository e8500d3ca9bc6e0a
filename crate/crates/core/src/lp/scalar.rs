use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-7;
pub const OPT_TOL: f64 = 1e-9;

/// Arithmetic the tableau needs. Floating point carries tolerances, the
/// rational instantiation compares exactly.
pub trait Scalar: Clone + Debug + PartialOrd {
    const EXACT: bool;

    fn zero() -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;

    /// Drops float noise below the pivot scale; identity for exact values.
    fn clean(self) -> Self;

    fn pivot_tol() -> Self;
    fn feas_tol() -> Self;
    fn opt_tol() -> Self;
    /// Steps at or below this size count as degenerate.
    fn step_tol() -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
    #[inline]
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    #[inline]
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    #[inline]
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    #[inline]
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    #[inline]
    fn neg(&self) -> Self {
        -self
    }
    #[inline]
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline]
    fn clean(self) -> Self {
        if self.abs() < 1e-13 {
            0.0
        } else {
            self
        }
    }
    fn pivot_tol() -> Self {
        PIVOT_TOL
    }
    fn feas_tol() -> Self {
        FEAS_TOL
    }
    fn opt_tol() -> Self {
        OPT_TOL
    }
    fn step_tol() -> Self {
        1e-12
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coefficient")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn clean(self) -> Self {
        self
    }
    fn pivot_tol() -> Self {
        Zero::zero()
    }
    fn feas_tol() -> Self {
        Zero::zero()
    }
    fn opt_tol() -> Self {
        Zero::zero()
    }
    fn step_tol() -> Self {
        Zero::zero()
    }
}

/// Exact rational value of a float.
pub fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
}
