//! Coefficient fields: double-precision complex numbers and exact Gaussian rationals.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type C64 = Complex<f64>;

/// Complex numbers with arbitrary-precision rational parts.
pub type ExactC = Complex<BigRational>;

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn conj(&self) -> Self;
    fn to_c64(&self) -> C64;
    /// Exact for `ExactC` since every finite double is a dyadic rational.
    fn from_c64(z: C64) -> Self;
    fn from_i64(k: i64) -> Self;
    /// Squared modulus as a real number.
    fn norm_sqr_f64(&self) -> f64 {
        self.to_c64().norm_sqr()
    }
}

impl Scalar for C64 {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn from_i64(k: i64) -> Self {
        C64::new(k as f64, 0.0)
    }
}

impl Scalar for ExactC {
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn from_c64(z: C64) -> Self {
        Complex::new(rat_from_f64(z.re), rat_from_f64(z.im))
    }
    fn from_i64(k: i64) -> Self {
        Complex::new(
            BigRational::from_integer(BigInt::from(k)),
            BigRational::zero(),
        )
    }
}

pub fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn rat_to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators or denominators: scale through logarithms of the parts.
    let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
    let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        let sign = if x.is_negative() { -1.0 } else { 1.0 };
        let ln = bigint_ln(x.numer()) - bigint_ln(x.denom());
        sign * ln.exp()
    }
}

fn bigint_ln(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.abs().to_f64().unwrap_or(f64::MAX).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + (shift as f64) * std::f64::consts::LN_2
}

pub fn exact_rational(num: i64, den: i64) -> ExactC {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

pub fn exact_gaussian(re: i64, im: i64) -> ExactC {
    Complex::new(
        BigRational::from_integer(BigInt::from(re)),
        BigRational::from_integer(BigInt::from(im)),
    )
}
