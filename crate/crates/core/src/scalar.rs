//! Amplitude backends.
//!
//! Every state and map in the crate is generic over [`Scalar`]. The exact
//! backend is [`Amplitude`]; [`Complex64`] is the floating-point backend for
//! arbitrary complex inputs and plate angles without an exact Jones matrix.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::amplitude::Amplitude;
use crate::rational::Rational;

/// Float backend amplitudes below this modulus are treated as zero.
pub const FLOAT_ZERO: f64 = 1e-12;

pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Whether equality comparisons are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// `√(num/den)`.
    fn sqrt_ratio(num: u64, den: u64) -> Self;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Square root of a non-negative real value, when the backend can
    /// represent it.
    fn sqrt_real(&self) -> Option<Self>;
    /// `(cos θ, sin θ)` for `θ` in degrees; `None` when not representable.
    fn cos_sin_degrees(angle: &Rational) -> Option<(Self, Self)>;
    fn to_complex(&self) -> Complex64;

    fn abs_sq(&self) -> Self {
        self.conj() * self.clone()
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.to_complex() - other.to_complex()).norm() <= tol
    }
}

impl Scalar for Amplitude {
    const EXACT: bool = true;

    fn zero() -> Self {
        Amplitude::zero()
    }

    fn one() -> Self {
        Amplitude::one()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Amplitude::ratio(num, den)
    }

    fn sqrt_ratio(num: u64, den: u64) -> Self {
        Amplitude::sqrt_ratio(num, den)
    }

    fn is_zero(&self) -> bool {
        Amplitude::is_zero(self)
    }

    fn conj(&self) -> Self {
        // real field
        self.clone()
    }

    fn inv(&self) -> Option<Self> {
        Amplitude::inv(self)
    }

    fn sqrt_real(&self) -> Option<Self> {
        self.sqrt_of_rational()
    }

    /// Exact only when `2θ` is a multiple of 45°.
    fn cos_sin_degrees(angle: &Rational) -> Option<(Self, Self)> {
        let eighth = angle / crate::rational::int(45);
        if !eighth.is_integer() {
            return None;
        }
        let k = eighth.to_integer().mod_floor_i64(8)?;
        let h = Amplitude::surd(crate::rational::ratio(1, 2), 2);
        let z = Amplitude::zero;
        let one = Amplitude::one;
        let (c, s) = match k {
            0 => (one(), z()),
            1 => (h.clone(), h),
            2 => (z(), one()),
            3 => (-h.clone(), h),
            4 => (-one(), z()),
            5 => (-h.clone(), -h),
            6 => (z(), -one()),
            7 => (h.clone(), -h),
            _ => unreachable!(),
        };
        Some((c, s))
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }
}

trait ModFloorI64 {
    fn mod_floor_i64(&self, m: i64) -> Option<i64>;
}

impl ModFloorI64 for num_bigint::BigInt {
    fn mod_floor_i64(&self, m: i64) -> Option<i64> {
        use num_integer::Integer;
        self.mod_floor(&num_bigint::BigInt::from(m)).to_i64()
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn sqrt_ratio(num: u64, den: u64) -> Self {
        Complex64::new((num as f64 / den as f64).sqrt(), 0.0)
    }

    fn is_zero(&self) -> bool {
        self.norm() < FLOAT_ZERO
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn inv(&self) -> Option<Self> {
        (!Scalar::is_zero(self)).then(|| Complex64::new(1.0, 0.0) / self)
    }

    fn sqrt_real(&self) -> Option<Self> {
        (self.im.abs() < FLOAT_ZERO && self.re > -FLOAT_ZERO)
            .then(|| Complex64::new(self.re.max(0.0).sqrt(), 0.0))
    }

    fn cos_sin_degrees(angle: &Rational) -> Option<(Self, Self)> {
        let radians = angle.to_f64()?.to_radians();
        Some((
            Complex64::new(radians.cos(), 0.0),
            Complex64::new(radians.sin(), 0.0),
        ))
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn exact_angles_on_the_45_degree_lattice() {
        let (c, s) = Amplitude::cos_sin_degrees(&int(90)).unwrap();
        assert_eq!((c, s), (Amplitude::zero(), Amplitude::one()));
        let (c, s) = Amplitude::cos_sin_degrees(&int(135)).unwrap();
        assert_eq!(c, -Amplitude::surd(ratio(1, 2), 2));
        assert_eq!(s, Amplitude::surd(ratio(1, 2), 2));
        let (c, _) = Amplitude::cos_sin_degrees(&int(-45)).unwrap();
        assert_eq!(c, Amplitude::surd(ratio(1, 2), 2));
        assert!(Amplitude::cos_sin_degrees(&int(30)).is_none());
        assert!(Amplitude::cos_sin_degrees(&ratio(45, 2)).is_none());
    }

    #[test]
    fn float_backend_matches_exact_where_both_exist() {
        for deg in [0, 45, 90, 135, 180, 225, 270, 315, 360, -90] {
            let (ce, se) = Amplitude::cos_sin_degrees(&int(deg)).unwrap();
            let (cf, sf) = Complex64::cos_sin_degrees(&int(deg)).unwrap();
            assert!((ce.to_complex() - cf).norm() < 1e-12);
            assert!((se.to_complex() - sf).norm() < 1e-12);
        }
    }

    #[test]
    fn float_zero_threshold() {
        assert!(Scalar::is_zero(&Complex64::new(1e-14, 0.0)));
        assert!(!Scalar::is_zero(&Complex64::new(1e-6, 0.0)));
        assert!(Scalar::inv(&Complex64::new(0.0, 0.0)).is_none());
    }
}
