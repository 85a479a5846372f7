//! Exact real amplitudes.
//!
//! An [`Amplitude`] is a finite sum `Σ qᵣ·√r` with rational `qᵣ` and distinct
//! square-free radicands `r` (with `r = 1` holding the rational part). These
//! form a field closed under `+`, `−`, `×` and inversion, which contains
//! `Q(√2)` (every coefficient of the optical network and of Table-style gate
//! outputs) and also the `1/√n` normalisations of W states.
//!
//! Equality is structural on the canonical form, hence exact.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

/// Exact element of `Q(√2, √3, √5, …)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Amplitude {
    /// `(square-free radicand, coefficient)`, strictly increasing radicand,
    /// no zero coefficients.
    terms: Vec<(u64, Rational)>,
}

/// Splits `n = s²·r` with `r` square-free; returns `(s, r)`.
pub(crate) fn square_free_split(mut n: u64) -> (u64, u64) {
    if n == 0 {
        return (0, 1);
    }
    let (mut outer, mut inner) = (1u64, 1u64);
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        outer *= p.pow(e / 2);
        if e % 2 == 1 {
            inner *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (outer, inner * n)
}

fn smallest_prime_factor(n: u64) -> u64 {
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    n
}

impl Amplitude {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        Self::surd(q, 1)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(crate::rational::ratio(num, den))
    }

    /// `a + b·√2`.
    pub fn from_parts(a: Rational, b: Rational) -> Self {
        Self::from_rational(a) + Self::surd(b, 2)
    }

    /// `coeff·√radicand`; the radicand need not be square-free.
    pub fn surd(coeff: Rational, radicand: u64) -> Self {
        if coeff.is_zero() || radicand == 0 {
            return Self::zero();
        }
        let (outer, inner) = square_free_split(radicand);
        Self {
            terms: vec![(inner, coeff * Rational::from_integer(BigInt::from(outer)))],
        }
    }

    pub fn sqrt2() -> Self {
        Self::surd(Rational::one(), 2)
    }

    /// `√n`.
    pub fn sqrt(n: u64) -> Self {
        Self::surd(Rational::one(), n)
    }

    /// `√(num/den)`, exact for any non-negative rational of machine size.
    pub fn sqrt_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "sqrt_ratio with zero denominator");
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        // √(num/den) = √(num·den)/den, with the product factored piecewise.
        let root_num = Self::sqrt(num);
        let root_den = Self::surd(
            Rational::new(BigInt::one(), BigInt::from(den)),
            den,
        );
        root_num * root_den
    }

    /// Square root of a non-negative rational amplitude; `None` when the
    /// value is irrational, negative, or too large to factor.
    pub fn sqrt_of_rational(&self) -> Option<Self> {
        let q = self.as_rational()?;
        if q.is_negative() {
            return None;
        }
        let num = q.numer().to_u64()?;
        let den = q.denom().to_u64()?;
        Some(Self::sqrt_ratio(num, den))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 1 && self.terms[0].1.is_one()
    }

    /// Coefficient of `√radicand` (radicand must be square-free).
    pub fn coefficient(&self, radicand: u64) -> Rational {
        self.terms
            .binary_search_by_key(&radicand, |(r, _)| *r)
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Rational component `a` of `a + b·√2`.
    pub fn a(&self) -> Rational {
        self.coefficient(1)
    }

    /// `√2` component `b` of `a + b·√2`.
    pub fn b(&self) -> Rational {
        self.coefficient(2)
    }

    /// True when the value lies in `Q(√2)`.
    pub fn in_q_sqrt2(&self) -> bool {
        self.terms.iter().all(|(r, _)| *r <= 2)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(1, q)] => Some(q.clone()),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(r, q)| (*r, q))
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(r, q)| q.to_f64().unwrap_or(f64::NAN) * (*r as f64).sqrt())
            .sum()
    }

    /// `self·q` for rational `q`.
    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(r, c)| (*r, c * q)).collect(),
        }
    }

    /// Flips the sign of every term whose radicand is divisible by `p`.
    fn conjugate_at(&self, p: u64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(r, c)| (*r, if r % p == 0 { -c } else { c.clone() }))
                .collect(),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    ///
    /// Repeatedly multiplies numerator and denominator by the conjugate that
    /// negates `√p` for some prime `p` still present in the denominator. Each
    /// step removes `p` from every radicand of the denominator, so the loop
    /// ends with a rational denominator.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut num = Self::one();
        let mut den = self.clone();
        loop {
            if let Some(q) = den.as_rational() {
                return Some(num.scale(&q.recip()));
            }
            let radicand = den.terms.iter().map(|(r, _)| *r).find(|r| *r > 1)?;
            let conj = den.conjugate_at(smallest_prime_factor(radicand));
            num = &num * &conj;
            den = &den * &conj;
        }
    }

    fn from_map(map: BTreeMap<u64, Rational>) -> Self {
        Self {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    fn merge(&self, rhs: &Self, negate_rhs: bool) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        let sign = |c: &Rational| if negate_rhs { -c } else { c.clone() };
        while i < self.terms.len() || j < rhs.terms.len() {
            match (self.terms.get(i), rhs.terms.get(j)) {
                (Some((ra, ca)), Some((rb, cb))) if ra == rb => {
                    let c = if negate_rhs { ca - cb } else { ca + cb };
                    if !c.is_zero() {
                        out.push((*ra, c));
                    }
                    i += 1;
                    j += 1;
                }
                (Some((ra, ca)), Some((rb, _))) if ra < rb => {
                    out.push((*ra, ca.clone()));
                    i += 1;
                }
                (Some(_), Some((rb, cb))) => {
                    out.push((*rb, sign(cb)));
                    j += 1;
                }
                (Some((ra, ca)), None) => {
                    out.push((*ra, ca.clone()));
                    i += 1;
                }
                (None, Some((rb, cb))) => {
                    out.push((*rb, sign(cb)));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self { terms: out }
    }

    fn product(&self, rhs: &Self) -> Self {
        if let Some(q) = rhs.as_rational() {
            return self.scale(&q);
        }
        if let Some(q) = self.as_rational() {
            return rhs.scale(&q);
        }
        let mut acc: BTreeMap<u64, Rational> = BTreeMap::new();
        for (ra, ca) in &self.terms {
            for (rb, cb) in &rhs.terms {
                // √a·√b = g·√((a/g)(b/g)), square-free because a, b are.
                let g = ra.gcd(rb);
                let radicand = (ra / g)
                    .checked_mul(rb / g)
                    .expect("radicand overflow in amplitude product");
                let c = ca * cb * Rational::from_integer(BigInt::from(g));
                *acc.entry(radicand).or_insert_with(Rational::zero) += c;
            }
        }
        Self::from_map(acc)
    }
}

impl fmt::Display for Amplitude {
    /// `p/q + r/s·√2` style; zero renders as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (r, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            if *r == 1 {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "√{r}")?;
            } else {
                write!(f, "{abs}·√{r}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Amplitude({self})")
    }
}

impl From<Rational> for Amplitude {
    fn from(q: Rational) -> Self {
        Self::from_rational(q)
    }
}

impl From<i64> for Amplitude {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a> $trait<&'a Amplitude> for &'a Amplitude {
            type Output = Amplitude;
            fn $method(self, rhs: &'a Amplitude) -> Amplitude {
                $body(self, rhs)
            }
        }
        impl $trait for Amplitude {
            type Output = Amplitude;
            fn $method(self, rhs: Amplitude) -> Amplitude {
                $body(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a Amplitude> for Amplitude {
            type Output = Amplitude;
            fn $method(self, rhs: &'a Amplitude) -> Amplitude {
                $body(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Amplitude, b: &Amplitude| a.merge(b, false));
forward_binop!(Sub, sub, |a: &Amplitude, b: &Amplitude| a.merge(b, true));
forward_binop!(Mul, mul, |a: &Amplitude, b: &Amplitude| a.product(b));
forward_binop!(Div, div, |a: &Amplitude, b: &Amplitude| a
    .product(&b.inv().expect("division by zero amplitude")));

impl Neg for Amplitude {
    type Output = Amplitude;
    fn neg(self) -> Amplitude {
        Amplitude {
            terms: self.terms.into_iter().map(|(r, c)| (r, -c)).collect(),
        }
    }
}

impl Neg for &Amplitude {
    type Output = Amplitude;
    fn neg(self) -> Amplitude {
        -self.clone()
    }
}

impl AddAssign<&Amplitude> for Amplitude {
    fn add_assign(&mut self, rhs: &Amplitude) {
        *self = self.merge(rhs, false);
    }
}

impl SubAssign<&Amplitude> for Amplitude {
    fn sub_assign(&mut self, rhs: &Amplitude) {
        *self = self.merge(rhs, true);
    }
}

impl MulAssign<&Amplitude> for Amplitude {
    fn mul_assign(&mut self, rhs: &Amplitude) {
        *self = self.product(rhs);
    }
}

impl Sum for Amplitude {
    fn sum<I: Iterator<Item = Amplitude>>(iter: I) -> Self {
        iter.fold(Amplitude::zero(), |acc, x| acc + x)
    }
}

impl Product for Amplitude {
    fn product<I: Iterator<Item = Amplitude>>(iter: I) -> Self {
        iter.fold(Amplitude::one(), |acc, x| acc * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    #[test]
    fn square_free() {
        assert_eq!(square_free_split(12), (2, 3));
        assert_eq!(square_free_split(1), (1, 1));
        assert_eq!(square_free_split(8), (2, 2));
        assert_eq!(square_free_split(3628800), (720, 7)); // 10!
    }

    #[test]
    fn sqrt2_squares_to_two() {
        let r2 = Amplitude::sqrt2();
        assert_eq!(&r2 * &r2, Amplitude::from_integer(2));
        assert_eq!(Amplitude::sqrt(8), Amplitude::surd(ratio(2, 1), 2));
        assert_eq!(Amplitude::sqrt(6) * Amplitude::sqrt(3), Amplitude::surd(ratio(3, 1), 2));
    }

    #[test]
    fn inverse_of_one_over_root_two() {
        // 1/√2 = (1/2)·√2
        let half_root = Amplitude::sqrt2().inv().unwrap();
        assert_eq!(half_root, Amplitude::from_parts(ratio(0, 1), ratio(1, 2)));
        assert_eq!(half_root.a(), ratio(0, 1));
        assert_eq!(half_root.b(), ratio(1, 2));
    }

    #[test]
    fn inverse_in_multiquadratic_field() {
        let x = Amplitude::one() + Amplitude::sqrt(2) + Amplitude::sqrt(3) + Amplitude::sqrt(5);
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, Amplitude::one());
        assert!(Amplitude::zero().inv().is_none());
    }

    #[test]
    fn sqrt_of_ratios() {
        assert_eq!(Amplitude::sqrt_ratio(1, 2), Amplitude::surd(ratio(1, 2), 2));
        assert_eq!(Amplitude::sqrt_ratio(4, 9), Amplitude::ratio(2, 3));
        let r = Amplitude::sqrt_ratio(2, 3);
        assert_eq!(&r * &r, Amplitude::ratio(2, 3));
        assert_eq!(Amplitude::ratio(1, 8).sqrt_of_rational().unwrap(), Amplitude::surd(ratio(1, 4), 2));
        assert!(Amplitude::sqrt2().sqrt_of_rational().is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Amplitude::zero().to_string(), "0");
        assert_eq!(Amplitude::from_parts(ratio(1, 2), ratio(-1, 3)).to_string(), "1/2 - 1/3·√2");
        assert_eq!(Amplitude::sqrt2().to_string(), "√2");
        assert_eq!((-Amplitude::sqrt2()).to_string(), "-√2");
        assert_eq!(Amplitude::surd(ratio(1, 4), 2).to_string(), "1/4·√2");
    }

    #[test]
    fn float_projection() {
        let x = Amplitude::from_parts(ratio(3, 7), ratio(-5, 11));
        let expect = 3.0 / 7.0 - 5.0 / 11.0 * std::f64::consts::SQRT_2;
        assert!((x.to_f64() - expect).abs() < 1e-12);
    }

    fn arb_q_sqrt2() -> impl Strategy<Value = Amplitude> {
        (-50i64..50, 1i64..20, -50i64..50, 1i64..20)
            .prop_map(|(a, b, c, d)| Amplitude::from_parts(ratio(a, b), ratio(c, d)))
    }

    fn arb_surd_sum() -> impl Strategy<Value = Amplitude> {
        prop::collection::vec((-20i64..20, 1i64..9, 1u64..31), 1..4).prop_map(|ts| {
            ts.into_iter()
                .map(|(n, d, r)| Amplitude::surd(ratio(n, d), r))
                .sum()
        })
    }

    proptest! {
        #[test]
        fn distributive(x in arb_surd_sum(), y in arb_surd_sum(), z in arb_surd_sum()) {
            prop_assert_eq!((&x + &y) * z.clone(), &x * &z + &y * &z);
        }

        #[test]
        fn conjugate_norm(a in -40i64..40, b in -40i64..40) {
            let x = Amplitude::from_parts(int(a), int(b));
            let xbar = Amplitude::from_parts(int(a), int(-b));
            prop_assert_eq!(x * xbar, Amplitude::from_integer(a * a - 2 * b * b));
        }

        #[test]
        fn inverse_round_trip(x in arb_surd_sum()) {
            prop_assume!(!x.is_zero());
            prop_assert_eq!(&x * &x.inv().unwrap(), Amplitude::one());
        }

        #[test]
        fn field_ops_close_in_q_sqrt2(x in arb_q_sqrt2(), y in arb_q_sqrt2()) {
            prop_assert!((&x * &y).in_q_sqrt2());
            prop_assert!((&x - &y).in_q_sqrt2());
            if !y.is_zero() {
                prop_assert!((&x / &y).in_q_sqrt2());
            }
            let approx = x.to_f64() * y.to_f64();
            prop_assert!(((&x * &y).to_f64() - approx).abs() < 1e-9);
        }

        #[test]
        fn zero_iff_parts_zero(a in -3i64..3, b in -3i64..3) {
            let x = Amplitude::from_parts(int(a), int(b));
            prop_assert_eq!(x.is_zero(), a == 0 && b == 0);
        }
    }

    fn int(n: i64) -> Rational {
        crate::rational::int(n)
    }
}
