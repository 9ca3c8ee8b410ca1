//! Exact rational scalars.
//!
//! [`Rat`] keeps small values inline as a reduced `i64` fraction and promotes
//! to an arbitrary-precision [`BigRational`] only when a result no longer
//! fits. The representation is canonical: a value that fits in `i64` is
//! always stored inline, so derived equality and hashing are value-based.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
enum Repr {
    Small { num: i64, den: i64 },
    Big(Box<BigRational>),
}

/// Arbitrary-precision rational number, always reduced with a positive denominator.
#[derive(Clone)]
pub struct Rat(Repr);

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Rat {
    pub const ZERO: Rat = Rat(Repr::Small { num: 0, den: 1 });
    pub const ONE: Rat = Rat(Repr::Small { num: 1, den: 1 });

    pub fn zero() -> Rat {
        Rat::ZERO
    }

    pub fn one() -> Rat {
        Rat::ONE
    }

    pub fn from_int(v: i64) -> Rat {
        Rat(Repr::Small { num: v, den: 1 })
    }

    /// `num / den`. Panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Rat {
        assert!(den != 0, "zero denominator");
        Rat::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Rat {
        debug_assert!(den != 0);
        let g = gcd_i128(num, den);
        let (mut n, mut d) = if g > 1 { (num / g, den / g) } else { (num, den) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(num), Ok(den)) => Rat(Repr::Small { num, den }),
            _ => Rat(Repr::Big(Box::new(BigRational::new_raw(
                BigInt::from(n),
                BigInt::from(d),
            )))),
        }
    }

    /// Wraps a big rational, demoting to the inline form when it fits.
    pub fn from_big(r: BigRational) -> Rat {
        // BigRational::new reduces, but values built via new_raw may not be.
        let r = if r.denom().is_negative() || !r.numer().gcd(r.denom()).is_one() {
            BigRational::new(r.numer().clone(), r.denom().clone())
        } else {
            r
        };
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(num), Some(den)) => Rat(Repr::Small { num, den }),
            _ => Rat(Repr::Big(Box::new(r))),
        }
    }

    pub fn from_bigint(v: BigInt) -> Rat {
        Rat::from_big(BigRational::from_integer(v))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => {
                BigRational::new_raw(BigInt::from(*num), BigInt::from(*den))
            }
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => BigInt::from(*num),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { den, .. } => BigInt::from(*den),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small { num: 1, den: 1 })
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small { num, .. } => num.signum() as i32,
            Repr::Big(b) => {
                if b.is_negative() {
                    -1
                } else if b.is_zero() {
                    0
                } else {
                    1
                }
            }
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small { num, den } => Rat::from_i128(*den as i128, *num as i128),
            Repr::Big(b) => Rat::from_big(b.recip()),
        }
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, den } => BigInt::from(num.div_euclid(*den)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, den } => {
                let q = num.div_euclid(*den);
                BigInt::from(if num.rem_euclid(*den) == 0 { q } else { q + 1 })
            }
            Repr::Big(b) => b.ceil().to_integer(),
        }
    }

    /// The value as an `i64` if it is an integer that fits.
    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small { num, den: 1 } => Some(*num),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// `self -= factor * other`, the hot loop of every elimination step.
    #[inline]
    pub fn sub_mul_assign(&mut self, factor: &Rat, other: &Rat) {
        if factor.is_zero() || other.is_zero() {
            return;
        }
        let prod = factor * other;
        *self -= &prod;
    }
}

fn add_small(a: i64, b: i64, c: i64, d: i64) -> Rat {
    if b == 1 && d == 1 {
        if let Some(s) = a.checked_add(c) {
            return Rat(Repr::Small { num: s, den: 1 });
        }
    }
    if b == d {
        return Rat::from_i128(a as i128 + c as i128, b as i128);
    }
    let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
    Rat::from_i128(a * d + c * b, b * d)
}

fn mul_small(a: i64, b: i64, c: i64, d: i64) -> Rat {
    if b == 1 && d == 1 {
        if let Some(p) = a.checked_mul(c) {
            return Rat(Repr::Small { num: p, den: 1 });
        }
    }
    Rat::from_i128(a as i128 * c as i128, b as i128 * d as i128)
}

impl<'a> Add<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        match (&self.0, &rhs.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                add_small(*a, *b, *c, *d)
            }
            _ => Rat::from_big(self.to_big() + rhs.to_big()),
        }
    }
}

impl<'a> Sub<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        match (&self.0, &rhs.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) if *c != i64::MIN => {
                add_small(*a, *b, -*c, *d)
            }
            _ => Rat::from_big(self.to_big() - rhs.to_big()),
        }
    }
}

impl<'a> Mul<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        match (&self.0, &rhs.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                mul_small(*a, *b, *c, *d)
            }
            _ => Rat::from_big(self.to_big() * rhs.to_big()),
        }
    }
}

impl<'a> Div<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        match (&self.0, &rhs.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                Rat::from_i128(*a as i128 * *d as i128, *b as i128 * *c as i128)
            }
            _ => Rat::from_big(self.to_big() / rhs.to_big()),
        }
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match &self.0 {
            Repr::Small { num, den } if *num != i64::MIN => Rat(Repr::Small { num: -num, den: *den }),
            _ => Rat::from_big(-self.to_big()),
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        *self = &*self - rhs;
    }
}

impl SubAssign<Rat> for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        *self = &*self - &rhs;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        *self = &*self * rhs;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Rat) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small { num, den } => {
                0u8.hash(state);
                num.hash(state);
                den.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rat {
    fn default() -> Rat {
        Rat::zero()
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Rat {
        Rat::from_int(v)
    }
}

impl From<i32> for Rat {
    fn from(v: i32) -> Rat {
        Rat::from_int(v as i64)
    }
}

impl From<usize> for Rat {
    fn from(v: usize) -> Rat {
        match i64::try_from(v) {
            Ok(v) => Rat::from_int(v),
            Err(_) => Rat::from_bigint(BigInt::from(v)),
        }
    }
}

impl From<BigInt> for Rat {
    fn from(v: BigInt) -> Rat {
        Rat::from_bigint(v)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRatError(String);

impl FromStr for Rat {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Rat, ParseRatError> {
        let err = || ParseRatError(s.to_string());
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rat::from_big(BigRational::new(n, d)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.to_i64() {
            Some(v) => serializer.serialize_i64(v),
            None => serializer.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rat, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Lit {
            Int(i64),
            Text(String),
        }
        match Lit::deserialize(deserializer)? {
            Lit::Int(v) => Ok(Rat::from_int(v)),
            Lit::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduces_and_normalizes_sign() {
        assert_eq!(Rat::new(2, -4), Rat::new(-1, 2));
        assert_eq!(Rat::new(0, -7), Rat::zero());
        assert_eq!(Rat::new(6, 3).to_i64(), Some(2));
    }

    #[test]
    fn promotes_on_overflow_and_demotes_back() {
        let big = Rat::from_int(i64::MAX) + Rat::one();
        assert_eq!(big.to_string(), "9223372036854775808");
        let back = &big - &Rat::one();
        assert_eq!(back.to_i64(), Some(i64::MAX));
        let sq = Rat::from_int(i64::MAX) * Rat::from_int(i64::MAX);
        assert_eq!(&sq / &Rat::from_int(i64::MAX), Rat::from_int(i64::MAX));
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(Rat::new(7, 2).floor(), BigInt::from(3));
        assert_eq!(Rat::new(7, 2).ceil(), BigInt::from(4));
        assert_eq!(Rat::new(-7, 2).floor(), BigInt::from(-4));
        assert_eq!(Rat::new(-7, 2).ceil(), BigInt::from(-3));
        assert_eq!(Rat::from_int(4).ceil(), BigInt::from(4));
    }

    #[test]
    fn parse_and_display() {
        let r: Rat = "-3/6".parse().unwrap();
        assert_eq!(r.to_string(), "-1/2");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
    }

    #[test]
    fn serde_integers_as_numbers() {
        assert_eq!(serde_json::to_string(&Rat::from_int(3)).unwrap(), "3");
        assert_eq!(serde_json::to_string(&Rat::new(1, 2)).unwrap(), "\"1/2\"");
        let r: Rat = serde_json::from_str("\"-5/10\"").unwrap();
        assert_eq!(r, Rat::new(-1, 2));
    }

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn arb_rat() -> impl Strategy<Value = (i64, i64)> {
        prop_oneof![
            (-20i64..20, 1i64..12),
            (any::<i64>(), 1i64..i64::MAX),
            (any::<i64>(), prop::sample::select(vec![1i64, 2, 3, i64::MAX])),
        ]
    }

    proptest! {
        #[test]
        fn arithmetic_matches_bigrational((a, b) in arb_rat(), (c, d) in arb_rat()) {
            let x = Rat::new(a, b);
            let y = Rat::new(c, d);
            let (bx, by) = (big(a, b), big(c, d));
            prop_assert_eq!((&x + &y).to_big(), &bx + &by);
            prop_assert_eq!((&x - &y).to_big(), &bx - &by);
            prop_assert_eq!((&x * &y).to_big(), &bx * &by);
            if c != 0 {
                prop_assert_eq!((&x / &y).to_big(), &bx / &by);
            }
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
            prop_assert_eq!(Rat::from_big(bx.clone()), x.clone());
        }
    }
}
