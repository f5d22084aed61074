//! Exact rationals with a separated power-of-two scale.
//!
//! Every real quantity of the embedding (interval endpoints, scales, hole
//! lengths, metric values) is an [`ExactScalar`]: `±num / (den · 2^pow2)` with
//! `den` odd and coprime to `num`. The construction produces numbers like
//! `2^-3453192 / 6`; keeping the binary exponent out of the big integers means
//! such values cost a few machine words until they are added to something of a
//! very different magnitude.
//!
//! The odd denominators that occur in practice are small (products of the odd
//! parts of vertex counts and of 3), so reduction uses a plain Euclidean gcd
//! whose first step reduces the large operand modulo the small one.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational `±num / (den · 2^pow2)` in canonical form.
///
/// Canonical form: `den` odd, `gcd(num, den) = 1`, and `num` odd whenever
/// `pow2 > 0`. Zero is `+0 / 1`. Equal values have identical fields.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    negative: bool,
    num: BigUint,
    den: BigUint,
    pow2: u64,
}

fn trailing_zeros(x: &BigUint) -> u64 {
    x.trailing_zeros().unwrap_or(0)
}

/// Euclid with remainders; the first step collapses a huge operand onto a
/// small one in linear time, which the binary algorithm cannot do.
fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    if a.is_one() || b.is_one() {
        return BigUint::one();
    }
    let (mut x, mut y) = if a >= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    while !y.is_zero() {
        if let Some(small) = y.to_u64() {
            let r = (&x % small).to_u64().unwrap_or(0);
            return BigUint::from(num_integer::Integer::gcd(&small, &r));
        }
        let r = &x % &y;
        x = y;
        y = r;
    }
    x
}

impl ExactScalar {
    fn normalized(negative: bool, mut num: BigUint, mut den: BigUint, mut pow2: u64) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let tz = trailing_zeros(&den);
        if tz > 0 {
            den >>= tz;
            pow2 += tz;
        }
        if !den.is_one() {
            let g = gcd(&num, &den);
            if !g.is_one() {
                num /= &g;
                den /= &g;
            }
        }
        let t = trailing_zeros(&num).min(pow2);
        if t > 0 {
            num >>= t;
            pow2 -= t;
        }
        Self { negative, num, den, pow2 }
    }

    pub fn zero() -> Self {
        Self {
            negative: false,
            num: BigUint::zero(),
            den: BigUint::one(),
            pow2: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(v: i64) -> Self {
        Self::normalized(v < 0, BigUint::from(v.unsigned_abs()), BigUint::one(), 0)
    }

    /// `p / q` for machine integers, `q > 0`.
    pub fn ratio(p: i64, q: u64) -> Self {
        assert!(q != 0, "zero denominator");
        Self::normalized(p < 0, BigUint::from(p.unsigned_abs()), BigUint::from(q), 0)
    }

    /// `2^-e`.
    pub fn pow2_neg(e: u64) -> Self {
        Self {
            negative: false,
            num: BigUint::one(),
            den: BigUint::one(),
            pow2: e,
        }
    }

    /// Builds a value from raw parts, normalizing.
    pub fn from_parts(negative: bool, num: BigUint, den: BigUint, pow2: u64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Domain("exact scalar with zero denominator".into()));
        }
        Ok(Self::normalized(negative, num, den, pow2))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_positive(&self) -> bool {
        !self.negative && !self.num.is_zero()
    }

    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    pub fn odd_denom(&self) -> &BigUint {
        &self.den
    }

    pub fn pow2(&self) -> u64 {
        self.pow2
    }

    /// Bits in the numerator plus bits in the odd denominator; a proxy for
    /// the cost of arithmetic with this value.
    pub fn encoded_bits(&self) -> u64 {
        self.num.bits() + self.den.bits()
    }

    pub fn abs(&self) -> Self {
        let mut out = self.clone();
        out.negative = false;
        out
    }

    /// Multiplies by `2^k`.
    pub fn mul_pow2(&self, k: u64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        if k <= self.pow2 {
            Self {
                pow2: self.pow2 - k,
                ..self.clone()
            }
        } else {
            Self {
                negative: self.negative,
                num: &self.num << (k - self.pow2),
                den: self.den.clone(),
                pow2: 0,
            }
        }
    }

    /// Divides by `2^k`.
    pub fn div_pow2(&self, k: u64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        if self.pow2 > 0 {
            // numerator already odd
            return Self {
                pow2: self.pow2 + k,
                ..self.clone()
            };
        }
        let t = trailing_zeros(&self.num).min(k);
        Self {
            negative: self.negative,
            num: &self.num >> t,
            den: self.den.clone(),
            pow2: k - t,
        }
    }

    pub fn half(&self) -> Self {
        self.div_pow2(1)
    }

    pub fn mul_int(&self, k: u64) -> Self {
        Self::normalized(self.negative, &self.num * k, self.den.clone(), self.pow2)
    }

    pub fn div_int(&self, k: u64) -> Self {
        assert!(k != 0, "division by zero");
        Self::normalized(self.negative, self.num.clone(), &self.den * k, self.pow2)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        // (n1 / (d1 2^p1)) / (n2 / (d2 2^p2)) = n1 d2 2^p2 / (d1 n2 2^p1)
        let mut num = &self.num * &other.den;
        let den = &self.den * &other.num;
        let pow2 = if self.pow2 >= other.pow2 {
            self.pow2 - other.pow2
        } else {
            num <<= other.pow2 - self.pow2;
            0
        };
        Ok(Self::normalized(self.negative != other.negative, num, den, pow2))
    }

    /// Largest dyadic value `<= self` with at most `bits` significant bits.
    pub fn round_down(&self, bits: u64) -> Self {
        self.round_dyadic(bits, self.negative)
    }

    /// Smallest dyadic value `>= self` with at most `bits` significant bits.
    pub fn round_up(&self, bits: u64) -> Self {
        self.round_dyadic(bits, !self.negative)
    }

    fn round_dyadic(&self, bits: u64, magnitude_up: bool) -> Self {
        assert!(bits > 0, "need at least one significant bit");
        if self.is_zero() || (self.den.is_one() && self.num.bits() <= bits) {
            return self.clone();
        }
        // q ~ |self| 2^(pow2 + e) with about `bits` bits
        let e = bits as i64 + self.den.bits() as i64 - self.num.bits() as i64;
        // floor(n / (2^k d)) = floor(floor(n / 2^k) / d)
        let (n, dropped) = if e >= 0 {
            (&self.num << e as u64, false)
        } else {
            let k = e.unsigned_abs();
            (&self.num >> k, trailing_zeros(&self.num) < k)
        };
        let (mut q, r) = num_integer::Integer::div_rem(&n, &self.den);
        if magnitude_up && (dropped || !r.is_zero()) {
            q += 1u32;
        }
        let p = self.pow2 as i64 + e;
        if p >= 0 {
            Self::normalized(self.negative, q, BigUint::one(), p as u64)
        } else {
            Self::normalized(self.negative, q << p.unsigned_abs(), BigUint::one(), 0)
        }
    }

    fn cmp_magnitude(&self, other: &Self) -> Ordering {
        // |a| ? |b|  <=>  n1 d2 2^p2 ? n2 d1 2^p1
        let lhs = &self.num * &other.den;
        let rhs = &other.num * &self.den;
        let (lhs, rhs, shift_lhs) = if self.pow2 >= other.pow2 {
            (lhs, rhs, self.pow2 - other.pow2)
        } else {
            (rhs, lhs, other.pow2 - self.pow2)
        };
        // compare lhs vs rhs * 2^shift, flipped when swapped
        let flip = self.pow2 < other.pow2;
        let ord = {
            let lb = lhs.bits();
            let rb = rhs.bits().saturating_add(shift_lhs);
            if rhs.is_zero() {
                lhs.cmp(&rhs)
            } else if lb > rb {
                Ordering::Greater
            } else if lb < rb {
                Ordering::Less
            } else {
                lhs.cmp(&(&rhs << shift_lhs))
            }
        };
        if flip {
            ord.reverse()
        } else {
            ord
        }
    }

    fn add_signed(&self, other: &Self, negate_other: bool) -> Self {
        let other_neg = other.negative != negate_other;
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            let mut o = other.clone();
            o.negative = other_neg;
            return o;
        }
        let p = self.pow2.max(other.pow2);
        let (mut n1, mut n2, den) = if self.den == other.den {
            (self.num.clone(), other.num.clone(), self.den.clone())
        } else {
            (
                &self.num * &other.den,
                &other.num * &self.den,
                &self.den * &other.den,
            )
        };
        if p > self.pow2 {
            n1 <<= p - self.pow2;
        }
        if p > other.pow2 {
            n2 <<= p - other.pow2;
        }
        if self.negative == other_neg {
            Self::normalized(self.negative, n1 + n2, den, p)
        } else {
            match n1.cmp(&n2) {
                Ordering::Equal => Self::zero(),
                Ordering::Greater => Self::normalized(self.negative, n1 - n2, den, p),
                Ordering::Less => Self::normalized(other_neg, n2 - n1, den, p),
            }
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Approximate base-2 logarithm of `|self|`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        log2_big(&self.num) - log2_big(&self.den) - self.pow2 as f64
    }

    /// Approximate value; underflows to zero for tiny magnitudes.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let v = self.log2_abs().exp2();
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn to_record(&self) -> ScalarRecord {
        ScalarRecord {
            sign: if self.negative { -1 } else { 1 },
            num: self.num.to_str_radix(10),
            den: self.den.to_str_radix(10),
            pow2: self.pow2,
        }
    }

    /// Parses a record, rejecting non-canonical encodings.
    pub fn from_record(rec: &ScalarRecord) -> Result<Self> {
        let parse = |s: &str| {
            BigUint::parse_bytes(s.as_bytes(), 10)
                .ok_or_else(|| Error::Format(format!("bad decimal integer {s:?}")))
        };
        if rec.sign != 1 && rec.sign != -1 {
            return Err(Error::Format(format!("bad sign {}", rec.sign)));
        }
        let value = Self::from_parts(rec.sign < 0, parse(&rec.num)?, parse(&rec.den)?, rec.pow2)?;
        if value.to_record() != *rec {
            return Err(Error::Format(format!(
                "non-canonical exact scalar {}/{}*2^-{}",
                rec.num, rec.den, rec.pow2
            )));
        }
        Ok(value)
    }
}

fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map(|v| (v as f64).log2()).unwrap_or(0.0);
    }
    let top = (x >> (bits - 64)).to_u64().unwrap_or(u64::MAX);
    (top as f64).log2() + (bits - 64) as f64
}

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = if self.is_zero() { 0 } else if self.negative { -1 } else { 1 };
        let sb = if other.is_zero() { 0 } else if other.negative { -1 } else { 1 };
        if sa != sb {
            return sa.cmp(&sb);
        }
        match sa {
            0 => Ordering::Equal,
            1 => self.cmp_magnitude(other),
            _ => other.cmp_magnitude(self),
        }
    }
}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        self.add_signed(rhs, false)
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        self.add_signed(rhs, true)
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        if self.is_zero() || rhs.is_zero() {
            return ExactScalar::zero();
        }
        ExactScalar::normalized(
            self.negative != rhs.negative,
            &self.num * &rhs.num,
            &self.den * &rhs.den,
            self.pow2 + rhs.pow2,
        )
    }
}

impl<'a> Div<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_div(rhs).expect("division by zero")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(mut self) -> ExactScalar {
        if !self.is_zero() {
            self.negative = !self.negative;
        }
        self
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -(self.clone())
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { "-" } else { "" };
        let show = |x: &BigUint| {
            if x.bits() <= 256 {
                x.to_str_radix(10)
            } else {
                format!("<{} bits>", x.bits())
            }
        };
        write!(f, "{sign}{}", show(&self.num))?;
        if !self.den.is_one() {
            write!(f, "/{}", show(&self.den))?;
        }
        if self.pow2 > 0 {
            write!(f, "*2^-{}", self.pow2)?;
        }
        Ok(())
    }
}

/// Wire form of an [`ExactScalar`]: decimal strings plus the binary exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarRecord {
    pub sign: i8,
    pub num: String,
    pub den: String,
    pub pow2: u64,
}

impl Serialize for ExactScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = ScalarRecord::deserialize(d)?;
        ExactScalar::from_record(&rec).map_err(serde::de::Error::custom)
    }
}

/// Closed interval `[lo, hi]` with exact endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactInterval {
    pub lo: ExactScalar,
    pub hi: ExactScalar,
}

impl ExactInterval {
    pub fn new(lo: ExactScalar, hi: ExactScalar) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn diam(&self) -> ExactScalar {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> ExactScalar {
        (&self.lo + &self.hi).half()
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other` lies in the open interior of `self`.
    pub fn contains_in_interior(&self, other: &Self) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    pub fn contains_point(&self, x: &ExactScalar) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Distance between the two sets; zero when they meet.
    pub fn gap(&self, other: &Self) -> ExactScalar {
        if self.hi < other.lo {
            &other.lo - &self.hi
        } else if other.hi < self.lo {
            &self.lo - &other.hi
        } else {
            ExactScalar::zero()
        }
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// True when the interiors intersect.
    pub fn interiors_overlap(&self, other: &Self) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}
