//! A small binary floating-point type with a fixed 320-bit mantissa.
//!
//! Values are `m · 2^e` with `m` an arbitrary integer normalised to at most
//! [`PREC`] bits. Only what the reference computations need is provided:
//! the field operations, `sqrt`, `ln`, `exp` and `pow`. Every operation is
//! accurate to a few units in the last of 320 bits, far below `f64` rounding.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};

/// Mantissa width in bits.
pub const PREC: u64 = 320;

#[derive(Debug, Clone)]
pub struct BigFloat {
    m: BigInt,
    e: i64,
}

impl BigFloat {
    fn normalised(m: BigInt, e: i64) -> Self {
        let bits = m.bits();
        if bits <= PREC {
            return BigFloat { m, e };
        }
        let shift = bits - PREC;
        // Round to nearest by adding half an ulp of the kept part.
        let half = BigInt::from(1) << (shift - 1);
        let m = if m.sign() == Sign::Minus {
            -((-m + half) >> shift)
        } else {
            (m + half) >> shift
        };
        BigFloat {
            m,
            e: e + shift as i64,
        }
    }

    pub fn zero() -> Self {
        BigFloat {
            m: BigInt::from(0),
            e: 0,
        }
    }

    pub fn from_int(v: i64) -> Self {
        BigFloat::normalised(BigInt::from(v), 0)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        assert!(
            x.is_finite(),
            "BigFloat::from_f64 needs a finite value, got {x}"
        );
        if x == 0.0 {
            return BigFloat::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        BigFloat::normalised(BigInt::from(mant) * sign, e)
    }

    /// Nearest `f64` (ties resolved by the mantissa truncation below, which is
    /// well inside the tolerances this crate is used with).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.m.bits();
        let shift = bits.saturating_sub(62) as i64;
        let top = if shift > 0 {
            &self.m >> shift as u64
        } else {
            self.m.clone()
        };
        let (sign, digits) = top.to_u64_digits();
        let mag = digits.first().copied().unwrap_or(0) as f64;
        let v = mag * pow2(self.e + shift);
        if sign == Sign::Minus {
            -v
        } else {
            v
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.sign() == Sign::NoSign
    }

    pub fn is_negative(&self) -> bool {
        self.m.sign() == Sign::Minus
    }

    /// `⌊log₂|x|⌋` for nonzero `x`.
    fn ilog2(&self) -> i64 {
        self.m.bits() as i64 - 1 + self.e
    }

    fn mul_pow2(&self, k: i64) -> Self {
        BigFloat {
            m: self.m.clone(),
            e: self.e + k,
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of a negative BigFloat");
        if self.is_zero() {
            return BigFloat::zero();
        }
        // Scale the mantissa up so the integer root keeps PREC + 2 bits.
        let mut shift = 2 * PREC as i64 + 4 - self.m.bits() as i64;
        if (self.e - shift) % 2 != 0 {
            shift += 1;
        }
        let scaled = &self.m << shift as u64;
        BigFloat::normalised(scaled.sqrt(), (self.e - shift) / 2)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> Self {
        assert!(
            !self.is_negative() && !self.is_zero(),
            "ln of a nonpositive BigFloat"
        );
        // x = y · 2^k with y ∈ [1, 2); ln x = k ln 2 + 2 atanh((y − 1)/(y + 1)).
        let k = self.ilog2();
        let y = self.mul_pow2(-k);
        let one = BigFloat::from_int(1);
        let z = &(&y - &one) / &(&y + &one);
        &(&ln2() * &BigFloat::from_int(k)) + &atanh_series(&z).mul_pow2(1)
    }

    pub fn exp(&self) -> Self {
        if self.is_zero() {
            return BigFloat::from_int(1);
        }
        // x = n ln 2 + t with |t| ≤ ln 2; then exp(t) = exp(t/2^j)^(2^j).
        let l2 = ln2();
        let n = (self / &l2).to_f64().round();
        assert!(n.abs() < 1e15, "BigFloat::exp argument out of range");
        let t = self - &(&l2 * &BigFloat::from_f64(n));
        const HALVINGS: i64 = 24;
        let u = t.mul_pow2(-HALVINGS);
        let mut sum = BigFloat::from_int(1);
        let mut term = BigFloat::from_int(1);
        for i in 1..200 {
            term = &(&term * &u) / &BigFloat::from_int(i);
            if term.is_zero() || term.ilog2() < sum.ilog2() - PREC as i64 - 8 {
                break;
            }
            sum = &sum + &term;
        }
        for _ in 0..HALVINGS {
            sum = &sum * &sum;
        }
        sum.mul_pow2(n as i64)
    }

    /// `x^y` for positive `x`.
    pub fn pow(&self, y: &BigFloat) -> Self {
        (y * &self.ln()).exp()
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
}

fn pow2(k: i64) -> f64 {
    // Split to stay within the f64 exponent range at each step.
    let mut v = 1.0f64;
    let mut k = k;
    while k > 1000 {
        v *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
    }
    v * 2f64.powi(k as i32)
}

/// `atanh z = z + z³/3 + z⁵/5 + …` for `|z| ≤ 1/3`.
fn atanh_series(z: &BigFloat) -> BigFloat {
    if z.is_zero() {
        return BigFloat::zero();
    }
    let z2 = z * z;
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut k = 3;
    loop {
        power = &power * &z2;
        let term = &power / &BigFloat::from_int(k);
        if term.is_zero() || term.ilog2() < sum.ilog2() - PREC as i64 - 8 {
            break;
        }
        sum = &sum + &term;
        k += 2;
    }
    sum
}

/// `ln 2 = 2 atanh(1/3)`.
pub fn ln2() -> BigFloat {
    let third = &BigFloat::from_int(1) / &BigFloat::from_int(3);
    atanh_series(&third).mul_pow2(1)
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BigFloat {}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self - other;
        match d.m.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat {
            m: -self.m,
            e: self.e,
        }
    }
}

impl<'a> Add<&'a BigFloat> for &'a BigFloat {
    type Output = BigFloat;
    fn add(self, rhs: &BigFloat) -> BigFloat {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        // If one operand is below the other's rounding unit by a wide margin,
        // it cannot affect the rounded sum.
        let gap = self.ilog2() - rhs.ilog2();
        if gap > PREC as i64 + 4 {
            return self.clone();
        }
        if -gap > PREC as i64 + 4 {
            return rhs.clone();
        }
        let e = self.e.min(rhs.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &rhs.m << (rhs.e - e) as u64;
        BigFloat::normalised(a + b, e)
    }
}

impl<'a> Sub<&'a BigFloat> for &'a BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: &BigFloat) -> BigFloat {
        self + &(-rhs.clone())
    }
}

impl<'a> Mul<&'a BigFloat> for &'a BigFloat {
    type Output = BigFloat;
    fn mul(self, rhs: &BigFloat) -> BigFloat {
        BigFloat::normalised(&self.m * &rhs.m, self.e + rhs.e)
    }
}

impl<'a> Div<&'a BigFloat> for &'a BigFloat {
    type Output = BigFloat;
    fn div(self, rhs: &BigFloat) -> BigFloat {
        assert!(!rhs.is_zero(), "BigFloat division by zero");
        let shift = PREC + 8 + rhs.m.bits() - self.m.bits().min(PREC + 8 + rhs.m.bits());
        let num = &self.m << shift;
        BigFloat::normalised(num / &rhs.m, self.e - rhs.e - shift as i64)
    }
}
