//! Double-double arithmetic: an unevaluated sum `hi + lo` of two doubles with
//! `|lo| <= ulp(hi) / 2`, giving about 106 bits of mantissa. Used wherever a
//! closed form needs a transcendental function and the result feeds a ceiling.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{FromPrimitive, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `x * 2^e` without intermediate overflow for exponents outside the normal range.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i64 = 1000;
    while e > STEP {
        x *= 2f64.powi(STEP as i32);
        e -= STEP;
    }
    while e < -STEP {
        x *= 2f64.powi(-STEP as i32);
        e += STEP;
    }
    x * 2f64.powi(e as i32)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn from_u64(x: u64) -> Dd {
        let hi = x as f64;
        // exact: the rounding error of a u64 -> f64 conversion fits in a double
        let lo = (x as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// Nearest double-double to a non-negative big integer (relative error
    /// below 2^-104). Returns infinity past the double range.
    pub fn from_biguint(x: &BigUint) -> Dd {
        let bits = x.bits();
        if bits <= 104 {
            let v = x.to_u128().expect("fits in 128 bits");
            let hi = v as f64;
            let lo = (v as i128 - hi as i128) as f64;
            let (hi, lo) = quick_two_sum(hi, lo);
            return Dd { hi, lo };
        }
        let shift = bits - 104;
        let top = (x >> shift).to_u128().expect("104-bit prefix");
        let hi = top as f64;
        let lo = (top as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd {
            hi: ldexp(hi, shift as i64),
            lo: ldexp(lo, shift as i64),
        }
    }

    /// `num / den` for positive big integers, correct to about 2^-104 relative.
    pub fn from_ratio(num: &BigUint, den: &BigUint) -> Dd {
        assert!(!den.is_zero(), "division by zero");
        if num.is_zero() {
            return Dd::ZERO;
        }
        // scale so the integer quotient carries at least 110 significant bits
        let shift = 110 + den.bits() as i64 - num.bits() as i64;
        let q = if shift >= 0 {
            (num << shift as u64) / den
        } else {
            num / (den << (-shift) as u64)
        };
        let Dd { hi, lo } = Dd::from_biguint(&q);
        let (hi, lo) = (ldexp(hi, -shift), ldexp(lo, -shift));
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_pow2(self, e: i64) -> Dd {
        Dd {
            hi: ldexp(self.hi, e),
            lo: ldexp(self.lo, e),
        }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            Dd { hi, lo }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    pub fn ceil(self) -> Dd {
        let hi = self.hi.ceil();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.ceil());
            Dd { hi, lo }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    /// Exact conversion of an integral, finite, non-negative value.
    pub fn to_biguint(self) -> Option<BigUint> {
        if !self.is_finite() || self.hi < 0.0 || self.hi.fract() != 0.0 || self.lo.fract() != 0.0 {
            return None;
        }
        let sum = BigInt::from_f64(self.hi)? + BigInt::from_f64(self.lo)?;
        match sum.sign() {
            Sign::Minus => None,
            _ => sum.to_biguint(),
        }
    }

    /// `e^x`. Argument reduction `x = k ln 2 + r`, `r` further scaled by 2^-10,
    /// Taylor series for `expm1`, then repeated doubling.
    pub fn exp(self) -> Dd {
        if self.hi > 709.78 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = (self - Dd::LN2 * Dd::from_f64(k)).mul_pow2(-10);
        // expm1(r) for |r| < 3.4e-4: terms beyond r^10/10! are below 2^-110
        let mut term = r;
        let mut sum = r;
        for n in 2..=10 {
            term = term * r / Dd::from_f64(n as f64);
            sum = sum + term;
        }
        for _ in 0..10 {
            // expm1(2r) = expm1(r) * (expm1(r) + 2)
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        (sum + Dd::ONE).mul_pow2(k as i64)
    }

    /// Natural logarithm of a positive value, by Newton refinement of the
    /// double-precision estimate.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "logarithm of a non-positive value");
        if self.hi == f64::INFINITY {
            return self;
        }
        // keep exp(-y) away from the subnormal range
        let e = self.hi.log2().round();
        let m = if e == 0.0 { self } else { self.mul_pow2(-(e as i64)) };
        let mut y = Dd::from_f64(m.hi.ln());
        for _ in 0..2 {
            y = y + m * (-y).exp() - Dd::ONE;
        }
        if e == 0.0 {
            y
        } else {
            y + Dd::LN2 * Dd::from_f64(e)
        }
    }

    /// `self^n` by binary exponentiation.
    pub fn powi(self, mut n: u64) -> Dd {
        let mut base = self;
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}
