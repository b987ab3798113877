//! Fixed-point real arithmetic with 256 fractional bits.
//!
//! A `Real` stores an arbitrary-precision integer mantissa m and represents
//! the value m / 2^256. With worst-case inputs in this crate bounded well
//! below 2^64, every intermediate carries ~77 decimal digits of precision,
//! so series truncation (set to full precision below) dominates any rounding
//! and final results are far inside the 1e-12 tolerances used by callers.
//!
//! ln uses the atanh series after range reduction to [1, 2); exp reduces by
//! multiples of ln 2 and uses the Taylor series; pow(x, r) = exp(r ln x).
//! All operations are deterministic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

const FRAC_BITS: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Real {
    mant: BigInt,
}

impl Real {
    pub fn zero() -> Real {
        Real { mant: BigInt::zero() }
    }

    pub fn one() -> Real {
        Real { mant: BigInt::from(1) << FRAC_BITS }
    }

    pub fn from_u64(n: u64) -> Real {
        Real { mant: BigInt::from(n) << FRAC_BITS }
    }

    pub fn from_i64(n: i64) -> Real {
        Real { mant: BigInt::from(n) << FRAC_BITS }
    }

    pub fn from_ratio(num: i64, den: u64) -> Real {
        assert!(den != 0);
        Real { mant: (BigInt::from(num) << FRAC_BITS) / BigInt::from(den) }
    }

    pub fn from_big_ratio(r: &BigRational) -> Real {
        Real { mant: (r.numer().clone() << FRAC_BITS) / r.denom() }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn abs(&self) -> Real {
        Real { mant: self.mant.abs() }
    }

    pub fn to_f64(&self) -> f64 {
        // Split into integer and fractional parts to stay inside f64 range.
        let int = &self.mant >> FRAC_BITS;
        let frac = &self.mant - (&int << FRAC_BITS);
        let int_f = int.to_f64().unwrap_or(f64::MAX);
        // frac / 2^256 with 64 significant bits.
        let scaled = (frac << 64u32) >> FRAC_BITS;
        int_f + scaled.to_f64().unwrap_or(0.0) / 2f64.powi(64)
    }

    fn mul_raw(&self, other: &Real) -> Real {
        Real { mant: (&self.mant * &other.mant) >> FRAC_BITS }
    }

    fn div_raw(&self, other: &Real) -> Real {
        assert!(!other.mant.is_zero(), "division by zero");
        Real { mant: (&self.mant << FRAC_BITS) / &other.mant }
    }

    /// Natural log; requires self > 0.
    pub fn ln(&self) -> Real {
        assert!(self.is_positive(), "ln of a nonpositive value");
        // Normalize to m in [1, 2): self = m * 2^k.
        let bits = self.mant.bits() as i64; // mant >= 1
        let k = bits - 1 - FRAC_BITS as i64;
        let m = if k >= 0 {
            Real { mant: &self.mant >> k as u64 }
        } else {
            Real { mant: &self.mant << (-k) as u64 }
        };
        // ln m = 2 atanh(t), t = (m-1)/(m+1) in [0, 1/3).
        let one = Real::one();
        let t = (&m - &one).div_raw(&(&m + &one));
        let mut acc = t.clone();
        let t2 = t.mul_raw(&t);
        let mut term = t.clone();
        let mut n = 1u64;
        loop {
            term = term.mul_raw(&t2);
            n += 2;
            if term.mant.is_zero() {
                break;
            }
            acc = &acc + &Real { mant: &term.mant / BigInt::from(n) };
            // t < 1/3 so terms shrink by at least 9x; stop at underflow.
            if term.mant.bits() < 4 {
                break;
            }
        }
        let ln_m = Real { mant: acc.mant << 1u32 };
        &ln_m + &(&ln2() * &Real::from_i64(k))
    }

    /// e^self. Requires |self| < 2^40 (far beyond any use here).
    pub fn exp(&self) -> Real {
        // self = n ln2 + r with |r| <= ln2/2; e^self = 2^n e^r.
        let l2 = ln2();
        let n_real = self.div_raw(&l2);
        // Round to nearest: floor(x + 1/2); BigInt shr floors for negatives.
        let half = Real { mant: BigInt::from(1) << (FRAC_BITS - 1) };
        let shifted = &n_real + &half;
        let n = &shifted.mant >> FRAC_BITS;
        let n_i64 = n.to_i64().expect("exp argument out of range");
        let r = self - &(&l2 * &Real { mant: n << FRAC_BITS });
        // Taylor for e^r, |r| <= 0.35: terms shrink fast.
        let mut acc = Real::one();
        let mut term = Real::one();
        let mut k = 0u64;
        loop {
            k += 1;
            term = term.mul_raw(&r);
            term = Real { mant: term.mant / BigInt::from(k) };
            if term.mant.is_zero() {
                break;
            }
            acc = &acc + &term;
            if term.mant.magnitude().bits() < 4 && k > 8 {
                break;
            }
        }
        if n_i64 >= 0 {
            Real { mant: acc.mant << n_i64 as u64 }
        } else {
            Real { mant: acc.mant >> (-n_i64) as u64 }
        }
    }

    pub fn log2(&self) -> Real {
        self.ln().div_raw(&ln2())
    }

    /// self^exponent for positive self.
    pub fn pow(&self, exponent: &Real) -> Real {
        if exponent.is_zero() {
            return Real::one();
        }
        if self.is_zero() {
            assert!(exponent.is_positive(), "0^nonpositive");
            return Real::zero();
        }
        assert!(self.is_positive(), "pow of a negative base");
        (&self.ln() * exponent).exp()
    }

    pub fn sqrt(&self) -> Real {
        assert!(!self.mant.is_negative(), "sqrt of a negative value");
        Real { mant: (&self.mant << FRAC_BITS).sqrt() }
    }

    pub fn min(self, other: Real) -> Real {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Real) -> Real {
        if self >= other {
            self
        } else {
            other
        }
    }
}

fn ln2() -> Real {
    static LN2: OnceLock<Real> = OnceLock::new();
    LN2.get_or_init(|| {
        // ln 2 = 2 atanh(1/3): series sum 2/( (2k+1) 3^(2k+1) ).
        let mut acc = BigInt::zero();
        let three = BigInt::from(3);
        let mut pow3 = three.clone(); // 3^(2k+1)
        let mut k = 0u64;
        loop {
            let term = (BigInt::from(2) << FRAC_BITS) / (&pow3 * BigInt::from(2 * k + 1));
            if term.is_zero() {
                break;
            }
            acc += term;
            pow3 = &pow3 * &three * &three;
            k += 1;
        }
        Real { mant: acc }
    })
    .clone()
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mant.cmp(&other.mant)
    }
}

impl Add for &Real {
    type Output = Real;
    fn add(self, rhs: &Real) -> Real {
        Real { mant: &self.mant + &rhs.mant }
    }
}

impl Sub for &Real {
    type Output = Real;
    fn sub(self, rhs: &Real) -> Real {
        Real { mant: &self.mant - &rhs.mant }
    }
}

impl Mul for &Real {
    type Output = Real;
    fn mul(self, rhs: &Real) -> Real {
        self.mul_raw(rhs)
    }
}

impl Div for &Real {
    type Output = Real;
    fn div(self, rhs: &Real) -> Real {
        self.div_raw(rhs)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { mant: -&self.mant }
    }
}
