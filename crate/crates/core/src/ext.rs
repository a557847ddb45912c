//! Complex numbers with an extended binary exponent.
//!
//! Heavy-tailed coefficient laws routinely produce moduli like `exp(1e6)`,
//! far outside the range of `f64`. [`ExtComplex`] stores `mant * 2^exp` with
//! a normalized `f64` mantissa and an integral `f64` exponent, which keeps
//! about 15 significant digits over an exponent range of roughly ±1e308.

use std::f64::consts::LN_2;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// `mant * 2^exp`, with `max(|re|, |im|)` of the mantissa in `[1, 2)`.
/// Zero is stored as a zero mantissa and exponent 0.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtComplex {
    mant: Complex64,
    exp: f64,
}

/// Exact power of two for an integral exponent in the normal range.
#[inline]
fn pow2i(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// `x * 2^e` for integral `e` of any size, saturating to 0 or infinity.
#[inline]
pub(crate) fn ldexp(x: f64, e: f64) -> f64 {
    if e >= 2100.0 {
        return x * f64::INFINITY;
    }
    if e <= -2200.0 {
        return x * 0.0;
    }
    let mut e = e as i64;
    let mut x = x;
    while e > 1023 {
        x *= pow2i(1023);
        e -= 1023;
    }
    while e < -1022 {
        x *= pow2i(-1022);
        e += 1022;
    }
    x * pow2i(e)
}

/// Binary exponent of a positive normal or subnormal `f64`.
#[inline]
fn binary_exponent(m: f64) -> i64 {
    let biased = ((m.to_bits() >> 52) & 0x7ff) as i64;
    if biased == 0 {
        // subnormal
        let scaled = m * pow2i(600);
        (((scaled.to_bits() >> 52) & 0x7ff) as i64) - 1023 - 600
    } else {
        biased - 1023
    }
}

impl ExtComplex {
    pub const ZERO: ExtComplex = ExtComplex {
        mant: Complex64::new(0.0, 0.0),
        exp: 0.0,
    };
    pub const ONE: ExtComplex = ExtComplex {
        mant: Complex64::new(1.0, 0.0),
        exp: 0.0,
    };

    /// Builds `mant * 2^exp` and normalizes it. `exp` must be integral.
    #[inline]
    pub fn from_parts(mant: Complex64, exp: f64) -> Self {
        let m = mant.re.abs().max(mant.im.abs());
        if m == 0.0 {
            return Self::ZERO;
        }
        debug_assert!(m.is_finite(), "non-finite mantissa {mant:?}");
        let e = binary_exponent(m);
        let scaled = if (-1022..=1023).contains(&-e) {
            mant * pow2i(-e)
        } else {
            Complex64::new(ldexp(mant.re, -e as f64), ldexp(mant.im, -e as f64))
        };
        ExtComplex {
            mant: scaled,
            exp: exp + e as f64,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::from_parts(z, 0.0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_parts(Complex64::new(x, 0.0), 0.0)
    }

    /// `exp(ln_abs + i*arg)`. `ln_abs = -inf` gives zero.
    pub fn from_polar_ln(ln_abs: f64, arg: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let e2 = ln_abs / LN_2;
        let whole = e2.floor();
        let frac = e2 - whole;
        Self::from_parts(Complex64::from_polar(frac.exp2(), arg), whole)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mant
    }

    /// Binary exponent of the normalized representation.
    pub fn exponent(&self) -> f64 {
        self.exp
    }

    /// Natural logarithm of the modulus; `-inf` for zero.
    #[inline]
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.norm().ln() + self.exp * LN_2
        }
    }

    /// Argument in `(-pi, pi]`.
    pub fn arg(&self) -> f64 {
        self.mant.arg()
    }

    /// Nearest `Complex64`; overflows to infinite parts, underflows to zero.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(ldexp(self.mant.re, self.exp), ldexp(self.mant.im, self.exp))
    }

    /// Like [`to_complex`](Self::to_complex) but clamps the modulus into
    /// `[1e-300, 1e300]`, keeping the argument. Zero stays zero.
    pub fn to_complex_saturating(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let ln = self.ln_abs();
        let lo = 1e-300f64.ln();
        let hi = 1e300f64.ln();
        if ln < lo || ln > hi {
            Complex64::from_polar(ln.clamp(lo, hi).exp(), self.arg())
        } else {
            self.to_complex()
        }
    }

    #[inline]
    pub fn conj(&self) -> Self {
        ExtComplex {
            mant: self.mant.conj(),
            exp: self.exp,
        }
    }

    /// Modulus as a real `ExtComplex`.
    #[inline]
    pub fn abs(&self) -> Self {
        Self::from_parts(Complex64::new(self.mant.norm(), 0.0), self.exp)
    }

    /// Multiplies by `exp(x)` for real `x` (`-inf` gives zero).
    pub fn scale_exp(&self, x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        *self * Self::from_polar_ln(x, 0.0)
    }

    /// Multiplies by `2^k` exactly.
    #[inline]
    pub fn scale_pow2(&self, k: f64) -> Self {
        if self.is_zero() {
            return *self;
        }
        ExtComplex {
            mant: self.mant,
            exp: self.exp + k,
        }
    }

    #[inline]
    pub fn recip(&self) -> Self {
        let m = self.mant.inv();
        Self::from_parts(m, -self.exp)
    }

    /// `self^k` by repeated squaring.
    pub fn powu(&self, mut k: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl Default for ExtComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})*2^{}", self.mant, self.exp)
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl Add for ExtComplex {
    type Output = ExtComplex;
    #[inline]
    fn add(self, rhs: ExtComplex) -> ExtComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let d = self.exp - rhs.exp;
        if d > 64.0 {
            self
        } else if d < -64.0 {
            rhs
        } else if d >= 0.0 {
            Self::from_parts(self.mant + rhs.mant * pow2i(-(d as i64)), self.exp)
        } else {
            Self::from_parts(rhs.mant + self.mant * pow2i(d as i64), rhs.exp)
        }
    }
}

impl Neg for ExtComplex {
    type Output = ExtComplex;
    #[inline]
    fn neg(self) -> ExtComplex {
        ExtComplex {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

impl Sub for ExtComplex {
    type Output = ExtComplex;
    #[inline]
    fn sub(self, rhs: ExtComplex) -> ExtComplex {
        self + (-rhs)
    }
}

impl Mul for ExtComplex {
    type Output = ExtComplex;
    #[inline]
    fn mul(self, rhs: ExtComplex) -> ExtComplex {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Mul<f64> for ExtComplex {
    type Output = ExtComplex;
    fn mul(self, rhs: f64) -> ExtComplex {
        self * ExtComplex::from_real(rhs)
    }
}

impl Div for ExtComplex {
    type Output = ExtComplex;
    /// Division by zero yields a non-finite mantissa; callers check the divisor.
    #[inline]
    fn div(self, rhs: ExtComplex) -> ExtComplex {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

/// `ln(sum(exp(x_i)))` with the usual max shift; `-inf` for an empty or all
/// `-inf` input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}
