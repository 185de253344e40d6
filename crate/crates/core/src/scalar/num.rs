//! Point values: exact Gaussian rationals, or high-precision approximations
//! stored on a fixed binary grid once a transcendental value enters.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::EvalError;

pub type Q = BigRational;
pub type C = Complex<Q>;

/// Working precision of inexact values, in bits (about 77 decimal digits).
pub const WORK_BITS: u32 = 256;
/// Smallest number of significant decimal digits float evaluation may be asked for.
pub const MIN_DIGITS: u32 = 50;
/// Largest number of decimal digits the working precision supports.
pub const MAX_DIGITS: u32 = 75;

const GUARD_BITS: u32 = 32;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn c_re(x: Q) -> C {
    Complex::new(x, Q::zero())
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

fn round_to_grid(x: &Q, bits: u32) -> Q {
    let scale = Q::from_integer(BigInt::one() << bits);
    (x * &scale).round() / scale
}

/// A value at a point. Exact values are Gaussian rationals; inexact values
/// carry [`WORK_BITS`] bits of absolute precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Num {
    pub re: Q,
    pub im: Q,
    pub exact: bool,
}

impl Num {
    pub fn zero() -> Num {
        Num { re: Q::zero(), im: Q::zero(), exact: true }
    }

    pub fn one() -> Num {
        Num::real(Q::one())
    }

    pub fn real(re: Q) -> Num {
        Num { re, im: Q::zero(), exact: true }
    }

    pub fn from_c(c: &C) -> Num {
        Num { re: c.re.clone(), im: c.im.clone(), exact: true }
    }

    pub fn from_i64(n: i64) -> Num {
        Num::real(q(n))
    }

    pub fn to_c(&self) -> C {
        Complex::new(self.re.clone(), self.im.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when the value is zero, or (inexact case) below the grid resolution.
    pub fn is_negligible(&self) -> bool {
        if self.exact {
            self.is_zero()
        } else {
            self.abs() < 2f64.powi(-((WORK_BITS / 2) as i32))
        }
    }

    pub fn re_f64(&self) -> f64 {
        q_to_f64(&self.re)
    }

    pub fn im_f64(&self) -> f64 {
        q_to_f64(&self.im)
    }

    pub fn abs(&self) -> f64 {
        self.re_f64().hypot(self.im_f64())
    }

    fn settle(mut self, bits: u32) -> Num {
        if !self.exact {
            self.re = round_to_grid(&self.re, bits);
            self.im = round_to_grid(&self.im, bits);
        }
        self
    }

    pub fn conj(&self) -> Num {
        Num { re: self.re.clone(), im: -self.im.clone(), exact: self.exact }
    }

    pub fn add(&self, o: &Num) -> Num {
        Num { re: &self.re + &o.re, im: &self.im + &o.im, exact: self.exact && o.exact }
    }

    pub fn sub(&self, o: &Num) -> Num {
        Num { re: &self.re - &o.re, im: &self.im - &o.im, exact: self.exact && o.exact }
    }

    pub fn neg(&self) -> Num {
        Num { re: -self.re.clone(), im: -self.im.clone(), exact: self.exact }
    }

    fn mul_bits(&self, o: &Num, bits: u32) -> Num {
        let (re, im) = if self.im.is_zero() && o.im.is_zero() {
            (&self.re * &o.re, Q::zero())
        } else {
            (
                &self.re * &o.re - &self.im * &o.im,
                &self.re * &o.im + &self.im * &o.re,
            )
        };
        Num { re, im, exact: self.exact && o.exact }.settle(bits)
    }

    pub fn mul(&self, o: &Num) -> Num {
        self.mul_bits(o, WORK_BITS)
    }

    pub fn scale(&self, s: &Q) -> Num {
        Num { re: &self.re * s, im: &self.im * s, exact: self.exact }.settle(WORK_BITS)
    }

    fn div_bits(&self, o: &Num, bits: u32) -> Result<Num, EvalError> {
        if o.is_negligible() {
            return Err(EvalError::Singular);
        }
        let out = if o.im.is_zero() {
            Num { re: &self.re / &o.re, im: &self.im / &o.re, exact: self.exact && o.exact }
        } else {
            let den = &o.re * &o.re + &o.im * &o.im;
            Num {
                re: (&self.re * &o.re + &self.im * &o.im) / &den,
                im: (&self.im * &o.re - &self.re * &o.im) / &den,
                exact: self.exact && o.exact,
            }
        };
        Ok(out.settle(bits))
    }

    pub fn div(&self, o: &Num) -> Result<Num, EvalError> {
        self.div_bits(o, WORK_BITS)
    }

    pub fn powu(&self, mut e: u32) -> Num {
        let mut base = self.clone();
        let mut acc = Num::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Complex exponential. Exact only for a zero argument.
    pub fn exp(&self) -> Result<Num, EvalError> {
        if self.is_zero() {
            return Ok(Num::one());
        }
        let bits = WORK_BITS + GUARD_BITS;
        let mag = self.abs();
        if !mag.is_finite() || mag > 1.0e4 {
            return Err(EvalError::Overflow);
        }
        let mut k = 0u32;
        while mag / 2f64.powi(k as i32) >= 0.5 {
            k += 1;
        }
        let two_k = Q::from_integer(BigInt::one() << k);
        let w = Num { re: &self.re / &two_k, im: &self.im / &two_k, exact: false }.settle(bits);
        let mut sum = Num { re: Q::one(), im: Q::zero(), exact: false };
        let mut term = sum.clone();
        let cutoff = 2f64.powi(-((bits + 8) as i32));
        for n in 1..10_000i64 {
            term = term.mul_bits(&w, bits);
            term = term.div_bits(&Num::from_i64(n), bits)?;
            sum = sum.add(&term);
            if term.abs() < cutoff {
                break;
            }
        }
        for _ in 0..k {
            sum = sum.mul_bits(&sum, bits);
        }
        Ok(sum.settle(WORK_BITS))
    }
}

impl fmt::Display for Num {
    /// Shows a short decimal rendering; exact values print as fractions.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact {
            if self.im.is_zero() {
                write!(f, "{}", self.re)
            } else {
                write!(f, "{}+{}*I", self.re, self.im)
            }
        } else if self.im.is_zero() {
            write!(f, "{:e}", self.re_f64())
        } else {
            write!(f, "{:e}+{:e}*I", self.re_f64(), self.im_f64())
        }
    }
}

/// Render an approximate real part with the requested number of significant digits.
pub fn to_decimal_string(x: &Q, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let a = x.abs();
    // find exponent e with 10^e <= a < 10^(e+1)
    let ten = Q::from_integer(BigInt::from(10));
    let mut e: i64 = 0;
    let mut scaled = a.clone();
    while scaled >= ten {
        scaled /= &ten;
        e += 1;
    }
    while scaled < Q::one() {
        scaled *= &ten;
        e -= 1;
    }
    let mut m = scaled;
    for _ in 1..digits {
        m *= &ten;
    }
    let mut mant = m.round().to_integer().to_string();
    if mant.len() > digits.max(1) as usize {
        mant.pop();
        e += 1;
    }
    let (int_part, frac) = mant.split_at(1);
    format!("{}{}.{}e{}", if neg { "-" } else { "" }, int_part, frac, e)
}

macro_rules! num_binop {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr<&Num> for &Num {
            type Output = Num;
            fn $m(self, o: &Num) -> Num {
                Num::$m(self, o)
            }
        }
        impl std::ops::$tr<Num> for Num {
            type Output = Num;
            fn $m(self, o: Num) -> Num {
                Num::$m(&self, &o)
            }
        }
        impl std::ops::$tr<&Num> for Num {
            type Output = Num;
            fn $m(self, o: &Num) -> Num {
                Num::$m(&self, o)
            }
        }
    };
}

num_binop!(Add, add);
num_binop!(Sub, sub);
num_binop!(Mul, mul);

impl std::ops::Neg for &Num {
    type Output = Num;
    fn neg(self) -> Num {
        Num::neg(self)
    }
}

impl std::ops::Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        Num::neg(&self)
    }
}
