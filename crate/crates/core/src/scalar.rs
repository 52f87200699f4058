//! Scalar layers: exact Gaussian rationals for rank work, binary64 complex for
//! SVD and simulation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Floating complex scalar used by the SVD and the protocol simulator.
pub type FloatComplex = Complex64;

/// Complex number with arbitrary-precision rational parts.
///
/// `BigRational` keeps both parts gcd-reduced with a positive denominator, so
/// derived equality is exact equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExactComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactComplex { re, im }
    }

    pub fn from_int(re: i64) -> Self {
        ExactComplex::gaussian(re, 0)
    }

    pub fn gaussian(re: i64, im: i64) -> Self {
        ExactComplex {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        ExactComplex {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    /// Exact image of a binary64 complex (every finite double is a dyadic rational).
    pub fn from_float(z: FloatComplex) -> Result<Self> {
        let conv = |v: f64| {
            BigRational::from_float(v).ok_or_else(|| Error::Overflow(format!("{v}")))
        };
        Ok(ExactComplex { re: conv(z.re)?, im: conv(z.im)? })
    }

    pub fn conj(&self) -> Self {
        ExactComplex { re: self.re.clone(), im: -self.im.clone() }
    }

    /// |z|^2 as an exact rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_gaussian_integer(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    /// Nearest binary64 complex and the relative error of that rounding.
    pub fn to_float(&self) -> Result<(FloatComplex, f64)> {
        let re = rational_to_f64(&self.re)?;
        let im = rational_to_f64(&self.im)?;
        let z = FloatComplex::new(re, im);
        let back = ExactComplex::from_float(z)?;
        let err = (&back - self).norm_sqr();
        let mag = self.norm_sqr();
        let rel = if mag.is_zero() {
            0.0
        } else {
            (err / mag).to_f64().unwrap_or(f64::INFINITY).sqrt()
        };
        Ok((z, rel))
    }
}

fn rational_to_f64(q: &BigRational) -> Result<f64> {
    match q.to_f64() {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Overflow(q.to_string())),
    }
}

impl Zero for ExactComplex {
    fn zero() -> Self {
        ExactComplex { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for ExactComplex {
    fn one() -> Self {
        ExactComplex { re: BigRational::one(), im: BigRational::zero() }
    }
}

impl<'a> Add<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;
    fn add(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;
    fn sub(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl<'a> Div<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;
    /// Panics on division by zero, like the rational parts do.
    fn div(self, rhs: &ExactComplex) -> ExactComplex {
        let den = rhs.norm_sqr();
        let num = self * &rhs.conj();
        ExactComplex { re: num.re / &den, im: num.im / den }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for ExactComplex {
            type Output = ExactComplex;
            fn $m(self, rhs: ExactComplex) -> ExactComplex {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> ExactComplex {
        ExactComplex { re: -self.re, im: -self.im }
    }
}

fn fmt_ratio(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// `re_p/re_q+im_p/im_qi`, denominators always written out.
impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}i", fmt_ratio(&self.re), fmt_ratio(&self.im))
    }
}

fn parse_ratio(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.strip_prefix('+').unwrap_or(s);
    if s.is_empty() {
        return Err("empty rational".into());
    }
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| format!("bad numerator `{p}`"))?;
    let q: BigInt = q.parse().map_err(|_| format!("bad denominator `{q}`"))?;
    if q.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(p, q))
}

/// Splits `a+bi` / `a-bi` into its parts; a bare rational is a real number.
fn split_complex(s: &str) -> (&str, Option<&str>) {
    let Some(body) = s.strip_suffix('i') else {
        return (s, None);
    };
    let bytes = body.as_bytes();
    for idx in 1..bytes.len() {
        if (bytes[idx] == b'+' || bytes[idx] == b'-') && bytes[idx - 1] != b'/' {
            return (&body[..idx], Some(&body[idx..]));
        }
    }
    // pure imaginary, e.g. `3/4i`
    ("0", Some(body))
}

impl FromStr for ExactComplex {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (re, im) = split_complex(s.trim());
        let re = parse_ratio(re)?;
        let im = match im {
            Some(im) => {
                let im = im.strip_prefix('+').unwrap_or(im);
                parse_ratio(im)?
            }
            None => BigRational::zero(),
        };
        Ok(ExactComplex { re, im })
    }
}

/// Gaussian integer used inside fraction-free elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn one() -> Self {
        GaussInt { re: BigInt::one(), im: BigInt::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn mul(&self, rhs: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    pub fn sub(&self, rhs: &GaussInt) -> GaussInt {
        GaussInt { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }

    /// Division known to be exact in Z[i].
    pub fn div_exact(&self, rhs: &GaussInt) -> GaussInt {
        let den = &rhs.re * &rhs.re + &rhs.im * &rhs.im;
        let re = &self.re * &rhs.re + &self.im * &rhs.im;
        let im = &self.im * &rhs.re - &self.re * &rhs.im;
        debug_assert!((&re % &den).is_zero() && (&im % &den).is_zero());
        GaussInt { re: re / &den, im: im / den }
    }

    pub fn magnitude_bits(&self) -> u64 {
        self.re.abs().bits().max(self.im.abs().bits())
    }
}
