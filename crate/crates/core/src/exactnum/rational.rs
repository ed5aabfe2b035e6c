use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::prime::Prime;
use crate::error::{Error, Result};

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

/// p-adic valuation of a rational; zero has valuation `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => f.write_str("inf"),
        }
    }
}

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// Panicking shorthand for literals in code and tests.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Rational::new(numer, denom).expect("nonzero denominator")
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    pub fn ceil(&self) -> BigInt {
        -((-self.0.numer()).div_floor(self.0.denom()))
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(&self) -> Self {
        self - &Rational::integer(self.floor())
    }

    /// `p^exp` for any integer exponent.
    pub fn prime_power(p: Prime, exp: i64) -> Self {
        let base = BigInt::from(p.get());
        let mag = num_traits::pow(base, exp.unsigned_abs() as usize);
        if exp >= 0 {
            Rational::integer(mag)
        } else {
            Rational(BigRational::new(BigInt::one(), mag))
        }
    }

    pub fn pow(&self, exp: i32) -> Result<Self> {
        if exp < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(num_traits::Pow::pow(&self.0, exp)))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    /// Decimal rendering with `sig` significant digits, in the style of
    /// C's `%.{sig}g` (trailing zeros dropped, scientific notation outside
    /// `1e-5 ..= 10^sig`). Presentation only.
    pub fn to_decimal(&self, sig: usize) -> String {
        decimal_string(self, sig)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn parse_int(s: &str, column: usize) -> Result<BigInt> {
    let digits = s.strip_prefix('+').unwrap_or(s);
    if digits.is_empty()
        || !digits
            .strip_prefix('-')
            .unwrap_or(digits)
            .bytes()
            .all(|b| b.is_ascii_digit())
        || digits == "-"
    {
        return Err(Error::parse(column, format!("invalid integer {s:?}")));
    }
    digits
        .parse()
        .map_err(|_| Error::parse(column, format!("invalid integer {s:?}")))
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `a` or `a/b` with optional sign on `a`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lead = s.len() - s.trim_start().len();
        match t.split_once('/') {
            None => Ok(Rational::integer(parse_int(t, lead + 1)?)),
            Some((n, d)) => {
                let numer = parse_int(n, lead + 1)?;
                let denom = parse_int(d, lead + n.len() + 2)?;
                if denom.is_negative() {
                    return Err(Error::parse(lead + n.len() + 2, "denominator must be positive"));
                }
                Rational::new(numer, denom).map_err(|_| Error::parse(lead + n.len() + 2, "zero denominator"))
            }
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&Rational> for &Rational {
    type Output = Rational;
    /// Panics on a zero divisor; use [`Rational::recip`] for a checked path.
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / &rhs.0)
    }
}

impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}

impl Div<&Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        &self / rhs
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |a, b| a * b)
    }
}

fn strip_factor(n: &BigInt, p: &BigInt) -> (BigInt, i64) {
    let mut n = n.clone();
    let mut count = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return (n, count);
        }
        n = q;
        count += 1;
    }
}

/// Exponent `v` with `q = p^v * (unit prime to p)`.
pub fn p_valuation(q: &Rational, p: u64) -> Result<Valuation> {
    let p = Prime::new(p)?;
    Ok(valuation(q, p))
}

/// Infallible form of [`p_valuation`] for an already-validated prime.
pub fn valuation(q: &Rational, p: Prime) -> Valuation {
    if q.is_zero() {
        return Valuation::Infinity;
    }
    let pb = BigInt::from(p.get());
    let (_, up) = strip_factor(q.numer(), &pb);
    let (_, down) = strip_factor(q.denom(), &pb);
    Valuation::Finite(up - down)
}

/// The p-adic norm `p^{-v_p(q)}`, zero for `q = 0`.
pub fn p_norm(q: &Rational, p: u64) -> Result<Rational> {
    let p = Prime::new(p)?;
    Ok(match valuation(q, p) {
        Valuation::Infinity => Rational::zero(),
        Valuation::Finite(v) => Rational::prime_power(p, -v),
    })
}

fn pow10(n: usize) -> BigInt {
    num_traits::pow(BigInt::from(10u32), n)
}

fn decimal_string(x: &Rational, sig: usize) -> String {
    let sig = sig.max(1);
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    // e = floor(log10 |x|)
    let approx = ax.to_f64();
    let mut e: i64 = if approx.is_finite() && approx > 0.0 {
        approx.log10().floor() as i64
    } else {
        (ax.numer().to_string().len() as i64) - (ax.denom().to_string().len() as i64)
    };
    let pow10r = |k: i64| -> Rational {
        if k >= 0 {
            Rational::integer(pow10(k as usize))
        } else {
            Rational::one() / Rational::integer(pow10((-k) as usize))
        }
    };
    while pow10r(e) > ax {
        e -= 1;
    }
    while pow10r(e + 1) <= ax {
        e += 1;
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &ax * &pow10r(shift);
    let half = Rational::frac(1, 2);
    let mut digits = (scaled + half).floor();
    if digits >= pow10(sig) {
        digits /= BigInt::from(10);
        e += 1;
    }
    let mut ds = digits.to_string();
    // ds has exactly `sig` digits
    let body = if e < -5 || e >= sig as i64 {
        let mut mant = ds.clone();
        mant.insert(1, '.');
        let mant = trim_zeros(&mant);
        format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    } else if e >= 0 {
        let int_len = (e + 1) as usize;
        if int_len < ds.len() {
            ds.insert(int_len, '.');
        }
        trim_zeros(&ds)
    } else {
        let zeros = "0".repeat((-e - 1) as usize);
        trim_zeros(&format!("0.{zeros}{ds}"))
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && self.0.numer() == &BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Rational::integer(*other)))
    }
}
