use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};

use super::rational::Rational;
use crate::error::{Error, Result};

/// A real number `a + b·√k` with rational `a`, `b` and squarefree `k`.
///
/// `k = 0` encodes a plain rational (and forces `b = 0`). Two values can be
/// combined or compared only when they live in the same field `ℚ(√k)` or one
/// of them is rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExtReal {
    a: Rational,
    b: Rational,
    k: u64,
}

/// Largest `s` with `s² | n`, together with `n / s²`.
fn split_square(mut n: u64) -> (u64, u64) {
    let mut square_root = 1u64;
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        while n.is_multiple_of(d * d) {
            n /= d * d;
            square_root *= d;
        }
        d += 1;
    }
    (square_root, n)
}

impl QuadExtReal {
    /// Builds `a + b·√k`, pulling square factors out of `k`.
    pub fn new(a: Rational, b: Rational, k: u64) -> Self {
        if k == 0 || b.is_zero() {
            return QuadExtReal::rational(a);
        }
        let (s, core) = split_square(k);
        let b = b * Rational::integer(s);
        if core == 1 {
            QuadExtReal::rational(a + b)
        } else {
            QuadExtReal { a, b, k: core }
        }
    }

    pub fn rational(a: Rational) -> Self {
        QuadExtReal {
            a,
            b: Rational::zero(),
            k: 0,
        }
    }

    /// `√k` itself.
    pub fn sqrt(k: u64) -> Self {
        QuadExtReal::new(Rational::zero(), Rational::one(), k)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn is_rational(&self) -> bool {
        self.k == 0
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    fn field_with(&self, other: &Self) -> Result<u64> {
        match (self.k, other.k) {
            (0, k) | (k, 0) => Ok(k),
            (k1, k2) if k1 == k2 => Ok(k1),
            (k1, k2) => Err(Error::MixedRadicals(k1, k2)),
        }
    }

    pub fn compatible(&self, other: &Self) -> bool {
        self.field_with(other).is_ok()
    }

    /// Sign of the real value: -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: compare a² with b²k; equality is impossible for squarefree k > 1
        let a2 = &self.a * &self.a;
        let b2k = &self.b * &self.b * Rational::integer(self.k);
        if a2 > b2k {
            sa
        } else {
            sb
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let k = self.field_with(other)?;
        Ok(QuadExtReal::new(&self.a + &other.a, &self.b + &other.b, k))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let k = self.field_with(other)?;
        Ok(QuadExtReal::new(&self.a - &other.a, &self.b - &other.b, k))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let k = self.field_with(other)?;
        let kr = Rational::integer(k);
        let a = &self.a * &other.a + &self.b * &other.b * kr;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(QuadExtReal::new(a, b, k))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let k = self.field_with(other)?;
        if other.signum() == 0 {
            return Err(Error::DivisionByZero);
        }
        let conj = QuadExtReal::new(other.a.clone(), -&other.b, k);
        let norm = &other.a * &other.a - &other.b * &other.b * Rational::integer(k);
        let top = self.checked_mul(&conj)?;
        Ok(QuadExtReal::new(&top.a / &norm, &top.b / &norm, k))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        QuadExtReal::new(&self.a * c, &self.b * c, self.k)
    }

    pub fn add_rational(&self, c: &Rational) -> Self {
        QuadExtReal::new(&self.a + c, self.b.clone(), self.k)
    }

    pub fn neg(&self) -> Self {
        QuadExtReal::new(-&self.a, -&self.b, self.k)
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(self.checked_sub(other)?.signum().cmp(&0))
    }

    pub fn cmp_rational(&self, c: &Rational) -> Ordering {
        self.add_rational(&-c).signum().cmp(&0)
    }

    /// Largest integer `n <= self`, computed exactly.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.floor();
        }
        // |b|√k = √(P/Q) = √(P·Q)/Q lies in [s/Q, (s+1)/Q) with s = isqrt(P·Q)
        let c = &self.b * &self.b * Rational::integer(self.k);
        let pq: BigInt = c.numer() * c.denom();
        let s = pq.magnitude().sqrt();
        let q = Rational::integer(c.denom().clone());
        let lo_root = Rational::integer(BigInt::from_biguint(Sign::Plus, s.clone())) / &q;
        let hi_root = Rational::integer(BigInt::from_biguint(Sign::Plus, s + 1u32)) / &q;
        let (lo, hi) = if self.b.is_positive() {
            (&self.a + &lo_root, &self.a + &hi_root)
        } else {
            (&self.a - &hi_root, &self.a - &lo_root)
        };
        let mut n = hi.floor();
        let stop = lo.floor();
        while self.cmp_rational(&Rational::integer(n.clone())) == Ordering::Less {
            n -= 1;
            debug_assert!(n >= stop);
        }
        n
    }

    /// Smallest integer `n >= self`.
    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    /// Approximate value; for presentation and sanity checks only.
    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * (self.k as f64).sqrt()
    }

    /// A rational within `10^-digits` of the value.
    pub fn approx_rational(&self, digits: u32) -> Rational {
        if self.is_rational() {
            return self.a.clone();
        }
        let scale = num_traits::pow(BigInt::from(10u32), digits as usize);
        let root = (BigInt::from(self.k) * &scale * &scale).sqrt();
        let root = Rational::new(root, scale).expect("nonzero scale");
        &self.a + &self.b * root
    }

    pub fn to_decimal(&self, sig: usize) -> String {
        self.approx_rational(40).to_decimal(sig)
    }

    /// ASCII rendering `a+b*sqrt(k)`.
    pub fn to_ascii(&self) -> String {
        self.render(|k| format!("sqrt({k})"), "*")
    }

    fn render(&self, radical: impl Fn(u64) -> String, times: &str) -> String {
        if self.is_rational() {
            return self.a.to_string();
        }
        let mag = self.b.abs();
        let term = if mag == 1 {
            radical(self.k)
        } else {
            format!("{mag}{times}{}", radical(self.k))
        };
        let neg = self.b.is_negative();
        if self.a.is_zero() {
            if neg {
                format!("-{term}")
            } else {
                term
            }
        } else {
            format!("{}{}{term}", self.a, if neg { '-' } else { '+' })
        }
    }
}

impl From<Rational> for QuadExtReal {
    fn from(a: Rational) -> Self {
        QuadExtReal::rational(a)
    }
}

impl PartialOrd for QuadExtReal {
    /// `None` when the two values live in different quadratic fields.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

/// Exact comparison of two quadratic reals sharing a field.
pub fn compare_quad(x: &QuadExtReal, y: &QuadExtReal) -> Result<Ordering> {
    x.try_cmp(y)
}

impl fmt::Display for QuadExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(|k| format!("√{k}"), ""))
    }
}

impl fmt::Debug for QuadExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses a radical term body (after any sign): `√k`, `c√k`, `c*sqrt(k)`,
/// `sqrt(k)`, `c*√k`. Returns `(coefficient, k)`, or `None` when the body
/// carries no radical.
fn parse_radical(body: &str, column: usize) -> Result<Option<(Rational, u64)>> {
    let (coef, radicand) = if let Some(pos) = body.find('√') {
        let coef = body[..pos].trim_end_matches('*');
        (coef, &body[pos + '√'.len_utf8()..])
    } else if let Some(pos) = body.find("sqrt(") {
        let coef = body[..pos].trim_end_matches('*');
        let rest = &body[pos + 5..];
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::parse(column + pos, "unclosed sqrt("))?;
        (coef, inner)
    } else {
        return Ok(None);
    };
    let k: u64 = radicand
        .trim()
        .parse()
        .map_err(|_| Error::parse(column, format!("invalid radicand {radicand:?}")))?;
    let coef = if coef.is_empty() {
        Rational::one()
    } else {
        coef.parse::<Rational>().map_err(|e| e.shifted(column - 1))?
    };
    Ok(Some((coef, k)))
}

impl FromStr for QuadExtReal {
    type Err = Error;

    /// Grammar: `[rational] [(+|-) [rational['*']] (√k | sqrt(k))]`, or a
    /// lone radical term. `1/2√2` reads as `(1/2)·√2`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::parse(1, "empty number"));
        }
        // split at the last top-level sign that is not the leading one
        let bytes: Vec<(usize, char)> = t.char_indices().collect();
        let mut split = None;
        let mut depth = 0;
        for &(i, c) in &bytes {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if i > 0 && depth == 0 => split = Some(i),
                _ => {}
            }
        }
        match split {
            Some(i) => {
                let (head, tail) = t.split_at(i);
                let neg = tail.starts_with('-');
                let body = &tail[1..];
                let a: Rational = head.parse()?;
                match parse_radical(body, i + 2)? {
                    Some((coef, k)) => {
                        let coef = if neg { -coef } else { coef };
                        Ok(QuadExtReal::new(a, coef, k))
                    }
                    None => Err(Error::parse(i + 1, format!("expected a radical term in {tail:?}"))),
                }
            }
            None => {
                let (neg, body) = match t.strip_prefix('-') {
                    Some(rest) => (true, rest),
                    None => (false, t.strip_prefix('+').unwrap_or(&t)),
                };
                match parse_radical(body, 1 + usize::from(t.len() != body.len()))? {
                    Some((coef, k)) => {
                        let coef = if neg { -coef } else { coef };
                        Ok(QuadExtReal::new(Rational::zero(), coef, k))
                    }
                    None => Ok(QuadExtReal::rational(t.parse()?)),
                }
            }
        }
    }
}

impl QuadExtReal {
    /// Whether the stored radicand is squarefree (always true after
    /// construction; exposed for property tests).
    pub fn radicand_is_squarefree(&self) -> bool {
        self.k == 0 || split_square(self.k).0 == 1
    }
}
