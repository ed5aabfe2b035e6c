//! Finite adeles at valuation resolution.
//!
//! A [`ValuationProfile`] stands for an adele up to units: it records the
//! valuation `k_p` of each component, with absent primes meaning `k_p = 0`.
//! An [`AdelicBox`] with exponents `e` is the compact open subgroup
//! `∏_p p^{-e_p} ℤ_p`; Haar measure is normalized by `m(ℤ_p) = 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exactnum::{valuation, Prime, Rational, Valuation};

/// Primes at or below this bound are used when generating schedules.
pub const DEFAULT_PRIME_CUTOFF: u64 = 97;

/// Finitely supported map `prime -> exponent`, with no stored zeros.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValuationProfile {
    entries: BTreeMap<Prime, i64>,
}

impl ValuationProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Prime, i64)>) -> Self {
        let mut profile = Self::new();
        for (p, k) in entries {
            profile.set(p, profile.get(p) + k);
        }
        profile
    }

    /// Shorthand for tests and literals; panics on non-primes.
    pub fn of(entries: &[(u64, i64)]) -> Self {
        Self::from_entries(entries.iter().map(|&(p, k)| (Prime::new(p).expect("prime"), k)))
    }

    /// Valuation profile of `ι(q)` for nonzero `q`.
    pub fn of_rational(q: &Rational) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::pre("zero has no finite valuation profile"));
        }
        let mut entries = BTreeMap::new();
        for p in prime_factors(q.numer()).into_iter().chain(prime_factors(q.denom())) {
            if let Valuation::Finite(v) = valuation(q, p) {
                if v != 0 {
                    entries.insert(p, v);
                }
            }
        }
        Ok(ValuationProfile { entries })
    }

    pub fn get(&self, p: Prime) -> i64 {
        self.entries.get(&p).copied().unwrap_or(0)
    }

    pub fn set(&mut self, p: Prime, k: i64) {
        if k == 0 {
            self.entries.remove(&p);
        } else {
            self.entries.insert(p, k);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Prime, i64)> + '_ {
        self.entries.iter().map(|(&p, &k)| (p, k))
    }

    pub fn support(&self) -> impl Iterator<Item = Prime> + '_ {
        self.entries.keys().copied()
    }

    /// Pointwise sum (adele multiplication adds valuations).
    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn neg(&self) -> Self {
        ValuationProfile {
            entries: self.entries.iter().map(|(&p, &k)| (p, -k)).collect(),
        }
    }

    /// Combine two profiles prime by prime over the union of supports.
    pub fn zip_with(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        let mut out = Self::new();
        for p in self.support().chain(other.support()) {
            out.set(p, f(self.get(p), other.get(p)));
        }
        // primes absent from both sides combine as f(0, 0)
        debug_assert_eq!(f(0, 0), 0, "profile combinator must fix zero");
        out
    }

    /// Every entry non-negative: an adelic-integer profile.
    pub fn is_integral(&self) -> bool {
        self.entries.values().all(|&k| k >= 0)
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.support()
            .chain(other.support())
            .all(|p| self.get(p) <= other.get(p))
    }
}

pub(crate) fn prime_factors(n: &num_bigint::BigInt) -> Vec<Prime> {
    use num_traits::{ToPrimitive, Zero};
    let mut m = n.magnitude().clone();
    let mut out = Vec::new();
    let mut d = 2u64;
    while m > num_bigint::BigUint::from(1u32) {
        if let Some(small) = m.to_u64() {
            if d.saturating_mul(d) > small {
                out.push(Prime::new(small).expect("remaining cofactor is prime"));
                break;
            }
        }
        if (&m % d).is_zero() {
            out.push(Prime::new(d).expect("smallest divisor is prime"));
            while (&m % d).is_zero() {
                m /= d;
            }
        }
        d += 1;
    }
    out
}

impl fmt::Display for ValuationProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, k) in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{p}:{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ValuationProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for ValuationProfile {
    type Err = Error;

    /// `p1:k1,p2:k2` with strictly increasing primes and nonzero exponents;
    /// the empty string is the empty profile.
    fn from_str(s: &str) -> Result<Self> {
        let mut profile = ValuationProfile::new();
        if s.is_empty() {
            return Ok(profile);
        }
        let mut column = 1;
        let mut last: Option<Prime> = None;
        for item in s.split(',') {
            let (p, k) = item
                .split_once(':')
                .ok_or_else(|| Error::parse(column, format!("expected p:k, found {item:?}")))?;
            let p_num: u64 = p
                .parse()
                .map_err(|_| Error::parse(column, format!("invalid prime {p:?}")))?;
            let prime = Prime::new(p_num).map_err(|_| Error::parse(column, format!("{p_num} is not prime")))?;
            let k: i64 = k
                .parse()
                .map_err(|_| Error::parse(column + p.len() + 1, format!("invalid exponent {k:?}")))?;
            if k == 0 {
                return Err(Error::parse(column + p.len() + 1, "zero exponents are not written"));
            }
            if last.is_some_and(|q| q >= prime) {
                return Err(Error::parse(column, "primes must be strictly increasing"));
            }
            last = Some(prime);
            profile.set(prime, k);
            column += item.len() + 1;
        }
        Ok(profile)
    }
}

/// `‖u‖_fin = ∏_p p^{-k_p}`.
pub fn adelic_norm(u: &ValuationProfile) -> Rational {
    u.iter().map(|(p, k)| Rational::prime_power(p, -k)).product()
}

/// The compact open subgroup `∏_{p} p^{-e_p} ℤ_p` of the finite adeles.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct AdelicBox {
    exponents: ValuationProfile,
}

impl AdelicBox {
    pub fn new(exponents: ValuationProfile) -> Self {
        AdelicBox { exponents }
    }

    /// `ℤ_fin`, the box with all exponents zero.
    pub fn integers() -> Self {
        Self::default()
    }

    pub fn of(entries: &[(u64, i64)]) -> Self {
        AdelicBox::new(ValuationProfile::of(entries))
    }

    pub fn exponents(&self) -> &ValuationProfile {
        &self.exponents
    }

    pub fn exponent(&self, p: Prime) -> i64 {
        self.exponents.get(p)
    }

    /// Haar measure `∏_p p^{e_p}`.
    pub fn measure(&self) -> Rational {
        self.exponents
            .iter()
            .map(|(p, e)| Rational::prime_power(p, e))
            .product()
    }

    /// The sum set `F + K`: since both are subgroups it is the box with the
    /// pointwise larger exponent.
    pub fn product(&self, other: &AdelicBox) -> AdelicBox {
        AdelicBox::new(self.exponents.zip_with(&other.exponents, i64::max))
    }

    /// `F ∩ K`, the box with the pointwise smaller exponent.
    pub fn intersection(&self, other: &AdelicBox) -> AdelicBox {
        AdelicBox::new(self.exponents.zip_with(&other.exponents, i64::min))
    }

    pub fn is_subset_of(&self, other: &AdelicBox) -> bool {
        self.exponents.le(&other.exponents)
    }

    /// Membership of an adele with the given valuation profile:
    /// `v_p >= -e_p` at every prime.
    pub fn contains(&self, v: &ValuationProfile) -> bool {
        self.exponents
            .support()
            .chain(v.support())
            .all(|p| v.get(p) >= -self.exponents.get(p))
    }

    /// Membership of `ι(q)`; zero lies in every box.
    pub fn contains_rational(&self, q: &Rational) -> bool {
        match ValuationProfile::of_rational(q) {
            Ok(v) => self.contains(&v),
            Err(_) => true,
        }
    }
}

impl fmt::Display for AdelicBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.exponents)
    }
}

impl fmt::Debug for AdelicBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "box={}", self.exponents)
    }
}

impl FromStr for AdelicBox {
    type Err = Error;

    /// Accepts a bare profile or `box=<profile>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("box=") {
            Some(rest) => rest.parse().map(AdelicBox::new).map_err(|e| e.shifted(4)),
            None => s.parse().map(AdelicBox::new),
        }
    }
}

/// Spec-facing wrappers.
pub fn box_measure(f: &AdelicBox) -> Rational {
    f.measure()
}

pub fn box_product(f: &AdelicBox, k: &AdelicBox) -> AdelicBox {
    f.product(k)
}

pub fn box_contains(f: &AdelicBox, v: &ValuationProfile) -> bool {
    f.contains(v)
}
