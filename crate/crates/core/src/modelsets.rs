//! Windows on the line and generalized Farey fractions.
//!
//! The dilated set `u·𝔉(W)` consists of the adeles `u·ι(q)` for rational
//! `q ∈ W`. Its intersection with an adelic box `F` is the one-dimensional
//! lattice `rℤ ∩ W`, where `r = ∏ p^{-(e_p + k_p)}` collects the box exponents
//! `e` and the dilation exponents `k`. Points are stored by their rational tag
//! `q`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::adelic::{AdelicBox, ValuationProfile};
use crate::error::{Error, Result};
use crate::exactnum::{Prime, QuadExtReal, Rational};

/// Default bound on enumerated points.
pub const DEFAULT_POINT_CAP: u64 = 2_000_000;

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: QuadExtReal,
    pub hi: QuadExtReal,
}

impl Interval {
    pub fn length(&self) -> QuadExtReal {
        self.hi.checked_sub(&self.lo).expect("endpoints share a field")
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo.cmp_rational(x) != Ordering::Greater && self.hi.cmp_rational(x) != Ordering::Less
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// A finite union of closed intervals with quadratic-irrational endpoints,
/// normalized to be sorted and pairwise disjoint (touching intervals merge).
///
/// All endpoints share one field `ℚ(√k)` so that lengths and comparisons stay
/// exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Window1D {
    intervals: Vec<Interval>,
}

fn qcmp(x: &QuadExtReal, y: &QuadExtReal) -> Ordering {
    x.try_cmp(y).expect("window endpoints share a field")
}

fn qsub(x: &QuadExtReal, y: &QuadExtReal) -> QuadExtReal {
    x.checked_sub(y).expect("window endpoints share a field")
}

fn qadd(x: &QuadExtReal, y: &QuadExtReal) -> QuadExtReal {
    x.checked_add(y).expect("window endpoints share a field")
}

/// A rational strictly between `x < y`.
pub fn rational_between(x: &QuadExtReal, y: &QuadExtReal) -> Rational {
    let gap = qsub(y, x);
    let mut n = BigInt::one();
    while gap.scale(&Rational::integer(n.clone())).cmp_rational(&Rational::one()) != Ordering::Greater {
        n <<= 1;
    }
    let scaled = x.scale(&Rational::integer(n.clone()));
    Rational::new(scaled.floor() + 1, n).expect("positive denominator")
}

impl Window1D {
    /// Normalizes the given intervals. Each needs `lo < hi`; all endpoints must
    /// share one quadratic field.
    pub fn new(intervals: Vec<(QuadExtReal, QuadExtReal)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::pre("window needs at least one interval"));
        }
        let field = intervals
            .iter()
            .flat_map(|(a, b)| [a.k(), b.k()])
            .filter(|&k| k != 0)
            .try_fold(0u64, |acc, k| match acc {
                0 => Ok(k),
                a if a == k => Ok(a),
                a => Err(Error::MixedRadicals(a, k)),
            })?;
        let _ = field;
        let mut ivs = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match lo.try_cmp(&hi)? {
                Ordering::Less => ivs.push(Interval { lo, hi }),
                _ => {
                    return Err(Error::pre(format!(
                        "window interval [{lo},{hi}] must have positive length"
                    )))
                }
            }
        }
        Ok(Window1D { intervals: merge(ivs) })
    }

    pub fn interval(lo: impl Into<QuadExtReal>, hi: impl Into<QuadExtReal>) -> Result<Self> {
        Window1D::new(vec![(lo.into(), hi.into())])
    }

    /// Shorthand for rational windows in tests and examples.
    pub fn rational(pairs: &[(Rational, Rational)]) -> Result<Self> {
        Window1D::new(
            pairs
                .iter()
                .map(|(a, b)| (QuadExtReal::from(a.clone()), QuadExtReal::from(b.clone())))
                .collect(),
        )
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_single_interval(&self) -> bool {
        self.intervals.len() == 1
    }

    pub fn inf(&self) -> &QuadExtReal {
        &self.intervals[0].lo
    }

    pub fn sup(&self) -> &QuadExtReal {
        &self.intervals[self.intervals.len() - 1].hi
    }

    pub fn measure(&self) -> QuadExtReal {
        self.intervals
            .iter()
            .map(Interval::length)
            .fold(QuadExtReal::from(Rational::zero()), |a, b| qadd(&a, &b))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn translate(&self, tau: &Rational) -> Window1D {
        Window1D {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval {
                    lo: iv.lo.add_rational(tau),
                    hi: iv.hi.add_rational(tau),
                })
                .collect(),
        }
    }

    /// `c·W` for nonzero rational `c`.
    pub fn scale(&self, c: &Rational) -> Result<Window1D> {
        if c.is_zero() {
            return Err(Error::pre("window scale factor must be nonzero"));
        }
        let flip = c.is_negative();
        let ivs = self
            .intervals
            .iter()
            .map(|iv| {
                let (a, b) = (iv.lo.scale(c), iv.hi.scale(c));
                if flip {
                    Interval { lo: b, hi: a }
                } else {
                    Interval { lo: a, hi: b }
                }
            })
            .collect();
        Ok(Window1D { intervals: merge(ivs) })
    }

    /// `-W`.
    pub fn reflect(&self) -> Window1D {
        self.scale(&Rational::integer(-1)).expect("nonzero factor")
    }

    /// Closed intervals `[a_i - b_j, b_i - a_j]` for every ordered pair.
    pub fn pair_differences(&self) -> Vec<(usize, usize, Interval)> {
        let mut out = Vec::with_capacity(self.intervals.len().pow(2));
        for (i, x) in self.intervals.iter().enumerate() {
            for (j, y) in self.intervals.iter().enumerate() {
                out.push((
                    i,
                    j,
                    Interval {
                        lo: qsub(&x.lo, &y.hi),
                        hi: qsub(&x.hi, &y.lo),
                    },
                ));
            }
        }
        out
    }

    /// The Minkowski difference `W - W`.
    pub fn difference(&self) -> Window1D {
        Window1D {
            intervals: merge(self.pair_differences().into_iter().map(|(_, _, iv)| iv).collect()),
        }
    }

    /// A closed thickening `W + [-δ, δ]` whose difference set exceeds `W - W`
    /// in measure by less than `eps`. Uses `δ = eps / (8c)` with `c` the number
    /// of components of `W - W`, so the excess is at most `eps / 2`.
    pub fn thicken(&self, eps: &Rational) -> Result<(Window1D, Rational)> {
        if !eps.is_positive() {
            return Err(Error::pre("thickening needs eps > 0"));
        }
        let components = self.difference().interval_count() as i64;
        let delta = eps / &Rational::integer(8 * components);
        let ivs = self
            .intervals
            .iter()
            .map(|iv| Interval {
                lo: iv.lo.add_rational(&-&delta),
                hi: iv.hi.add_rational(&delta),
            })
            .collect();
        Ok((Window1D { intervals: merge(ivs) }, delta))
    }

    /// A pair of rationals `(q1, q2)` in `W` with `q1 - q2 = d`, if one exists.
    pub fn difference_witness(&self, d: &Rational) -> Option<(Rational, Rational)> {
        let dq = QuadExtReal::from(d.clone());
        for (i, j, iv) in self.pair_differences() {
            let (x, y) = (&self.intervals[i], &self.intervals[j]);
            match (qcmp(&iv.lo, &dq), qcmp(&dq, &iv.hi)) {
                (Ordering::Less, Ordering::Less) => {
                    // q2 ranges over the open interval (max(a_j, a_i - d), min(b_j, b_i - d))
                    let lo = max_q(&y.lo, &x.lo.add_rational(&-d));
                    let hi = min_q(&y.hi, &x.hi.add_rational(&-d));
                    let q2 = rational_between(&lo, &hi);
                    return Some((&q2 + d, q2));
                }
                (Ordering::Equal, _) => {
                    if let (Some(q1), Some(q2)) = (x.lo.as_rational(), y.hi.as_rational()) {
                        return Some((q1.clone(), q2.clone()));
                    }
                }
                (_, Ordering::Equal) => {
                    if let (Some(q1), Some(q2)) = (x.hi.as_rational(), y.lo.as_rational()) {
                        return Some((q1.clone(), q2.clone()));
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// Rational points of `W - W` that are not differences of two rationals of
    /// `W`, computed from the finitely many candidate endpoints.
    pub fn exceptional_differences(&self) -> Vec<Rational> {
        let diff = self.difference();
        let mut out: Vec<Rational> = self
            .pair_differences()
            .into_iter()
            .flat_map(|(_, _, iv)| [iv.lo, iv.hi])
            .filter_map(|e| e.as_rational().cloned())
            .filter(|d| diff.contains(d) && self.difference_witness(d).is_none())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// ASCII rendering using `sqrt(k)`.
    pub fn to_ascii(&self) -> String {
        self.intervals
            .iter()
            .map(|iv| format!("[{},{}]", iv.lo.to_ascii(), iv.hi.to_ascii()))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn max_q(x: &QuadExtReal, y: &QuadExtReal) -> QuadExtReal {
    if qcmp(x, y) == Ordering::Less {
        y.clone()
    } else {
        x.clone()
    }
}

fn min_q(x: &QuadExtReal, y: &QuadExtReal) -> QuadExtReal {
    if qcmp(x, y) == Ordering::Greater {
        y.clone()
    } else {
        x.clone()
    }
}

fn merge(mut ivs: Vec<Interval>) -> Vec<Interval> {
    ivs.sort_by(|x, y| qcmp(&x.lo, &y.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            Some(last) if qcmp(&iv.lo, &last.hi) != Ordering::Greater => {
                if qcmp(&iv.hi, &last.hi) == Ordering::Greater {
                    last.hi = iv.hi;
                }
            }
            _ => out.push(iv),
        }
    }
    out
}

impl fmt::Display for Window1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|iv| format!("[{},{}]", iv.lo, iv.hi))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

impl fmt::Debug for Window1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Window1D {
    type Err = Error;

    /// `[a,b];[c,d]` with quadratic-real endpoints. A reversed interval is a
    /// parse error; a zero-length one is a precondition violation.
    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut column = 1;
        for part in s.split(';') {
            let body = part
                .trim()
                .strip_prefix('[')
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(|| Error::parse(column, format!("expected [a,b], found {part:?}")))?;
            let (a, b) = body
                .split_once(',')
                .ok_or_else(|| Error::parse(column + 1, "expected a comma between endpoints"))?;
            let lo: QuadExtReal = a.parse().map_err(|e: Error| e.shifted(column))?;
            let hi: QuadExtReal = b.parse().map_err(|e: Error| e.shifted(column + a.len() + 1))?;
            if lo.try_cmp(&hi).map_err(|e| Error::parse(column, e.to_string()))? == Ordering::Greater {
                return Err(Error::parse(column, format!("empty interval [{a},{b}]")));
            }
            pairs.push((lo, hi));
            column += part.len() + 1;
        }
        Window1D::new(pairs)
    }
}

/// The dilated, translated generalized Farey fractions `u·𝔉(W + τ)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FareySpec {
    pub dilation: ValuationProfile,
    pub window: Window1D,
    pub translation: Rational,
}

impl FareySpec {
    pub fn new(dilation: ValuationProfile, window: Window1D, translation: Rational) -> Result<Self> {
        if !dilation.is_integral() {
            return Err(Error::pre("dilation must be an adelic integer (all exponents >= 0)"));
        }
        Ok(FareySpec {
            dilation,
            window,
            translation,
        })
    }

    pub fn plain(window: Window1D) -> Self {
        FareySpec {
            dilation: ValuationProfile::new(),
            window,
            translation: Rational::zero(),
        }
    }

    pub fn dilated(dilation: ValuationProfile, window: Window1D) -> Result<Self> {
        FareySpec::new(dilation, window, Rational::zero())
    }

    /// `W + τ`.
    pub fn effective_window(&self) -> Window1D {
        self.window.translate(&self.translation)
    }

    /// The same dilation and translation with window `W - W`.
    pub fn with_difference_window(&self) -> FareySpec {
        FareySpec {
            dilation: self.dilation.clone(),
            window: self.effective_window().difference(),
            translation: Rational::zero(),
        }
    }
}

impl fmt::Display for FareySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dilate={}", self.dilation)?;
        writeln!(f, "window={}", self.window)?;
        writeln!(f, "translate={}", self.translation)
    }
}

impl FromStr for FareySpec {
    type Err = Error;

    /// Line-oriented `key=value` block with keys `dilate`, `window`,
    /// `translate`. Blank lines and `#` comments are skipped; `window` is
    /// required.
    fn from_str(s: &str) -> Result<Self> {
        let mut dilation = ValuationProfile::new();
        let mut window = None;
        let mut translation = Rational::zero();
        for (idx, raw) in s.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(1, "expected key=value").at_line(line_no))?;
            let offset = key.len() + 1;
            let at = |e: Error| e.shifted(offset).at_line(line_no);
            match key.trim() {
                "dilate" => dilation = value.trim().parse().map_err(at)?,
                "window" => window = Some(value.trim().parse().map_err(at)?),
                "translate" => translation = value.trim().parse().map_err(at)?,
                other => return Err(Error::parse(1, format!("unknown key {other:?}")).at_line(line_no)),
            }
        }
        let window = window.ok_or_else(|| Error::parse(1, "missing window"))?;
        FareySpec::new(dilation, window, translation)
    }
}

/// Sorted, duplicate-free rational tags `q`, each standing for `u·ι(q)`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RationalPointSet {
    points: Vec<Rational>,
    dilation: ValuationProfile,
}

impl RationalPointSet {
    pub fn new(mut points: Vec<Rational>, dilation: ValuationProfile) -> Self {
        points.sort();
        points.dedup();
        RationalPointSet { points, dilation }
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn dilation(&self) -> &ValuationProfile {
        &self.dilation
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.points.binary_search(q).is_ok()
    }

    pub fn is_subset_of(&self, other: &RationalPointSet) -> bool {
        self.points.iter().all(|q| other.contains(q))
    }

    pub fn into_points(self) -> Vec<Rational> {
        self.points
    }
}

/// Spacing `r` of the lattice `rℤ` of tags `q` with `u·ι(q) ∈ F`.
pub fn lattice_spacing(spec: &FareySpec, f: &AdelicBox) -> Rational {
    spacing_for(&spec.dilation, f)
}

pub(crate) fn spacing_for(dilation: &ValuationProfile, f: &AdelicBox) -> Rational {
    let shifted = f.exponents().add(dilation);
    shifted.iter().map(|(p, a)| Rational::prime_power(p, -a)).product()
}

/// `#(rℤ ∩ W)`, summed interval by interval with exact floors and ceilings.
pub fn count_lattice_in_window(r: &Rational, window: &Window1D) -> BigInt {
    let inv = r.recip().expect("positive spacing");
    window
        .intervals()
        .iter()
        .map(|iv| {
            let hi = iv.hi.scale(&inv).floor();
            let lo = iv.lo.scale(&inv).ceil();
            let n: BigInt = hi - lo + 1;
            if n.is_negative() {
                BigInt::zero()
            } else {
                n
            }
        })
        .sum()
}

/// Enumerates `rℤ ∩ W` in increasing order, refusing more than `cap` points.
pub fn lattice_points_in_window(r: &Rational, window: &Window1D, cap: u64) -> Result<Vec<Rational>> {
    Ok(lattice_numerators(r, window, cap)?
        .into_iter()
        .map(|m| r * &Rational::integer(m))
        .collect())
}

/// The integers `m` with `m·r ∈ W`, in increasing order.
pub fn lattice_numerators(r: &Rational, window: &Window1D, cap: u64) -> Result<Vec<BigInt>> {
    let total = count_lattice_in_window(r, window);
    if total > BigInt::from(cap) {
        return Err(Error::CapOverflow {
            needed: total.to_string(),
            cap,
        });
    }
    let inv = r.recip().expect("positive spacing");
    let mut out = Vec::with_capacity(total.to_usize().unwrap_or(0));
    for iv in window.intervals() {
        let mut m = iv.lo.scale(&inv).ceil();
        let hi = iv.hi.scale(&inv).floor();
        while m <= hi {
            out.push(m.clone());
            m += 1;
        }
    }
    Ok(out)
}

/// `u·𝔉(W + τ) ∩ F`, as rational tags.
pub fn farey_points(spec: &FareySpec, f: &AdelicBox, cap: u64) -> Result<RationalPointSet> {
    let r = lattice_spacing(spec, f);
    let pts = lattice_points_in_window(&r, &spec.effective_window(), cap)?;
    Ok(RationalPointSet::new(pts, spec.dilation.clone()))
}

/// Closed-form `|u·𝔉(W + τ) ∩ F|`.
pub fn count_points(spec: &FareySpec, f: &AdelicBox) -> BigInt {
    count_lattice_in_window(&lattice_spacing(spec, f), &spec.effective_window())
}

/// Exact `|(P - P) ∩ F|` for `P = u·𝔉(W + τ)`: the lattice points of `W - W`
/// minus the exceptional differences that fall on the lattice.
pub fn count_differences(spec: &FareySpec, f: &AdelicBox) -> BigInt {
    let r = lattice_spacing(spec, f);
    let w = spec.effective_window();
    let all = count_lattice_in_window(&r, &w.difference());
    let missing = w
        .exceptional_differences()
        .iter()
        .filter(|d| (*d / &r).is_integer())
        .count();
    all - BigInt::from(missing)
}

/// Box `F'` generating differences in `F`: every exponent on the support of
/// `F` is raised by `step`, and primes of rational window endpoints (or `2`,
/// if nothing else is available) enter with exponent `step`.
pub fn generating_box(spec: &FareySpec, f: &AdelicBox, step: i64) -> AdelicBox {
    let mut extra: Vec<Prime> = spec
        .effective_window()
        .intervals()
        .iter()
        .flat_map(|iv| [&iv.lo, &iv.hi])
        .filter_map(|x| x.as_rational())
        .flat_map(|x| crate::adelic::prime_factors(x.denom()))
        .collect();
    if extra.is_empty() && f.exponents().is_empty() {
        extra.push(Prime::new(2).expect("prime"));
    }
    let mut profile = ValuationProfile::from_entries(f.exponents().iter().map(|(p, e)| (p, e + step)));
    for p in extra {
        if profile.get(p) == 0 && f.exponent(p) == 0 {
            profile.set(p, step);
        }
    }
    AdelicBox::new(profile)
}

/// `(P - P) ∩ F`, from pairwise differences of the points of `P ∩ F'` where
/// `F'` is [`generating_box`]`(F, step)`. The step grows until the enumeration
/// reaches the exact count, so every difference with some rational witness is
/// found.
pub fn difference_points(spec: &FareySpec, f: &AdelicBox, step: i64, cap: u64) -> Result<RationalPointSet> {
    if step < 1 {
        return Err(Error::pre("generating box step must be >= 1"));
    }
    let target = count_differences(spec, f);
    let mut s = step;
    loop {
        let found = differences_via(spec, f, &generating_box(spec, f, s), cap)?;
        if BigInt::from(found.len()) >= target {
            return Ok(found);
        }
        s += 1;
    }
}

fn differences_via(spec: &FareySpec, f: &AdelicBox, generating: &AdelicBox, cap: u64) -> Result<RationalPointSet> {
    let fine = lattice_spacing(spec, generating);
    let coarse = lattice_spacing(spec, f);
    let ratio = (&coarse / &fine).numer().clone();
    let base = lattice_numerators(&fine, &spec.effective_window(), cap)?;
    let n = base.len() as u64;
    if n.saturating_mul(n) > cap.saturating_mul(64) {
        return Err(Error::CapOverflow {
            needed: (n as u128 * n as u128).to_string(),
            cap,
        });
    }
    let small: Option<Vec<i64>> = base.iter().map(|m| m.to_i64().filter(|v| v.abs() < 1 << 62)).collect();
    let mut diffs: Vec<BigInt> = match (small, ratio.to_i64()) {
        (Some(ms), Some(k)) => {
            let mut ds: Vec<i64> = ms
                .par_iter()
                .flat_map_iter(|x| ms.iter().map(move |y| x - y).filter(move |d| d % k == 0))
                .collect();
            ds.par_sort_unstable();
            ds.dedup();
            ds.into_iter().map(BigInt::from).collect()
        }
        _ => base
            .par_iter()
            .flat_map_iter(|x| {
                let ratio = &ratio;
                base.iter().map(move |y| x - y).filter(move |d| (d % ratio).is_zero())
            })
            .collect(),
    };
    diffs.sort();
    diffs.dedup();
    let pts = diffs.into_iter().map(|d| &fine * &Rational::integer(d)).collect();
    Ok(RationalPointSet::new(pts, spec.dilation.clone()))
}

/// Rationals of `W - W` with denominator at most `cap` that are not
/// differences of two rationals of `W` (here `W` includes the translation).
///
/// Each denominator is scanned in bulk: numerators strictly inside a pair
/// interval `(a_i - b_j, b_i - a_j)` are differences, so only the uncovered
/// numerators need an individual witness search.
pub fn exceptional_points(spec: &FareySpec, cap: u64) -> RationalPointSet {
    let w = spec.effective_window();
    let pairs = w.pair_differences();
    let diff = w.difference();
    let found: Vec<Rational> = (1..=cap)
        .into_par_iter()
        .flat_map_iter(|q| {
            let qr = Rational::integer(q);
            let mut covered: Vec<(BigInt, BigInt)> = pairs
                .iter()
                .map(|(_, _, iv)| (iv.lo.scale(&qr).floor() + 1, iv.hi.scale(&qr).ceil() - 1))
                .filter(|(a, b)| a <= b)
                .collect();
            covered.sort();
            let mut out = Vec::new();
            for comp in diff.intervals() {
                let mut m = comp.lo.scale(&qr).ceil();
                let hi = comp.hi.scale(&qr).floor();
                while m <= hi {
                    match covered.iter().find(|(a, b)| a <= &m && &m <= b) {
                        Some((_, b)) => m = b + 1,
                        None => {
                            if m.gcd(&BigInt::from(q)).is_one() {
                                let d = Rational::new(m.clone(), q).expect("q >= 1");
                                if w.difference_witness(&d).is_none() {
                                    out.push(d);
                                }
                            }
                            m += 1;
                        }
                    }
                }
            }
            out
        })
        .collect();
    RationalPointSet::new(found, spec.dilation.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn w(s: &str) -> Window1D {
        s.parse().unwrap()
    }

    fn q(s: &str) -> QuadExtReal {
        s.parse().unwrap()
    }

    fn rats(v: &[&str]) -> Vec<Rational> {
        v.iter().map(|s| r(s)).collect()
    }

    #[test]
    fn measures() {
        assert_eq!(w("[0,1]").measure(), q("1"));
        assert_eq!(w("[0,1/4];[1/2,3/4]").measure(), q("1/2"));
        assert_eq!(w("[√2,1+√2]").measure(), q("1"));
    }

    #[test]
    fn differences() {
        assert_eq!(w("[0,1]").difference(), w("[-1,1]"));
        let d = w("[0,1/4];[1/2,3/4]").difference();
        assert_eq!(d, w("[-3/4,3/4]"));
        assert_eq!(d.measure(), q("3/2"));
        assert_eq!(w("[√2,1+√2]").difference(), w("[-1,1]"));
    }

    #[test]
    fn normalization_merges_touching() {
        assert_eq!(w("[1/2,1];[0,1/2]"), w("[0,1]"));
        assert_eq!(w("[0,2];[1,3]").interval_count(), 1);
        assert!("[0,0]".parse::<Window1D>().is_err());
        assert!(matches!("[1,0]".parse::<Window1D>(), Err(Error::Parse { .. })));
        assert!(matches!(
            "[√2,√3]".parse::<Window1D>(),
            Err(Error::Parse { .. }) | Err(Error::MixedRadicals(..))
        ));
        assert!("[0,1];[√2,2]".parse::<Window1D>().is_ok());
        assert!("[0,√2];[2,√5+1]".parse::<Window1D>().is_err());
    }

    #[test]
    fn window_text_round_trip() {
        for s in ["[0,1]", "[0,1/4];[1/2,3/4]", "[√2,1+√2]", "[-3/2,-1];[5,6]"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert_eq!(w("[sqrt(2),1+sqrt(2)]"), w("[√2,1+√2]"));
        assert_eq!(w(&w("[√2,1+√2]").to_ascii()), w("[√2,1+√2]"));
    }

    #[test]
    fn thickening_bounds_the_excess() {
        let (t, delta) = w("[0,1]").thicken(&r("1/10")).unwrap();
        assert_eq!(delta, r("1/80"));
        assert_eq!(t, w("[-1/80,81/80]"));
        for (win, eps) in [
            ("[0,1]", "1/10"),
            ("[0,1];[2,3]", "1/2"),
            ("[0,1]", "4"),
            ("[0,1/10];[1/3,1/2];[5,7]", "1/100"),
        ] {
            let win = w(win);
            let eps = r(eps);
            let (t, _) = win.thicken(&eps).unwrap();
            let excess = t
                .difference()
                .measure()
                .checked_sub(&win.difference().measure())
                .unwrap();
            assert!(excess.cmp_rational(&eps) == Ordering::Less, "excess {excess} vs {eps}");
            assert!(excess.signum() > 0);
        }
        assert!(w("[0,1]").thicken(&r("0")).is_err());
    }

    #[test]
    fn spacing_examples() {
        let plain = FareySpec::plain(w("[0,1]"));
        assert_eq!(lattice_spacing(&plain, &AdelicBox::of(&[(2, 1), (3, 1)])), r("1/6"));
        let dil = FareySpec::dilated(ValuationProfile::of(&[(2, 1)]), w("[0,1]")).unwrap();
        assert_eq!(lattice_spacing(&dil, &AdelicBox::of(&[(2, 2)])), r("1/8"));
        assert_eq!(lattice_spacing(&plain, &AdelicBox::of(&[(2, -1)])), r("2"));
    }

    #[test]
    fn spacing_agrees_with_valuation_constraints() {
        // u = {2:1}, F = {2:2}: q qualifies iff v_2(q) >= -3 and q is p-integral elsewhere
        let dil = FareySpec::dilated(ValuationProfile::of(&[(2, 1)]), w("[0,1]")).unwrap();
        let f = AdelicBox::of(&[(2, 2)]);
        let spacing = lattice_spacing(&dil, &f);
        let shifted = AdelicBox::of(&[(2, 3)]);
        for den in 1..=16i64 {
            for num in -40..=40i64 {
                let x = Rational::frac(num, den);
                assert_eq!(shifted.contains_rational(&x), (&x / &spacing).is_integer());
            }
        }
    }

    #[test]
    fn farey_point_examples() {
        let f = AdelicBox::of(&[(2, 1), (3, 1)]);
        let pts = farey_points(&FareySpec::plain(w("[0,1]")), &f, 100).unwrap();
        assert_eq!(pts.len(), 7);
        assert_eq!(pts.points()[1], r("1/6"));

        let dil = FareySpec::dilated(ValuationProfile::of(&[(2, 1)]), w("[0,1/3]")).unwrap();
        let pts = farey_points(&dil, &AdelicBox::of(&[(2, 2)]), 100).unwrap();
        assert_eq!(pts.points(), rats(&["0", "1/8", "1/4"]).as_slice());

        let pts = farey_points(&FareySpec::plain(w("[0,1]")), &AdelicBox::integers(), 100).unwrap();
        assert_eq!(pts.points(), rats(&["0", "1"]).as_slice());
    }

    #[test]
    fn count_examples() {
        for n in 1..=3i64 {
            let f = AdelicBox::of(&[(2, n), (3, n), (5, n)]);
            let spec = FareySpec::plain(w("[0,1]"));
            let expected = BigInt::from(30i64.pow(n as u32) + 1);
            assert_eq!(count_points(&spec, &f), expected);
            assert_eq!(BigInt::from(farey_points(&spec, &f, 100_000).unwrap().len()), expected);
        }
        let spec = FareySpec::plain(w("[1/3,2/3]"));
        let f = AdelicBox::of(&[(3, 2)]);
        assert_eq!(count_points(&spec, &f), BigInt::from(4));
        assert_eq!(
            farey_points(&spec, &f, 10).unwrap().points(),
            rats(&["1/3", "4/9", "5/9", "2/3"]).as_slice()
        );

        let spec = FareySpec::plain(w("[√2,1+√2]"));
        let f = AdelicBox::of(&[(2, 3)]);
        assert_eq!(count_points(&spec, &f), BigInt::from(8));
        let pts = farey_points(&spec, &f, 10).unwrap();
        assert_eq!(pts.points()[0], r("3/2"));
        assert_eq!(pts.points()[7], r("19/8"));
    }

    #[test]
    fn cap_guard() {
        let f = AdelicBox::of(&[(2, 20)]);
        assert!(matches!(
            farey_points(&FareySpec::plain(w("[0,1]")), &f, 1000),
            Err(Error::CapOverflow { .. })
        ));
    }

    #[test]
    fn translation_shifts_window() {
        let spec = FareySpec::new(ValuationProfile::new(), w("[0,1]"), r("1/3")).unwrap();
        let pts = farey_points(&spec, &AdelicBox::of(&[(3, 1)]), 10).unwrap();
        assert_eq!(pts.points(), rats(&["1/3", "2/3", "1", "4/3"]).as_slice());
    }

    #[test]
    fn difference_point_examples() {
        let spec = FareySpec::plain(w("[0,1]"));
        let d = difference_points(&spec, &AdelicBox::integers(), 1, 1000).unwrap();
        assert_eq!(d.points(), rats(&["-1", "0", "1"]).as_slice());

        let d = difference_points(&spec, &AdelicBox::of(&[(2, 1)]), 1, 1000).unwrap();
        assert_eq!(d.points(), rats(&["-1", "-1/2", "0", "1/2", "1"]).as_slice());

        let spec = FareySpec::plain(w("[0,1/4];[1/2,3/4]"));
        let d = difference_points(&spec, &AdelicBox::of(&[(2, 2)]), 1, 1000).unwrap();
        assert_eq!(d.len(), 7);
        assert_eq!(d.points().first(), Some(&r("-3/4")));
    }

    #[test]
    fn difference_counts_match_enumeration() {
        for (win, f) in [
            ("[0,1]", AdelicBox::of(&[(2, 2), (3, 1)])),
            ("[√2,1+√2]", AdelicBox::of(&[(2, 3)])),
            ("[0,1/4];[1/2,3/4]", AdelicBox::of(&[(2, 3)])),
            ("[1/3,2/3]", AdelicBox::of(&[(3, 2), (5, 1)])),
        ] {
            let spec = FareySpec::plain(w(win));
            let enumerated = difference_points(&spec, &f, 1, 1_000_000).unwrap();
            assert_eq!(BigInt::from(enumerated.len()), count_differences(&spec, &f), "{win}");
            let target = farey_points(&spec.with_difference_window(), &f, 1_000_000).unwrap();
            assert!(enumerated.is_subset_of(&target));
        }
    }

    #[test]
    fn exceptional_examples() {
        assert!(exceptional_points(&FareySpec::plain(w("[0,1]")), 50).is_empty());
        let e = exceptional_points(&FareySpec::plain(w("[√2,1+√2]")), 50);
        assert_eq!(e.points(), rats(&["-1", "1"]).as_slice());
        assert!(exceptional_points(&FareySpec::plain(w("[1/3,2/3]")), 50).is_empty());
        assert_eq!(w("[√2,1+√2]").exceptional_differences(), rats(&["-1", "1"]));
    }

    /// Independent oracle: a rational `d` counts as a difference when some
    /// rational `q2 ∈ W` with denominator at most 60 has `q2 + d ∈ W`.
    fn naive_is_difference(win: &Window1D, d: &Rational) -> bool {
        let lo = win.inf().floor();
        let hi = win.sup().ceil();
        for den in 1..=60i64 {
            let mut m = &lo * den;
            while m <= &hi * den {
                let q2 = Rational::new(m.clone(), den).unwrap();
                if win.contains(&q2) && win.contains(&(&q2 + d)) {
                    return true;
                }
                m += 1;
            }
        }
        false
    }

    #[test]
    fn exceptional_search_matches_naive_oracle() {
        for win in [
            "[√2,1+√2]",
            "[0,1]",
            "[1/3,√2]",
            "[-√2,√2]",
            "[0,1/4];[1/2,3/4]",
            "[√2,2√2];[3+√2,5]",
        ] {
            let win = w(win);
            let spec = FareySpec::plain(win.clone());
            let fast = exceptional_points(&spec, 12);
            let diff = win.difference();
            let mut naive = Vec::new();
            for den in 1..=12i64 {
                let lo = diff.inf().floor() * den;
                let hi = diff.sup().ceil() * den;
                let mut m = lo;
                while m <= hi {
                    let d = Rational::new(m.clone(), den).unwrap();
                    if d.denom() == &BigInt::from(den) && diff.contains(&d) && !naive_is_difference(&win, &d) {
                        naive.push(d);
                    }
                    m += 1;
                }
            }
            naive.sort();
            assert_eq!(fast.points(), naive.as_slice(), "{win}");
        }
    }

    #[test]
    fn witnesses_are_valid() {
        let win = w("[√2,1+√2];[3,7/2]");
        for d in ["0", "1/2", "-3/2", "9/10", "2", "-2"] {
            let d = r(d);
            if let Some((a, b)) = win.difference_witness(&d) {
                assert!(win.contains(&a) && win.contains(&b));
                assert_eq!(&a - &b, d);
            }
        }
    }

    #[test]
    fn spec_block_round_trip() {
        let text = "dilate=2:1\nwindow=[0,1/3]\ntranslate=1/7\n";
        let spec: FareySpec = text.parse().unwrap();
        assert_eq!(spec.to_string(), text);
        let err = "window=[0,1]\ndilate=2:x\n".parse::<FareySpec>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert!("dilate=2:-1\nwindow=[0,1]".parse::<FareySpec>().is_err());
    }
}
