//! Finite unions of closed arcs on `𝕋 = ℝ/ℤ` and Kneser's inequality.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::Rational;

/// Arcs `[a, b]` with `0 <= a < b <= 1`, sorted, pairwise disjoint and not
/// touching. An arc through `0` is stored as `[a, 1]` and `[0, b]`; the full
/// circle is `[0, 1]`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ArcSet {
    arcs: Vec<(Rational, Rational)>,
}

impl ArcSet {
    /// Arcs given as `(start, end)`; `end < start` wraps through `0`.
    pub fn new(arcs: Vec<(Rational, Rational)>) -> Self {
        let spans = arcs
            .into_iter()
            .map(|(a, b)| {
                let len = if b < a { &(&b - &a) + &Rational::one() } else { &b - &a };
                (a, len)
            })
            .collect();
        ArcSet::from_spans(spans)
    }

    /// Arcs given as `(start, length)`.
    pub fn from_spans(spans: Vec<(Rational, Rational)>) -> Self {
        let one = Rational::one();
        let mut pieces = Vec::new();
        for (start, len) in spans {
            if len >= one {
                return ArcSet::full();
            }
            if !len.is_positive() {
                continue;
            }
            let a = start.fract();
            let b = &a + &len;
            if b <= one {
                pieces.push((a, b));
            } else {
                pieces.push((a, one.clone()));
                pieces.push((Rational::zero(), &b - &one));
            }
        }
        pieces.sort();
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match out.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        if out.len() == 1 && out[0].0.is_zero() && out[0].1 == one {
            return ArcSet::full();
        }
        ArcSet { arcs: out }
    }

    pub fn full() -> Self {
        ArcSet {
            arcs: vec![(Rational::zero(), Rational::one())],
        }
    }

    pub fn empty() -> Self {
        ArcSet { arcs: Vec::new() }
    }

    pub fn arcs(&self) -> &[(Rational, Rational)] {
        &self.arcs
    }

    pub fn is_full(&self) -> bool {
        self.arcs.len() == 1 && self.arcs[0].0.is_zero() && self.arcs[0].1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measure(&self) -> Rational {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let x = x.fract();
        self.arcs.iter().any(|(a, b)| a <= &x && &x <= b)
    }

    pub fn rotate(&self, c: &Rational) -> ArcSet {
        ArcSet::from_spans(self.arcs.iter().map(|(a, b)| (a + c, b - a)).collect())
    }

    /// Arcs as `(start, end)` with the pieces split at `0` joined again, so an
    /// arc through `0` reads `(a, 1 + b)`.
    pub fn circular_arcs(&self) -> Vec<(Rational, Rational)> {
        let mut arcs = self.arcs.clone();
        if arcs.len() >= 2 && arcs[0].0.is_zero() && arcs[arcs.len() - 1].1 == 1 {
            let (_, b0) = arcs.remove(0);
            let last = arcs.last_mut().expect("nonempty");
            last.1 = &b0 + &Rational::one();
        }
        arcs
    }

    /// Whether every arc of `self` lies in one arc of `other`.
    pub fn is_subset_of(&self, other: &ArcSet) -> bool {
        self.arcs
            .iter()
            .all(|(a, b)| other.arcs.iter().any(|(c, d)| c <= a && b <= d))
    }

    /// Largest denominator among the endpoints.
    pub fn max_denominator(&self) -> BigInt {
        self.arcs
            .iter()
            .flat_map(|(a, b)| [a.denom().clone(), b.denom().clone()])
            .max()
            .unwrap_or_else(|| BigInt::from(1))
    }
}

impl fmt::Display for ArcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.arcs.iter().map(|(a, b)| format!("{a},{b}")).collect();
        f.write_str(&parts.join(";"))
    }
}

impl fmt::Debug for ArcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "arcs({self})")
    }
}

impl FromStr for ArcSet {
    type Err = Error;

    /// `a,b;c,d` with rational endpoints; `a` in `[0, 1)`, `b` in `[0, 1]`,
    /// and `b < a` wraps through `0`.
    fn from_str(s: &str) -> Result<Self> {
        let mut arcs = Vec::new();
        let mut column = 1;
        for part in s.split(';') {
            let (a, b) = part
                .split_once(',')
                .ok_or_else(|| Error::parse(column, format!("expected a,b, found {part:?}")))?;
            let a: Rational = a.trim().parse().map_err(|e: Error| e.shifted(column - 1))?;
            let b: Rational = b
                .trim()
                .parse()
                .map_err(|e: Error| e.shifted(column + part.find(',').unwrap()))?;
            if a.is_negative() || a >= Rational::one() {
                return Err(Error::parse(column, format!("arc start {a} is outside [0,1)")));
            }
            if b.is_negative() || b > Rational::one() {
                return Err(Error::parse(column, format!("arc end {b} is outside [0,1]")));
            }
            arcs.push((a, b));
            column += part.len() + 1;
        }
        Ok(ArcSet::new(arcs))
    }
}

/// `C - C = ⋃ [a_i - b_j, b_i - a_j] mod 1`.
pub fn arc_difference(c: &ArcSet) -> ArcSet {
    let mut spans = Vec::with_capacity(c.arcs.len().pow(2));
    for (ai, bi) in &c.arcs {
        for (aj, bj) in &c.arcs {
            spans.push((ai - bj, &(bi - ai) + &(bj - aj)));
        }
    }
    ArcSet::from_spans(spans)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KneserCheck {
    pub m_diff: Rational,
    pub bound: Rational,
    pub holds: bool,
}

impl KneserCheck {
    pub fn is_equality(&self) -> bool {
        self.m_diff == self.bound
    }
}

fn check_range(c: &ArcSet) -> Result<Rational> {
    let m = c.measure();
    if !m.is_positive() || m > Rational::frac(1, 2) {
        return Err(Error::pre(format!("Kneser check needs 0 < m(C) <= 1/2, got {m}")));
    }
    Ok(m)
}

/// `(m(C - C), 2·m(C), m(C - C) >= 2·m(C))`.
pub fn kneser_check(c: &ArcSet) -> Result<KneserCheck> {
    let m = check_range(c)?;
    let m_diff = arc_difference(c).measure();
    let bound = &m * &Rational::integer(2);
    let holds = m_diff >= bound;
    Ok(KneserCheck { m_diff, bound, holds })
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CharacterPreimage {
    /// `C = χ⁻¹(I)` for `χ(z) = zⁿ`.
    pub n: usize,
    /// The arc of `C` with the smallest start, as `(start, end)`.
    pub base: (Rational, Rational),
}

/// `Some(n, base)` iff the arcs of `C` are `n` arcs of equal length whose
/// consecutive starts are exactly `1/n` apart.
pub fn kneser_equality_classify(c: &ArcSet) -> Option<CharacterPreimage> {
    if c.is_empty() || c.is_full() {
        return None;
    }
    let arcs = c.circular_arcs();
    let n = arcs.len();
    let len = &arcs[0].1 - &arcs[0].0;
    let step = Rational::frac(1, n as i64);
    for w in arcs.windows(2) {
        if &w[1].1 - &w[1].0 != len || &w[1].0 - &w[0].0 != step {
            return None;
        }
    }
    Some(CharacterPreimage {
        n,
        base: arcs[0].clone(),
    })
}

/// `|D - D|/N` on `ℤ_N`, where `D` collects the cells `[j/N, (j+1)/N)` inside
/// `C`. Every endpoint denominator must divide `N`.
pub fn zn_difference_measure(c: &ArcSet, n: u64) -> Result<Rational> {
    let nn = BigInt::from(n);
    let mut runs = Vec::new();
    for (a, b) in &c.arcs {
        let sa = a * &Rational::integer(nn.clone());
        let sb = b * &Rational::integer(nn.clone());
        if !sa.is_integer() || !sb.is_integer() {
            return Err(Error::pre(format!("arc endpoints of {c} are not multiples of 1/{n}")));
        }
        let (s, e) = (sa.numer().to_i64().unwrap(), sb.numer().to_i64().unwrap());
        runs.push((s, e - 1));
    }
    let n_i = n as i64;
    let mut delta = vec![0i64; n as usize + 1];
    let mut full = false;
    for &(s1, e1) in &runs {
        for &(s2, e2) in &runs {
            let lo = s1 - e2;
            let hi = e1 - s2;
            if hi - lo + 1 >= n_i {
                full = true;
                continue;
            }
            let lo = lo.rem_euclid(n_i);
            let hi = lo + (hi - (s1 - e2));
            if hi < n_i {
                delta[lo as usize] += 1;
                delta[hi as usize + 1] -= 1;
            } else {
                delta[lo as usize] += 1;
                delta[n as usize] -= 1;
                delta[0] += 1;
                delta[(hi - n_i) as usize + 1] -= 1;
            }
        }
    }
    if full {
        return Ok(Rational::one());
    }
    let mut acc = 0;
    let mut count = 0i64;
    for d in delta.iter().take(n as usize) {
        acc += d;
        if acc > 0 {
            count += 1;
        }
    }
    Ok(Rational::frac(count, n_i))
}

/// A random arc set with at most `max_arcs` arcs, endpoints in `(1/denom)ℤ`
/// and measure at most `1/2`. One draw in five is a character preimage.
pub fn random_arcset<R: Rng>(rng: &mut R, max_arcs: usize, denom: u64) -> ArcSet {
    let d = denom as i64;
    if rng.gen_ratio(1, 5) {
        let ns: Vec<i64> = (1..=max_arcs as i64).filter(|k| d % k == 0).collect();
        let n = ns[rng.gen_range(0..ns.len())];
        let j = rng.gen_range(1..=d / (2 * n));
        let start = rng.gen_range(0..d);
        let spans = (0..n)
            .map(|t| (Rational::frac(start + t * (d / n), d), Rational::frac(j, d)))
            .collect();
        return ArcSet::from_spans(spans);
    }
    let k = rng.gen_range(1..=max_arcs);
    let mut pts = rand::seq::index::sample(rng, denom as usize, 2 * k).into_vec();
    pts.sort_unstable();
    let offset = rng.gen_range(0..d);
    let arcs = |first: usize| -> ArcSet {
        let spans = (0..k)
            .map(|i| {
                let a = pts[(2 * i + first) % (2 * k)] as i64;
                let b = pts[(2 * i + first + 1) % (2 * k)] as i64;
                let len = (b - a).rem_euclid(d);
                (Rational::frac(a + offset, d), Rational::frac(len, d))
            })
            .collect();
        ArcSet::from_spans(spans)
    };
    let c = arcs(0);
    if c.measure() > Rational::frac(1, 2) {
        arcs(1)
    } else {
        c
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KneserMismatch {
    pub set: ArcSet,
    pub measure: Rational,
    pub equality: bool,
    pub classified: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KneserSuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub violations: usize,
    pub equalities: usize,
    pub classified: usize,
    pub mismatches: Vec<KneserMismatch>,
    pub zn_modulus: u64,
    pub zn_slack: Rational,
    pub zn_max_gap: Rational,
    pub zn_failures: usize,
}

impl KneserSuiteReport {
    /// Mismatches with `m(C) < 1/2`.
    pub fn mismatches_below_half(&self) -> usize {
        let half = Rational::frac(1, 2);
        self.mismatches.iter().filter(|m| m.measure < half).count()
    }
}

struct Trial {
    set: ArcSet,
    check: KneserCheck,
    classified: bool,
    gap: Rational,
}

/// Runs `trials` random arc sets through the bound, the classifier and the
/// `ℤ_N` cross-check. Trial `i` draws from stream `i` of the seeded generator,
/// so the report does not depend on thread count.
pub fn kneser_suite(
    seed: u64,
    trials: usize,
    max_arcs: usize,
    denom: u64,
    zn_modulus: u64,
) -> Result<KneserSuiteReport> {
    if !zn_modulus.is_multiple_of(denom) {
        return Err(Error::pre(
            "the cross-check modulus must be a multiple of the denominator",
        ));
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let set = random_arcset(&mut rng, max_arcs, denom);
            let check = kneser_check(&set)?;
            let classified = kneser_equality_classify(&set).is_some();
            let zn = zn_difference_measure(&set, zn_modulus)?;
            let gap = (&check.m_diff - &zn).abs();
            Ok(Trial {
                set,
                check,
                classified,
                gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let zn_slack = Rational::frac(2 * (max_arcs * max_arcs) as i64, zn_modulus as i64);
    let mut report = KneserSuiteReport {
        seed,
        trials,
        violations: 0,
        equalities: 0,
        classified: 0,
        mismatches: Vec::new(),
        zn_modulus,
        zn_slack: zn_slack.clone(),
        zn_max_gap: Rational::zero(),
        zn_failures: 0,
    };
    for t in results {
        let eq = t.check.is_equality();
        report.violations += usize::from(!t.check.holds);
        report.equalities += usize::from(eq);
        report.classified += usize::from(t.classified);
        if eq != t.classified {
            report.mismatches.push(KneserMismatch {
                measure: t.set.measure(),
                set: t.set,
                equality: eq,
                classified: t.classified,
            });
        }
        if t.gap > zn_slack {
            report.zn_failures += 1;
        }
        if t.gap > report.zn_max_gap {
            report.zn_max_gap = t.gap;
        }
    }
    Ok(report)
}
