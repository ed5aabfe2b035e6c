//! Følner schedules on the finite adeles and exact density tables.
//!
//! A schedule assigns each prime an entry step `s_p`; from then on its box
//! exponent grows by one per step: `e_p(n) = max(0, n - s_p + 1)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::adelic::{adelic_norm, AdelicBox, ValuationProfile, DEFAULT_PRIME_CUTOFF};
use crate::error::{Error, Result};
use crate::exactnum::{primes_up_to, Prime, QuadExtReal, Rational};
use crate::modelsets::{count_differences, count_points, FareySpec, Window1D};

/// Significant digits of the decimal columns.
pub const DECIMAL_DIGITS: usize = 12;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FolnerSchedule {
    entries: Vec<(Prime, u64)>,
}

impl FolnerSchedule {
    /// Primes with their entry steps (each at least 1).
    pub fn new(mut entries: Vec<(Prime, u64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::pre("schedule needs at least one prime"));
        }
        if entries.iter().any(|&(_, s)| s == 0) {
            return Err(Error::pre("entry steps start at 1"));
        }
        entries.sort();
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::pre("schedule lists a prime twice"));
        }
        Ok(FolnerSchedule { entries })
    }

    /// All listed primes enter at step 1, so `e_p(n) = n`.
    pub fn uniform(primes: &[u64]) -> Result<Self> {
        let entries = primes
            .iter()
            .map(|&p| Ok((Prime::new(p)?, 1)))
            .collect::<Result<Vec<_>>>()?;
        FolnerSchedule::new(entries)
    }

    /// The k-th prime up to `cutoff` enters at step k.
    pub fn staggered(cutoff: u64) -> Result<Self> {
        let entries = primes_up_to(cutoff).into_iter().zip(1u64..).collect::<Vec<_>>();
        FolnerSchedule::new(entries)
    }

    pub fn entries(&self) -> &[(Prime, u64)] {
        &self.entries
    }

    pub fn exponent(&self, p: Prime, n: u64) -> i64 {
        self.entries
            .iter()
            .find(|(q, _)| *q == p)
            .map_or(0, |&(_, s)| (n + 1).saturating_sub(s) as i64)
    }

    /// `F_n`.
    pub fn box_at(&self, n: u64) -> AdelicBox {
        AdelicBox::new(ValuationProfile::from_entries(
            self.entries.iter().map(|&(p, s)| (p, (n + 1).saturating_sub(s) as i64)),
        ))
    }

    /// Largest prime that has entered by step `n`.
    pub fn cutoff_at(&self, n: u64) -> Option<Prime> {
        self.entries.iter().filter(|&&(_, s)| s <= n).map(|&(p, _)| p).max()
    }

    /// First step whose box contains the profile, if any.
    pub fn first_containing(&self, v: &ValuationProfile) -> Option<u64> {
        let mut n = 1;
        for (p, k) in v.iter() {
            if k >= 0 {
                continue;
            }
            let &(_, s) = self.entries.iter().find(|(q, _)| *q == p)?;
            n = n.max(s + (-k) as u64 - 1);
        }
        Some(n)
    }
}

impl Default for FolnerSchedule {
    fn default() -> Self {
        FolnerSchedule::uniform(&[2, 3, 5]).expect("small primes")
    }
}

impl fmt::Display for FolnerSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(p, s)| if *s == 1 { p.to_string() } else { format!("{p}@{s}") })
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for FolnerSchedule {
    type Err = Error;

    /// `2,3,5` (all entering at step 1), `2,3@2,7@4` with explicit entry steps,
    /// or `staggered` / `staggered:<cutoff>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("staggered") {
            let cutoff = match rest.strip_prefix(':') {
                Some(c) => c.parse().map_err(|_| Error::parse(11, format!("bad cutoff {c:?}")))?,
                None if rest.is_empty() => DEFAULT_PRIME_CUTOFF,
                None => return Err(Error::parse(10, "expected ':' after staggered")),
            };
            return FolnerSchedule::staggered(cutoff);
        }
        let mut entries = Vec::new();
        let mut column = 1;
        for part in s.split(',') {
            let (p, step) = match part.split_once('@') {
                Some((p, st)) => (
                    p,
                    st.parse::<u64>()
                        .map_err(|_| Error::parse(column + p.len() + 1, format!("bad entry step {st:?}")))?,
                ),
                None => (part, 1),
            };
            let p: Prime = p.parse().map_err(|e: Error| e.shifted(column - 1))?;
            entries.push((p, step));
            column += part.len() + 1;
        }
        FolnerSchedule::new(entries)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DensityRow {
    pub n: u64,
    pub count: BigInt,
    pub measure: Rational,
    pub ratio: Rational,
    pub bound: Rational,
}

impl DensityRow {
    /// `|ratio - target| <= bound`, decided exactly.
    pub fn within_bound(&self, target: &QuadExtReal) -> bool {
        let gap = target.add_rational(&-&self.ratio).abs();
        gap.cmp_rational(&self.bound) != Ordering::Greater
    }

    pub fn csv_fields(&self, target: Option<&QuadExtReal>) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.count.to_string(),
            self.measure.to_string(),
            self.ratio.to_string(),
            target.map(QuadExtReal::to_ascii).unwrap_or_default(),
            self.bound.to_string(),
            self.measure.to_decimal(DECIMAL_DIGITS),
            self.ratio.to_decimal(DECIMAL_DIGITS),
        ]
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DensityReport {
    pub rows: Vec<DensityRow>,
    pub target: Option<QuadExtReal>,
}

impl DensityReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "n",
        "count",
        "measure",
        "ratio",
        "target",
        "abs_error_bound",
        "measure_dec",
        "ratio_dec",
    ];

    pub fn all_within_bound(&self) -> bool {
        match &self.target {
            Some(t) => self.rows.iter().all(|r| r.within_bound(t)),
            None => true,
        }
    }

    pub fn last(&self) -> Option<&DensityRow> {
        self.rows.last()
    }
}

/// Rows `1..=n_max` of `count(F_n)/m(F_n)`, each with error bound
/// `slack/m(F_n)`.
pub fn density_table<C>(
    schedule: &FolnerSchedule,
    n_max: u64,
    slack: u64,
    target: Option<QuadExtReal>,
    count: C,
) -> Result<DensityReport>
where
    C: Fn(&AdelicBox) -> Result<BigInt> + Sync,
{
    if n_max < 1 {
        return Err(Error::pre("n_max must be at least 1"));
    }
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let f = schedule.box_at(n);
            let count = count(&f)?;
            let measure = f.measure();
            let ratio = &Rational::integer(count.clone()) / &measure;
            let bound = &Rational::integer(slack) / &measure;
            Ok(DensityRow {
                n,
                count,
                measure,
                ratio,
                bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityReport { rows, target })
}

/// `‖u‖⁻¹·m(W)` for the effective window.
pub fn farey_density_target(spec: &FareySpec) -> QuadExtReal {
    let inv = adelic_norm(&spec.dilation).recip().expect("norm is positive");
    spec.window.measure().scale(&inv)
}

/// Densities of `u·𝔉(W + τ)` along the schedule, from the closed-form count.
pub fn density_estimate(spec: &FareySpec, schedule: &FolnerSchedule, n_max: u64) -> Result<DensityReport> {
    let slack = spec.window.interval_count() as u64 + 1;
    density_table(schedule, n_max, slack, Some(farey_density_target(spec)), |f| {
        Ok(count_points(spec, f))
    })
}

/// As [`density_estimate`], but counting enumerated points (cap-guarded).
pub fn density_by_enumeration(
    spec: &FareySpec,
    schedule: &FolnerSchedule,
    n_max: u64,
    cap: u64,
) -> Result<DensityReport> {
    let slack = spec.window.interval_count() as u64 + 1;
    density_table(schedule, n_max, slack, Some(farey_density_target(spec)), |f| {
        Ok(BigInt::from(crate::modelsets::farey_points(spec, f, cap)?.len()))
    })
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DoublingReport {
    pub points: DensityReport,
    pub differences: DensityReport,
    /// `d_n(P - P) / d_n(P)` per row.
    pub ratios: Vec<Rational>,
    /// `m(W - W)/m(W)`.
    pub limit: QuadExtReal,
}

/// Paired density tables for `P` and `P - P`.
pub fn doubling_report(spec: &FareySpec, schedule: &FolnerSchedule, n_max: u64) -> Result<DoublingReport> {
    let points = density_estimate(spec, schedule, n_max)?;
    let w = spec.effective_window();
    let diff_window: Window1D = w.difference();
    let slack = diff_window.interval_count() as u64 + 1 + w.exceptional_differences().len() as u64;
    let inv = adelic_norm(&spec.dilation).recip().expect("norm is positive");
    let target = diff_window.measure().scale(&inv);
    let differences = density_table(schedule, n_max, slack, Some(target), |f| Ok(count_differences(spec, f)))?;
    let ratios = points
        .rows
        .iter()
        .zip(&differences.rows)
        .map(|(p, d)| {
            if p.count == BigInt::from(0) {
                Rational::zero()
            } else {
                Rational::new(d.count.clone(), p.count.clone()).expect("nonzero count")
            }
        })
        .collect();
    let limit = diff_window
        .measure()
        .checked_div(&spec.window.measure())
        .expect("window measure is positive");
    Ok(DoublingReport {
        points,
        differences,
        ratios,
        limit,
    })
}

/// `m(F_n K)/m(F_n) = ∏ p^{max(e_p(n), f_p) - e_p(n)}` for `n = 1..=n_max`.
pub fn folner_diagnostic(schedule: &FolnerSchedule, k: &AdelicBox, n_max: u64) -> Vec<(u64, Rational)> {
    (1..=n_max).map(|n| (n, folner_ratio(&schedule.box_at(n), k))).collect()
}

pub fn folner_ratio(f: &AdelicBox, k: &AdelicBox) -> Rational {
    let excess = k.exponents().zip_with(f.exponents(), |kp, fp| kp.max(fp) - fp);
    excess.iter().map(|(p, a)| Rational::prime_power(p, a)).product()
}

/// `∩_{u ∈ U} (F - u)`: boxes are subgroups, so this is `F` when `U ⊆ F` and
/// empty otherwise.
pub fn adapted_core(f: &AdelicBox, u: &AdelicBox) -> Option<AdelicBox> {
    u.is_subset_of(f).then(|| f.clone())
}

/// `m(adapted_core(F_n, U)·K)/m(F_n)` per step; `None` while the core is
/// empty.
pub fn adapted_folner_ratios(
    schedule: &FolnerSchedule,
    u: &AdelicBox,
    k: &AdelicBox,
    n_max: u64,
) -> Vec<(u64, Option<Rational>)> {
    (1..=n_max)
        .map(|n| {
            let f = schedule.box_at(n);
            let ratio = adapted_core(&f, u).map(|core| &core.product(k).measure() / &f.measure());
            (n, ratio)
        })
        .collect()
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn small_box() -> impl Strategy<Value = AdelicBox> {
        prop::collection::vec((prop::sample::select(vec![2u64, 3, 5, 7, 11]), -3i64..6), 0..4).prop_map(|v| {
            AdelicBox::new(ValuationProfile::from_entries(
                v.into_iter().map(|(p, e)| (Prime::new(p).unwrap(), e)),
            ))
        })
    }

    proptest! {
        #[test]
        fn ratio_formula_matches_index(f in small_box(), k in small_box()) {
            // [F + K : F] = [K : K ∩ F]
            let index = &k.measure() / &k.intersection(&f).measure();
            prop_assert_eq!(folner_ratio(&f, &k), index);
        }

        #[test]
        fn absorption(f in small_box(), u in small_box()) {
            let core = adapted_core(&f, &u);
            prop_assert_eq!(core.is_some(), u.is_subset_of(&f));
            if let Some(c) = core {
                prop_assert_eq!(c, f);
            }
        }

        #[test]
        fn rows_are_monotone(n in 2u64..6) {
            let spec = FareySpec::plain("[0,1/3];[1/2,√2]".parse().unwrap());
            let rep = density_estimate(&spec, &FolnerSchedule::staggered(13).unwrap(), n).unwrap();
            for w in rep.rows.windows(2) {
                prop_assert!(w[0].count <= w[1].count);
                prop_assert!(w[0].measure <= w[1].measure);
            }
            prop_assert!(rep.all_within_bound());
        }
    }
}
