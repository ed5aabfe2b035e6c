//! Lattices `ℤ[1/Q]·(u, t)` in `G × ℝ` and their cut-and-project sets.
//!
//! `G` is `ℚ_p`, a finite product `∏_{p∈S} ℚ_p`, or the finite adeles. A
//! lattice element is `s·(u, t)` with `s ∈ ℤ[1/Q]`; since the projection to `G`
//! is injective, points are stored by the scalar `s`.
//!
//! The intersection covolume is never computed as a transverse measure; only
//! its value `covol⁻¹·m(W - W)` for interval windows is reported.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::adelic::{adelic_norm, AdelicBox, ValuationProfile};
use crate::density::{density_table, DensityReport, FolnerSchedule};
use crate::error::{Error, Result};
use crate::exactnum::{Prime, QuadExtReal, Rational};
use crate::modelsets::{count_lattice_in_window, lattice_points_in_window, spacing_for, RationalPointSet, Window1D};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Group {
    SingleP(Prime),
    MultiP(Vec<Prime>),
    Adelic,
}

impl Group {
    /// Whether `p` is a coordinate of `G` (every prime is, for the adeles).
    pub fn has_prime(&self, p: Prime) -> bool {
        match self {
            Group::SingleP(q) => *q == p,
            Group::MultiP(s) => s.contains(&p),
            Group::Adelic => true,
        }
    }

    pub fn primes(&self) -> Option<Vec<Prime>> {
        match self {
            Group::SingleP(p) => Some(vec![*p]),
            Group::MultiP(s) => Some(s.clone()),
            Group::Adelic => None,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::SingleP(p) => write!(f, "qp:{p}"),
            Group::MultiP(s) => {
                let v: Vec<String> = s.iter().map(Prime::to_string).collect();
                write!(f, "prod:{}", v.join(","))
            }
            Group::Adelic => f.write_str("adelic"),
        }
    }
}

fn parse_primes(s: &str, column: usize) -> Result<Vec<Prime>> {
    let mut out = Vec::new();
    let mut col = column;
    for part in s.split(',') {
        out.push(
            part.trim()
                .parse::<Prime>()
                .map_err(|_| Error::parse(col, format!("invalid prime {part:?}")))?,
        );
        col += part.len() + 1;
    }
    out.sort();
    out.dedup();
    Ok(out)
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "adelic" {
            Ok(Group::Adelic)
        } else if let Some(p) = s.strip_prefix("qp:") {
            Ok(Group::SingleP(parse_primes(p, 4)?[0]))
        } else if let Some(ps) = s.strip_prefix("prod:") {
            Ok(Group::MultiP(parse_primes(ps, 6)?))
        } else {
            Err(Error::parse(
                1,
                format!("unknown group {s:?}; expected adelic, qp:p or prod:p,q"),
            ))
        }
    }
}

/// `Γ = ℤ[1/Q]·(u, t)` where `Q` is the prime set of `G`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LatticeSpec {
    group: Group,
    u: ValuationProfile,
    t: Rational,
}

impl LatticeSpec {
    pub fn new(group: Group, u: ValuationProfile, t: Rational) -> Result<Self> {
        if t.is_zero() {
            return Err(Error::pre("lattice needs t != 0"));
        }
        if !u.is_integral() {
            return Err(Error::pre("u must have nonnegative valuations"));
        }
        if let Some(p) = u.support().find(|&p| !group.has_prime(p)) {
            return Err(Error::pre(format!("u has a component at {p}, outside G")));
        }
        if let Group::MultiP(s) = &group {
            if s.is_empty() {
                return Err(Error::pre("product group needs at least one prime"));
            }
        }
        Ok(LatticeSpec { group, u, t })
    }

    /// `ℤ[1/p]·(1, 1)` in `ℚ_p × ℝ`.
    pub fn z_one_over(p: u64) -> Result<Self> {
        LatticeSpec::new(Group::SingleP(Prime::new(p)?), ValuationProfile::new(), Rational::one())
    }

    /// `ℚ·(u, t)` in `𝔸_fin × ℝ`.
    pub fn rationals(u: ValuationProfile, t: Rational) -> Result<Self> {
        LatticeSpec::new(Group::Adelic, u, t)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn u(&self) -> &ValuationProfile {
        &self.u
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    pub fn with_t(&self, t: Rational) -> Result<Self> {
        LatticeSpec::new(self.group.clone(), self.u.clone(), t)
    }

    fn check_box(&self, g_box: &AdelicBox) -> Result<()> {
        match g_box.exponents().support().find(|&p| !self.group.has_prime(p)) {
            Some(p) => Err(Error::pre(format!(
                "box has a component at {p}, outside G={}",
                self.group
            ))),
            None => Ok(()),
        }
    }

    /// Spacing `r` with `{s : s·u ∈ g_box} ∩ ℤ[1/Q] = rℤ`.
    pub fn spacing(&self, g_box: &AdelicBox) -> Result<Rational> {
        self.check_box(g_box)?;
        Ok(spacing_for(&self.u, g_box))
    }

    /// Real window for the scalar `s`: `W / t`.
    pub fn scalar_window(&self, w: &Window1D) -> Window1D {
        w.scale(&self.t.recip().expect("t != 0")).expect("t != 0")
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.group.primes() {
            Some(ps) => {
                let v: Vec<String> = ps.iter().map(Prime::to_string).collect();
                write!(f, "Z[1/{{{}}}]", v.join(","))?;
            }
            None => f.write_str("Q")?,
        }
        write!(f, "(u={},t={})@G={}", self.u, self.t, self.group)
    }
}

impl FromStr for LatticeSpec {
    type Err = Error;

    /// `Z[1/{2,3}](u=2:1,t=3/2)@G=prod:2,3`, `Z[1/2](u=,t=1)@G=qp:2` or
    /// `Q(u=,t=1)@G=adelic`. The `@G=` part may be omitted when the prime set
    /// determines the group.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (ring, rest, ring_len) = if let Some(rest) = s.strip_prefix("Q(") {
            (None, rest, 2)
        } else if let Some(rest) = s.strip_prefix("Z[1/") {
            let close = rest
                .find("](")
                .ok_or_else(|| Error::parse(5, "expected ](' after Z[1/..."))?;
            let inner = &rest[..close];
            let inner = inner
                .strip_prefix('{')
                .and_then(|x| x.strip_suffix('}'))
                .unwrap_or(inner);
            (Some(parse_primes(inner, 5)?), &rest[close + 2..], close + 6)
        } else {
            return Err(Error::parse(1, "expected Z[1/...](...) or Q(...)"));
        };
        let close = rest
            .find(')')
            .ok_or_else(|| Error::parse(ring_len + 1, "missing ')'"))?;
        let args = &rest[..close];
        let tail = &rest[close + 1..];
        let body = args
            .strip_prefix("u=")
            .ok_or_else(|| Error::parse(ring_len + 1, "expected u=..."))?;
        let (u_text, t_text) = body
            .rsplit_once(",t=")
            .ok_or_else(|| Error::parse(ring_len + 1, "expected ,t=..."))?;
        let u: ValuationProfile = u_text.parse().map_err(|e: Error| e.shifted(ring_len + 2))?;
        let t: Rational = t_text
            .parse()
            .map_err(|e: Error| e.shifted(ring_len + 2 + u_text.len() + 3))?;
        let group_col = ring_len + close + 2;
        let group = match tail.strip_prefix("@G=") {
            Some(g) => Some(g.parse::<Group>().map_err(|e| e.shifted(group_col + 2))?),
            None if tail.is_empty() => None,
            None => return Err(Error::parse(group_col, format!("unexpected trailing text {tail:?}"))),
        };
        let group = match (ring, group) {
            (None, None) | (None, Some(Group::Adelic)) => Group::Adelic,
            (Some(ps), None) if ps.len() == 1 => Group::SingleP(ps[0]),
            (Some(ps), None) => Group::MultiP(ps),
            (Some(ps), Some(g)) if g.primes().as_ref() == Some(&ps) => g,
            (_, Some(g)) => return Err(Error::pre(format!("prime set of the ring does not match G={g}"))),
        };
        LatticeSpec::new(group, u, t)
    }
}

/// `covol(Γ) = ‖u‖·|t|`, the norm taken over the primes of `G`.
pub fn covolume(lattice: &LatticeSpec) -> Rational {
    &adelic_norm(&lattice.u) * &lattice.t.abs()
}

/// Estimate `m(g_box)·2T / |Γ ∩ (g_box × [-T, T])|` by checking every
/// candidate scalar with denominator dividing the box's denominator bound.
pub fn covolume_by_counting(
    lattice: &LatticeSpec,
    g_box: &AdelicBox,
    t_bound: &Rational,
    cap: u64,
) -> Result<(Rational, u64)> {
    if !t_bound.is_positive() {
        return Err(Error::pre("T must be positive"));
    }
    lattice.check_box(g_box)?;
    let denom: BigInt = g_box
        .exponents()
        .add(&lattice.u)
        .iter()
        .filter(|&(_, a)| a > 0)
        .map(|(p, a)| BigInt::from(p.get()).pow(a as u32))
        .product();
    let limit = (t_bound / &lattice.t.abs() * Rational::integer(denom.clone())).floor();
    let candidates: BigInt = &limit * 2 + 1;
    if candidates > BigInt::from(cap) {
        return Err(Error::CapOverflow {
            needed: candidates.to_string(),
            cap,
        });
    }
    let lim: i64 = i64::try_from(&limit).expect("bounded by cap");
    let count: u64 = (-lim..=lim)
        .into_par_iter()
        .filter(|&m| {
            let s = Rational::new(m, denom.clone()).expect("positive denominator");
            in_lattice_box(lattice, g_box, &s)
        })
        .count() as u64;
    if count < 2 {
        return Err(Error::pre("too few lattice points for a counting estimate"));
    }
    let measure: Rational = g_box.measure();
    let estimate = &(&measure * &(t_bound * &Rational::integer(2))) / &Rational::integer(count);
    Ok((estimate, count))
}

/// Whether `s·(u, t)` is a lattice element whose `G`-part lies in `g_box`.
fn in_lattice_box(lattice: &LatticeSpec, g_box: &AdelicBox, s: &Rational) -> bool {
    if s.is_zero() {
        return true;
    }
    let profile = ValuationProfile::of_rational(s).expect("nonzero");
    let outside_ok = profile.iter().all(|(p, k)| k >= 0 || lattice.group.has_prime(p));
    let primes: std::collections::BTreeSet<Prime> = profile.support().chain(g_box.exponents().support()).collect();
    outside_ok
        && primes
            .into_iter()
            .filter(|&p| lattice.group.has_prime(p))
            .all(|p| profile.get(p) + lattice.u.get(p) >= -g_box.exponent(p))
}

/// A cut-and-project query: lattice, real window, truncation box in `G`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CapQuery {
    pub lattice: LatticeSpec,
    pub window: Window1D,
    pub g_box: AdelicBox,
    pub basepoint: Option<Basepoint>,
}

/// `(g₀, h₀)`; `g₀` is either a rational tag or known only by its profile.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Basepoint {
    pub g0: BaseG,
    pub h0: Rational,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BaseG {
    Tag(Rational),
    Profile(ValuationProfile),
}

impl CapQuery {
    pub fn new(lattice: LatticeSpec, window: Window1D, g_box: AdelicBox) -> Result<Self> {
        lattice.check_box(&g_box)?;
        Ok(CapQuery {
            lattice,
            window,
            g_box,
            basepoint: None,
        })
    }

    pub fn with_basepoint(mut self, g0: BaseG, h0: Rational) -> Self {
        self.basepoint = Some(Basepoint { g0, h0 });
        self
    }
}

/// Scalars `s` with `s·t ∈ W` and `s·u ∈ g_box`.
pub fn capset_points(query: &CapQuery, cap: u64) -> Result<RationalPointSet> {
    let r = query.lattice.spacing(&query.g_box)?;
    let w = query.lattice.scalar_window(&query.window);
    let pts = lattice_points_in_window(&r, &w, cap)?;
    Ok(RationalPointSet::new(pts, query.lattice.u.clone()))
}

/// Closed-form `|capset_points(query)|`.
pub fn capset_count(lattice: &LatticeSpec, window: &Window1D, g_box: &AdelicBox) -> Result<BigInt> {
    let r = lattice.spacing(g_box)?;
    Ok(count_lattice_in_window(&r, &lattice.scalar_window(window)))
}

/// `covol⁻¹·m(W)`.
pub fn intensity_value(lattice: &LatticeSpec, w: &Window1D) -> QuadExtReal {
    w.measure()
        .scale(&covolume(lattice).recip().expect("covolume is positive"))
}

/// Bounds `covol⁻¹·m(W° - W°) <= I <= covol⁻¹·m(W - W)`; they coincide for
/// finite unions of closed intervals.
pub fn icovol_bounds(lattice: &LatticeSpec, w: &Window1D) -> (QuadExtReal, QuadExtReal) {
    let v = w
        .difference()
        .measure()
        .scale(&covolume(lattice).recip().expect("covolume is positive"));
    (v.clone(), v)
}

/// `m(W - W)/m(W)`, at least 2, with equality exactly for one interval.
pub fn doubling_certificate(w: &Window1D) -> QuadExtReal {
    w.difference()
        .measure()
        .checked_div(&w.measure())
        .expect("positive window measure")
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReturnTimes {
    pub points: RationalPointSet,
    /// `false` when `g₀` was known only by its profile and no shift was applied.
    pub shifted: bool,
}

/// `-(capset for h₀ - W) + g₀`.
pub fn return_times(query: &CapQuery, cap: u64) -> Result<ReturnTimes> {
    let base = query
        .basepoint
        .as_ref()
        .ok_or_else(|| Error::pre("return times need a basepoint"))?;
    let shifted_window = query.window.reflect().translate(&base.h0);
    let sub = CapQuery {
        window: shifted_window,
        basepoint: None,
        ..query.clone()
    };
    let pts = capset_points(&sub, cap)?;
    let (offset, shifted) = match &base.g0 {
        BaseG::Tag(g) => (g.clone(), true),
        BaseG::Profile(_) => (Rational::zero(), false),
    };
    let out = pts.points().iter().map(|s| &offset - s).collect();
    Ok(ReturnTimes {
        points: RationalPointSet::new(out, query.lattice.u.clone()),
        shifted,
    })
}

/// Whether `Γ ∩ (V₁ × W) = {0}`.
pub fn lattice_discreteness_check(lattice: &LatticeSpec, v1: &AdelicBox, w: &Window1D, cap: u64) -> Result<bool> {
    let r = lattice.spacing(v1)?;
    let pts = lattice_points_in_window(&r, &lattice.scalar_window(w), cap)?;
    Ok(pts.iter().all(Rational::is_zero))
}

/// Nonzero lattice scalars `s` with `s·u ∈ V₁`, `s·t ∈ W`.
pub fn lattice_witnesses(lattice: &LatticeSpec, v1: &AdelicBox, w: &Window1D, cap: u64) -> Result<Vec<Rational>> {
    let r = lattice.spacing(v1)?;
    Ok(lattice_points_in_window(&r, &lattice.scalar_window(w), cap)?
        .into_iter()
        .filter(|s| !s.is_zero())
        .collect())
}

/// Densities of the cut-and-project set along a schedule whose primes lie in
/// `G`, with target [`intensity_value`].
pub fn capset_density(
    lattice: &LatticeSpec,
    w: &Window1D,
    schedule: &FolnerSchedule,
    n_max: u64,
) -> Result<DensityReport> {
    if let Some((p, _)) = schedule.entries().iter().find(|(p, _)| !lattice.group.has_prime(*p)) {
        return Err(Error::pre(format!("schedule prime {p} is outside G={}", lattice.group)));
    }
    let slack = w.interval_count() as u64 + 1;
    density_table(schedule, n_max, slack, Some(intensity_value(lattice, w)), |f| {
        capset_count(lattice, w, f)
    })
}

/// Counted density `|Λ ∩ F|/m(F)` at a single box.
pub fn capset_density_at(lattice: &LatticeSpec, w: &Window1D, g_box: &AdelicBox) -> Result<Rational> {
    let count = capset_count(lattice, w, g_box)?;
    Ok(&Rational::integer(count) / &g_box.measure())
}

/// Whether `q ∈ ℤ[1/Q]`.
pub fn in_ring(lattice: &LatticeSpec, q: &Rational) -> bool {
    if q.is_zero() {
        return true;
    }
    ValuationProfile::of_rational(q)
        .expect("nonzero")
        .iter()
        .all(|(p, k)| k >= 0 || lattice.group.has_prime(p))
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

    fn l(s: &str) -> LatticeSpec {
        s.parse().unwrap()
    }

    #[test]
    fn text_forms() {
        for s in [
            "Z[1/{2,3}](u=2:1,t=3/2)@G=prod:2,3",
            "Z[1/{2}](u=,t=1)@G=qp:2",
            "Q(u=2:1,3:2,t=-1/3)@G=adelic",
        ] {
            assert_eq!(l(s).to_string(), s);
        }
        assert_eq!(l("Z[1/2](u=,t=1)"), LatticeSpec::z_one_over(2).unwrap());
        assert_eq!(l("Q(u=,t=1)"), l("Q(u=,t=1)@G=adelic"));
        assert!(matches!(
            "Z[1/2](u=,t=0)".parse::<LatticeSpec>(),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            "Z[1/2](u=3:1,t=1)".parse::<LatticeSpec>(),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            "Z[1/{2,3}](u=,t=1)@G=qp:2".parse::<LatticeSpec>(),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            "Z[1/2](u=,t=x)".parse::<LatticeSpec>(),
            Err(Error::Parse { .. })
        ));
        assert!(matches!("R(u=,t=1)".parse::<LatticeSpec>(), Err(Error::Parse { .. })));
    }

    #[test]
    fn covolume_examples() {
        assert_eq!(covolume(&l("Q(u=,t=1)")), Rational::one());
        assert_eq!(covolume(&l("Z[1/2](u=,t=1)")), Rational::one());
        assert_eq!(covolume(&l("Z[1/2](u=2:1,t=3)")), r("3/2"));
        let lat = l("Z[1/{2,3}](u=2:1,3:1,t=5/7)");
        assert_eq!(covolume(&lat.with_t(r("-10/7")).unwrap()), &covolume(&lat) * &r("2"));
    }

    #[test]
    fn counting_oracle_examples() {
        let (est, count) =
            covolume_by_counting(&l("Z[1/2](u=,t=1)"), &AdelicBox::of(&[(2, 10)]), &r("1"), 1 << 20).unwrap();
        assert_eq!(count, 2049);
        assert_eq!(est, r("2048/2049"));
        let (est, count) =
            covolume_by_counting(&l("Q(u=,t=1)"), &AdelicBox::of(&[(2, 4), (3, 4)]), &r("1"), 1 << 20).unwrap();
        assert_eq!(count, 2 * 1296 + 1);
        assert!((&est - &Rational::one()).abs() <= r("2") / Rational::integer(count));
        assert!(covolume_by_counting(&l("Q(u=,t=1)"), &AdelicBox::integers(), &r("0"), 100).is_err());
    }

    #[test]
    fn counting_with_dilation_and_negative_exponents() {
        let lat = l("Z[1/{2,3}](u=2:1,t=3)");
        let f = AdelicBox::of(&[(2, 6), (3, -1)]);
        let (est, count) = covolume_by_counting(&lat, &f, &r("300"), 1 << 22).unwrap();
        assert!((&est - &covolume(&lat)).abs() <= &(&r("2") / &Rational::integer(count)) * &covolume(&lat));
    }

    #[test]
    fn capset_examples() {
        let box3 = AdelicBox::of(&[(2, 3)]);
        let q = CapQuery::new(l("Z[1/2](u=,t=1)"), w("[0,1]"), box3.clone()).unwrap();
        assert_eq!(capset_points(&q, 100).unwrap().len(), 9);
        let q = CapQuery::new(l("Z[1/2](u=,t=2)"), w("[0,1]"), box3).unwrap();
        let pts = capset_points(&q, 100).unwrap();
        assert_eq!(
            pts.points(),
            [r("0"), r("1/8"), r("1/4"), r("3/8"), r("1/2")].as_slice()
        );
        let q = CapQuery::new(l("Q(u=,t=1)"), w("[5,6]"), AdelicBox::integers()).unwrap();
        assert_eq!(capset_points(&q, 100).unwrap().points(), [r("5"), r("6")].as_slice());
        assert!(CapQuery::new(l("Z[1/2](u=,t=1)"), w("[0,1]"), AdelicBox::of(&[(3, 1)])).is_err());
    }

    #[test]
    fn intensity_and_bounds() {
        assert_eq!(
            intensity_value(&l("Z[1/2](u=,t=1)"), &w("[0,1]")),
            QuadExtReal::from(Rational::one())
        );
        assert_eq!(
            intensity_value(&l("Q(u=2:1,t=1)"), &w("[0,1/3]")),
            QuadExtReal::from(r("2/3"))
        );
        let two = QuadExtReal::from(r("2"));
        assert_eq!(icovol_bounds(&l("Z[1/2](u=,t=1)"), &w("[0,1]")), (two.clone(), two));
        let v = QuadExtReal::from(r("3/2"));
        assert_eq!(
            icovol_bounds(&l("Z[1/2](u=,t=1)"), &w("[0,1/4];[1/2,3/4]")),
            (v.clone(), v)
        );
        let four = QuadExtReal::from(r("4"));
        assert_eq!(icovol_bounds(&l("Q(u=2:1,t=1)"), &w("[0,1]")), (four.clone(), four));
    }

    #[test]
    fn doubling_certificates() {
        assert_eq!(doubling_certificate(&w("[0,1]")), QuadExtReal::from(r("2")));
        assert_eq!(doubling_certificate(&w("[0,1/4];[1/2,3/4]")), QuadExtReal::from(r("3")));
        assert_eq!(doubling_certificate(&w("[0,√2]")), QuadExtReal::from(r("2")));
    }

    #[test]
    fn return_time_examples() {
        let base = CapQuery::new(l("Z[1/2](u=,t=1)"), w("[0,1]"), AdelicBox::of(&[(2, 2)])).unwrap();
        let q = base
            .clone()
            .with_basepoint(BaseG::Tag(Rational::zero()), Rational::zero());
        let quarters = |lo: i64, hi: i64| (lo..=hi).map(|m| Rational::frac(m, 4)).collect::<Vec<_>>();
        let rt = return_times(&q, 100).unwrap();
        assert!(rt.shifted);
        assert_eq!(rt.points.points(), quarters(0, 4).as_slice());
        let q = base.clone().with_basepoint(BaseG::Tag(Rational::zero()), r("1/2"));
        assert_eq!(
            return_times(&q, 100).unwrap().points.points(),
            quarters(-2, 2).as_slice()
        );
        let q = base.with_basepoint(BaseG::Profile(ValuationProfile::of(&[(2, -3)])), Rational::zero());
        assert!(!return_times(&q, 100).unwrap().shifted);
    }

    #[test]
    fn discreteness_examples() {
        let z2 = l("Z[1/2](u=,t=1)");
        assert!(lattice_discreteness_check(&z2, &AdelicBox::integers(), &w("[-1/2,1/2]"), 100).unwrap());
        assert!(!lattice_discreteness_check(&z2, &AdelicBox::of(&[(2, 1)]), &w("[-1,1]"), 100).unwrap());
        assert_eq!(
            lattice_witnesses(&z2, &AdelicBox::of(&[(2, 1)]), &w("[-1,1]"), 100).unwrap(),
            vec![r("-1"), r("-1/2"), r("1/2"), r("1")]
        );
        assert!(lattice_discreteness_check(&l("Q(u=,t=1)"), &AdelicBox::integers(), &w("[-1/2,1/2]"), 100).unwrap());
    }

    #[test]
    fn intensity_counted_at_fine_box() {
        let d = capset_density_at(&l("Z[1/2](u=,t=1)"), &w("[0,1]"), &AdelicBox::of(&[(2, 20)])).unwrap();
        assert_eq!(
            d,
            &Rational::one() + &Rational::prime_power(Prime::new(2).unwrap(), -20)
        );
    }

    #[test]
    fn capset_density_converges() {
        let lat = l("Z[1/{2,3}](u=3:1,t=2/3)");
        let rep = capset_density(
            &lat,
            &w("[0,1/2];[1,√2]"),
            &FolnerSchedule::uniform(&[2, 3]).unwrap(),
            6,
        )
        .unwrap();
        assert!(rep.all_within_bound());
        assert!(capset_density(&lat, &w("[0,1]"), &FolnerSchedule::default(), 2).is_err());
    }

    #[test]
    fn ring_membership() {
        let lat = l("Z[1/{2,3}](u=,t=1)");
        assert!(in_ring(&lat, &r("5/12")));
        assert!(!in_ring(&lat, &r("1/5")));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn discreteness_for_unit_profiles(p in prop::sample::select(vec![2u64, 3, 5, 7]), e in -3i64..=0, t in 1i64..5, num in 1i64..100) {
            // W inside (-|t|, |t|) and V1 inside Z_p: only 0 survives
            let lat = LatticeSpec::new(Group::SingleP(Prime::new(p).unwrap()), ValuationProfile::new(), Rational::integer(t)).unwrap();
            let c = &Rational::integer(t) * &Rational::frac(num, 101);
            let w = Window1D::rational(&[(-&c, c)]).unwrap();
            let v1 = AdelicBox::of(&[(p, e)]);
            prop_assert!(lattice_discreteness_check(&lat, &v1, &w, 1000).unwrap());
        }

        #[test]
        fn counted_points_match_closed_form(a in 0i64..3, b in 0i64..3, e2 in 0i64..4, e3 in -1i64..3, tn in 1i64..7, td in 1i64..7) {
            let u = ValuationProfile::of(&[(2, a), (3, b)]);
            let lat = LatticeSpec::new(Group::MultiP(vec![Prime::new(2).unwrap(), Prime::new(3).unwrap()]), u, Rational::frac(tn, td)).unwrap();
            let f = AdelicBox::of(&[(2, e2), (3, e3)]);
            let w = Window1D::rational(&[(Rational::frac(-1, 1), Rational::frac(3, 2))]).unwrap();
            let q = CapQuery::new(lat.clone(), w.clone(), f.clone()).unwrap();
            let pts = capset_points(&q, 1_000_000).unwrap();
            prop_assert_eq!(BigInt::from(pts.len()), capset_count(&lat, &w, &f).unwrap());
            for s in pts.points() {
                prop_assert!(in_lattice_box(&lat, &f, s));
                prop_assert!(w.contains(&(s * lat.t())));
            }
        }
    }
}
