//! Truncated solenoids in angle form.
//!
//! A point of the depth-`N` solenoid over `q_1, …, q_N` is a list of angles
//! `θ_n ∈ [0,1)` with `θ_n ≡ q_n·θ_{n+1} (mod 1)`. Reals embed through
//! `ρ(r)_n = frac(r / (q_1⋯q_{n-1}))` and a p-adic number `g` through the
//! characters `χ_n(g) = frac_p(g / p^{n-1})`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{valuation, Prime, Rational, Valuation};
use crate::modelsets::{lattice_points_in_window, Window1D};

pub const DEFAULT_DEPTH: usize = 8;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PrimeSchedule {
    q: Vec<Prime>,
}

impl PrimeSchedule {
    pub fn new(q: Vec<Prime>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::pre("schedule depth must be at least 1"));
        }
        Ok(PrimeSchedule { q })
    }

    /// `p` repeated `depth` times.
    pub fn constant(p: Prime, depth: usize) -> Result<Self> {
        PrimeSchedule::new(vec![p; depth])
    }

    pub fn depth(&self) -> usize {
        self.q.len()
    }

    pub fn primes(&self) -> &[Prime] {
        &self.q
    }

    /// `q_n`, 1-based.
    pub fn q(&self, n: usize) -> Prime {
        self.q[n - 1]
    }

    pub fn constant_prime(&self) -> Option<Prime> {
        let p = self.q[0];
        self.q.iter().all(|&x| x == p).then_some(p)
    }

    /// `Q_n = q_1⋯q_{n-1}`, so `Q_1 = 1`.
    pub fn level_modulus(&self, n: usize) -> BigInt {
        self.q[..n - 1].iter().map(|p| BigInt::from(p.get())).product()
    }

    fn require_constant(&self) -> Result<Prime> {
        self.constant_prime()
            .ok_or_else(|| Error::pre("operation needs a constant-prime schedule"))
    }
}

impl fmt::Display for PrimeSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constant_prime() {
            Some(p) => write!(f, "{}^{}", p.get(), self.depth()),
            None => {
                let parts: Vec<String> = self.q.iter().map(|p| p.get().to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for PrimeSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, n)) = s.split_once('^') {
            let p: Prime = p.parse()?;
            let depth: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::parse(p.get().to_string().len() + 2, format!("bad depth {n:?}")))?;
            return PrimeSchedule::constant(p, depth);
        }
        let mut q = Vec::new();
        let mut column = 1;
        for part in s.split(',') {
            q.push(part.parse::<Prime>().map_err(|e| e.shifted(column - 1))?);
            column += part.len() + 1;
        }
        PrimeSchedule::new(q)
    }
}

/// A point of the truncated solenoid, one angle per level.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SolPoint {
    angles: Vec<Rational>,
}

impl SolPoint {
    /// Angles must lie in `[0,1)`; compatibility is checked separately.
    pub fn new(angles: Vec<Rational>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::pre("a solenoid point needs at least one angle"));
        }
        if let Some(a) = angles.iter().find(|a| a.is_negative() || *a >= &Rational::one()) {
            return Err(Error::pre(format!("angle {a} outside [0,1)")));
        }
        Ok(SolPoint { angles })
    }

    /// The unique compatible point whose deepest angle is `top`.
    pub fn from_top(top: &Rational, schedule: &PrimeSchedule) -> SolPoint {
        let n = schedule.depth();
        let mut angles = vec![Rational::zero(); n];
        angles[n - 1] = top.fract();
        for k in (1..n).rev() {
            let q = Rational::integer(schedule.q(k).get());
            angles[k - 1] = (&angles[k] * &q).fract();
        }
        SolPoint { angles }
    }

    pub fn angles(&self) -> &[Rational] {
        &self.angles
    }

    pub fn depth(&self) -> usize {
        self.angles.len()
    }

    /// `θ_n`, 1-based.
    pub fn angle(&self, n: usize) -> &Rational {
        &self.angles[n - 1]
    }

    /// First level `n` where `θ_n ≢ q_n·θ_{n+1}`, if any.
    pub fn first_incompatibility(&self, schedule: &PrimeSchedule) -> Option<usize> {
        (1..self.depth()).find(|&n| {
            let q = Rational::integer(schedule.q(n).get());
            (&self.angles[n] * &q).fract() != self.angles[n - 1]
        })
    }

    pub fn is_compatible(&self, schedule: &PrimeSchedule) -> bool {
        self.depth() == schedule.depth() && self.first_incompatibility(schedule).is_none()
    }

    fn check(&self, schedule: &PrimeSchedule) -> Result<()> {
        if self.depth() != schedule.depth() {
            return Err(Error::pre(format!(
                "point has depth {} but schedule has depth {}",
                self.depth(),
                schedule.depth()
            )));
        }
        match self.first_incompatibility(schedule) {
            Some(n) => Err(Error::pre(format!(
                "angles at levels {n} and {} are not compatible",
                n + 1
            ))),
            None => Ok(()),
        }
    }

    /// Levelwise sum mod 1.
    pub fn add(&self, other: &SolPoint) -> SolPoint {
        let angles = self
            .angles
            .iter()
            .zip(&other.angles)
            .map(|(a, b)| (a + b).fract())
            .collect();
        SolPoint { angles }
    }

    pub fn is_zero(&self) -> bool {
        self.angles.iter().all(Rational::is_zero)
    }
}

impl fmt::Display for SolPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.angles.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for SolPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut angles = Vec::new();
        let mut column = 1;
        for part in s.split(';') {
            angles.push(part.trim().parse::<Rational>().map_err(|e| e.shifted(column - 1))?);
            column += part.len() + 1;
        }
        SolPoint::new(angles)
    }
}

/// A p-adic number known through a rational representative.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PadicRep {
    pub p: Prime,
    pub value: Rational,
    pub depth: usize,
}

impl PadicRep {
    pub fn new(p: Prime, value: Rational, depth: usize) -> PadicRep {
        PadicRep { p, value, depth }
    }

    /// Equal modulo `p^depth ℤ_p`.
    pub fn equivalent(&self, other: &PadicRep) -> bool {
        self.p == other.p && at_least(&(&self.value - &other.value), self.p, self.depth as i64)
    }
}

/// No prime other than `p` divides the denominator.
pub fn in_z_one_over(x: &Rational, p: Prime) -> bool {
    let mut d = x.denom().clone();
    let pb = BigInt::from(p.get());
    while (&d % &pb).is_zero() {
        d /= &pb;
    }
    d.is_one()
}

fn at_least(x: &Rational, p: Prime, k: i64) -> bool {
    match valuation(x, p) {
        Valuation::Infinity => true,
        Valuation::Finite(v) => v >= k,
    }
}

/// The p-adic fractional part: the unique `c/p^k ∈ [0,1)` with `x - c/p^k ∈ ℤ_p`.
pub fn padic_fract(x: &Rational, p: Prime) -> Rational {
    let k = match valuation(x, p) {
        Valuation::Finite(v) if v < 0 => -v,
        _ => return Rational::zero(),
    };
    let pk = num_traits::pow(BigInt::from(p.get()), k as usize);
    let unit = x.denom() / &pk;
    let inv = unit.extended_gcd(&pk).x.mod_floor(&pk);
    let c = (x.numer() * inv).mod_floor(&pk);
    Rational::new(c, pk).expect("nonzero modulus")
}

/// `ρ(r)`: the real line wound densely into the solenoid.
pub fn rho(r: &Rational, schedule: &PrimeSchedule) -> SolPoint {
    let angles = (1..=schedule.depth())
        .map(|n| (r / &Rational::integer(schedule.level_modulus(n))).fract())
        .collect();
    SolPoint { angles }
}

/// `χ_n(g) = frac_p(g / p^{n-1})` for `1 ≤ n ≤ depth`.
pub fn chi(g: &PadicRep, n: usize) -> Result<Rational> {
    if n == 0 || n > g.depth {
        return Err(Error::pre(format!("character index {n} outside 1..={}", g.depth)));
    }
    Ok(chi_unchecked(&g.value, g.p, n))
}

fn chi_unchecked(g: &Rational, p: Prime, n: usize) -> Rational {
    padic_fract(&(g * &Rational::prime_power(p, 1 - n as i64)), p)
}

/// `Φ(g, r) = χ(g) + ρ(r)`, levelwise.
pub fn phi(g: &PadicRep, r: &Rational, schedule: &PrimeSchedule) -> Result<SolPoint> {
    let p = schedule.require_constant()?;
    if p != g.p {
        return Err(Error::pre(format!(
            "schedule prime {} differs from the p-adic prime {}",
            p.get(),
            g.p.get()
        )));
    }
    let real = rho(r, schedule);
    let angles = real
        .angles
        .iter()
        .enumerate()
        .map(|(i, a)| (a + &chi_unchecked(&g.value, p, i + 1)).fract())
        .collect();
    Ok(SolPoint { angles })
}

/// Inverts `Φ`: returns `(g, r)` with `r = θ_1` and `g` the least
/// non-negative integer below `p^{N-1}` such that `Φ(g, r) = z`.
pub fn lift(z: &SolPoint, schedule: &PrimeSchedule) -> Result<(PadicRep, Rational)> {
    let p = schedule.require_constant()?;
    z.check(schedule)?;
    let n_max = schedule.depth();
    let r = z.angle(1).clone();
    let mut g = BigInt::zero();
    let mut pn = BigInt::one();
    let pr = Rational::integer(p.get());
    for n in 1..n_max {
        let current =
            chi_unchecked(&Rational::integer(g.clone()), p, n + 1) + (&r / &Rational::integer(&pn * p.get())).fract();
        let omega = (z.angle(n + 1) - &current).fract();
        let j = &omega * &pr;
        debug_assert!(j.is_integer(), "discrepancy must be a p-th root of unity");
        g += j.floor() * &pn;
        pn *= p.get();
    }
    Ok((PadicRep::new(p, Rational::integer(g), n_max), r))
}

/// `(g1, r1) - (g2, r2)` is a kernel element `(γ, -γ)` plus something in
/// `p^{N-1}ℤ_p × {0}`.
pub fn equivalent_mod_kernel(a: (&PadicRep, &Rational), b: (&PadicRep, &Rational)) -> bool {
    let (g1, r1) = a;
    let (g2, r2) = b;
    if g1.p != g2.p {
        return false;
    }
    let gamma = r2 - r1;
    if !in_z_one_over(&gamma, g1.p) {
        return false;
    }
    let rest = &(&g1.value - &g2.value) - &gamma;
    at_least(&rest, g1.p, g1.depth.min(g2.depth) as i64 - 1)
}

/// Kernel elements `(γ, -γ)` with `γ ∈ p^{v1}ℤ_p` and `-γ ∈ W`, sorted by `γ`.
pub fn kernel_enumerate(
    schedule: &PrimeSchedule,
    v1: i64,
    window: &Window1D,
    cap: u64,
) -> Result<Vec<(Rational, Rational)>> {
    let p = schedule.require_constant()?;
    let step = Rational::prime_power(p, v1);
    let mut gammas = lattice_points_in_window(&step, &window.reflect(), cap)?;
    gammas.sort();
    Ok(gammas
        .into_iter()
        .map(|g| {
            let r = -&g;
            (g, r)
        })
        .collect())
}

/// Outcome of the cross-section comparison `(I_1 × ⋯ × I_N) ∩ 𝕊 = ρ(W)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SectionCheck {
    /// Half-widths `c / Q_n` of the centered intervals `I_n`.
    pub half_widths: Vec<Rational>,
    /// Grid points `w` of `W` tested for `ρ(w) ∈ ∏ I_n`.
    pub forward_tested: usize,
    pub forward_failures: usize,
    /// Compatible grid points of the solenoid tested.
    pub backward_tested: usize,
    /// Those lying in `∏ I_n`.
    pub backward_inside: usize,
    /// Inside points that are not `ρ(w)` for some `w ∈ W`.
    pub backward_failures: usize,
}

impl SectionCheck {
    pub fn holds(&self) -> bool {
        self.forward_failures == 0 && self.backward_failures == 0
    }
}

fn circle_dist(theta: &Rational) -> Rational {
    let t = theta.fract();
    let other = &Rational::one() - &t;
    t.min(other)
}

fn centered(theta: &Rational) -> Rational {
    let t = theta.fract();
    if t > Rational::frac(1, 2) {
        t - Rational::one()
    } else {
        t
    }
}

/// Compares `ρ(W)` with the solenoid points inside the centered boxes, both
/// ways, on the grid `ℤ/D` in `W` and `ℤ/(D·Q_N)` at the deepest level.
pub fn cross_section_check(window: &Window1D, schedule: &PrimeSchedule, grid: u64) -> Result<SectionCheck> {
    if grid == 0 {
        return Err(Error::pre("grid denominator must be positive"));
    }
    let (lo, hi) = match (
        window.is_single_interval(),
        window.inf().as_rational(),
        window.sup().as_rational(),
    ) {
        (true, Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
        _ => return Err(Error::pre("window must be a single interval with rational endpoints")),
    };
    let c = hi.clone();
    if lo != -&c || !c.is_positive() || c >= Rational::frac(1, 2) {
        return Err(Error::pre(format!(
            "window must be [-c,c] with 0 < c < 1/2, got {window}"
        )));
    }
    let depth = schedule.depth();
    let moduli: Vec<Rational> = (1..=depth)
        .map(|n| Rational::integer(schedule.level_modulus(n)))
        .collect();
    let half_widths: Vec<Rational> = moduli.iter().map(|q| &c / q).collect();
    let inside = |z: &SolPoint| z.angles.iter().zip(&half_widths).all(|(a, h)| &circle_dist(a) <= h);

    let d = Rational::integer(grid);
    let kmax = (&c * &d).floor();
    let ws: Vec<Rational> = num_iter(&-&kmax, &kmax).map(|k| &Rational::integer(k) / &d).collect();
    let forward_failures = ws.par_iter().filter(|w| !inside(&rho(w, schedule))).count();

    let top_denominator = &BigInt::from(grid) * schedule.level_modulus(depth);
    let tops: Vec<BigInt> = num_iter(&BigInt::zero(), &(&top_denominator - 1)).collect();
    let scale = Rational::integer(top_denominator.clone());
    let (backward_inside, backward_failures) = tops
        .par_iter()
        .map(|k| {
            let z = SolPoint::from_top(&(&Rational::integer(k.clone()) / &scale), schedule);
            if !inside(&z) {
                return (0usize, 0usize);
            }
            let w = centered(z.angle(1));
            let ok = window.contains(&w) && rho(&w, schedule) == z;
            (1, usize::from(!ok))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    Ok(SectionCheck {
        half_widths,
        forward_tested: ws.len(),
        forward_failures,
        backward_tested: tops.len(),
        backward_inside,
        backward_failures,
    })
}

fn num_iter(lo: &BigInt, hi: &BigInt) -> impl Iterator<Item = BigInt> {
    let hi = hi.clone();
    std::iter::successors(Some(lo.clone()), |k| Some(k + 1)).take_while(move |k| k <= &hi)
}
