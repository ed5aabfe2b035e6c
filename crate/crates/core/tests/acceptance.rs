//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.
//!
//! Criterion 5 is known to report FAIL: at m(C) = 1/2 exact equality in
//! Kneser's bound does not force a character preimage. That failure is
//! asserted to be of exactly that kind and nothing else.

use std::time::{Duration, Instant};

use adelic_lab::cutproject::{capset_density_at, covolume, covolume_by_counting, intensity_value, Group, LatticeSpec};
use adelic_lab::density::{
    adapted_core, density_by_enumeration, density_estimate, doubling_report, folner_ratio, FolnerSchedule,
};
use adelic_lab::modelsets::exceptional_points;
use adelic_lab::solenoid::{cross_section_check, equivalent_mod_kernel, kernel_enumerate, lift, phi, rho};
use adelic_lab::sumsetgeo::{bm_check, higher_order_sumset_volume, kneser_suite, BoxUnion};
use adelic_lab::{
    AdelicBox, FareySpec, PadicRep, Prime, PrimeSchedule, QuadExtReal, Rational, SolPoint, ValuationProfile, Window1D,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_917;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn w(s: &str) -> Window1D {
    s.parse().unwrap()
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn farey_density() -> Outcome {
    let spec = FareySpec::plain(w("[0,1]"));
    let schedule = FolnerSchedule::default();
    let start = Instant::now();
    let report = density_estimate(&spec, &schedule, 4).unwrap();
    let elapsed = start.elapsed();
    let ratio = &report.last().unwrap().ratio;
    let exact = *ratio == q("810001/810000");
    let close = (ratio - &Rational::one()).abs() <= q("1/500000");
    let enumerated = density_by_enumeration(&spec, &schedule, 2, 1 << 20).unwrap();
    let agrees = enumerated.rows == report.rows[..2];
    outcome(
        exact && close && agrees && elapsed < Duration::from_secs(1),
        format!("ratio(4) = {ratio}, closed form in {elapsed:?}, enumeration n<=2 agrees: {agrees}"),
    )
}

fn dilated_density() -> Outcome {
    let spec = FareySpec::dilated(q_profile("2:1"), w("[0,1/3]")).unwrap();
    let report = density_estimate(&spec, &FolnerSchedule::default(), 6).unwrap();
    let target = QuadExtReal::from(q("2/3"));
    let on_target = report.target.as_ref() == Some(&target);
    let bounded = report.all_within_bound();
    let bound_ok = report.rows.iter().all(|r| r.bound == &q("2") / &r.measure);
    let last = report.last().unwrap();
    let small = last.bound < q("1/100000000");
    outcome(
        on_target && bounded && bound_ok && small,
        format!(
            "target 2/3, all rows within bound: {bounded}, bound(6) = {}",
            last.bound.to_decimal(4)
        ),
    )
}

fn q_profile(s: &str) -> ValuationProfile {
    s.parse().unwrap()
}

fn random_rational(rng: &mut ChaCha8Rng, range: i64, denom: i64) -> Rational {
    Rational::frac(rng.gen_range(-range..=range), rng.gen_range(1..=denom))
}

fn doubling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let schedule = FolnerSchedule::default();
    let two = QuadExtReal::from(Rational::integer(2));
    let mut failures = 0;
    for _ in 0..50 {
        let a = random_rational(&mut rng, 40, 12);
        let len = Rational::frac(rng.gen_range(1..=60), rng.gen_range(1..=12));
        let window = Window1D::rational(&[(a.clone(), &a + &len)]).unwrap();
        let dilation = match rng.gen_range(0..3) {
            0 => ValuationProfile::new(),
            1 => q_profile("2:1"),
            _ => q_profile("3:2,5:1"),
        };
        let spec = FareySpec::dilated(dilation, window).unwrap();
        let r = doubling_report(&spec, &schedule, 3).unwrap();
        let targets =
            r.points.target.clone().unwrap().scale(&Rational::integer(2)) == r.differences.target.clone().unwrap();
        let ok = r.limit == two && targets && r.points.all_within_bound() && r.differences.all_within_bound();
        if !ok {
            failures += 1;
        }
    }
    let spec = FareySpec::plain(w("[0,1/4];[1/2,3/4]"));
    let r = doubling_report(&spec, &schedule, 3).unwrap();
    let three = r.limit == QuadExtReal::from(Rational::integer(3)) && r.differences.all_within_bound();
    outcome(
        failures == 0 && three,
        format!(
            "50 single intervals: {failures} failures; two-interval window limit = {}",
            r.limit
        ),
    )
}

fn exceptional() -> Outcome {
    let start = Instant::now();
    let e = exceptional_points(&FareySpec::plain(w("[√2,1+√2]")), 1000);
    let none = exceptional_points(&FareySpec::plain(w("[0,1]")), 1000);
    let elapsed = start.elapsed();
    let ok = e.points() == [q("-1"), q("1")] && none.is_empty() && elapsed < Duration::from_secs(1);
    outcome(
        ok,
        format!(
            "[√2,1+√2] -> {:?}, [0,1] -> {} points, {elapsed:?}",
            e.points(),
            none.len()
        ),
    )
}

fn kneser() -> Outcome {
    let r = kneser_suite(SEED, 10_000, 6, 360, 2520).unwrap();
    let slack_ok = r.zn_slack == q("72/2520");
    let pass = r.violations == 0 && r.mismatches.is_empty() && r.zn_failures == 0 && slack_ok;
    // Any mismatch must be the measure-1/2 case: equality without a preimage.
    let half = q("1/2");
    let only_half = r
        .mismatches
        .iter()
        .all(|m| m.measure == half && m.equality && !m.classified);
    assert_eq!(r.violations, 0);
    assert_eq!(r.zn_failures, 0);
    assert!(slack_ok);
    assert_eq!(r.mismatches_below_half(), 0);
    assert!(only_half, "unexpected classifier mismatch");
    outcome(
        pass,
        format!(
            "{} trials, {} violations, {} equalities, {} classified, {} mismatches (all at m=1/2: {only_half}), Z_N max gap {}",
            r.trials,
            r.violations,
            r.equalities,
            r.classified,
            r.mismatches.len(),
            r.zn_max_gap
        ),
    )
}

fn intensity() -> Outcome {
    let lattice = LatticeSpec::z_one_over(2).unwrap();
    let window = w("[0,1]");
    let f = AdelicBox::of(&[(2, 20)]);
    let d = capset_density_at(&lattice, &window, &f).unwrap();
    let expected = &Rational::one() + &Rational::prime_power(Prime::new(2).unwrap(), -20);
    let target = intensity_value(&lattice, &window) == QuadExtReal::from(Rational::one());
    outcome(d == expected && target, format!("density at 2^-20 Z_2 = {d}, target 1"))
}

fn random_lattice(rng: &mut ChaCha8Rng) -> (LatticeSpec, AdelicBox) {
    let (group, primes): (Group, Vec<u64>) = match rng.gen_range(0..5) {
        0 => (Group::SingleP(Prime::new(2).unwrap()), vec![2]),
        1 => (Group::SingleP(Prime::new(3).unwrap()), vec![3]),
        2 => (Group::SingleP(Prime::new(5).unwrap()), vec![5]),
        3 => (
            Group::MultiP(vec![Prime::new(2).unwrap(), Prime::new(3).unwrap()]),
            vec![2, 3],
        ),
        _ => (Group::Adelic, vec![2, 3]),
    };
    let mut u = ValuationProfile::new();
    let mut b = ValuationProfile::new();
    for &p in &primes {
        let p = Prime::new(p).unwrap();
        u.set(p, rng.gen_range(0..=2));
        b.set(p, rng.gen_range(-1..=3));
    }
    let t = Rational::frac(
        rng.gen_range(1..=7) * if rng.gen_bool(0.5) { 1 } else { -1 },
        rng.gen_range(1..=7),
    );
    (LatticeSpec::new(group, u, t).unwrap(), AdelicBox::new(b))
}

fn covolume_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();
    let mut min_count = u64::MAX;
    for _ in 0..20 {
        let (lattice, f) = random_lattice(&mut rng);
        // about 12000 points expected
        let mut t_bound = &(&Rational::integer(6000) * &covolume(&lattice)) / &f.measure();
        let (estimate, count) = loop {
            let (e, c) = covolume_by_counting(&lattice, &f, &t_bound, 1 << 24).unwrap();
            if c >= 10_000 {
                break (e, c);
            }
            t_bound = &t_bound * &q("3/2");
        };
        min_count = min_count.min(count);
        let exact = covolume(&lattice);
        let rel = (&(&estimate - &exact) / &exact).abs();
        if rel > Rational::new(2, count).unwrap() {
            failures.push(format!("{lattice} box {f}: rel {rel}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("20 lattices, fewest points {min_count}, failures: {failures:?}"),
    )
}

fn solenoid_round_trip() -> Outcome {
    let p = Prime::new(2).unwrap();
    let s = PrimeSchedule::constant(p, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut trips = 0;
    let mut real = 0;
    for _ in 0..100 {
        let top = Rational::frac(rng.gen_range(0..1_000_000), rng.gen_range(1..1_000_000));
        let z = SolPoint::from_top(&top, &s);
        let (g, r) = lift(&z, &s).unwrap();
        if phi(&g, &r, &s).unwrap() == z {
            trips += 1;
        }
        let wv = random_rational(&mut rng, 10_000, 999);
        let (g, r) = lift(&rho(&wv, &s), &s).unwrap();
        if equivalent_mod_kernel((&g, &r), (&PadicRep::new(p, Rational::zero(), 8), &wv)) {
            real += 1;
        }
    }
    let kernel = kernel_enumerate(&s, 0, &w("[-1/2,1/2]"), 1000).unwrap();
    let trivial = kernel == [(Rational::zero(), Rational::zero())];
    outcome(
        trips == 100 && real == 100 && trivial,
        format!("phi(lift(z)) = z: {trips}/100, lift(rho(w)) ~ (0,w): {real}/100, kernel trivial: {trivial}"),
    )
}

fn cross_section() -> Outcome {
    let s = PrimeSchedule::constant(Prime::new(2).unwrap(), 4).unwrap();
    let c = cross_section_check(&w("[-1/4,1/4]"), &s, 64).unwrap();
    outcome(
        c.holds(),
        format!(
            "forward {}/{} ok, backward {} inside of {}, {} failures",
            c.forward_tested - c.forward_failures,
            c.forward_tested,
            c.backward_inside,
            c.backward_tested,
            c.backward_failures
        ),
    )
}

fn brunn_minkowski() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tol = q("1/50");
    let mut d1_failures = 0;
    for _ in 0..200 {
        let k = rng.gen_range(1..=4);
        let mut x = random_rational(&mut rng, 20, 6);
        let mut boxes = Vec::new();
        for _ in 0..k {
            let len = Rational::frac(rng.gen_range(1..=30), rng.gen_range(1..=6));
            boxes.push(vec![(x.clone(), &x + &len)]);
            let gap = Rational::frac(rng.gen_range(1..=30), rng.gen_range(1..=6));
            x = &(&x + &len) + &gap;
        }
        let c = bm_check(&BoxUnion::new(boxes).unwrap(), 64, &tol).unwrap();
        let exact = c.exact.clone().unwrap();
        if exact < Rational::integer(2) || (exact == Rational::integer(2)) != (k == 1) || c.equality != (k == 1) {
            d1_failures += 1;
        }
    }
    let square = bm_check(&"[0,1]x[0,1]".parse().unwrap(), 512, &tol).unwrap();
    let four = Rational::integer(4);
    let brackets = square.ratio_lower <= four && four <= square.ratio_upper;
    let narrow = &(&square.ratio_upper - &square.ratio_lower) / &four < tol;
    let l_shape = bm_check(&"[0,1]x[0,1/2];[0,1/2]x[1/2,1]".parse().unwrap(), 512, &tol).unwrap();
    let width = &l_shape.ratio_upper - &l_shape.ratio_lower;
    let strict = &l_shape.ratio_lower - &four > width;
    outcome(
        d1_failures == 0 && brackets && narrow && strict,
        format!(
            "d=1: {d1_failures} failures in 200; square ratio in [{}, {}]; L-shape ratio in [{}, {}]",
            square.ratio_lower.to_decimal(6),
            square.ratio_upper.to_decimal(6),
            l_shape.ratio_lower.to_decimal(6),
            l_shape.ratio_upper.to_decimal(6)
        ),
    )
}

fn folner() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let primes = [2u64, 3, 5, 7];
    let random_box = |rng: &mut ChaCha8Rng| {
        let mut b = ValuationProfile::new();
        for &p in &primes {
            if rng.gen_bool(0.7) {
                b.set(Prime::new(p).unwrap(), rng.gen_range(-3..=4));
            }
        }
        AdelicBox::new(b)
    };
    let mut ratio_failures = 0;
    let mut core_failures = 0;
    for _ in 0..100 {
        let f = random_box(&mut rng);
        let k = random_box(&mut rng);
        let definitional = &f.product(&k).measure() / &f.measure();
        let index = &k.measure() / &k.intersection(&f).measure();
        if folner_ratio(&f, &k) != definitional || definitional != index {
            ratio_failures += 1;
        }
        let u = f.intersection(&k);
        if adapted_core(&f, &u) != Some(f.clone()) {
            core_failures += 1;
        }
        if !k.is_subset_of(&f) && adapted_core(&f, &k).is_some() {
            core_failures += 1;
        }
    }
    outcome(
        ratio_failures == 0 && core_failures == 0,
        format!("ratio mismatches {ratio_failures}/100, adapted core failures {core_failures}"),
    )
}

fn higher_sumset() -> Outcome {
    let v = higher_order_sumset_volume(&w("[0,1]"), 3, 1024).unwrap();
    let three = Rational::integer(3);
    let width = v.width().checked_div(&QuadExtReal::from(three.clone())).unwrap();
    let narrow = width.cmp_rational(&q("1/50")).is_lt();
    outcome(
        v.brackets(&three) && narrow,
        format!("m(W^[3]) in [{}, {}]", v.lower.to_decimal(8), v.upper.to_decimal(8)),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 12] = [
        ("Farey density", farey_density),
        ("dilated density", dilated_density),
        ("doubling", doubling),
        ("exceptional points", exceptional),
        ("Kneser suite", kneser),
        ("intensity", intensity),
        ("covolume oracle", covolume_oracle),
        ("solenoid round trip", solenoid_round_trip),
        ("cross-section identity", cross_section),
        ("Brunn-Minkowski", brunn_minkowski),
        ("Folner diagnostics", folner),
        ("higher-order sumset", higher_sumset),
    ];
    // Criterion 5 fails by design of the statement being checked; see the
    // module docs. Its checks above assert the failure is exactly that one.
    let known_failures = [5];
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2} {verdict} {name}: {} ({:.2?})",
            o.detail,
            start.elapsed()
        );
        if !o.pass && !known_failures.contains(&n) {
            unexpected.push(n);
        }
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
