use std::str::FromStr;

use adelic_lab::cutproject::{
    capset_density, capset_points, covolume, covolume_by_counting, icovol_bounds, intensity_value,
    lattice_discreteness_check, lattice_witnesses, return_times, BaseG, CapQuery, LatticeSpec,
};
use adelic_lab::density::{
    adapted_folner_ratios, density_by_enumeration, density_estimate, doubling_report, folner_diagnostic, DensityReport,
    FolnerSchedule,
};
use adelic_lab::modelsets::{count_differences, count_points, difference_points, exceptional_points, farey_points};
use adelic_lab::solenoid::{cross_section_check, kernel_enumerate, lift, phi, rho};
use adelic_lab::sumsetgeo::{
    bm_check, higher_order_sumset_volume, kneser_check, kneser_equality_classify, kneser_suite, ArcSet, BoxUnion,
};
use adelic_lab::{AdelicBox, Error, FareySpec, PrimeSchedule, Rational, SolPoint, ValuationProfile, Window1D};

use crate::error::CliError;
use crate::output::{dec, qdec, Table};
use crate::{Cli, Cmd, SolCmd, SpecArgs};

fn parse<T: FromStr<Err = Error>>(flag: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|e| CliError::flag(flag, e))
}

fn need<'a>(flag: &str, v: &'a Option<String>) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn spec(args: &SpecArgs) -> Result<FareySpec, CliError> {
    let window: Window1D = parse("window", need("window", &args.window)?)?;
    let dilation: ValuationProfile = parse("dilate", &args.dilate)?;
    let translation: Rational = parse("translate", &args.translate)?;
    Ok(FareySpec::new(dilation, window, translation)?)
}

fn opt_box(flag: &str, v: &Option<String>) -> Result<AdelicBox, CliError> {
    match v {
        Some(s) => parse(flag, s),
        None => Ok(AdelicBox::integers()),
    }
}

pub fn dispatch(cli: &Cli) -> Result<Table, CliError> {
    let cap = cli.max_points;
    match &cli.cmd {
        Cmd::Farey {
            spec: s,
            folner,
            schedule,
            n_max,
        } => farey(&spec(s)?, folner, schedule, *n_max, cap),
        Cmd::Density {
            spec: s,
            schedule,
            n_max,
            enumerate,
            doubling,
        } => {
            let schedule: FolnerSchedule = parse("schedule", schedule)?;
            if *doubling {
                doubling_table(&spec(s)?, &schedule, *n_max)
            } else {
                density(&spec(s)?, &schedule, *n_max, *enumerate, cap)
            }
        }
        Cmd::Doubling {
            spec: s,
            schedule,
            n_max,
        } => doubling_table(&spec(s)?, &parse("schedule", schedule)?, *n_max),
        Cmd::Diffset {
            spec: s,
            folner,
            exceptional,
        } => diffset(&spec(s)?, folner, *exceptional, cap),
        Cmd::Kneser {
            arcs,
            classify,
            suite,
            trials,
            max_arcs,
            denom,
            zn,
        } => {
            if *suite {
                kneser_random(cli.seed, *trials, *max_arcs, *denom, *zn)
            } else {
                kneser_single(&parse("arcs", need("arcs", arcs)?)?, *classify)
            }
        }
        Cmd::Bm { boxes, grid, tolerance } => bm(
            &parse("boxes", need("boxes", boxes)?)?,
            *grid,
            &parse("tolerance", tolerance)?,
        ),
        Cmd::SumsetR { window, r, grid } => sumset_r(&parse("window", need("window", window)?)?, *r, *grid),
        Cmd::Capset {
            lattice,
            window,
            g_box,
            schedule,
            n_max,
        } => capset(
            parse("lattice", need("lattice", lattice)?)?,
            parse("window", need("window", window)?)?,
            parse("box", g_box)?,
            schedule,
            *n_max,
            cap,
        ),
        Cmd::ReturnTimes {
            lattice,
            window,
            g_box,
            g0,
            h0,
        } => {
            let g0 = match g0.parse::<Rational>() {
                Ok(q) => BaseG::Tag(q),
                Err(_) => BaseG::Profile(parse("g0", g0)?),
            };
            let query = CapQuery::new(
                parse("lattice", need("lattice", lattice)?)?,
                parse("window", need("window", window)?)?,
                parse("box", g_box)?,
            )?
            .with_basepoint(g0, parse("h0", h0)?);
            returns(&query, cap)
        }
        Cmd::Covol {
            lattice,
            g_box,
            t_bound,
        } => covol(
            &parse("lattice", need("lattice", lattice)?)?,
            g_box,
            &parse("t-bound", t_bound)?,
            cap,
        ),
        Cmd::LatticeCheck { lattice, v1, window } => lattice_check(
            &parse("lattice", need("lattice", lattice)?)?,
            &parse("v1", v1)?,
            &parse("window", need("window", window)?)?,
            cap,
        ),
        Cmd::Solenoid { cmd } => solenoid(cmd, cap),
        Cmd::FolnerCheck { schedule, k, u, n_max } => folner_check(
            &parse("schedule", schedule)?,
            &parse("k", k)?,
            u.as_deref().map(|s| parse::<AdelicBox>("u", s)).transpose()?,
            *n_max,
        ),
    }
}

fn farey(
    spec: &FareySpec,
    folner: &Option<String>,
    schedule: &Option<String>,
    n_max: u64,
    cap: u64,
) -> Result<Table, CliError> {
    if let Some(s) = schedule {
        let schedule: FolnerSchedule = parse("schedule", s)?;
        if n_max == 0 {
            return Err(Error::Precondition("n_max must be at least 1".into()).into());
        }
        let mut t = Table::new(&["n", "box", "count", "measure"]);
        for n in 1..=n_max {
            let f = schedule.box_at(n);
            t.push(vec![
                n.to_string(),
                f.to_string(),
                count_points(spec, &f).to_string(),
                f.measure().to_string(),
            ]);
        }
        t.note("schedule", &schedule);
        return Ok(t);
    }
    let f = opt_box("folner", folner)?;
    let pts = farey_points(spec, &f, cap)?;
    let mut t = Table::new(&["index", "q", "q_dec"]);
    for (i, q) in pts.points().iter().enumerate() {
        t.push(vec![i.to_string(), q.to_string(), dec(q)]);
    }
    t.note("box", &f);
    t.note("count", pts.len());
    Ok(t)
}

fn report_table(report: &DensityReport) -> Table {
    let mut t = Table::new(&DensityReport::CSV_HEADER);
    for row in &report.rows {
        t.push(row.csv_fields(report.target.as_ref()));
    }
    if let Some(target) = &report.target {
        t.note("target", target.to_ascii());
        t.note("target_dec", qdec(target));
    }
    t.note("all_within_bound", report.all_within_bound());
    t
}

fn density(
    spec: &FareySpec,
    schedule: &FolnerSchedule,
    n_max: u64,
    enumerate: bool,
    cap: u64,
) -> Result<Table, CliError> {
    let report = density_estimate(spec, schedule, n_max)?;
    let mut t = report_table(&report);
    if enumerate {
        let by_points = density_by_enumeration(spec, schedule, n_max, cap)?;
        let agrees = by_points.rows.iter().zip(&report.rows).all(|(a, b)| a.count == b.count);
        t.note("enumeration_agrees", agrees);
    }
    Ok(t)
}

fn doubling_table(spec: &FareySpec, schedule: &FolnerSchedule, n_max: u64) -> Result<Table, CliError> {
    let r = doubling_report(spec, schedule, n_max)?;
    let mut t = Table::new(&[
        "n",
        "count_p",
        "count_diff",
        "ratio",
        "ratio_dec",
        "density_p",
        "density_diff",
    ]);
    for ((p, d), ratio) in r.points.rows.iter().zip(&r.differences.rows).zip(&r.ratios) {
        t.push(vec![
            p.n.to_string(),
            p.count.to_string(),
            d.count.to_string(),
            ratio.to_string(),
            dec(ratio),
            p.ratio.to_string(),
            d.ratio.to_string(),
        ]);
    }
    t.note("limit", r.limit.to_ascii());
    t.note("limit_dec", qdec(&r.limit));
    Ok(t)
}

fn diffset(spec: &FareySpec, folner: &Option<String>, exceptional: bool, cap: u64) -> Result<Table, CliError> {
    let mut t = Table::new(&["index", "d", "d_dec"]);
    let pts = if exceptional {
        exceptional_points(spec, cap)
    } else {
        let f = opt_box("folner", folner)?;
        t.note("box", &f);
        t.note("closed_form_count", count_differences(spec, &f));
        difference_points(spec, &f, 1, cap)?
    };
    for (i, q) in pts.points().iter().enumerate() {
        t.push(vec![i.to_string(), q.to_string(), dec(q)]);
    }
    t.note("count", pts.len());
    Ok(t)
}

fn kneser_single(c: &ArcSet, classify: bool) -> Result<Table, CliError> {
    let check = kneser_check(c)?;
    let mut t = Table::metrics();
    t.metric("arcs", c);
    t.metric("measure", c.measure());
    t.metric("m_diff", &check.m_diff);
    t.metric("bound", &check.bound);
    t.metric("holds", check.holds);
    t.metric("equality", check.is_equality());
    if classify {
        let class = match kneser_equality_classify(c) {
            Some(pre) => format!("Some({})", pre.n),
            None => "None".into(),
        };
        t.metric("classified", class);
    }
    Ok(t)
}

fn kneser_random(seed: u64, trials: usize, max_arcs: usize, denom: u64, zn: u64) -> Result<Table, CliError> {
    let r = kneser_suite(seed, trials, max_arcs, denom, zn)?;
    let mut t = Table::new(&["arcs", "measure", "equality", "classified"]);
    for m in &r.mismatches {
        t.push(vec![
            m.set.to_string(),
            m.measure.to_string(),
            m.equality.to_string(),
            m.classified.to_string(),
        ]);
    }
    t.note("trials", r.trials);
    t.note("violations", r.violations);
    t.note("equalities", r.equalities);
    t.note("classified", r.classified);
    t.note("mismatches", r.mismatches.len());
    t.note("mismatches_below_half", r.mismatches_below_half());
    t.note("zn_modulus", r.zn_modulus);
    t.note("zn_slack", &r.zn_slack);
    t.note("zn_max_gap", &r.zn_max_gap);
    t.note("zn_failures", r.zn_failures);
    Ok(t)
}

fn bm(w: &BoxUnion, grid: u32, tolerance: &Rational) -> Result<Table, CliError> {
    let c = bm_check(w, grid, tolerance)?;
    let mut t = Table::metrics();
    t.metric("dim", w.dim());
    t.metric("volume", w.volume());
    t.metric("ratio_lower", &c.ratio_lower);
    t.metric("ratio_upper", &c.ratio_upper);
    t.metric("ratio_lower_dec", dec(&c.ratio_lower));
    t.metric("ratio_upper_dec", dec(&c.ratio_upper));
    t.metric("exact", c.exact.as_ref().map(ToString::to_string).unwrap_or_default());
    t.metric("bound", &c.bound);
    t.metric("holds", c.holds);
    t.metric("equality", c.equality);
    Ok(t)
}

fn sumset_r(w: &Window1D, r: usize, grid: u32) -> Result<Table, CliError> {
    let v = higher_order_sumset_volume(w, r, grid)?;
    let mut t = Table::metrics();
    t.metric("r", r);
    t.metric("grid", grid);
    t.metric("lower", v.lower.to_ascii());
    t.metric("upper", v.upper.to_ascii());
    t.metric("lower_dec", qdec(&v.lower));
    t.metric("upper_dec", qdec(&v.upper));
    t.metric("width_dec", qdec(&v.width()));
    t.metric("exact", v.exact.as_ref().map(|e| e.to_ascii()).unwrap_or_default());
    Ok(t)
}

fn capset(
    lattice: LatticeSpec,
    window: Window1D,
    g_box: AdelicBox,
    schedule: &Option<String>,
    n_max: u64,
    cap: u64,
) -> Result<Table, CliError> {
    if let Some(s) = schedule {
        let report = capset_density(&lattice, &window, &parse("schedule", s)?, n_max)?;
        return Ok(report_table(&report));
    }
    let intensity = intensity_value(&lattice, &window);
    let (lo, hi) = icovol_bounds(&lattice, &window);
    let query = CapQuery::new(lattice, window, g_box)?;
    let pts = capset_points(&query, cap)?;
    let mut t = Table::new(&["index", "s", "s_dec"]);
    for (i, s) in pts.points().iter().enumerate() {
        t.push(vec![i.to_string(), s.to_string(), dec(s)]);
    }
    t.note("count", pts.len());
    t.note("intensity", intensity.to_ascii());
    t.note("icovol_lower", lo.to_ascii());
    t.note("icovol_upper", hi.to_ascii());
    Ok(t)
}

fn returns(query: &CapQuery, cap: u64) -> Result<Table, CliError> {
    let r = return_times(query, cap)?;
    let mut t = Table::new(&["index", "s", "s_dec"]);
    for (i, s) in r.points.points().iter().enumerate() {
        t.push(vec![i.to_string(), s.to_string(), dec(s)]);
    }
    t.note("count", r.points.len());
    t.note("shifted", r.shifted);
    Ok(t)
}

fn covol(lattice: &LatticeSpec, g_box: &Option<String>, t_bound: &Rational, cap: u64) -> Result<Table, CliError> {
    let formula = covolume(lattice);
    let mut t = Table::metrics();
    t.metric("lattice", lattice);
    t.metric("covolume", &formula);
    if let Some(b) = g_box {
        let b: AdelicBox = parse("box", b)?;
        let (estimate, count) = covolume_by_counting(lattice, &b, t_bound, cap)?;
        let rel = (&(&estimate - &formula) / &formula).abs();
        t.metric("estimate", &estimate);
        t.metric("count", count);
        t.metric("relative_error", &rel);
        t.metric("relative_error_dec", dec(&rel));
        t.metric(
            "within_2_over_count",
            count > 0 && rel <= Rational::new(2, count).expect("count is positive"),
        );
    }
    Ok(t)
}

fn lattice_check(lattice: &LatticeSpec, v1: &AdelicBox, w: &Window1D, cap: u64) -> Result<Table, CliError> {
    let ok = lattice_discreteness_check(lattice, v1, w, cap)?;
    let mut t = Table::new(&["witness", "witness_dec"]);
    for s in lattice_witnesses(lattice, v1, w, cap)? {
        t.push(vec![s.to_string(), dec(&s)]);
    }
    t.note("trivial_intersection", ok);
    Ok(t)
}

fn solenoid(cmd: &SolCmd, cap: u64) -> Result<Table, CliError> {
    match cmd {
        SolCmd::Rho { schedule, r } => {
            let s: PrimeSchedule = parse("schedule", schedule)?;
            let r: Rational = parse("r", need("r", r)?)?;
            let z = rho(&r, &s);
            let mut t = Table::new(&["n", "theta", "theta_dec"]);
            for (i, a) in z.angles().iter().enumerate() {
                t.push(vec![(i + 1).to_string(), a.to_string(), dec(a)]);
            }
            t.note("point", &z);
            Ok(t)
        }
        SolCmd::Lift { schedule, point } => {
            let s: PrimeSchedule = parse("schedule", schedule)?;
            let z: SolPoint = parse("point", need("point", point)?)?;
            let (g, r) = lift(&z, &s)?;
            let back = phi(&g, &r, &s)?;
            let mut t = Table::metrics();
            t.metric("g", &g.value);
            t.metric("r", &r);
            t.metric("modulus", format!("{}^{}", g.p, s.depth() - 1));
            t.metric("phi", &back);
            t.metric("round_trip", back == z);
            Ok(t)
        }
        SolCmd::SectionCheck { schedule, window, grid } => {
            let s: PrimeSchedule = parse("schedule", schedule)?;
            let w: Window1D = parse("window", need("window", window)?)?;
            let c = cross_section_check(&w, &s, *grid)?;
            let mut t = Table::new(&["n", "half_width"]);
            for (i, h) in c.half_widths.iter().enumerate() {
                t.push(vec![(i + 1).to_string(), h.to_string()]);
            }
            t.note("forward_tested", c.forward_tested);
            t.note("forward_failures", c.forward_failures);
            t.note("backward_tested", c.backward_tested);
            t.note("backward_inside", c.backward_inside);
            t.note("backward_failures", c.backward_failures);
            t.note("holds", c.holds());
            Ok(t)
        }
        SolCmd::Kernel { schedule, v1, window } => {
            let s: PrimeSchedule = parse("schedule", schedule)?;
            let w: Window1D = parse("window", need("window", window)?)?;
            let mut t = Table::new(&["g", "h"]);
            for (g, h) in kernel_enumerate(&s, *v1, &w, cap)? {
                t.push(vec![g.to_string(), h.to_string()]);
            }
            Ok(t)
        }
    }
}

fn folner_check(schedule: &FolnerSchedule, k: &AdelicBox, u: Option<AdelicBox>, n_max: u64) -> Result<Table, CliError> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()).into());
    }
    let ratios = folner_diagnostic(schedule, k, n_max);
    let adapted = u.as_ref().map(|u| adapted_folner_ratios(schedule, u, k, n_max));
    let mut t = Table::new(&["n", "box", "ratio", "index_ratio", "adapted_ratio"]);
    for (i, (n, ratio)) in ratios.iter().enumerate() {
        let f = schedule.box_at(*n);
        let index = &k.measure() / &k.intersection(&f).measure();
        let adapted_cell = match &adapted {
            Some(a) => a[i]
                .1
                .as_ref()
                .map(ToString::to_string)
                .unwrap_or_else(|| "empty".into()),
            None => String::new(),
        };
        t.push(vec![
            n.to_string(),
            f.to_string(),
            ratio.to_string(),
            index.to_string(),
            adapted_cell,
        ]);
    }
    t.note("schedule", schedule);
    t.note("k", k);
    Ok(t)
}
