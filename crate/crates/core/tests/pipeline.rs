use adelic_lab::cutproject::{capset_count, capset_points, CapQuery, LatticeSpec};
use adelic_lab::density::{density_estimate, FolnerSchedule};
use adelic_lab::modelsets::{count_points, farey_points};
use adelic_lab::solenoid::{lift, phi, rho};
use adelic_lab::{AdelicBox, FareySpec, PrimeSchedule, Rational, ValuationProfile, Window1D};

fn w(s: &str) -> Window1D {
    s.parse().unwrap()
}

#[test]
fn farey_sets_are_rational_cut_and_project_sets() {
    let cases = [("", "[0,1]"), ("2:1", "[0,1/3]"), ("3:2,5:1", "[-1/2,7/4];[2,3]")];
    let schedule = FolnerSchedule::default();
    for (u, window) in cases {
        let u: ValuationProfile = u.parse().unwrap();
        let spec = FareySpec::dilated(u.clone(), w(window)).unwrap();
        let lattice = LatticeSpec::rationals(u, Rational::one()).unwrap();
        for n in 1..=2 {
            let f = schedule.box_at(n);
            let farey = farey_points(&spec, &f, 1 << 20).unwrap();
            let query = CapQuery::new(lattice.clone(), w(window), f.clone()).unwrap();
            let cap = capset_points(&query, 1 << 20).unwrap();
            assert_eq!(farey.points(), cap.points(), "u={} W={window} n={n}", spec.dilation);
            assert_eq!(capset_count(&lattice, &w(window), &f).unwrap(), count_points(&spec, &f));
        }
    }
}

#[test]
fn spec_block_round_trip_drives_density() {
    let text = "# dilated window\ndilate=2:1\nwindow=[0,1/3]\ntranslate=0\n";
    let spec: FareySpec = text.parse().unwrap();
    assert_eq!(spec.to_string().parse::<FareySpec>().unwrap(), spec);
    let report = density_estimate(&spec, &"2,3@2,5@3".parse().unwrap(), 5).unwrap();
    assert!(report.all_within_bound());
}

#[test]
fn box_text_round_trip() {
    for s in ["", "2:1", "2:-1,3:4,97:2"] {
        let b: AdelicBox = s.parse().unwrap();
        assert_eq!(b.to_string(), s);
    }
}

#[test]
fn solenoid_lift_after_shift() {
    let s: PrimeSchedule = "3^6".parse().unwrap();
    let z = rho(&"22/7".parse().unwrap(), &s);
    let (g, r) = lift(&z, &s).unwrap();
    assert_eq!(phi(&g, &r, &s).unwrap(), z);
}
