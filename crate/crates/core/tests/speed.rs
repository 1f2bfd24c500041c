use roadspeed::dispersion::{c_min_crossing, upper_bound_speed};
use roadspeed::model::rescale_long_range;
use roadspeed::speed::sign_changes;
use roadspeed::{ExchangeSpec, GridConfig, ModelParams, SpeedProblem, SpeedRegime};

fn coarse() -> GridConfig {
    GridConfig {
        spacing: 0.02,
        ..GridConfig::default()
    }
}

fn reference_problem() -> SpeedProblem {
    let p = ModelParams::new(1.0, 4.0, 1.0, 1.0, 1.0).unwrap();
    let b = ExchangeSpec::boxed(1.0, 1.0).unwrap();
    SpeedProblem::new(&p, &b, &b, &coarse()).unwrap()
}

#[test]
fn reference_speed_sits_inside_the_bound_chain() {
    let problem = reference_problem();
    let p = problem.params;
    let r = problem.find_cstar().unwrap();
    assert_eq!(r.regime, SpeedRegime::Computed);
    let c_min = c_min_crossing(&p).unwrap();
    let upper = upper_bound_speed(&p).unwrap();
    assert!(
        p.c_kpp() < c_min && c_min < r.c_star && r.c_star < upper,
        "{r:?}"
    );
    assert!((r.c_star - 2.2195).abs() < 2e-3, "{}", r.c_star);
    assert!(r.bracket.1 - r.bracket.0 <= problem.cfg.speed_tol);
    assert!(r.gap_at_cstar.abs() < 1e-6, "{}", r.gap_at_cstar);
}

#[test]
fn gap_is_monotone_in_c() {
    let problem = reference_problem();
    let ck = problem.params.c_kpp();
    let upper = upper_bound_speed(&problem.params).unwrap();
    let gaps: Vec<f64> = (0..24)
        .map(|k| ck + (upper - ck) * (k as f64 + 0.5) / 24.0)
        .map(|c| problem.intersection_gap(c).unwrap().value)
        .collect();
    for w in gaps.windows(2) {
        assert!(w[1] >= w[0] - 1e-10, "{gaps:?}");
    }
    assert_eq!(sign_changes(gaps.iter().copied()), 1);
}

#[test]
fn curves_touch_once_at_the_speed() {
    // Just above c* the difference changes sign twice across the decay interval.
    let problem = reference_problem();
    let c = problem.find_cstar().unwrap().c_star;
    let scan = problem.difference_scan(1.01 * c, 2001).unwrap();
    assert_eq!(sign_changes(scan.iter().map(|s| s.1)), 2);
    let below = problem.difference_scan(0.99 * c, 2001).unwrap();
    assert!(below.iter().all(|s| s.1 < 0.0));
}

#[test]
fn stronger_source_means_faster_front() {
    let problem = reference_problem();
    let base = problem.find_cstar().unwrap().c_star;
    let weak = problem
        .with_source_scale(0.5)
        .unwrap()
        .find_cstar()
        .unwrap()
        .c_star;
    let strong = problem
        .with_source_scale(1.5)
        .unwrap()
        .find_cstar()
        .unwrap()
        .c_star;
    assert!(weak < base && base < strong, "{weak} {base} {strong}");
}

#[test]
fn repeated_runs_agree_bitwise() {
    let a = reference_problem().find_cstar().unwrap();
    let b = reference_problem().find_cstar().unwrap();
    assert_eq!(a.c_star.to_bits(), b.c_star.to_bits());
    assert_eq!(
        a.lambda_star.map(f64::to_bits),
        b.lambda_star.map(f64::to_bits)
    );
}

#[test]
fn shortcut_below_twice_the_field_diffusivity() {
    let p = ModelParams::new(1.5, 3.0, 0.8, 1.0, 2.0).unwrap();
    let mu = ExchangeSpec::triangle(1.0, 1.0).unwrap();
    let nu = ExchangeSpec::boxed(2.0, 2.0).unwrap();
    let r = SpeedProblem::new(&p, &mu, &nu, &coarse())
        .unwrap()
        .find_cstar()
        .unwrap();
    assert_eq!(r.regime, SpeedRegime::SubcriticalDLe2d);
    assert_eq!(r.c_star, 2.0 * (1.5f64 * 0.8).sqrt());
    assert_eq!(r.lambda_star, None);
}

#[test]
fn widely_spread_source_approaches_the_crossing_speed() {
    let p = ModelParams::new(1.0, 4.0, 1.0, 1.0, 1.0).unwrap();
    let b = ExchangeSpec::boxed(1.0, 1.0).unwrap();
    let mu = rescale_long_range(&b, 100.0).unwrap();
    let cfg = GridConfig {
        spacing: 0.05,
        ..GridConfig::default()
    };
    let c = SpeedProblem::new(&p, &mu, &b, &cfg)
        .unwrap()
        .find_cstar()
        .unwrap()
        .c_star;
    let limit = 5.0 / 6f64.sqrt();
    assert!((c - limit).abs() < 2e-2, "{c} vs {limit}");
    assert!(c > limit);
}

#[test]
fn mismatched_mass_is_rejected() {
    let p = ModelParams::new(1.0, 4.0, 1.0, 1.0, 1.0).unwrap();
    let b = ExchangeSpec::boxed(1.0, 1.0).unwrap();
    let heavy = ExchangeSpec::boxed(1.0, 1.5).unwrap();
    assert!(SpeedProblem::new(&p, &heavy, &b, &coarse()).is_err());
}
