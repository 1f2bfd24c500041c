//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach
//! stdout. Exits nonzero when any criterion fails.

use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadspeed::asymptotics::{sweep_r, RescaleTarget};
use roadspeed::bvp::{
    box_oracle_phi, psi2_endpoint_check, BvpProblem, GridLayout, ENDPOINT_LADDER,
};
use roadspeed::cli::{execute, Command, FileConfig, RunConfig};
use roadspeed::dispersion::{c_min_crossing, lambda2_pm, threshold_d};
use roadspeed::pdesim::{FrontSignal, InitialBump, SimConfig, Simulator};
use roadspeed::speed::sign_changes;
use roadspeed::{ExchangeSpec, GridConfig, KernelShape, ModelParams, SpeedProblem};

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn params(d: f64, big_d: f64, a: f64, mu_bar: f64, nu_bar: f64) -> ModelParams {
    ModelParams::new(d, big_d, a, mu_bar, nu_bar).expect("valid parameters")
}

fn reference(big_d: f64) -> (ModelParams, ExchangeSpec) {
    (
        params(1.0, big_d, 1.0, 1.0, 1.0),
        ExchangeSpec::boxed(1.0, 1.0).unwrap(),
    )
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Road root `lambda1+` written out independently of the library.
fn road_root_plus(c: f64, big_d: f64, mu_bar: f64) -> f64 {
    (c + (c * c + 4.0 * big_d * mu_bar).sqrt()) / (2.0 * big_d)
}

fn threshold_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d: f64 = rng.random_range(0.1..10.0);
        let a: f64 = rng.random_range(0.1..10.0);
        let mu_bar = rng.random_range(0.05..10.0);
        let ck = 2.0 * (d * a).sqrt();
        // At c_K the field interval collapses to the double root c_K / (2d).
        let target = ck / (2.0 * d);
        let (mut lo, mut hi) = (1e-6 * d, 1e6 * d);
        while (hi - lo) > 1e-15 * hi {
            let mid = 0.5 * (lo + hi);
            if road_root_plus(ck, mid, mu_bar) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let want = threshold_d(&params(d, 1.0, a, mu_bar, 1.0));
        worst = worst.max((root - want).abs() / want);
    }
    Ok((
        worst <= 1e-10,
        format!("max relative error {worst:.2e} over 50 draws"),
    ))
}

fn crossing_oracles() -> Outcome {
    let e4 = (c_min_crossing(&reference(4.0).0).map_err(err)? - 5.0 / 6f64.sqrt()).abs();
    let e6 = (c_min_crossing(&reference(6.0).0).map_err(err)? - 4.9f64.sqrt()).abs();
    Ok((
        e4 <= 1e-9 && e6 <= 1e-9,
        format!("|err| {e4:.1e} (D=4), {e6:.1e} (D=6)"),
    ))
}

fn bvp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-3;
    let (mut phi_err, mut psi_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let p = params(
            rng.random_range(0.5..2.0),
            4.0,
            rng.random_range(0.5..2.0),
            1.0,
            1.0,
        );
        let c = p.c_kpp() * rng.random_range(1.02..1.8);
        let (l, u) = lambda2_pm(c, &p).map_err(err)?;
        let lambda = l + (u - l) * rng.random_range(0.05..0.95);
        let m = rng.random_range(0.1..3.0);
        let n_h = rng.random_range(0.1..3.0);
        let a_w = rng.random_range(0.2..3.0);
        let oracle = box_oracle_phi(lambda, c, &p, m, n_h, a_w).map_err(err)?;
        let layout = GridLayout::aligned(a_w, h, 12.0 / oracle.decay_rate()).map_err(err)?;
        let mu = ExchangeSpec::boxed(a_w, 2.0 * a_w * m).map_err(err)?;
        let nu = ExchangeSpec::boxed(a_w, 2.0 * a_w * n_h).map_err(err)?;
        let sol = BvpProblem::with_layout(&mu, &nu, layout)
            .and_then(|b| b.solve(lambda, c, &p))
            .map_err(err)?;
        let scale = sol.phi.nodes().map(|y| oracle.phi(y)).fold(0.0, f64::max);
        for (y, v) in sol.phi.nodes().zip(&sol.phi.values) {
            phi_err = phi_err.max((v - oracle.phi(y)).abs() / scale);
        }
        psi_err = psi_err.max((sol.psi2 - oracle.psi2()).abs() / oracle.psi2());
    }
    Ok((
        phi_err <= 1e-5 && psi_err <= 1e-6,
        format!("max rel err phi {phi_err:.2e}, psi2 {psi_err:.2e} over 20 tuples"),
    ))
}

fn psi2_shape() -> Outcome {
    let p = reference(4.0).0;
    let c = 2.5;
    let kernels = [
        (ExchangeSpec::boxed(1.0, 1.0), ExchangeSpec::boxed(1.0, 1.0)),
        (
            ExchangeSpec::triangle(1.5, 1.0),
            ExchangeSpec::raised_cosine(0.7, 1.0),
        ),
        (
            ExchangeSpec::raised_cosine(2.0, 1.0),
            ExchangeSpec::boxed(0.4, 1.0),
        ),
    ];
    let (l, u) = lambda2_pm(c, &p).map_err(err)?;
    let (mut min_second, mut asym, mut endpoint): (f64, f64, f64) = (f64::INFINITY, 0.0, 0.0);
    let mut monotone = true;
    for (mu, nu) in kernels {
        let (mu, nu) = (mu.map_err(err)?, nu.map_err(err)?);
        let support = mu.support_radius().max(nu.support_radius());
        let layout = GridLayout::aligned(support, 0.005, 2.0).map_err(err)?;
        let problem = BvpProblem::with_layout(&mu, &nu, layout).map_err(err)?;
        let delta = 0.01 * (u - l);
        let grid: Vec<f64> = (0..41)
            .map(|k| l + delta + (u - l - 2.0 * delta) * k as f64 / 40.0)
            .collect();
        let vals = grid
            .iter()
            .map(|&x| problem.psi2(x, c, &p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        for w in vals.windows(3) {
            min_second = min_second.min(w[0] - 2.0 * w[1] + w[2]);
        }
        for k in 0..41 {
            asym = asym.max((vals[k] - vals[40 - k]).abs());
        }
        let e = psi2_endpoint_check(&problem, c, &p, &ENDPOINT_LADDER).map_err(err)?;
        monotone &= e.monotone_from_below;
        endpoint = endpoint
            .max((e.lower_limit - p.mu_bar).abs() / p.mu_bar)
            .max((e.upper_limit - p.mu_bar).abs() / p.mu_bar);
    }
    let tol = 1e-8 * p.mu_bar;
    Ok((
        min_second >= -tol && asym <= tol && endpoint <= 0.02 && monotone,
        format!(
            "min 2nd diff {min_second:.2e}, asymmetry {asym:.2e}, endpoint deviation {:.2}%, monotone {monotone}",
            100.0 * endpoint
        ),
    ))
}

fn sweep_check(big_d: f64, limit: f64, strict_floor: Option<f64>) -> Outcome {
    let (p, b) = reference(big_d);
    let scales = [1.0, 4.0, 16.0, 64.0, 256.0];
    let s = sweep_r(
        &p,
        &b,
        &b,
        RescaleTarget::Mu,
        &scales,
        &GridConfig::default(),
    )
    .map_err(err)?;
    let nonincreasing = s.speeds.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let last = *s.speeds.last().unwrap();
    let near = last - limit <= 0.05;
    let above = strict_floor.is_none_or(|f| s.speeds.iter().all(|&c| c > f));
    let speeds: Vec<String> = s.speeds.iter().map(|c| format!("{c:.6}")).collect();
    Ok((
        nonincreasing && near && above,
        format!(
            "c*(R) = [{}], c*(256) - limit = {:.4}",
            speeds.join(", "),
            last - limit
        ),
    ))
}

fn sweep_below_threshold() -> Outcome {
    sweep_check(2.5, 2.0, None)
}

fn sweep_above_threshold() -> Outcome {
    let c_min = 5.0 / 6f64.sqrt();
    sweep_check(4.0, c_min, Some(c_min))
}

fn random_kernel(rng: &mut ChaCha8Rng, mass: f64) -> Result<ExchangeSpec, String> {
    let shape = [
        KernelShape::Box,
        KernelShape::Triangle,
        KernelShape::RaisedCosine,
    ][rng.random_range(0..3)];
    let mut k = ExchangeSpec::new(shape, rng.random_range(0.2..2.0), mass).map_err(err)?;
    k.range_scale = rng.random_range(1.0..3.0);
    Ok(k)
}

fn bound_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::INFINITY;
    for _ in 0..20 {
        let d: f64 = rng.random_range(0.5..2.0);
        let a: f64 = rng.random_range(0.5..2.0);
        let big_d = d * rng.random_range(2.05..10.0);
        let p = params(
            d,
            big_d,
            a,
            rng.random_range(0.2..3.0),
            rng.random_range(0.2..3.0),
        );
        let mu = random_kernel(&mut rng, p.mu_bar)?;
        let nu = random_kernel(&mut rng, p.nu_bar)?;
        let r = SpeedProblem::new(&p, &mu, &nu, &GridConfig::default())
            .and_then(|s| s.find_cstar())
            .map_err(err)?;
        let ck = 2.0 * (d * a).sqrt();
        let upper = big_d * (a / (big_d - d)).sqrt();
        worst_low = worst_low.min(r.c_star - ck);
        worst_high = worst_high.min(upper + 1e-9 - r.c_star);
    }
    Ok((
        worst_low > 0.0 && worst_high >= 0.0,
        format!("min(c* - c_K) = {worst_low:.3e}, min(upper - c*) = {worst_high:.3e}"),
    ))
}

fn subcritical_command() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut got = Vec::new();
    let mut ok = true;
    for factor in [1.0, 1.5, 2.0] {
        let text = format!(
            r#"{{"params": {{"d": 1.3, "D": {}, "a": 0.7, "mu_bar": 1, "nu_bar": 1}},
                "mu": {{"shape": "box", "half_width": 1}},
                "nu": {{"shape": "triangle", "half_width": 1}}}}"#,
            1.3 * factor
        );
        let file: FileConfig = serde_json::from_str(&text).map_err(err)?;
        let out = dir.path().join(format!("d{factor}"));
        let cfg = RunConfig::from_file(Command::Speed, file, &out, None).map_err(err)?;
        execute(&cfg).map_err(err)?;
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("speed.json")).map_err(err)?)
                .map_err(err)?;
        let c = report["c_star"].as_f64().unwrap_or(f64::NAN);
        ok &= c == 2.0 * (1.3f64 * 0.7).sqrt() && report["regime"] == "subcritical_D_le_2d";
        got.push(format!("{c}"));
    }
    Ok((
        ok,
        format!(
            "c* = [{}], c_K = {}",
            got.join(", "),
            2.0 * (1.3f64 * 0.7).sqrt()
        ),
    ))
}

fn front_speed(
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
    signal: FrontSignal,
    amp_u: f64,
) -> Result<f64, String> {
    let lx = 100.0;
    let cfg = SimConfig {
        lx,
        ly: 12.0,
        nx: 2001,
        ny: 201,
        dt: 0.0,
        t_end: 60.0,
        signal,
        bump: InitialBump {
            center_x: -lx,
            amplitude_u: amp_u,
            ..InitialBump::default()
        },
        ..SimConfig::default()
    }
    .with_auto_dt(p);
    Ok(Simulator::new(&cfg, p, mu, nu)
        .and_then(|s| s.run_front_speed())
        .map_err(err)?
        .fitted_speed)
}

fn pde_cross_validation() -> Outcome {
    let (p, b) = reference(4.0);
    let c_star = SpeedProblem::new(&p, &b, &b, &GridConfig::default())
        .and_then(|s| s.find_cstar())
        .map_err(err)?
        .c_star;
    let coupled = front_speed(&p, &b, &b, FrontSignal::Road, 1.0)?;
    let zero = ExchangeSpec::vanishing(KernelShape::Box, 1.0).map_err(err)?;
    let control = front_speed(&p, &zero, &zero, FrontSignal::FieldCenterline, 0.0)?;
    let e1 = (coupled - c_star).abs() / c_star;
    let e2 = (control - 2.0).abs() / 2.0;
    Ok((
        e1 <= 0.10 && e2 <= 0.10,
        format!(
            "coupled {coupled:.4} vs c* {c_star:.4} ({:.1}%), decoupled {control:.4} vs 2 ({:.1}%)",
            100.0 * e1,
            100.0 * e2
        ),
    ))
}

fn conservation() -> Outcome {
    let (p, b) = reference(4.0);
    let cfg = SimConfig {
        lx: 20.0,
        ly: 12.0,
        nx: 161,
        ny: 97,
        dt: 0.0,
        reaction: false,
        bump: InitialBump {
            center_x: 3.0,
            ..InitialBump::default()
        },
        ..SimConfig::default()
    }
    .with_auto_dt(&p);
    let sim = Simulator::new(&cfg, &p, &b, &b).map_err(err)?;
    let mut s = sim.initial_state();
    let m0 = sim.total_mass(&s);
    sim.run_steps(&mut s, 10_000).map_err(err)?;
    let drift = (sim.total_mass(&s) - m0).abs() / m0;
    Ok((
        drift <= 1e-8,
        format!("relative drift {drift:.2e} over 10^4 steps"),
    ))
}

fn tangency() -> Outcome {
    let (p, b) = reference(4.0);
    let problem = SpeedProblem::new(&p, &b, &b, &GridConfig::default()).map_err(err)?;
    let c_star = problem.find_cstar().map_err(err)?.c_star;
    let count = |c: f64| -> Result<usize, String> {
        let scan = problem.difference_scan(c, 2001).map_err(err)?;
        Ok(sign_changes(scan.into_iter().map(|(_, v)| v)))
    };
    let above = count(1.001 * c_star)?;
    let below = count(0.999 * c_star)?;
    Ok((
        above >= 2 && below == 0,
        format!("sign changes {above} at 1.001 c*, {below} at 0.999 c*"),
    ))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "threshold identity",
            budget: Duration::from_secs(1),
            run: threshold_identity,
        },
        Criterion {
            id: 2,
            name: "crossing-speed oracles",
            budget: Duration::from_secs(1),
            run: crossing_oracles,
        },
        Criterion {
            id: 3,
            name: "BVP oracle equivalence",
            budget: Duration::from_secs(30),
            run: bvp_oracle,
        },
        Criterion {
            id: 4,
            name: "Psi2 shape suite",
            budget: Duration::from_secs(60),
            run: psi2_shape,
        },
        Criterion {
            id: 5,
            name: "long-range sweep, D = 2.5",
            budget: Duration::from_secs(300),
            run: sweep_below_threshold,
        },
        Criterion {
            id: 6,
            name: "long-range sweep, D = 4",
            budget: Duration::from_secs(300),
            run: sweep_above_threshold,
        },
        Criterion {
            id: 7,
            name: "bound chain",
            budget: Duration::from_secs(600),
            run: bound_chain,
        },
        Criterion {
            id: 8,
            name: "subcritical shortcut",
            budget: Duration::from_secs(1),
            run: subcritical_command,
        },
        Criterion {
            id: 9,
            name: "PDE cross-validation",
            budget: Duration::from_secs(900),
            run: pde_cross_validation,
        },
        Criterion {
            id: 10,
            name: "conservation control",
            budget: Duration::from_secs(60),
            run: conservation,
        },
        Criterion {
            id: 11,
            name: "tangency structure",
            budget: Duration::from_secs(60),
            run: tangency,
        },
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.id.to_string() == *f) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= c.budget;
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} ({}): {}; {:.2} s of {} s{}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { " (over budget)" }
        );
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
