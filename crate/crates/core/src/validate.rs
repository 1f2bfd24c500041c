//! Invariant suite behind the `validate` command.
//!
//! Every check runs to completion and reports pass/fail with a one-line
//! detail; numerical errors inside a check count as failures rather than
//! aborting the suite. Random draws come from a seeded ChaCha stream, so a
//! report is reproducible from its seed.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{classify_regime, sweep_r, Regime, RescaleTarget};
use crate::bvp::{
    box_oracle_phi, max_principle_check, psi2_endpoint_check, supersolution_check, BvpProblem,
    GridLayout, ENDPOINT_LADDER,
};
use crate::dispersion::{
    c_min_crossing, lambda1_pm, lambda2_pm, p_coeff, psi1, threshold_d, upper_bound_speed,
};
use crate::error::Result;
use crate::model::{ExchangeSpec, ModelParams};
use crate::pdesim::{decay_length, InitialBump, SimConfig, Simulator};
use crate::speed::{sign_changes, GridConfig, SpeedProblem, SpeedRegime};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type Check = Result<(bool, String)>;

struct Suite<'a> {
    p: &'a ModelParams,
    mu: &'a ExchangeSpec,
    nu: &'a ExchangeSpec,
    grid: &'a GridConfig,
}

/// Runs every check against the given model and kernels.
pub fn run_suite(
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
    grid: &GridConfig,
    seed: u64,
) -> Result<ValidationReport> {
    let problem = SpeedProblem::new(p, mu, nu, grid)?;
    let s = Suite { p, mu, nu, grid };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut record = |name: &'static str, outcome: Check| {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        checks.push(CheckOutcome {
            name,
            passed,
            detail,
        });
    };

    record(
        "dispersion.threshold_identity",
        threshold_identity(&mut rng),
    );
    record("dispersion.root_identities", root_identities(&mut rng));
    record("dispersion.c_min_oracles", c_min_oracles());
    record("bvp.box_oracle", box_oracle(&mut rng));
    record("bvp.nonnegative_even", s.nonnegative_even(&mut rng));
    record("bvp.flux_balance", s.flux_balance());
    record("bvp.psi2_convex_symmetric", s.convex_symmetric());
    record("bvp.endpoint_limits", s.endpoint_limits());
    record("bvp.max_principle", s.max_principle());
    record("bvp.supersolution", s.supersolution());

    let found = problem.find_cstar();
    record("speed.bound_chain", s.bound_chain(&found));
    if let Ok(r) = &found {
        record("speed.result_invariants", s.result_invariants(&problem, r));
        record("speed.gap_monotone", s.gap_monotone(&problem));
        record(
            "speed.double_intersection",
            s.double_intersection(&problem, r),
        );
        record("speed.mass_dominance", s.mass_dominance(&problem, r));
        record("speed.determinism", determinism(&problem, r));
    }
    record("asymptotics.long_range_sweep", s.long_range_sweep());
    record("pdesim.mass_conservation", s.mass_conservation());
    record("pdesim.symmetry_positivity", s.symmetry_positivity());

    Ok(ValidationReport {
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn threshold_identity(rng: &mut ChaCha8Rng) -> Check {
    // lambda1+(c_K; D) is decreasing in D; bisect for lambda1+ = lambda2- = sqrt(a/d).
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.random_range(0.2..5.0);
        let a = rng.random_range(0.2..5.0);
        let mu_bar = rng.random_range(0.1..5.0);
        let p = ModelParams::new(d, 1.0, a, mu_bar, 1.0)?;
        let target = (a / d).sqrt();
        let ck = p.c_kpp();
        let excess = |big_d: f64| lambda1_pm(ck, &p.with_road_diffusivity(big_d)).1 - target;
        let (mut lo, mut hi) = (d * 1e-3, d * 1e3);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let want = threshold_d(&p);
        worst = worst.max((root - want).abs() / want);
    }
    Ok((
        worst <= 1e-10,
        format!("max relative error {worst:.3e} over 50 draws"),
    ))
}

fn root_identities(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = ModelParams::new(
            rng.random_range(0.2..5.0),
            rng.random_range(0.2..10.0),
            rng.random_range(0.2..5.0),
            rng.random_range(0.1..5.0),
            1.0,
        )?;
        let c = p.c_kpp() * rng.random_range(1.0..3.0);
        let (m1, p1) = lambda1_pm(c, &p);
        let (m2, p2) = lambda2_pm(c, &p)?;
        let scale1 = p.mu_bar + c * p1;
        let scale2 = p.growth + c * p2;
        worst = worst
            .max(psi1(m1, c, &p).abs() / scale1)
            .max(psi1(p1, c, &p).abs() / scale1)
            .max(p_coeff(m2, c, &p).abs() / scale2)
            .max(p_coeff(p2, c, &p).abs() / scale2);
    }
    Ok((worst <= 1e-12, format!("max scaled residual {worst:.3e}")))
}

fn c_min_oracles() -> Check {
    let p = ModelParams::new(1.0, 4.0, 1.0, 1.0, 1.0)?;
    let e4 = (c_min_crossing(&p)? - 5.0 / 6f64.sqrt()).abs();
    let e6 = (c_min_crossing(&p.with_road_diffusivity(6.0))? - 4.9f64.sqrt()).abs();
    Ok((
        e4 <= 1e-9 && e6 <= 1e-9,
        format!("errors {e4:.2e} (D=4), {e6:.2e} (D=6)"),
    ))
}

fn box_oracle(rng: &mut ChaCha8Rng) -> Check {
    let p = ModelParams::new(1.0, 4.0, 1.0, 1.0, 1.0)?;
    let h = 1e-3;
    let (mut phi_err, mut psi_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let c = rng.random_range(2.1..3.5);
        let (l, u) = lambda2_pm(c, &p)?;
        let lambda = l + (u - l) * rng.random_range(0.2..0.8);
        let m = rng.random_range(0.2..2.0);
        let n_h = rng.random_range(0.2..2.0);
        let a_w = rng.random_range(0.3..2.0);
        let oracle = box_oracle_phi(lambda, c, &p, m, n_h, a_w)?;
        let layout = GridLayout::aligned(a_w, h, 12.0 / oracle.decay_rate())?;
        let mu = ExchangeSpec::boxed(a_w, 2.0 * a_w * m)?;
        let nu = ExchangeSpec::boxed(a_w, 2.0 * a_w * n_h)?;
        let sol = BvpProblem::with_layout(&mu, &nu, layout)?.solve(lambda, c, &p)?;
        let exact = oracle.sample(layout.half_length, layout.nodes)?;
        let scale = exact.phi.max_abs();
        for (a, b) in sol.phi.values.iter().zip(&exact.phi.values) {
            phi_err = phi_err.max((a - b).abs() / scale);
        }
        psi_err = psi_err.max((sol.psi2 - oracle.psi2()).abs() / oracle.psi2());
    }
    Ok((
        phi_err <= 1e-5 && psi_err <= 1e-6,
        format!("phi {phi_err:.2e}, psi2 {psi_err:.2e} (5 draws, h = 1e-3)"),
    ))
}

impl Suite<'_> {
    /// Speed above `c_K` used for the profile checks.
    fn probe_speed(&self) -> f64 {
        1.25 * self.p.c_kpp()
    }

    fn layout(&self) -> Result<GridLayout> {
        let support = self.mu.support_radius().max(self.nu.support_radius());
        GridLayout::aligned(support, self.grid.spacing, self.grid.margin)
    }

    fn nonnegative_even(&self, rng: &mut ChaCha8Rng) -> Check {
        let c = self.probe_speed();
        let problem = BvpProblem::with_layout(self.mu, self.nu, self.layout()?)?;
        let (l, u) = lambda2_pm(c, self.p)?;
        let (mut neg, mut odd): (f64, f64) = (0.0, 0.0);
        let mut psi_positive = true;
        for _ in 0..8 {
            let lambda = l + (u - l) * rng.random_range(0.01..0.99);
            let sol = problem.solve(lambda, c, self.p)?;
            let scale = sol.phi.max_abs();
            neg = neg.max(-sol.min_phi() / scale);
            odd = odd.max(sol.phi.evenness_defect() / scale);
            psi_positive &= sol.psi2 > 0.0;
        }
        Ok((
            neg <= 1e-12 && odd <= 1e-12 && psi_positive,
            format!(
                "min/max {:.2e}, evenness {odd:.2e}, psi2 > 0: {psi_positive}",
                -neg
            ),
        ))
    }

    fn flux_balance(&self) -> Check {
        let c = self.probe_speed();
        let problem = BvpProblem::with_layout(self.mu, self.nu, self.layout()?)?;
        let (l, u) = lambda2_pm(c, self.p)?;
        let mut worst: f64 = 0.0;
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let sol = problem.solve(l + t * (u - l), c, self.p)?;
            let balance = sol.psi2 + sol.p_coeff * sol.phi_integral();
            worst = worst.max((balance - problem.mu_mass()).abs() / self.p.mu_bar);
        }
        Ok((worst <= 1e-9, format!("max relative residual {worst:.2e}")))
    }

    fn convex_symmetric(&self) -> Check {
        let c = self.probe_speed();
        let problem = BvpProblem::with_layout(self.mu, self.nu, self.layout()?)?;
        let (l, u) = lambda2_pm(c, self.p)?;
        let delta = 0.01 * (u - l);
        let n = 41;
        let lambdas: Vec<f64> = (0..n)
            .map(|k| l + delta + (u - l - 2.0 * delta) * k as f64 / (n - 1) as f64)
            .collect();
        let values = lambdas
            .iter()
            .map(|&x| problem.psi2(x, c, self.p))
            .collect::<Result<Vec<_>>>()?;
        let min_second = values
            .windows(3)
            .map(|w| w[0] - 2.0 * w[1] + w[2])
            .fold(f64::INFINITY, f64::min);
        let asym = (0..n)
            .map(|k| (values[k] - values[n - 1 - k]).abs())
            .fold(0.0, f64::max);
        let tol = 1e-8 * self.p.mu_bar;
        Ok((
            min_second >= -tol && asym <= tol,
            format!("min second difference {min_second:.2e}, asymmetry {asym:.2e}"),
        ))
    }

    fn endpoint_limits(&self) -> Check {
        let c = self.probe_speed();
        let problem = BvpProblem::with_layout(self.mu, self.nu, self.layout()?)?;
        let e = psi2_endpoint_check(&problem, c, self.p, &ENDPOINT_LADDER)?;
        let rel = |v: f64| (v - self.p.mu_bar).abs() / self.p.mu_bar;
        let worst = rel(e.lower_limit).max(rel(e.upper_limit));
        Ok((
            worst <= 0.02 && e.monotone_from_below,
            format!(
                "limits {:.5}, {:.5} (deviation {worst:.2e}), monotone from below: {}",
                e.lower_limit, e.upper_limit, e.monotone_from_below
            ),
        ))
    }

    fn lambda0(&self) -> Result<(f64, f64)> {
        let c = self.probe_speed();
        let (l, u) = lambda2_pm(c, self.p)?;
        Ok((0.5 * (l + u), c))
    }

    fn max_principle(&self) -> Check {
        let (lambda0, c) = self.lambda0()?;
        let mut ok = true;
        let mut parts = Vec::new();
        for r in [1.0, 10.0, 100.0] {
            let m =
                max_principle_check(lambda0, c, self.p, self.mu, self.nu, r, self.grid.spacing)?;
            ok &= m.holds;
            parts.push(format!(
                "R={r}: {:.3e} <= {:.3e} (d-form holds: {})",
                m.sup_phi, m.bound, m.holds_with_d
            ));
        }
        Ok((ok, parts.join("; ")))
    }

    fn supersolution(&self) -> Check {
        let (lambda0, c) = self.lambda0()?;
        let mut ok = true;
        let mut parts = Vec::new();
        for r in [1.0, 10.0, 100.0] {
            let s =
                supersolution_check(lambda0, c, self.p, self.mu, self.nu, r, self.grid.spacing)?;
            ok &= s.holds;
            parts.push(format!("R={r}: {:.3e} <= {:.3e}", s.psi2, s.bound));
        }
        Ok((ok, parts.join("; ")))
    }

    fn bound_chain(&self, found: &Result<crate::speed::SpeedResult>) -> Check {
        let r = match found {
            Ok(r) => r,
            Err(e) => return Ok((false, format!("find_cstar failed: {e}"))),
        };
        let ck = self.p.c_kpp();
        let supercritical = self.p.d_road > 2.0 * self.p.d_field;
        let lower = if supercritical {
            r.c_star > ck
        } else {
            r.c_star == ck
        };
        let upper = match upper_bound_speed(self.p) {
            Ok(ub) => r.c_star <= ub + 1e-9,
            Err(_) => true,
        };
        Ok((lower && upper, format!("c_K = {ck}, c* = {}", r.c_star)))
    }

    fn result_invariants(&self, problem: &SpeedProblem, r: &crate::speed::SpeedResult) -> Check {
        if r.regime == SpeedRegime::SubcriticalDLe2d {
            return Ok((r.lambda_star.is_none(), "subcritical shortcut".into()));
        }
        let (l2m, l2p) = lambda2_pm(r.c_star, self.p)?;
        let (_, l1p) = lambda1_pm(r.c_star, self.p);
        let ls = r.lambda_star.unwrap_or(f64::NAN);
        let inside = ls > l2m && ls < l1p.min(l2p);
        let tol = 1e-6 * self.p.mu_bar;
        let width = r.bracket.1 - r.bracket.0;
        Ok((
            inside && r.gap_at_cstar.abs() <= tol && width <= problem.cfg.speed_tol,
            format!(
                "lambda* = {ls}, gap = {:.2e}, bracket width {width:.2e}",
                r.gap_at_cstar
            ),
        ))
    }

    fn gap_monotone(&self, problem: &SpeedProblem) -> Check {
        let ck = self.p.c_kpp();
        let top = upper_bound_speed(self.p).map_or(1.5 * ck, |u| 1.05 * u);
        let n = 17;
        let gaps = (0..n)
            .map(|k| {
                let c = ck * (1.0 + 1e-6) + (top - ck) * k as f64 / (n - 1) as f64;
                problem.intersection_gap(c).map(|g| g.value)
            })
            .collect::<Result<Vec<_>>>()?;
        let worst = gaps
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::NEG_INFINITY, f64::max);
        Ok((
            worst <= 1e-9 * self.p.mu_bar,
            format!("largest decrease {worst:.2e} over {n} speeds"),
        ))
    }

    fn double_intersection(&self, problem: &SpeedProblem, r: &crate::speed::SpeedResult) -> Check {
        if r.regime == SpeedRegime::SubcriticalDLe2d {
            return Ok((true, "not applicable: subcritical shortcut".into()));
        }
        let count = |c: f64| -> Result<usize> {
            let scan = problem.difference_scan(c, 2001)?;
            Ok(sign_changes(scan.into_iter().map(|(_, v)| v)))
        };
        let above = count(1.001 * r.c_star)?;
        let below = count(0.999 * r.c_star)?;
        Ok((
            above >= 2 && below == 0,
            format!("sign changes: {above} at 1.001 c*, {below} at 0.999 c*"),
        ))
    }

    fn mass_dominance(&self, problem: &SpeedProblem, r: &crate::speed::SpeedResult) -> Check {
        let weaker = problem.with_source_scale(0.5)?.find_cstar()?;
        Ok((
            weaker.c_star <= r.c_star + 1e-9,
            format!(
                "c* = {} with half the source, {} nominal",
                weaker.c_star, r.c_star
            ),
        ))
    }

    fn long_range_sweep(&self) -> Check {
        let info = classify_regime(self.p)?;
        let s = sweep_r(
            self.p,
            self.mu,
            self.nu,
            RescaleTarget::Mu,
            &[1.0, 4.0, 16.0],
            self.grid,
        )?;
        let ck = self.p.c_kpp();
        let floor = s.speeds.iter().all(|&c| c >= ck - 1e-12);
        let slowdown = s.speeds.iter().all(|&c| c <= s.speeds[0] + 1e-9);
        let barrier = info.regime != Regime::AboveThreshold
            || s.speeds.iter().all(|&c| c > info.predicted_infimum - 1e-9);
        Ok((
            floor && slowdown && barrier,
            format!(
                "speeds {:?}, predicted limit {}",
                s.speeds, s.predicted_limit
            ),
        ))
    }

    fn small_sim(&self, reaction: bool) -> Result<Simulator> {
        let support = self.mu.support_radius().max(self.nu.support_radius());
        let ly = support + 10.0 * decay_length(self.p) + 1.0;
        let ny = 2 * (ly / 0.25).ceil() as usize + 1;
        let cfg = SimConfig {
            lx: 10.0,
            ly,
            nx: 81,
            ny,
            t_end: 1.0,
            dt: 0.0,
            reaction,
            bump: InitialBump {
                center_x: 0.0,
                ..InitialBump::default()
            },
            ..SimConfig::default()
        }
        .with_auto_dt(self.p);
        Simulator::new(&cfg, self.p, self.mu, self.nu)
    }

    fn mass_conservation(&self) -> Check {
        let sim = self.small_sim(false)?;
        let mut s = sim.initial_state();
        let m0 = sim.total_mass(&s);
        sim.run_steps(&mut s, 2000)?;
        let drift = (sim.total_mass(&s) - m0).abs() / m0;
        Ok((
            drift <= 1e-8,
            format!("relative drift {drift:.2e} over 2000 steps"),
        ))
    }

    fn symmetry_positivity(&self) -> Check {
        let sim = self.small_sim(true)?;
        let mut s = sim.initial_state();
        sim.run_steps(&mut s, 500)?;
        let (nx, ny) = (sim.xs().len(), sim.ys().len());
        let mut defect: f64 = 0.0;
        for ix in 0..nx {
            defect = defect.max((s.u[ix] - s.u[nx - 1 - ix]).abs());
            for iy in 0..ny {
                let v = s.v[ix * ny + iy];
                defect = defect
                    .max((v - s.v[ix * ny + ny - 1 - iy]).abs())
                    .max((v - s.v[(nx - 1 - ix) * ny + iy]).abs());
            }
        }
        let nonneg = s.u.iter().chain(&s.v).all(|&x| x >= 0.0);
        Ok((
            defect <= 1e-10 && nonneg,
            format!("symmetry defect {defect:.2e}, nonnegative: {nonneg}"),
        ))
    }
}

fn determinism(problem: &SpeedProblem, r: &crate::speed::SpeedResult) -> Check {
    let c = 1.01 * r.c_star;
    let a = problem.intersection_gap(c)?;
    let b = problem.intersection_gap(c)?;
    Ok((
        a.value.to_bits() == b.value.to_bits(),
        format!("G({c}) = {} twice", a.value),
    ))
}
