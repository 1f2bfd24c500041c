//! Spreading speed as the first speed at which the road parabola `Gamma1`
//! meets the field curve `Gamma2`.
//!
//! For `c > c_K` the gap `G(c) = max_lambda [Psi1 - Psi2]` over the common
//! domain is nondecreasing in `c` (`Psi1` grows with `c`, `Psi2` shrinks),
//! so `c*` is the sign change of `G`, located by bisection. At `c*` the two
//! curves are tangent and the maximizer is the tangency abscissa `lambda*`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvp::{BvpProblem, GridLayout};
use crate::dispersion::{lambda1_pm, lambda2_pm, psi1, upper_bound_speed};
use crate::error::{Error, Result};
use crate::model::{ExchangeSpec, ModelParams};

/// Discretization and tolerance settings for the speed computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Target node spacing of the transverse grid.
    pub spacing: f64,
    /// Grid extension beyond the widest kernel support.
    pub margin: f64,
    /// Chebyshev points of the coarse lambda scan.
    pub lambda_points: usize,
    /// Golden-section tolerance in lambda.
    pub lambda_tol: f64,
    /// Final bracket width in c.
    pub speed_tol: f64,
    /// Excluded neighbourhood of the decay-interval endpoints, relative to its width.
    pub endpoint_margin: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            spacing: 0.01,
            margin: 2.0,
            lambda_points: 129,
            lambda_tol: 1e-10,
            speed_tol: 1e-8,
            endpoint_margin: 1e-6,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        crate::error::positive("grid.spacing", self.spacing)?;
        crate::error::positive("grid.lambda_tol", self.lambda_tol)?;
        crate::error::positive("grid.speed_tol", self.speed_tol)?;
        crate::error::positive("grid.endpoint_margin", self.endpoint_margin)?;
        if !(self.margin >= 0.0) {
            return Err(Error::Config("grid.margin must be nonnegative".into()));
        }
        if self.lambda_points < 3 {
            return Err(Error::Config(
                "grid.lambda_points must be at least 3".into(),
            ));
        }
        if self.endpoint_margin >= 0.5 {
            return Err(Error::Config(
                "grid.endpoint_margin must be below 0.5".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeedRegime {
    /// `D <= 2d`: the road does not accelerate the front and `c* = c_K`.
    #[serde(rename = "subcritical_D_le_2d")]
    SubcriticalDLe2d,
    #[serde(rename = "computed")]
    Computed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedResult {
    pub c_star: f64,
    pub lambda_star: Option<f64>,
    pub regime: SpeedRegime,
    pub gap_at_cstar: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// One evaluation of the intersection gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEval {
    pub c: f64,
    pub value: f64,
    pub lambda_argmax: Option<f64>,
    /// The scanned interval, `None` when it is empty.
    pub interval: Option<(f64, f64)>,
}

impl GapEval {
    pub fn intersects(&self) -> bool {
        self.value >= 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSample {
    pub lambda: f64,
    pub psi1: f64,
    pub psi2: Option<f64>,
}

/// Model plus discretized kernels, shared by every gap evaluation.
#[derive(Clone, Debug)]
pub struct SpeedProblem {
    pub params: ModelParams,
    pub mu: ExchangeSpec,
    pub nu: ExchangeSpec,
    pub cfg: GridConfig,
    bvp: BvpProblem,
}

impl SpeedProblem {
    pub fn new(
        params: &ModelParams,
        mu: &ExchangeSpec,
        nu: &ExchangeSpec,
        cfg: &GridConfig,
    ) -> Result<Self> {
        params.validate()?;
        mu.validate()?;
        nu.validate()?;
        cfg.validate()?;
        check_mass("mu", mu.mass, params.mu_bar)?;
        check_mass("nu", nu.mass, params.nu_bar)?;
        let support = mu.support_radius().max(nu.support_radius());
        let layout = GridLayout::aligned(support, cfg.spacing, cfg.margin)?;
        Ok(Self {
            params: *params,
            mu: *mu,
            nu: *nu,
            cfg: *cfg,
            bvp: BvpProblem::with_layout(mu, nu, layout)?,
        })
    }

    pub fn bvp(&self) -> &BvpProblem {
        &self.bvp
    }

    /// Same problem with the field source `mu` multiplied by `factor` in the
    /// profile equation only, which scales `Psi2` by `factor` while `Psi1`
    /// (and the road loss `mu_bar`) is unchanged. A comparison device for the
    /// ordering of speeds under pointwise-ordered `Psi2`.
    pub fn with_source_scale(&self, factor: f64) -> Result<Self> {
        crate::error::positive("source scale", factor)?;
        let scaled = ExchangeSpec {
            mass: self.mu.mass * factor,
            ..self.mu
        };
        let layout = GridLayout {
            half_length: self.bvp.half_length(),
            nodes: self.bvp.nodes(),
        };
        Ok(Self {
            bvp: BvpProblem::with_layout(&scaled, &self.nu, layout)?,
            ..self.clone()
        })
    }

    pub fn psi2(&self, lambda: f64, c: f64) -> Result<f64> {
        self.bvp.psi2(lambda, c, &self.params)
    }

    fn difference(&self, lambda: f64, c: f64) -> Result<f64> {
        Ok(psi1(lambda, c, &self.params) - self.psi2(lambda, c)?)
    }

    /// `I(c) = [lambda2- + delta, min(lambda1+, lambda2+) - delta]`, or `None` if empty.
    pub fn scan_interval(&self, c: f64) -> Result<Option<(f64, f64)>> {
        let p = &self.params;
        let (l2m, l2p) = lambda2_pm(c, p)?;
        let (_, l1p) = lambda1_pm(c, p);
        let delta = self.cfg.endpoint_margin * (l2p - l2m);
        let lo = l2m + delta;
        let hi = l1p.min(l2p) - delta;
        Ok((hi > lo).then_some((lo, hi)))
    }

    /// Value reported when `I(c)` is empty.
    pub fn empty_gap(&self) -> f64 {
        -10.0 * self.params.mu_bar
    }

    pub fn intersection_gap(&self, c: f64) -> Result<GapEval> {
        let Some((lo, hi)) = self.scan_interval(c)? else {
            return Ok(GapEval {
                c,
                value: self.empty_gap(),
                lambda_argmax: None,
                interval: None,
            });
        };
        let m = self.cfg.lambda_points;
        let nodes = chebyshev_nodes(lo, hi, m);
        let values = nodes
            .par_iter()
            .map(|&l| self.difference(l, c))
            .collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for (k, v) in values.iter().enumerate() {
            if *v > values[best] {
                best = k;
            }
        }
        let a = nodes[best.saturating_sub(1)];
        let b = nodes[(best + 1).min(m - 1)];
        let (x, fx) = golden_max(|l| self.difference(l, c), a, b, self.cfg.lambda_tol)?;
        let (lambda, value) = if fx >= values[best] {
            (x, fx)
        } else {
            (nodes[best], values[best])
        };
        Ok(GapEval {
            c,
            value,
            lambda_argmax: Some(lambda),
            interval: Some((lo, hi)),
        })
    }

    pub fn find_cstar(&self) -> Result<SpeedResult> {
        let p = &self.params;
        let ck = p.c_kpp();
        if p.d_road <= 2.0 * p.d_field {
            return Ok(SpeedResult {
                c_star: ck,
                lambda_star: None,
                regime: SpeedRegime::SubcriticalDLe2d,
                gap_at_cstar: 0.0,
                iterations: 0,
                bracket: (ck, ck),
            });
        }
        let mut lo = ck * (1.0 + 1e-9);
        let mut hi = upper_bound_speed(p)? * 1.05;
        let g_lo = self.intersection_gap(lo)?;
        let g_hi = self.intersection_gap(hi)?;
        if g_lo.intersects() || !g_hi.intersects() {
            return Err(Error::BracketFailure {
                lower: lo,
                upper: hi,
                gap_lower: g_lo.value,
                gap_upper: g_hi.value,
            });
        }
        let mut iterations = 0;
        while hi - lo > self.cfg.speed_tol {
            let mid = 0.5 * (lo + hi);
            if self.intersection_gap(mid)?.intersects() {
                hi = mid;
            } else {
                lo = mid;
            }
            iterations += 1;
        }
        let c_star = 0.5 * (lo + hi);
        let at = self.intersection_gap(c_star)?;
        Ok(SpeedResult {
            c_star,
            lambda_star: at.lambda_argmax,
            regime: SpeedRegime::Computed,
            gap_at_cstar: at.value,
            iterations,
            bracket: (lo, hi),
        })
    }

    /// `Psi1 - Psi2` on `points` uniformly spaced abscissae of `I(c)`.
    pub fn difference_scan(&self, c: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        let Some((lo, hi)) = self.scan_interval(c)? else {
            return Ok(Vec::new());
        };
        uniform(lo, hi, points)
            .into_par_iter()
            .map(|l| Ok((l, self.difference(l, c)?)))
            .collect()
    }

    /// Samples of both curves on `[0, max(lambda1+, lambda2+)]`; `psi2` is
    /// absent outside the (margin-trimmed) decay interval.
    pub fn gamma_curves(&self, c: f64, points: usize) -> Result<Vec<GammaSample>> {
        let p = &self.params;
        let (_, l1p) = lambda1_pm(c, p);
        let domain = lambda2_pm(c, p).ok().and_then(|(m, pl)| {
            let delta = self.cfg.endpoint_margin * (pl - m);
            (pl - m > 2.0 * delta && pl > m).then_some((m + delta, pl - delta))
        });
        let top = domain.map_or(l1p, |(_, b)| b.max(l1p));
        uniform(0.0, top, points)
            .into_par_iter()
            .map(|l| {
                let psi2 = match domain {
                    Some((a, b)) if l >= a && l <= b => Some(self.psi2(l, c)?),
                    _ => None,
                };
                Ok(GammaSample {
                    lambda: l,
                    psi1: psi1(l, c, p),
                    psi2,
                })
            })
            .collect()
    }
}

fn check_mass(which: &'static str, kernel: f64, model: f64) -> Result<()> {
    if (kernel - model).abs() > 1e-12 * model.abs().max(1.0) {
        return Err(Error::MassMismatch {
            which,
            kernel,
            model,
        });
    }
    Ok(())
}

pub fn intersection_gap(
    c: f64,
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
    cfg: &GridConfig,
) -> Result<GapEval> {
    SpeedProblem::new(p, mu, nu, cfg)?.intersection_gap(c)
}

pub fn find_cstar(
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
    cfg: &GridConfig,
) -> Result<SpeedResult> {
    SpeedProblem::new(p, mu, nu, cfg)?.find_cstar()
}

/// Number of strict sign changes along a sequence (zeros are skipped).
pub fn sign_changes(values: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0_f64;
    let mut count = 0;
    for v in values {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

/// Chebyshev-Lobatto points on `[a, b]`, ascending.
fn chebyshev_nodes(a: f64, b: f64, m: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..m)
        .map(|k| {
            if k == 0 {
                a
            } else if k == m - 1 {
                b
            } else {
                mid - half * (std::f64::consts::PI * k as f64 / (m - 1) as f64).cos()
            }
        })
        .collect()
}

fn uniform(a: f64, b: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..m)
        .map(|k| a + (b - a) * k as f64 / (m - 1) as f64)
        .collect()
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
fn golden_max(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
