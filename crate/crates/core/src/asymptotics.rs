//! Long-range sweeps `R -> c*(R)` and regime classification against the
//! threshold diffusivity `d (2 + mu_bar / a)`.
//!
//! Spreading either kernel with `k_R(y) = k(y / R) / R` drives `Psi2` to zero
//! inside the decay interval, so `c*(R)` tends to the smallest speed at which
//! the road parabola still reaches past `lambda2-`: `c_K` below the
//! threshold, `c_min` above it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{c_min_crossing, threshold_d};
use crate::error::{Error, Result};
use crate::model::{rescale_long_range, ExchangeSpec, ModelParams};
use crate::speed::{GridConfig, SpeedProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `D < 2d`.
    Subcritical,
    /// `2d <= D <= d (2 + mu_bar / a)`: the infimum over kernels is `c_K`.
    BelowThreshold,
    /// `D > d (2 + mu_bar / a)`: the infimum is `c_min > c_K`, never attained.
    AboveThreshold,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeInfo {
    pub regime: Regime,
    pub predicted_infimum: f64,
    pub threshold_d: f64,
}

pub fn classify_regime(p: &ModelParams) -> Result<RegimeInfo> {
    let threshold = threshold_d(p);
    let (regime, predicted_infimum) = if p.d_road < 2.0 * p.d_field {
        (Regime::Subcritical, p.c_kpp())
    } else if p.d_road <= threshold {
        (Regime::BelowThreshold, p.c_kpp())
    } else {
        (Regime::AboveThreshold, c_min_crossing(p)?)
    };
    Ok(RegimeInfo {
        regime,
        predicted_infimum,
        threshold_d: threshold,
    })
}

/// Which exchange kernel is spread out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleTarget {
    #[default]
    Mu,
    Nu,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scales: Vec<f64>,
    pub speeds: Vec<f64>,
    pub predicted_limit: f64,
    pub regime: Regime,
    /// `|c*(R_max) - predicted_limit| <= tolerance`.
    pub converged: bool,
    pub tolerance: f64,
    /// Observed non-increase of `c*(R)` (within `1e-9`); recorded, not assumed.
    pub monotone: bool,
    /// Aitken extrapolation from the last three speeds, if defined.
    pub extrapolated_limit: Option<f64>,
}

/// Default convergence tolerance on `c*(R_max)`.
pub const SWEEP_TOLERANCE: f64 = 0.05;

/// Geometric scales `{4^k : k = 0..count}`.
pub fn default_scales(count: usize) -> Vec<f64> {
    (0..count).map(|k| 4f64.powi(k as i32)).collect()
}

pub fn sweep_r(
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
    which: RescaleTarget,
    scales: &[f64],
    cfg: &GridConfig,
) -> Result<SweepResult> {
    if scales.is_empty() {
        return Err(Error::Config("sweep needs at least one scale".into()));
    }
    if scales.iter().any(|&r| !(r >= 1.0 && r.is_finite())) {
        return Err(Error::Config("sweep scales must be finite and >= 1".into()));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "sweep scales must be strictly increasing".into(),
        ));
    }
    let info = classify_regime(p)?;
    let predicted_limit = if p.d_road <= info.threshold_d {
        p.c_kpp()
    } else {
        info.predicted_infimum
    };

    let speeds = scales
        .par_iter()
        .map(|&r| {
            let (m, n) = match which {
                RescaleTarget::Mu => (rescale_long_range(mu, r)?, *nu),
                RescaleTarget::Nu => (*mu, rescale_long_range(nu, r)?),
                RescaleTarget::Both => (rescale_long_range(mu, r)?, rescale_long_range(nu, r)?),
            };
            Ok(SpeedProblem::new(p, &m, &n, cfg)?.find_cstar()?.c_star)
        })
        .collect::<Result<Vec<f64>>>()?;

    let last = *speeds.last().expect("nonempty");
    Ok(SweepResult {
        scales: scales.to_vec(),
        monotone: speeds.windows(2).all(|w| w[1] <= w[0] + 1e-9),
        extrapolated_limit: aitken_limit(&speeds),
        converged: (last - predicted_limit).abs() <= SWEEP_TOLERANCE,
        tolerance: SWEEP_TOLERANCE,
        predicted_limit,
        regime: info.regime,
        speeds,
    })
}

/// Aitken's delta-squared on the last three terms of a geometric-scale
/// sequence; `None` when the differences do not contract.
pub fn aitken_limit(values: &[f64]) -> Option<f64> {
    let k = values.len();
    if k < 3 {
        return None;
    }
    let (x0, x1, x2) = (values[k - 3], values[k - 2], values[k - 1]);
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let denom = d2 - d1;
    if denom == 0.0 || (d2 / d1).abs() >= 1.0 || !(d2 / d1).is_finite() {
        return None;
    }
    Some(x2 - d2 * d2 / denom)
}
