//! Explicit finite-difference integration of the full road-field system
//!
//! ```text
//! u_t - D u_xx = -mu_bar u + int nu(y) v(t, x, y) dy            (road, 1-D)
//! v_t - d (v_xx + v_yy) = f(v) + mu(y) u(t, x) - nu(y) v        (field, 2-D)
//! ```
//!
//! on the strip `[-Lx, Lx] x [-Ly, Ly]` with homogeneous Neumann walls.
//! Forward Euler in time, centered second differences in space, trapezoid
//! quadrature in `y`. The `mu_bar` of the road equation is the discrete
//! mass of the sampled `mu`, so the exchange terms cancel exactly in the
//! total mass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{node, reaction, sample_cell_averaged, ExchangeSpec, ModelParams};

/// Which density the front is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontSignal {
    /// Road density `u(t, x)`.
    #[default]
    Road,
    /// Field density on the road line, `v(t, x, 0)`.
    FieldCenterline,
}

/// Compactly supported, nonnegative initial datum:
/// `amp * (1 - ((x - xc)/wx)^2)_+` on the road and the same profile times
/// `(1 - (y/wy)^2)_+` in the field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialBump {
    pub center_x: f64,
    pub half_width_x: f64,
    pub half_width_y: f64,
    pub amplitude_u: f64,
    pub amplitude_v: f64,
}

impl Default for InitialBump {
    fn default() -> Self {
        Self {
            center_x: 0.0,
            half_width_x: 2.0,
            half_width_y: 2.0,
            amplitude_u: 1.0,
            amplitude_v: 1.0,
        }
    }
}

impl InitialBump {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitude_u: self.amplitude_u * factor,
            amplitude_v: self.amplitude_v * factor,
            ..*self
        }
    }

    fn profile_x(&self, x: f64) -> f64 {
        let s = (x - self.center_x) / self.half_width_x;
        (1.0 - s * s).max(0.0)
    }

    fn profile_y(&self, y: f64) -> f64 {
        let s = y / self.half_width_y;
        (1.0 - s * s).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Front level as a fraction of the plateau.
    pub theta: f64,
    /// Trailing fraction of `[0, t_end]` used for the speed fit.
    pub fit_window: f64,
    /// Time between recorded front positions.
    pub record_interval: f64,
    pub bump: InitialBump,
    pub signal: FrontSignal,
    /// `false` switches the KPP term off.
    pub reaction: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            lx: 80.0,
            ly: 12.0,
            nx: 801,
            ny: 121,
            dt: 0.0,
            t_end: 40.0,
            theta: 0.1,
            fit_window: 1.0 / 3.0,
            record_interval: 0.25,
            bump: InitialBump {
                center_x: -80.0,
                ..InitialBump::default()
            },
            signal: FrontSignal::Road,
            reaction: true,
        }
    }
}

impl SimConfig {
    pub fn hx(&self) -> f64 {
        2.0 * self.lx / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        2.0 * self.ly / (self.ny - 1) as f64
    }

    /// `0.9 min(hx^2, hy^2) / (2 max(d, D))`.
    pub fn max_stable_dt(&self, p: &ModelParams) -> f64 {
        let h2 = self.hx().powi(2).min(self.hy().powi(2));
        0.9 * h2 / (2.0 * p.d_field.max(p.d_road))
    }

    /// Replaces a nonpositive `dt` by the largest admissible step.
    pub fn with_auto_dt(mut self, p: &ModelParams) -> Self {
        if !(self.dt > 0.0) {
            let field = 0.9 / (2.0 * p.d_field * (self.hx().powi(-2) + self.hy().powi(-2)));
            self.dt = self.max_stable_dt(p).min(field);
        }
        self
    }

    pub fn validate(&self, p: &ModelParams, mu: &ExchangeSpec, nu: &ExchangeSpec) -> Result<()> {
        let bad = |msg: String| Err(Error::SimConfig(msg));
        if self.nx < 3 || self.ny < 3 {
            return bad(format!("need nx, ny >= 3 (got {}, {})", self.nx, self.ny));
        }
        for (name, v) in [
            ("lx", self.lx),
            ("ly", self.ly),
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("record_interval", self.record_interval),
            ("bump.half_width_x", self.bump.half_width_x),
            ("bump.half_width_y", self.bump.half_width_y),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive (got {v})"));
            }
        }
        if !(self.bump.amplitude_u >= 0.0 && self.bump.amplitude_v >= 0.0) {
            return bad("initial amplitudes must be nonnegative".into());
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta must lie in (0, 1) (got {})", self.theta));
        }
        if !(self.fit_window > 0.0 && self.fit_window <= 1.0) {
            return bad(format!(
                "fit_window must lie in (0, 1] (got {})",
                self.fit_window
            ));
        }
        let limit = self.max_stable_dt(p);
        if self.dt > limit {
            return bad(format!(
                "dt = {} exceeds the stability limit {limit}",
                self.dt
            ));
        }
        let field = 2.0 * p.d_field * self.dt * (self.hx().powi(-2) + self.hy().powi(-2));
        if field > 0.9 {
            return bad(format!("field diffusion number {field} exceeds 0.9"));
        }
        let needed = mu.support_radius().max(nu.support_radius()) + 10.0 * decay_length(p);
        if self.ly < needed {
            return bad(format!(
                "ly = {} is below support + 10 sqrt(d/a) = {needed}",
                self.ly
            ));
        }
        Ok(())
    }
}

/// Transverse decay length `sqrt(d / a)` of the field front.
pub fn decay_length(p: &ModelParams) -> f64 {
    (p.d_field / p.growth).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Road density at the x-nodes.
    pub u: Vec<f64>,
    /// Field density, row-major in x: `v[ix * ny + iy]`.
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    /// Rightmost crossing of `theta * plateau`; `None` before the signal
    /// first reaches that level.
    pub positions: Vec<Option<f64>>,
    pub fitted_speed: f64,
    pub plateau: f64,
    pub signal: FrontSignal,
}

/// Precomputed grids and sampled kernels for one configuration.
#[derive(Clone, Debug)]
pub struct Simulator {
    cfg: SimConfig,
    params: ModelParams,
    xs: Vec<f64>,
    ys: Vec<f64>,
    mu_y: Vec<f64>,
    nu_y: Vec<f64>,
    /// `nu * w` for the trapezoid weights `w` in y.
    nu_w: Vec<f64>,
    w_y: Vec<f64>,
    mu_mass: f64,
    blowup: f64,
}

impl Simulator {
    pub fn new(
        cfg: &SimConfig,
        p: &ModelParams,
        mu: &ExchangeSpec,
        nu: &ExchangeSpec,
    ) -> Result<Self> {
        cfg.validate(p, mu, nu)?;
        let (nx, ny) = (cfg.nx, cfg.ny);
        let (hx, hy) = (cfg.hx(), cfg.hy());
        let xs: Vec<f64> = (0..nx).map(|i| node(i, nx, hx)).collect();
        let ys: Vec<f64> = (0..ny).map(|i| node(i, ny, hy)).collect();
        let mu_y = sample_cell_averaged(mu, cfg.ly, ny)?.values;
        let nu_y = sample_cell_averaged(nu, cfg.ly, ny)?.values;
        let mut w_y = vec![hy; ny];
        w_y[0] = 0.5 * hy;
        w_y[ny - 1] = 0.5 * hy;
        let nu_w: Vec<f64> = nu_y.iter().zip(&w_y).map(|(n, w)| n * w).collect();
        let mu_mass = mu_y.iter().zip(&w_y).map(|(m, w)| m * w).sum();
        let ratio = if mu.mass > 0.0 {
            nu.mass / mu.mass
        } else {
            1.0
        };
        Ok(Self {
            cfg: *cfg,
            params: *p,
            xs,
            ys,
            mu_y,
            nu_y,
            nu_w,
            w_y,
            mu_mass,
            blowup: 10.0 * ratio.max(1.0),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn initial_state(&self) -> SimState {
        let b = &self.cfg.bump;
        let u = self
            .xs
            .iter()
            .map(|&x| b.amplitude_u * b.profile_x(x))
            .collect();
        let mut v = Vec::with_capacity(self.xs.len() * self.ys.len());
        for &x in &self.xs {
            let px = b.profile_x(x);
            v.extend(self.ys.iter().map(|&y| b.amplitude_v * px * b.profile_y(y)));
        }
        SimState { t: 0.0, u, v }
    }

    pub fn zero_state(&self) -> SimState {
        SimState {
            t: 0.0,
            u: vec![0.0; self.xs.len()],
            v: vec![0.0; self.xs.len() * self.ys.len()],
        }
    }

    /// `int u dx + int int v dx dy` by the trapezoid rule.
    pub fn total_mass(&self, s: &SimState) -> f64 {
        let nx = self.xs.len();
        let ny = self.ys.len();
        let hx = self.cfg.hx();
        let wx = |i: usize| if i == 0 || i == nx - 1 { 0.5 * hx } else { hx };
        let mut total = 0.0;
        for ix in 0..nx {
            let row = &s.v[ix * ny..(ix + 1) * ny];
            let field: f64 = row.iter().zip(&self.w_y).map(|(v, w)| v * w).sum();
            total += wx(ix) * (s.u[ix] + field);
        }
        total
    }

    pub fn step(&self, s: &SimState) -> Result<SimState> {
        let mut next = SimState {
            t: s.t,
            u: vec![0.0; s.u.len()],
            v: vec![0.0; s.v.len()],
        };
        self.step_into(s, &mut next)?;
        Ok(next)
    }

    /// One forward Euler step from `s` into `out`.
    pub fn step_into(&self, s: &SimState, out: &mut SimState) -> Result<()> {
        let SimConfig { nx, ny, dt, .. } = self.cfg;
        let p = &self.params;
        let (d, big_d, a) = (p.d_field, p.d_road, p.growth);
        let kx = 1.0 / self.cfg.hx().powi(2);
        let ky = 1.0 / self.cfg.hy().powi(2);
        let grow = self.cfg.reaction;
        let (u, v) = (&s.u, &s.v);

        let rows: Vec<(f64, f64, f64)> = out
            .v
            .par_chunks_mut(ny)
            .enumerate()
            .map(|(ix, dst)| {
                let xm = if ix == 0 { 1 } else { ix - 1 };
                let xp = if ix == nx - 1 { nx - 2 } else { ix + 1 };
                let row = &v[ix * ny..(ix + 1) * ny];
                let left = &v[xm * ny..(xm + 1) * ny];
                let right = &v[xp * ny..(xp + 1) * ny];
                let ui = u[ix];
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let mut exchange = 0.0;
                for iy in 0..ny {
                    let ym = if iy == 0 { 1 } else { iy - 1 };
                    let yp = if iy == ny - 1 { ny - 2 } else { iy + 1 };
                    let c = row[iy];
                    let lap =
                        kx * (left[iy] - 2.0 * c + right[iy]) + ky * (row[ym] - 2.0 * c + row[yp]);
                    let f = if grow { reaction(c, a) } else { 0.0 };
                    let nv = c + dt * (d * lap + f + self.mu_y[iy] * ui - self.nu_y[iy] * c);
                    dst[iy] = nv;
                    lo = lo.min(nv);
                    hi = hi.max(nv);
                    exchange += self.nu_w[iy] * c;
                }
                (exchange, lo, hi)
            })
            .collect();

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for ix in 0..nx {
            let xm = if ix == 0 { 1 } else { ix - 1 };
            let xp = if ix == nx - 1 { nx - 2 } else { ix + 1 };
            let lap = kx * (u[xm] - 2.0 * u[ix] + u[xp]);
            let (exchange, rlo, rhi) = rows[ix];
            let nu_ = u[ix] + dt * (big_d * lap - self.mu_mass * u[ix] + exchange);
            out.u[ix] = nu_;
            lo = lo.min(nu_).min(rlo);
            hi = hi.max(nu_).max(rhi);
        }
        out.t = s.t + dt;

        if !hi.is_finite() || hi > self.blowup || lo.is_nan() {
            return Err(Error::Instability {
                t: out.t,
                value: hi,
                limit: self.blowup,
            });
        }
        if lo < 0.0 {
            return Err(Error::Positivity {
                t: out.t,
                value: lo,
            });
        }
        Ok(())
    }

    /// Advances `state` by `steps` steps.
    pub fn run_steps(&self, state: &mut SimState, steps: usize) -> Result<()> {
        let mut scratch = state.clone();
        for _ in 0..steps {
            self.step_into(state, &mut scratch)?;
            std::mem::swap(state, &mut scratch);
        }
        Ok(())
    }

    /// 1-D profile the front is measured on.
    pub fn signal(&self, s: &SimState) -> Vec<f64> {
        let ny = self.ys.len();
        match self.cfg.signal {
            FrontSignal::Road => s.u.clone(),
            FrontSignal::FieldCenterline => (0..self.xs.len())
                .map(|ix| {
                    let row = &s.v[ix * ny..(ix + 1) * ny];
                    if ny % 2 == 1 {
                        row[ny / 2]
                    } else {
                        0.5 * (row[ny / 2 - 1] + row[ny / 2])
                    }
                })
                .collect(),
        }
    }

    pub fn run_front_speed(&self) -> Result<FrontTrace> {
        let cfg = &self.cfg;
        let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
        let every = ((cfg.record_interval / cfg.dt).round() as usize).max(1);
        let mut state = self.initial_state();
        let mut scratch = state.clone();
        let mut times = Vec::new();
        let mut profiles = Vec::new();
        for k in 1..=steps {
            self.step_into(&state, &mut scratch)?;
            std::mem::swap(&mut state, &mut scratch);
            state.t = k as f64 * cfg.dt;
            if k % every == 0 || k == steps {
                times.push(state.t);
                profiles.push(self.signal(&state));
            }
        }

        let hx = cfg.hx();
        let center = ((cfg.bump.center_x + cfg.lx) / hx)
            .round()
            .clamp(0.0, (cfg.nx - 1) as f64) as usize;
        let plateau = profiles.last().map_or(0.0, |prof| prof[center]);
        let level = cfg.theta * plateau;
        let limit = cfg.lx - 5.0 * decay_length(&self.params);
        let mut positions = Vec::with_capacity(times.len());
        for (t, prof) in times.iter().zip(&profiles) {
            let pos = front_position(&self.xs, prof, level);
            if let Some(x) = pos {
                if x > limit {
                    return Err(Error::FrontReachedBoundary {
                        t: *t,
                        position: x,
                        limit,
                    });
                }
            }
            positions.push(pos);
        }

        let start = cfg.t_end * (1.0 - cfg.fit_window);
        let (ts, xs): (Vec<f64>, Vec<f64>) = times
            .iter()
            .zip(&positions)
            .filter(|(t, _)| **t >= start)
            .filter_map(|(t, x)| x.map(|x| (*t, x)))
            .unzip();
        if ts.len() < 2 {
            return Err(Error::SimConfig(
                "too few front positions in the fit window".into(),
            ));
        }
        Ok(FrontTrace {
            times,
            positions,
            fitted_speed: least_squares_slope(&ts, &xs),
            plateau,
            signal: cfg.signal,
        })
    }
}

/// One explicit step with a freshly assembled simulator.
pub fn step(
    state: &SimState,
    cfg: &SimConfig,
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
) -> Result<SimState> {
    Simulator::new(cfg, p, mu, nu)?.step(state)
}

pub fn run_front_speed(
    cfg: &SimConfig,
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
) -> Result<FrontTrace> {
    Simulator::new(cfg, p, mu, nu)?.run_front_speed()
}

/// Rightmost crossing of `level`, linearly interpolated between nodes.
pub fn front_position(xs: &[f64], profile: &[f64], level: f64) -> Option<f64> {
    if !(level > 0.0) {
        return None;
    }
    let i = profile.iter().rposition(|&s| s >= level)?;
    if i + 1 == profile.len() {
        return Some(xs[i]);
    }
    let (a, b) = (profile[i], profile[i + 1]);
    Some(xs[i] + (a - level) / (a - b) * (xs[i + 1] - xs[i]))
}

pub fn least_squares_slope(ts: &[f64], xs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let xm = xs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, x) in ts.iter().zip(xs) {
        sxy += (t - tm) * (x - xm);
        sxx += (t - tm) * (t - tm);
    }
    sxy / sxx
}
