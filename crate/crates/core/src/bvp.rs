//! Transverse profile of a linear traveling wave.
//!
//! For a speed `c` and decay `lambda`, the field factor `phi(y)` solves
//!
//! ```text
//! -d phi'' + (P(lambda) + nu(y)) phi = mu(y),   phi in H^1, phi >= 0,
//! ```
//!
//! with `P(lambda) = lambda c - d lambda^2 - a`. A decaying solution exists
//! iff `P > 0`, i.e. `lambda2- < lambda < lambda2+`. Outside the kernel
//! supports `phi` is exactly `B e^{-kappa |y|}` with `kappa = sqrt(P / d)`,
//! so the truncated problem closes with the Robin condition
//! `phi'(+-L) = -+ kappa phi(+-L)` at any `L` past the supports.
//!
//! The discretization is the three-point scheme with ghost-node Robin rows
//! (halved to keep the matrix symmetric) and cell-averaged kernels. The
//! matrix is a diagonally dominant M-matrix, so the discrete solution obeys
//! the maximum principle.

use serde::{Deserialize, Serialize};

use crate::dispersion::{lambda2_pm, p_coeff};
use crate::error::{Error, Result};
use crate::model::{sample_cell_averaged, trapezoid_mass, ExchangeSpec, GridFunction, ModelParams};
use crate::tridiag;

/// Minimum node count accepted by the solver.
pub const MIN_NODES: usize = 64;

/// Default truncation margin, in decay lengths `1 / kappa`.
pub const TAIL_DECAY_LENGTHS: f64 = 12.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BvpSolution {
    pub phi: GridFunction,
    /// `int nu phi` by the trapezoid rule.
    pub psi2: f64,
    pub lambda: f64,
    pub c: f64,
    /// `P(lambda)`.
    pub p_coeff: f64,
    /// `kappa = sqrt(P / d)`, the far-field decay rate.
    pub decay_rate: f64,
}

impl BvpSolution {
    /// `int phi` over the whole line: trapezoid on the grid plus the exact
    /// exponential tails beyond `+-L`.
    pub fn phi_integral(&self) -> f64 {
        let v = &self.phi.values;
        trapezoid_mass(&self.phi) + (v[0] + v[v.len() - 1]) / self.decay_rate
    }

    pub fn min_phi(&self) -> f64 {
        self.phi
            .values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Uniform grid that places the outer kernel support edge on a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridLayout {
    pub half_length: f64,
    pub nodes: usize,
}

impl GridLayout {
    /// Largest spacing `<= spacing` that divides `support`, extended by at
    /// least `margin` on each side.
    pub fn aligned(support: f64, spacing: f64, margin: f64) -> Result<Self> {
        crate::error::positive("support", support)?;
        crate::error::positive("spacing", spacing)?;
        if !(margin >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "margin",
                value: margin,
                reason: "must be nonnegative",
            });
        }
        let inner = ((support / spacing) * (1.0 - 1e-12)).ceil().max(32.0) as usize;
        let h = support / inner as f64;
        let outer = (margin / h * (1.0 - 1e-12)).ceil() as usize;
        let half_nodes = inner + outer;
        Ok(Self {
            half_length: half_nodes as f64 * h,
            nodes: 2 * half_nodes + 1,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.nodes - 1) as f64
    }
}

/// Discretized kernels on a fixed grid; reusable across `(lambda, c)`.
#[derive(Clone, Debug)]
pub struct BvpProblem {
    mu: GridFunction,
    nu: GridFunction,
}

impl BvpProblem {
    pub fn new(mu: &ExchangeSpec, nu: &ExchangeSpec, half_length: f64, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Resolution { n, min: MIN_NODES });
        }
        Ok(Self {
            mu: sample_cell_averaged(mu, half_length, n)?,
            nu: sample_cell_averaged(nu, half_length, n)?,
        })
    }

    pub fn with_layout(mu: &ExchangeSpec, nu: &ExchangeSpec, layout: GridLayout) -> Result<Self> {
        Self::new(mu, nu, layout.half_length, layout.nodes)
    }

    pub fn half_length(&self) -> f64 {
        self.mu.half_length
    }

    pub fn nodes(&self) -> usize {
        self.mu.len()
    }

    pub fn spacing(&self) -> f64 {
        self.mu.spacing()
    }

    /// Discrete `int mu`; equals the kernel mass up to rounding.
    pub fn mu_mass(&self) -> f64 {
        trapezoid_mass(&self.mu)
    }

    pub fn solve(&self, lambda: f64, c: f64, p: &ModelParams) -> Result<BvpSolution> {
        let pc = decay_coefficient(lambda, c, p)?;
        let kappa = (pc / p.d_field).sqrt();
        let phi = self.phi_values(pc, kappa, p.d_field);
        let psi2 = self.weighted_integral(&phi);
        Ok(BvpSolution {
            phi: GridFunction {
                half_length: self.half_length(),
                values: phi,
            },
            psi2,
            lambda,
            c,
            p_coeff: pc,
            decay_rate: kappa,
        })
    }

    pub fn psi2(&self, lambda: f64, c: f64, p: &ModelParams) -> Result<f64> {
        let pc = decay_coefficient(lambda, c, p)?;
        let kappa = (pc / p.d_field).sqrt();
        let phi = self.phi_values(pc, kappa, p.d_field);
        Ok(self.weighted_integral(&phi))
    }

    fn phi_values(&self, pc: f64, kappa: f64, d: f64) -> Vec<f64> {
        let n = self.nodes();
        let h = self.spacing();
        let mu = &self.mu.values;
        let nu = &self.nu.values;
        let k = d / (h * h);

        let mut diag = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        let edge = k + d * kappa / h;
        diag.push(edge + 0.5 * (pc + nu[0]));
        rhs.push(0.5 * mu[0]);
        for i in 1..n - 1 {
            diag.push(2.0 * k + pc + nu[i]);
            rhs.push(mu[i]);
        }
        diag.push(edge + 0.5 * (pc + nu[n - 1]));
        rhs.push(0.5 * mu[n - 1]);
        let off = vec![-k; n - 1];

        tridiag::solve_symmetric(&diag, &off, &mut rhs);
        rhs
    }

    fn weighted_integral(&self, phi: &[f64]) -> f64 {
        let nu = &self.nu.values;
        let n = phi.len();
        let mut sum = 0.5 * (nu[0] * phi[0] + nu[n - 1] * phi[n - 1]);
        for i in 1..n / 2 {
            sum += nu[i] * phi[i] + nu[n - 1 - i] * phi[n - 1 - i];
        }
        if n % 2 == 1 {
            sum += nu[n / 2] * phi[n / 2];
        }
        sum * self.spacing()
    }
}

/// `P(lambda)`, after checking that `lambda` lies strictly inside the decay
/// interval at speed `c`.
pub fn decay_coefficient(lambda: f64, c: f64, p: &ModelParams) -> Result<f64> {
    let (lower, upper) = lambda2_pm(c, p)?;
    let pc = p_coeff(lambda, c, p);
    if !(lambda > lower && lambda < upper && pc > 0.0) {
        return Err(Error::LambdaOutsideDomain {
            lambda,
            c,
            lower,
            upper,
        });
    }
    Ok(pc)
}

/// Solves the profile equation on `[-L, L]` with `n` nodes.
#[allow(clippy::too_many_arguments)]
pub fn solve_phi(
    lambda: f64,
    c: f64,
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
    half_length: f64,
    n: usize,
) -> Result<BvpSolution> {
    BvpProblem::new(mu, nu, half_length, n)?.solve(lambda, c, p)
}

/// Closed-form profile for box kernels `mu = m 1[-a, a]`, `nu = n_h 1[-a, a]`.
///
/// Inside: `phi = m / (P + n_h) + A cosh(kappa1 y)`, outside:
/// `phi = B e^{-kappa0 (|y| - a)}`, with `A`, `B` from `C^1` matching at `+-a`.
/// `A` is stored as `A cosh(kappa1 a)` so wide boxes do not overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxOracle {
    pub lambda: f64,
    pub c: f64,
    pub p_coeff: f64,
    pub mu_height: f64,
    pub nu_height: f64,
    pub half_width: f64,
    kappa_in: f64,
    kappa_out: f64,
    plateau: f64,
    inner_amp: f64,
    outer_amp: f64,
}

pub fn box_oracle_phi(
    lambda: f64,
    c: f64,
    p: &ModelParams,
    mu_height: f64,
    nu_height: f64,
    half_width: f64,
) -> Result<BoxOracle> {
    let pc = decay_coefficient(lambda, c, p)?;
    crate::error::positive("half_width", half_width)?;
    let d = p.d_field;
    let kappa_in = ((pc + nu_height) / d).sqrt();
    let kappa_out = (pc / d).sqrt();
    let plateau = mu_height / (pc + nu_height);
    let tanh = (kappa_in * half_width).tanh();
    let inner_amp = -kappa_out * plateau / (kappa_in * tanh + kappa_out);
    Ok(BoxOracle {
        lambda,
        c,
        p_coeff: pc,
        mu_height,
        nu_height,
        half_width,
        kappa_in,
        kappa_out,
        plateau,
        inner_amp,
        outer_amp: plateau + inner_amp,
    })
}

impl BoxOracle {
    pub fn phi(&self, y: f64) -> f64 {
        let r = y.abs();
        let a = self.half_width;
        if r <= a {
            let k = self.kappa_in;
            let ratio = ((k * (r - a)).exp() + (-k * (r + a)).exp()) / (1.0 + (-2.0 * k * a).exp());
            self.plateau + self.inner_amp * ratio
        } else {
            self.outer_amp * (-self.kappa_out * (r - a)).exp()
        }
    }

    fn inner_integral(&self) -> f64 {
        let a = self.half_width;
        let k = self.kappa_in;
        2.0 * a * self.plateau + 2.0 * self.inner_amp * (k * a).tanh() / k
    }

    pub fn psi2(&self) -> f64 {
        self.nu_height * self.inner_integral()
    }

    pub fn phi_integral(&self) -> f64 {
        self.inner_integral() + 2.0 * self.outer_amp / self.kappa_out
    }

    pub fn decay_rate(&self) -> f64 {
        self.kappa_out
    }

    /// Samples the exact profile on `[-L, L]`.
    pub fn sample(&self, half_length: f64, n: usize) -> Result<BvpSolution> {
        Ok(BvpSolution {
            phi: GridFunction::from_fn(half_length, n, |y| self.phi(y))?,
            psi2: self.psi2(),
            lambda: self.lambda,
            c: self.c,
            p_coeff: self.p_coeff,
            decay_rate: self.kappa_out,
        })
    }
}

/// `Psi2` on a ladder approaching both ends of the decay interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndpointCheck {
    /// Offsets from the endpoints, relative to the interval width.
    pub relative_offsets: Vec<f64>,
    pub lower_values: Vec<f64>,
    pub upper_values: Vec<f64>,
    /// Linear extrapolation in `sqrt(delta)` from the two closest rungs.
    pub lower_limit: f64,
    pub upper_limit: f64,
    /// Values increase towards the endpoint and stay below `mu_bar`.
    pub monotone_from_below: bool,
}

pub const ENDPOINT_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

pub fn psi2_endpoint_check(
    problem: &BvpProblem,
    c: f64,
    p: &ModelParams,
    relative_offsets: &[f64],
) -> Result<EndpointCheck> {
    let (lower, upper) = lambda2_pm(c, p)?;
    let width = upper - lower;
    let mut lower_values = Vec::with_capacity(relative_offsets.len());
    let mut upper_values = Vec::with_capacity(relative_offsets.len());
    for &t in relative_offsets {
        let delta = t * width;
        lower_values.push(problem.psi2(lower + delta, c, p)?);
        upper_values.push(problem.psi2(upper - delta, c, p)?);
    }
    let extrapolate = |values: &[f64]| -> f64 {
        let k = values.len();
        if k < 2 {
            return values.last().copied().unwrap_or(f64::NAN);
        }
        let (s1, s2) = (
            relative_offsets[k - 2].sqrt(),
            relative_offsets[k - 1].sqrt(),
        );
        let (v1, v2) = (values[k - 2], values[k - 1]);
        v2 - s2 * (v1 - v2) / (s1 - s2)
    };
    let rising = |values: &[f64]| {
        values.windows(2).all(|w| w[1] > w[0]) && values.iter().all(|&v| v < p.mu_bar)
    };
    Ok(EndpointCheck {
        relative_offsets: relative_offsets.to_vec(),
        lower_limit: extrapolate(&lower_values),
        upper_limit: extrapolate(&upper_values),
        monotone_from_below: rising(&lower_values) && rising(&upper_values),
        lower_values,
        upper_values,
    })
}

/// Sup-norm bound on `phi` when `mu` is replaced by `mu_R`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MaxPrincipleCheck {
    pub range_scale: f64,
    pub sup_phi: f64,
    pub psi2: f64,
    /// `||mu_R||_inf / P(lambda0)`.
    pub bound: f64,
    /// `||mu_R||_inf / (d P(lambda0))`, the form carrying an extra `d`.
    pub bound_with_d: f64,
    pub holds: bool,
    pub holds_with_d: bool,
}

pub fn max_principle_check(
    lambda0: f64,
    c: f64,
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
    range_scale: f64,
    spacing: f64,
) -> Result<MaxPrincipleCheck> {
    let mu_r = crate::model::rescale_long_range(mu, range_scale)?;
    let support = mu_r.support_radius().max(nu.support_radius());
    let layout = GridLayout::aligned(support, spacing, 2.0)?;
    let sol = BvpProblem::with_layout(&mu_r, nu, layout)?.solve(lambda0, c, p)?;
    let sup_phi = sol.phi.max_abs();
    let bound = mu_r.peak() / sol.p_coeff;
    let bound_with_d = bound / p.d_field;
    let slack = 1.0 + rounding_allowance(p.d_field, layout.spacing(), sol.p_coeff);
    Ok(MaxPrincipleCheck {
        range_scale,
        sup_phi,
        psi2: sol.psi2,
        bound,
        bound_with_d,
        holds: sup_phi <= bound * slack,
        holds_with_d: sup_phi <= bound_with_d * slack,
    })
}

/// `Psi2 <= ||nu_R||_inf int phi_bar`, where `phi_bar` solves the `nu`-free
/// equation and is a supersolution for every `nu >= 0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SupersolutionCheck {
    pub range_scale: f64,
    pub psi2: f64,
    pub phi_bar_integral: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn supersolution_check(
    lambda0: f64,
    c: f64,
    p: &ModelParams,
    mu: &ExchangeSpec,
    nu: &ExchangeSpec,
    range_scale: f64,
    spacing: f64,
) -> Result<SupersolutionCheck> {
    let nu_r = crate::model::rescale_long_range(nu, range_scale)?;
    let support = mu.support_radius().max(nu_r.support_radius());
    let layout = GridLayout::aligned(support, spacing, 2.0)?;
    let psi2 = BvpProblem::with_layout(mu, &nu_r, layout)?.psi2(lambda0, c, p)?;
    let free = ExchangeSpec::vanishing(nu.shape, nu.half_width)?;
    let bar = BvpProblem::with_layout(mu, &free, layout)?.solve(lambda0, c, p)?;
    let phi_bar_integral = bar.phi_integral();
    let bound = nu_r.peak() * phi_bar_integral;
    let slack = 1.0 + rounding_allowance(p.d_field, layout.spacing(), bar.p_coeff);
    Ok(SupersolutionCheck {
        range_scale,
        psi2,
        phi_bar_integral,
        bound,
        holds: psi2 <= bound * slack,
    })
}

/// Relative rounding allowance of the tridiagonal solve: machine epsilon
/// times the condition number `1 + 4 d / (h^2 P)` of the matrix. The bounds
/// above are attained on wide plateaus, so they need it.
fn rounding_allowance(d: f64, h: f64, pc: f64) -> f64 {
    f64::EPSILON * (1.0 + 4.0 * d / (h * h * pc))
}
