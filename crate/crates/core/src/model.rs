//! Model parameters, exchange kernels and grid carriers.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{positive, Error, Result};

/// Scalar parameters of the road-field system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Field diffusivity `d`.
    #[serde(rename = "d")]
    pub d_field: f64,
    /// Road diffusivity `D`.
    #[serde(rename = "D")]
    pub d_road: f64,
    /// Linearized growth rate `f'(0)`.
    #[serde(rename = "a")]
    pub growth: f64,
    /// Total mass of the road-to-field kernel `mu`.
    pub mu_bar: f64,
    /// Total mass of the field-to-road kernel `nu`.
    pub nu_bar: f64,
}

impl ModelParams {
    pub fn new(d_field: f64, d_road: f64, growth: f64, mu_bar: f64, nu_bar: f64) -> Result<Self> {
        let p = Self {
            d_field,
            d_road,
            growth,
            mu_bar,
            nu_bar,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("d", self.d_field)?;
        positive("D", self.d_road)?;
        positive("a", self.growth)?;
        positive("mu_bar", self.mu_bar)?;
        positive("nu_bar", self.nu_bar)?;
        Ok(())
    }

    /// Classical Fisher-KPP speed `2 sqrt(d a)`.
    pub fn c_kpp(&self) -> f64 {
        2.0 * (self.d_field * self.growth).sqrt()
    }

    pub fn with_road_diffusivity(&self, d_road: f64) -> Self {
        Self { d_road, ..*self }
    }

    pub fn with_masses(&self, mu_bar: f64, nu_bar: f64) -> Self {
        Self {
            mu_bar,
            nu_bar,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelShape {
    Box,
    Triangle,
    RaisedCosine,
}

impl std::str::FromStr for KernelShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(Self::Box),
            "triangle" => Ok(Self::Triangle),
            "raised-cosine" | "raised_cosine" => Ok(Self::RaisedCosine),
            other => Err(Error::Config(format!("unknown kernel shape `{other}`"))),
        }
    }
}

/// An even, nonnegative, compactly supported exchange kernel of prescribed mass.
///
/// The represented function is `k_R(y) = k(y / R) / R`, where `k` is the
/// base shape of half width `half_width` and `R = range_scale`. Rescaling
/// therefore spreads the support to `half_width * R` at constant mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeSpec {
    pub shape: KernelShape,
    pub half_width: f64,
    pub mass: f64,
    pub range_scale: f64,
}

impl ExchangeSpec {
    pub fn new(shape: KernelShape, half_width: f64, mass: f64) -> Result<Self> {
        let spec = Self {
            shape,
            half_width,
            mass,
            range_scale: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Zero kernel used by decoupled controls and degenerate BVP checks.
    /// It is never admissible as a model exchange.
    pub fn vanishing(shape: KernelShape, half_width: f64) -> Result<Self> {
        positive("half_width", half_width)?;
        Ok(Self {
            shape,
            half_width,
            mass: 0.0,
            range_scale: 1.0,
        })
    }

    pub fn boxed(half_width: f64, mass: f64) -> Result<Self> {
        Self::new(KernelShape::Box, half_width, mass)
    }

    pub fn triangle(half_width: f64, mass: f64) -> Result<Self> {
        Self::new(KernelShape::Triangle, half_width, mass)
    }

    pub fn raised_cosine(half_width: f64, mass: f64) -> Result<Self> {
        Self::new(KernelShape::RaisedCosine, half_width, mass)
    }

    pub fn validate(&self) -> Result<()> {
        positive("half_width", self.half_width)?;
        positive("mass", self.mass)?;
        positive("range_scale", self.range_scale)?;
        Ok(())
    }

    pub fn is_vanishing(&self) -> bool {
        self.mass == 0.0
    }

    /// Radius of the support, `half_width * R`.
    pub fn support_radius(&self) -> f64 {
        self.half_width * self.range_scale
    }

    /// Supremum of the kernel.
    pub fn peak(&self) -> f64 {
        let w = self.support_radius();
        match self.shape {
            KernelShape::Box => self.mass / (2.0 * w),
            KernelShape::Triangle | KernelShape::RaisedCosine => self.mass / w,
        }
    }

    /// Pointwise value. The box takes the mean of its one-sided limits at
    /// the jump, which keeps trapezoid masses exact on aligned grids.
    pub fn value(&self, y: f64) -> f64 {
        let w = self.support_radius();
        let r = y.abs();
        if self.mass == 0.0 || r > w {
            return 0.0;
        }
        match self.shape {
            KernelShape::Box => {
                let height = self.mass / (2.0 * w);
                if (w - r) <= 8.0 * f64::EPSILON * w {
                    0.5 * height
                } else {
                    height
                }
            }
            KernelShape::Triangle => self.mass / w * (1.0 - r / w),
            KernelShape::RaisedCosine => self.mass / (2.0 * w) * (1.0 + (PI * r / w).cos()),
        }
    }

    /// `int_0^t k(s) ds`; odd in `t`.
    pub fn half_integral(&self, t: f64) -> f64 {
        let w = self.support_radius();
        let s = t.abs().min(w);
        let m = self.mass;
        let v = match self.shape {
            KernelShape::Box => m / (2.0 * w) * s,
            KernelShape::Triangle => m / w * (s - s * s / (2.0 * w)),
            KernelShape::RaisedCosine => m / (2.0 * w) * (s + w / PI * (PI * s / w).sin()),
        };
        v.copysign(t)
    }

    /// Mean of the kernel over the cell `[y - h/2, y + h/2]`; exactly even in `y`.
    pub fn cell_average(&self, y: f64, h: f64) -> f64 {
        if self.mass == 0.0 {
            return 0.0;
        }
        let r = y.abs();
        if r - 0.5 * h >= self.support_radius() {
            return 0.0;
        }
        (self.half_integral(r + 0.5 * h) - self.half_integral(r - 0.5 * h)) / h
    }
}

/// Long-range rescaling `mu_R(y) = mu(y / R) / R`: same mass, support times `R`.
pub fn rescale_long_range(spec: &ExchangeSpec, scale: f64) -> Result<ExchangeSpec> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::NonPositiveScale(scale));
    }
    Ok(ExchangeSpec {
        range_scale: spec.range_scale * scale,
        ..*spec
    })
}

/// Logistic KPP nonlinearity `f(v) = a v (1 - v)`.
#[inline]
pub fn reaction(v: f64, growth: f64) -> f64 {
    growth * v * (1.0 - v)
}

/// Uniform samples on `[-L, L]`, symmetric about zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub half_length: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub const MIN_NODES: usize = 3;

    pub fn new(half_length: f64, values: Vec<f64>) -> Result<Self> {
        positive("half_length", half_length)?;
        if values.len() < Self::MIN_NODES {
            return Err(Error::InvalidGrid {
                n: values.len(),
                min: Self::MIN_NODES,
            });
        }
        Ok(Self {
            half_length,
            values,
        })
    }

    pub fn from_fn(half_length: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        positive("half_length", half_length)?;
        if n < Self::MIN_NODES {
            return Err(Error::InvalidGrid {
                n,
                min: Self::MIN_NODES,
            });
        }
        let h = 2.0 * half_length / (n - 1) as f64;
        let values = (0..n).map(|i| f(node(i, n, h))).collect();
        Ok(Self {
            half_length,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        node(i, self.values.len(), self.spacing())
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let (n, h) = (self.values.len(), self.spacing());
        (0..n).map(move |i| node(i, n, h))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|g(y_i) - g(-y_i)|` over the grid.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

/// `y_i = (i - (n-1)/2) h`, so that `y_i = -y_{n-1-i}` holds bit-for-bit.
#[inline]
pub(crate) fn node(i: usize, n: usize, h: f64) -> f64 {
    (i as f64 - 0.5 * (n - 1) as f64) * h
}

/// Pointwise samples of the kernel on `[-L, L]` with `n` nodes.
pub fn sample(spec: &ExchangeSpec, half_length: f64, n: usize) -> Result<GridFunction> {
    check_sampling_domain(spec, half_length, n)?;
    GridFunction::from_fn(half_length, n, |y| spec.value(y))
}

/// Cell-averaged samples; second-order accurate as a coefficient even where
/// the kernel jumps between nodes.
pub fn sample_cell_averaged(
    spec: &ExchangeSpec,
    half_length: f64,
    n: usize,
) -> Result<GridFunction> {
    check_sampling_domain(spec, half_length, n)?;
    let h = 2.0 * half_length / (n - 1) as f64;
    GridFunction::from_fn(half_length, n, |y| spec.cell_average(y, h))
}

fn check_sampling_domain(spec: &ExchangeSpec, half_length: f64, n: usize) -> Result<()> {
    if n < GridFunction::MIN_NODES {
        return Err(Error::InvalidGrid {
            n,
            min: GridFunction::MIN_NODES,
        });
    }
    let support = spec.support_radius();
    if !(half_length >= support) {
        return Err(Error::DomainTooSmall {
            half_length,
            support,
        });
    }
    Ok(())
}

/// Composite trapezoid rule. Terms are paired from the two ends inwards, so
/// odd samples on the symmetric grid cancel exactly.
pub fn trapezoid_mass(g: &GridFunction) -> f64 {
    let v = &g.values;
    let n = v.len();
    let mut sum = 0.5 * (v[0] + v[n - 1]);
    for i in 1..n / 2 {
        sum += v[i] + v[n - 1 - i];
    }
    if n % 2 == 1 {
        sum += v[n / 2];
    }
    sum * g.spacing()
}
