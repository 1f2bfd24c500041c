//! JSON run configuration.
//!
//! ```json
//! {
//!   "params": {"d": 1, "D": 4, "a": 1, "mu_bar": 1, "nu_bar": 1},
//!   "mu": {"shape": "box", "half_width": 1},
//!   "nu": {"shape": "triangle", "half_width": 2, "range_scale": 4},
//!   "grid": {"spacing": 0.01},
//!   "sweep": {"scales": [1, 4, 16, 64, 256], "rescale": "mu"},
//!   "sim": {"lx": 80, "nx": 801, "t_end": 40},
//!   "seed": 7
//! }
//! ```
//!
//! Kernel masses default to `mu_bar` / `nu_bar`; an explicit `mass` must
//! agree with them.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::asymptotics::{default_scales, RescaleTarget};
use crate::error::{Error, Result};
use crate::model::{ExchangeSpec, KernelShape, ModelParams};
use crate::pdesim::SimConfig;
use crate::speed::GridConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Speed,
    Sweep,
    Threshold,
    Simulate,
    Validate,
}

impl Command {
    fn needs_kernels(self) -> bool {
        self != Command::Threshold
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub shape: KernelShape,
    pub half_width: f64,
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default = "unit")]
    pub range_scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl KernelConfig {
    fn resolve(&self, which: &'static str, model_mass: f64) -> Result<ExchangeSpec> {
        let spec = ExchangeSpec {
            shape: self.shape,
            half_width: self.half_width,
            mass: self.mass.unwrap_or(model_mass),
            range_scale: self.range_scale,
        };
        spec.validate()?;
        if spec.mass != model_mass {
            return Err(Error::MassMismatch {
                which,
                kernel: spec.mass,
                model: model_mass,
            });
        }
        Ok(spec)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub scales: Vec<f64>,
    pub rescale: RescaleTarget,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scales: default_scales(5),
            rescale: RescaleTarget::Mu,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::Config("sweep.scales must not be empty".into()));
        }
        if self.scales.iter().any(|&r| !(r.is_finite() && r >= 1.0)) {
            return Err(Error::Config("sweep.scales must be finite and >= 1".into()));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "sweep.scales must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// The document as written on disk.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub params: ModelParams,
    #[serde(default)]
    pub mu: Option<KernelConfig>,
    #[serde(default)]
    pub nu: Option<KernelConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub sim: SimConfig,
    /// Samples of the `Gamma` curves written by `speed`.
    #[serde(default = "default_gamma_points")]
    pub gamma_points: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_gamma_points() -> usize {
    401
}

/// A fully validated invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub mu: ExchangeSpec,
    pub nu: ExchangeSpec,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    /// With `dt` resolved.
    pub sim: SimConfig,
    pub gamma_points: usize,
    pub out: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(command: Command, path: &Path, out: &Path, seed: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: FileConfig = serde_json::from_str(&text)?;
        Self::from_file(command, file, out, seed)
    }

    /// Validates every field the command touches before anything runs.
    pub fn from_file(
        command: Command,
        file: FileConfig,
        out: &Path,
        seed: Option<u64>,
    ) -> Result<Self> {
        let p = file.params;
        p.validate()?;
        file.grid.validate()?;
        file.sweep.validate()?;
        if file.gamma_points < 2 {
            return Err(Error::Config("gamma_points must be at least 2".into()));
        }
        let kernel =
            |k: Option<KernelConfig>, which: &'static str, mass: f64| -> Result<ExchangeSpec> {
                match k {
                    Some(k) => k.resolve(which, mass),
                    None if command.needs_kernels() => {
                        Err(Error::Config(format!("config is missing `{which}`")))
                    }
                    // Placeholder for commands that never look at the kernels.
                    None => ExchangeSpec::boxed(1.0, mass),
                }
            };
        let mu = kernel(file.mu, "mu", p.mu_bar)?;
        let nu = kernel(file.nu, "nu", p.nu_bar)?;
        let sim = file.sim.with_auto_dt(&p);
        if command == Command::Simulate {
            sim.validate(&p, &mu, &nu)?;
        }
        Ok(Self {
            command,
            params: p,
            mu,
            nu,
            grid: file.grid,
            sweep: file.sweep,
            sim,
            gamma_points: file.gamma_points,
            out: out.to_path_buf(),
            seed: seed.or(file.seed).unwrap_or(0),
        })
    }
}
