//! JSON experiment configuration.
//!
//! Every file carries a top-level `experiment` tag naming the experiment;
//! the remaining keys depend on it. Command-line flags are applied on top
//! through [`Overrides`].
//!
//! ```json
//! { "experiment": "poisson", "d": 2, "alpha": 1.5, "lambda": 0.5, "n": 64,
//!   "source": { "kind": "constant", "value": 1.0 }, "out": "u.bin" }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PoissonProblem, Sweep};
use crate::error::{Error, Result};
use crate::solver::{AllenCahnConfig, CgConfig, GrayScottConfig};
use crate::stencil::SchemeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Coeffs(CoeffsConfig),
    Apply(ApplyConfig),
    Poisson(PoissonConfig),
    Convergence(ConvergenceConfig),
    AllenCahn(AllenCahnExperiment),
    GrayScott(GrayScottExperiment),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Coeffs(_) => "coeffs",
            ExperimentConfig::Apply(_) => "apply",
            ExperimentConfig::Poisson(_) => "poisson",
            ExperimentConfig::Convergence(_) => "convergence",
            ExperimentConfig::AllenCahn(_) => "allen-cahn",
            ExperimentConfig::GrayScott(_) => "gray-scott",
        }
    }

    /// Defaults for the experiment called `name`.
    pub fn default_for(name: &str) -> Result<Self> {
        Ok(match name {
            "coeffs" => ExperimentConfig::Coeffs(CoeffsConfig::default()),
            "apply" => ExperimentConfig::Apply(ApplyConfig::default()),
            "poisson" => ExperimentConfig::Poisson(PoissonConfig::default()),
            "convergence" => ExperimentConfig::Convergence(ConvergenceConfig::default()),
            "allen-cahn" => ExperimentConfig::AllenCahn(AllenCahnExperiment::default()),
            "gray-scott" => ExperimentConfig::GrayScott(GrayScottExperiment::default()),
            other => return Err(Error::Format(format!("unknown experiment `{other}`"))),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        match self {
            ExperimentConfig::Coeffs(c) => {
                c.grid.apply(o);
                set(&mut c.out, o.out.clone().map(Some));
            }
            ExperimentConfig::Apply(c) => {
                c.grid.apply(o);
                set(&mut c.out, o.out.clone());
            }
            ExperimentConfig::Poisson(c) => {
                c.grid.apply(o);
                set(&mut c.out, o.out.clone());
            }
            ExperimentConfig::Convergence(c) => {
                set(&mut c.sweep.alphas, o.alpha.map(|a| vec![a]));
                set(&mut c.sweep.lambda, o.lambda);
                set(&mut c.sweep.gamma, o.gamma);
                set(&mut c.sweep.n_ref, o.n);
                set(&mut c.out, o.out.clone());
            }
            ExperimentConfig::AllenCahn(c) => {
                set(&mut c.alpha, o.alpha);
                set(&mut c.lambda, o.lambda);
                set(&mut c.gamma, o.gamma);
                set(&mut c.n, o.n.map(Some));
                set(&mut c.out, o.out.clone());
            }
            ExperimentConfig::GrayScott(c) => {
                set(&mut c.alpha, o.alpha);
                set(&mut c.lambda, o.lambda);
                set(&mut c.gamma, o.gamma);
                set(&mut c.n, o.n.map(Some));
                set(&mut c.out, o.out.clone());
            }
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Values given on the command line; `None` keeps the configured value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub n: Option<usize>,
    pub out: Option<PathBuf>,
}

/// A grid on a box, `(−1, 1)^d` unless `domain` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub d: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub domain: Option<Vec<[f64; 2]>>,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            d: 2,
            alpha: 1.5,
            lambda: 0.5,
            gamma: 2.0,
            domain: None,
            n: 32,
        }
    }
}

impl GridConfig {
    pub fn params(&self) -> Result<SchemeParams> {
        let domain = self.domain.clone().unwrap_or_else(|| vec![[-1.0, 1.0]; self.d]);
        SchemeParams::new(self.d, self.alpha, self.lambda, domain, self.n)?.with_gamma(self.gamma)
    }

    fn apply(&mut self, o: &Overrides) {
        set(&mut self.alpha, o.alpha);
        set(&mut self.lambda, o.lambda);
        set(&mut self.gamma, o.gamma);
        set(&mut self.n, o.n);
    }
}

/// Dumps a stencil; `out = None` writes to standard output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoeffsConfig {
    #[serde(flatten)]
    pub grid: GridConfig,
    pub out: Option<PathBuf>,
}

/// Applies the operator to a snapshot, or to `Π(1 − x_i²)_+^p` sampled on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApplyConfig {
    #[serde(flatten)]
    pub grid: GridConfig,
    /// Input snapshot; its metadata fixes the domain and the grid.
    pub input: Option<PathBuf>,
    pub p: f64,
    pub out: PathBuf,
}

impl Default for ApplyConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            input: None,
            p: 2.0,
            out: PathBuf::from("apply.bin"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoissonConfig {
    #[serde(flatten)]
    pub grid: GridConfig,
    pub source: PoissonProblem,
    pub cg: CgConfig,
    pub out: PathBuf,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            source: PoissonProblem::Constant {
                value: 1.0,
                reference: Default::default(),
            },
            cg: CgConfig::default(),
            out: PathBuf::from("poisson.bin"),
        }
    }
}

/// What a convergence study measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Study {
    /// Operator applied to `Π(1 − x_i²)_+^p`.
    Operator { p: f64 },
    Poisson { problem: PoissonProblem },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    pub study: Study,
    #[serde(flatten)]
    pub sweep: Sweep,
    pub cg: CgConfig,
    pub out: PathBuf,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            study: Study::Operator { p: 3.0 },
            sweep: Sweep::default(),
            cg: CgConfig::default(),
            out: PathBuf::from("convergence.csv"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Desk,
    /// Full resolution; long running.
    Full,
}

/// Allen–Cahn run; unset fields take the preset values. Snapshots go to `out/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AllenCahnExperiment {
    pub preset: Preset,
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub out: PathBuf,
}

impl Default for AllenCahnExperiment {
    fn default() -> Self {
        Self {
            preset: Preset::Desk,
            alpha: 1.9,
            lambda: 0.2,
            gamma: 2.0,
            n: None,
            epsilon: None,
            dt: None,
            t_end: None,
            snapshot_times: None,
            out: PathBuf::from("allen_cahn"),
        }
    }
}

impl AllenCahnExperiment {
    pub fn resolve(&self) -> Result<AllenCahnConfig> {
        let mut cfg = match self.preset {
            Preset::Desk => AllenCahnConfig::desk(self.alpha, self.lambda)?,
            Preset::Full => AllenCahnConfig::full(self.alpha, self.lambda)?,
        };
        cfg.params = cfg.params.with_gamma(self.gamma)?;
        if let Some(n) = self.n {
            cfg.params = cfg.params.with_n(n)?;
        }
        set(&mut cfg.epsilon, self.epsilon);
        set(&mut cfg.dt, self.dt);
        set(&mut cfg.t_end, self.t_end);
        set(&mut cfg.snapshot_times, self.snapshot_times.clone());
        Ok(cfg)
    }
}

/// Gray–Scott run; unset fields take the preset values. Snapshots go to `out/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrayScottExperiment {
    pub preset: Preset,
    pub d: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub out: PathBuf,
}

impl Default for GrayScottExperiment {
    fn default() -> Self {
        Self {
            preset: Preset::Desk,
            d: 2,
            alpha: 1.8,
            lambda: 0.0,
            gamma: 2.0,
            n: None,
            dt: None,
            t_end: None,
            snapshot_times: None,
            out: PathBuf::from("gray_scott"),
        }
    }
}

impl GrayScottExperiment {
    pub fn resolve(&self) -> Result<GrayScottConfig> {
        let mut cfg = match self.preset {
            Preset::Desk => GrayScottConfig::desk(self.d, self.alpha, self.lambda)?,
            Preset::Full => GrayScottConfig::full(self.d, self.alpha, self.lambda)?,
        };
        cfg.params = cfg.params.with_gamma(self.gamma)?;
        if let Some(n) = self.n {
            cfg.params = cfg.params.with_n(n)?;
        }
        set(&mut cfg.dt, self.dt);
        set(&mut cfg.t_end, self.t_end);
        set(&mut cfg.snapshot_times, self.snapshot_times.clone());
        Ok(cfg)
    }
}
