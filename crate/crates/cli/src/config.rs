//! Experiment configuration: a TOML file with one section per subsystem.
//! Every field is optional; omitted values fall back to the defaults listed
//! in the README.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use mrrecon_core::gridding::{DensityMethod, GriddingConfig, KernelBeta};
use mrrecon_core::objective::Hyperparameters;
use mrrecon_core::optimizer::{InitGuess, OptimConfig};
use mrrecon_core::phantom::{FlowProfile, PhantomSpec, Vessel};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub phantom: Option<PhantomSection>,
    #[serde(default)]
    pub hyper: HyperSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub gridding: GriddingSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub arms: Option<usize>,
    pub samples: Option<usize>,
    pub turns: Option<f64>,
    /// External trajectory CSV; overrides the spiral parameters.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub snr_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSection {
    pub background_center: Option<[f64; 2]>,
    pub background_side: Option<f64>,
    pub background_magnitude: Option<f64>,
    pub vessels: Option<Vec<VesselSection>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselSection {
    pub center: [f64; 2],
    pub radius: f64,
    pub magnitude: f64,
    pub profile: String,
    pub peak_phase: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperSection {
    pub lambda1: Option<f64>,
    pub alpha1: Option<f64>,
    pub lambda0: Option<f64>,
    pub alpha0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub max_iters: Option<usize>,
    pub rel_tol: Option<f64>,
    pub grad_tol: Option<f64>,
    pub ls_max_evals: Option<usize>,
    /// "zero" or "adjoint".
    pub init: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GriddingSection {
    pub kernel_width: Option<usize>,
    pub oversampling: Option<f64>,
    pub beta: Option<BetaValue>,
    /// "voronoi", "radial-spiral" or "uniform".
    pub density: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum BetaValue {
    Auto(String),
    Value(f64),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub arms: Option<Vec<usize>>,
    pub samples: Option<Vec<usize>>,
    pub snr_db: Option<Vec<SnrValue>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SnrValue {
    None(String),
    Db(f64),
}

impl SnrValue {
    pub fn resolve(&self) -> Result<Option<f64>> {
        match self {
            SnrValue::Db(v) => Ok(Some(*v)),
            SnrValue::None(s) if s == "none" => Ok(None),
            SnrValue::None(s) => bail!("snr_db entry must be a number or \"none\", got {s:?}"),
        }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    pub fn n_grid(&self) -> usize {
        self.grid.n.unwrap_or(128)
    }

    pub fn seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed.or(self.seed).unwrap_or(0)
    }

    pub fn spiral_arms(&self) -> usize {
        self.trajectory.arms.unwrap_or(6)
    }

    pub fn spiral_samples(&self) -> usize {
        self.trajectory.samples.unwrap_or(512)
    }

    pub fn spiral_turns(&self, arms: usize) -> f64 {
        self.trajectory
            .turns
            .unwrap_or_else(|| mrrecon_core::trajectory::default_turns(self.n_grid(), arms))
    }

    pub fn phantom_spec(&self) -> Result<PhantomSpec> {
        let mut spec = PhantomSpec::default_for(self.n_grid());
        if let Some(p) = &self.phantom {
            if let Some(c) = p.background_center {
                spec.background_center = c;
            }
            if let Some(s) = p.background_side {
                spec.background_side = s;
            }
            if let Some(m) = p.background_magnitude {
                spec.background_magnitude = m;
            }
            if let Some(vessels) = &p.vessels {
                spec.vessels = vessels
                    .iter()
                    .map(|v| {
                        let profile = match v.profile.as_str() {
                            "parabolic" => FlowProfile::Parabolic,
                            "blunt" => FlowProfile::Blunt,
                            other => {
                                bail!("vessel profile must be parabolic or blunt, got {other:?}")
                            }
                        };
                        Ok(Vessel {
                            center: v.center,
                            radius: v.radius,
                            magnitude: v.magnitude,
                            profile,
                            peak_phase: v.peak_phase,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
        }
        Ok(spec)
    }

    pub fn hyperparameters(&self) -> Hyperparameters {
        let d = Hyperparameters::default();
        Hyperparameters {
            lambda1: self.hyper.lambda1.unwrap_or(d.lambda1),
            alpha1: self.hyper.alpha1.unwrap_or(d.alpha1),
            lambda0: self.hyper.lambda0.unwrap_or(d.lambda0),
            alpha0: self.hyper.alpha0.unwrap_or(d.alpha0),
        }
    }

    pub fn optim_config(&self) -> Result<OptimConfig> {
        let d = OptimConfig::default();
        let init = match self.optimizer.init.as_deref() {
            None | Some("zero") => InitGuess::Zero,
            Some("adjoint") => InitGuess::Adjoint,
            Some(other) => bail!("optimizer.init must be \"zero\" or \"adjoint\", got {other:?}"),
        };
        Ok(OptimConfig {
            max_iters: self.optimizer.max_iters.unwrap_or(d.max_iters),
            rel_tol: self.optimizer.rel_tol.unwrap_or(d.rel_tol),
            grad_tol: self.optimizer.grad_tol.unwrap_or(d.grad_tol),
            ls_max_evals: self.optimizer.ls_max_evals.unwrap_or(d.ls_max_evals),
            init,
        })
    }

    /// Gridding configuration; `arms` feeds the radial-spiral density.
    pub fn gridding_config(&self, arms: usize) -> Result<GriddingConfig> {
        let d = GriddingConfig::default();
        let beta = match &self.gridding.beta {
            None => KernelBeta::Auto,
            Some(BetaValue::Value(v)) => KernelBeta::Value(*v),
            Some(BetaValue::Auto(s)) if s == "auto" => KernelBeta::Auto,
            Some(BetaValue::Auto(s)) => {
                bail!("gridding.beta must be a number or \"auto\", got {s:?}")
            }
        };
        let density = match self.gridding.density.as_deref() {
            None | Some("voronoi") => DensityMethod::Voronoi,
            Some("radial-spiral") => DensityMethod::RadialSpiral { arms },
            Some("uniform") => DensityMethod::Uniform,
            Some(other) => {
                bail!("gridding.density must be voronoi, radial-spiral or uniform, got {other:?}")
            }
        };
        Ok(GriddingConfig {
            kernel_width: self.gridding.kernel_width.unwrap_or(d.kernel_width),
            oversampling: self.gridding.oversampling.unwrap_or(d.oversampling),
            beta,
            density,
        })
    }

    pub fn sweep_lists(&self) -> Result<SweepLists> {
        let arms = self
            .sweep
            .arms
            .clone()
            .unwrap_or_else(|| vec![self.spiral_arms()]);
        let samples = self
            .sweep
            .samples
            .clone()
            .unwrap_or_else(|| vec![self.spiral_samples()]);
        let snrs = match &self.sweep.snr_db {
            None => vec![self.noise.snr_db],
            Some(list) => list
                .iter()
                .map(|s| s.resolve())
                .collect::<Result<Vec<_>>>()?,
        };
        if arms.is_empty() || samples.is_empty() || snrs.is_empty() {
            bail!("sweep lists must be non-empty");
        }
        Ok((arms, samples, snrs))
    }
}

/// Resolved sweep axes: (arms, samples per arm, SNR cells).
pub type SweepLists = (Vec<usize>, Vec<usize>, Vec<Option<f64>>);

/// Human-readable tag for an SNR cell ("none" or e.g. "30", "27.5").
pub fn snr_tag(snr: Option<f64>) -> String {
    match snr {
        None => "none".to_string(),
        Some(v) if v.fract() == 0.0 => format!("{v:.0}"),
        Some(v) => format!("{v}"),
    }
}
