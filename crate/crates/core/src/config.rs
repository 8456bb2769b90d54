//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measures::{make_cantor_measure, AtomicMeasure, CantorSpec};
use crate::transforms::DiskGridParams;
use crate::weights::Weight;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MeasureSpec {
    Atoms { atoms: Vec<[f64; 2]> },
    /// JSON file `{"atoms": [[theta, mass], ...]}`, relative to the config file.
    AtomsFile { path: PathBuf },
    Cantor {
        cantor: CantorSpec,
        depth: u32,
        #[serde(default = "one")]
        mass: f64,
    },
    Sum { parts: Vec<MeasureSpec> },
}

fn one() -> f64 {
    1.0
}

impl MeasureSpec {
    pub fn build(&self, base: Option<&Path>) -> Result<AtomicMeasure> {
        match self {
            MeasureSpec::Atoms { atoms } => AtomicMeasure::new(atoms.iter().map(|a| (a[0], a[1])).collect()),
            MeasureSpec::AtomsFile { path } => {
                let full = match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| LabError::Config(format!("cannot read measure file {}: {e}", full.display())))?;
                AtomicMeasure::from_json(&text)
                    .map_err(|e| LabError::Config(format!("measure file {}: {e}", full.display())))
            }
            MeasureSpec::Cantor { cantor, depth, mass } => make_cantor_measure(cantor, *depth, *mass),
            MeasureSpec::Sum { parts } => {
                let mut acc = AtomicMeasure::empty();
                for part in parts {
                    acc = acc.plus(&part.build(base)?);
                }
                Ok(acc)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineKind {
    Cidr,
    Cidd,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CidrParams {
    pub etas: Vec<f64>,
    #[serde(default = "default_n0")]
    pub n0: u32,
    #[serde(default = "default_grid_depth")]
    pub depth: usize,
    #[serde(default = "one")]
    pub rho: f64,
}

fn default_n0() -> u32 {
    4
}

fn default_grid_depth() -> usize {
    12
}

impl Default for CidrParams {
    fn default() -> Self {
        CidrParams {
            etas: vec![0.5, 0.2, 0.1, 0.05],
            n0: default_n0(),
            depth: default_grid_depth(),
            rho: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiddParams {
    pub n_list: Vec<usize>,
    /// Thinning gap; defaults to `A_N = N`.
    #[serde(default)]
    pub a: Option<f64>,
    /// Defaults to `eps_0(N) = 1/N`.
    #[serde(default)]
    pub eps0: Option<f64>,
    #[serde(default = "default_m0")]
    pub m0: u64,
    /// Defaults to `max(1, 2 max_N c_0(N) + 0.5)`, shared across the N list.
    #[serde(default)]
    pub rho: Option<f64>,
}

fn default_m0() -> u64 {
    2
}

impl Default for CiddParams {
    fn default() -> Self {
        CiddParams {
            n_list: vec![2, 4, 8],
            a: None,
            eps0: None,
            m0: default_m0(),
            rho: None,
        }
    }
}

impl CiddParams {
    pub fn a_for(&self, n: usize) -> f64 {
        self.a.unwrap_or((n as f64).max(1.0))
    }

    pub fn eps0_for(&self, n: usize) -> f64 {
        self.eps0.unwrap_or(1.0 / n as f64)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompactParams {
    pub radius: f64,
    pub rings: usize,
    pub angles: usize,
}

impl Default for CompactParams {
    fn default() -> Self {
        CompactParams {
            radius: 0.9,
            rings: 10,
            angles: 128,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub weight: Weight,
    pub measure: MeasureSpec,
    pub pipeline: PipelineKind,
    #[serde(default)]
    pub cidr: Option<CidrParams>,
    #[serde(default)]
    pub cidd: Option<CiddParams>,
    #[serde(default)]
    pub disk: DiskGridParams,
    #[serde(default)]
    pub compact: CompactParams,
    #[serde(default = "default_resolution")]
    pub classification_resolution: usize,
    /// Directory of the config file; relative measure paths resolve against it.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_resolution() -> usize {
    20
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.weight.validate()?;
        match self.pipeline {
            PipelineKind::Cidr => {
                let p = self.cidr_params();
                if p.etas.is_empty() || p.etas.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
                    return Err(LabError::Config("cidr needs a non-empty list of positive etas".into()));
                }
            }
            PipelineKind::Cidd => {
                let p = self.cidd_params();
                if p.n_list.is_empty() || p.n_list.contains(&0) {
                    return Err(LabError::Config("cidd needs a non-empty list of positive N".into()));
                }
                if let Some(e) = p.eps0 {
                    if !(e > 0.0 && e < 1.0) {
                        return Err(LabError::Config(format!("eps0 = {e} must lie in (0, 1)")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn cidr_params(&self) -> CidrParams {
        self.cidr.clone().unwrap_or_default()
    }

    pub fn cidd_params(&self) -> CiddParams {
        self.cidd.clone().unwrap_or_default()
    }

    pub fn build_measure(&self) -> Result<AtomicMeasure> {
        self.measure.build(self.base_dir.as_deref())
    }

    /// The entropy-divergent Cantor run with `W(t) = t`.
    pub fn default_cidr() -> Self {
        ExperimentConfig {
            weight: Weight::power(1.0).expect("valid"),
            measure: MeasureSpec::Cantor {
                cantor: CantorSpec::EntropyDivergent,
                depth: 12,
                mass: 1.0,
            },
            pipeline: PipelineKind::Cidr,
            cidr: Some(CidrParams::default()),
            cidd: None,
            disk: DiskGridParams::default(),
            compact: CompactParams::default(),
            classification_resolution: default_resolution(),
            base_dir: None,
        }
    }

    /// `delta_0` plus a middle-third Cantor measure (half the mass each) with
    /// the exp-inverse-log weight.
    pub fn default_cidd() -> Self {
        ExperimentConfig {
            weight: Weight::exp_inverse_log(1.0).expect("valid"),
            measure: MeasureSpec::Sum {
                parts: vec![
                    MeasureSpec::Atoms { atoms: vec![[0.0, 0.5]] },
                    MeasureSpec::Cantor {
                        cantor: CantorSpec::MiddleThird,
                        depth: 8,
                        mass: 0.5,
                    },
                ],
            },
            pipeline: PipelineKind::Cidd,
            cidr: None,
            cidd: Some(CiddParams::default()),
            disk: DiskGridParams::default(),
            compact: CompactParams::default(),
            classification_resolution: default_resolution(),
            base_dir: None,
        }
    }
}
