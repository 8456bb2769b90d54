//! Numerical laboratory for cyclicity of singular inner functions in
//! weighted growth spaces of the unit disk.
//!
//! The circle is parameterized by `theta in [0, 1)` with `zeta = exp(2 pi i theta)`;
//! arc lengths are normalized so the full circle has length 1.

pub mod config;
pub mod entropy;
pub mod error;
pub mod measures;
pub mod pipeline;
pub mod report;
pub mod roberts;
pub mod schedules;
pub mod transforms;
pub mod verify;
pub mod weights;

pub use error::{LabError, Result};
pub use weights::{Verdict, Weight, WeightClassification, WeightFamily};
pub use config::{ExperimentConfig, MeasureSpec, PipelineKind};
pub use entropy::{ComplementarySystem, EntropyTrend};
pub use measures::{Arc, ArcMass, AtomicMeasure, CantorSpec, HybridSignedMeasure, PiecewiseConstantDensity};
pub use report::{Check, Inequality};
pub use roberts::RobertsDecomposition;
pub use schedules::{CoefficientSchedule, GridKind, GridSchedule};
pub use transforms::{DiskSampleGrid, EvalRow};
