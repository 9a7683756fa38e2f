//! Experiment harnesses. Each sweep point builds its own memory instances,
//! so points run in parallel.

mod fidelity;
mod mzi;
mod record;
mod token;
mod truncation;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityState, ModeDescriptor};
use crate::memory::{MemoryInstance, MemoryModel, Registry, TestParams, TEST_CLASS};

pub use fidelity::{
    efficiency_study, linear_fit, noise_study, registry_study, run_fidelity_sweep, EfficiencyPoint, FidelityConfig,
    FidelitySweep, LinearFit, NoisePoint, RegistryPoint,
};
pub use mzi::{
    phase_grid, run_mzi, run_mzi_memory_comparison, ComparisonConfig, ComparisonPoint, MziConfig, MziPoint, MziRun,
    TAIL_WARNING,
};
pub use record::{from_csv, from_json, to_csv, to_json, ExperimentRecord, Value};
pub use token::{
    click_probabilities, run_token, DetectorParams, TokenConfig, TokenPoint, TokenState, MEASURE_X, MEASURE_Z,
};
pub use truncation::{run_truncation_sweep, TruncationConfig, TruncationPoint, TruncationSweep, CONVERGENCE_STEP};

/// Input light for single-mode and interferometer experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum InputKind {
    SinglePhoton,
    /// Real coherent amplitude.
    Coherent(f64),
}

impl InputKind {
    /// The input in `mode`, renormalized to the truncation.
    pub fn state(&self, mode: ModeDescriptor) -> Result<DensityState> {
        match *self {
            InputKind::SinglePhoton => DensityState::fock(1, mode),
            InputKind::Coherent(a) => DensityState::coherent(Complex64::new(a, 0.0), mode),
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            InputKind::SinglePhoton => 0.0,
            InputKind::Coherent(a) => a,
        }
    }

    pub fn mean_photon_number(&self) -> f64 {
        match *self {
            InputKind::SinglePhoton => 1.0,
            InputKind::Coherent(a) => a * a,
        }
    }
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputKind::SinglePhoton => f.write_str("single"),
            InputKind::Coherent(a) => write!(f, "coherent:{a:?}"),
        }
    }
}

impl FromStr for InputKind {
    type Err = Error;

    /// `single` or `coherent:<α>` with `α ≥ 0`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "single" {
            return Ok(InputKind::SinglePhoton);
        }
        let bad = || Error::InvalidParameter(format!("input must be `single` or `coherent:<alpha>`, got `{s}`"));
        let alpha: f64 = s
            .strip_prefix("coherent:")
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coherent amplitude must be ≥ 0, got {alpha}"
            )));
        }
        Ok(InputKind::Coherent(alpha))
    }
}

impl From<InputKind> for String {
    fn from(k: InputKind) -> Self {
        k.to_string()
    }
}

impl TryFrom<String> for InputKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Memory selection shared by the experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryChoice {
    pub class_name: String,
    /// Parameters for the [`TEST_CLASS`] memory; when absent the registry's
    /// test entry (or a perfect memory) is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestParams>,
}

impl MemoryChoice {
    pub fn named(class_name: impl Into<String>) -> Self {
        Self {
            class_name: class_name.into(),
            test: None,
        }
    }

    pub fn test(params: TestParams) -> Self {
        Self {
            class_name: TEST_CLASS.into(),
            test: Some(params),
        }
    }

    pub fn resolve(&self, registry: &Registry) -> Result<MemoryModel> {
        match (&self.test, self.class_name.as_str()) {
            (Some(t), TEST_CLASS) => {
                t.validate()?;
                Ok(MemoryModel::Test(t.clone()))
            }
            (Some(_), other) => Err(Error::InvalidParameter(format!(
                "test parameters given for published memory `{other}`"
            ))),
            (None, name) => registry.model(name),
        }
    }

    /// Materializes the test parameters so the choice no longer depends on
    /// the registry it was resolved against.
    pub fn materialized(&self, registry: &Registry) -> Result<Self> {
        Ok(match self.resolve(registry)? {
            MemoryModel::Test(t) => MemoryChoice::test(t),
            MemoryModel::Published(_) => MemoryChoice::named(self.class_name.clone()),
        })
    }
}

/// Stores `input`, discards the unabsorbed early light and retrieves.
/// Returns the state with the late-bin mode in place of the input.
pub(crate) fn store_and_retrieve(
    memory: &mut MemoryInstance,
    state: &DensityState,
    input: &str,
) -> Result<(DensityState, String)> {
    let (stored, _) = memory.store(state, input)?;
    let stored = stored.partial_trace(input)?;
    memory.retrieve(&stored)
}

/// `n` evenly spaced points over `[start, stop]`, both ends included.
pub fn lin_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` logarithmically spaced points over `[start, stop]`, both ends
/// included. Both ends must be positive.
pub fn log_grid(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "logarithmic grid needs positive ends, got [{start}, {stop}]"
        )));
    }
    let mut grid: Vec<f64> = lin_grid(start.ln(), stop.ln(), n).into_iter().map(f64::exp).collect();
    // pin the ends exactly
    if let Some(first) = grid.first_mut() {
        *first = start;
    }
    if n > 1 {
        grid[n - 1] = stop;
    }
    Ok(grid)
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

pub(crate) fn check_storage_time(v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("storage time must be ≥ 0, got {v}")));
    }
    Ok(())
}
