use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_storage_time, lin_grid, log_grid, store_and_retrieve, ExperimentRecord, InputKind, MemoryChoice, Value,
};
use crate::channels::{beamsplitter_unitary, phase_shift};
use crate::error::{Error, Result};
use crate::fock::{coherent_tail_mass, DensityState};
use crate::memory::{MemoryInstance, MemoryModel, Registry};
use crate::metrics::fringe_visibility;
use crate::oracles::{
    coherent_fringe, coherent_unrecombined, coherent_visibility, single_photon_fringe, single_photon_unrecombined,
    single_photon_visibility, MziParams,
};

const ARM_A: &str = "arm.a";
const ARM_B: &str = "arm.b";

/// Input tail mass above which a coherent run is flagged as under-truncated.
pub const TAIL_WARNING: f64 = 1e-6;

/// `n` phases over `[0, 2π]`, both ends included.
pub fn phase_grid(n: usize) -> Vec<f64> {
    lin_grid(0.0, TAU, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MziConfig {
    pub input: InputKind,
    pub memory: MemoryChoice,
    /// s
    pub storage_time: f64,
    pub phases: Vec<f64>,
    pub truncation: usize,
    /// False removes the second beamsplitter.
    pub recombine: bool,
}

impl MziConfig {
    /// 41 phases, zero storage time, both beamsplitters.
    pub fn new(input: InputKind, memory: MemoryChoice, truncation: usize) -> Self {
        Self {
            input,
            memory,
            storage_time: 0.0,
            phases: phase_grid(41),
            truncation,
            recombine: true,
        }
    }

    fn validate(&self) -> Result<()> {
        check_storage_time(self.storage_time)?;
        if self.phases.is_empty() {
            return Err(Error::InvalidParameter("phase grid is empty".into()));
        }
        if self.truncation < 1 {
            return Err(Error::InvalidParameter("truncation must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziPoint {
    pub phi: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub oracle_n_a: f64,
}

impl MziPoint {
    pub fn abs_err(&self) -> f64 {
        (self.n_a - self.oracle_n_a).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MziRun {
    pub points: Vec<MziPoint>,
    /// Visibility of the sampled `⟨n̂_A⟩` fringe.
    pub visibility: f64,
    pub oracle_visibility: f64,
    /// Probability mass of one arm's coherent input above the truncation.
    pub input_tail_mass: f64,
}

impl MziRun {
    pub fn truncation_warning(&self) -> bool {
        self.input_tail_mass > TAIL_WARNING
    }

    pub fn max_abs_err(&self) -> f64 {
        self.points.iter().map(MziPoint::abs_err).fold(0.0, f64::max)
    }

    /// One row per phase, then a footer row carrying the visibilities.
    pub fn records(&self) -> Vec<ExperimentRecord> {
        let row = |phi: Value, n_a: Value, n_b: Value, oracle: Value, err: Value, vis: Value, ovis: Value| {
            ExperimentRecord::new()
                .with("phi", phi)
                .with("n_A", n_a)
                .with("n_B", n_b)
                .with("oracle_n_A", oracle)
                .with("abs_err", err)
                .with("visibility", vis)
                .with("oracle_visibility", ovis)
        };
        let mut out: Vec<ExperimentRecord> = self
            .points
            .iter()
            .map(|p| {
                row(
                    p.phi.into(),
                    p.n_a.into(),
                    p.n_b.into(),
                    p.oracle_n_a.into(),
                    p.abs_err().into(),
                    Value::Empty,
                    Value::Empty,
                )
            })
            .collect();
        out.push(row(
            Value::Empty,
            Value::Empty,
            Value::Empty,
            Value::Empty,
            Value::Empty,
            self.visibility.into(),
            self.oracle_visibility.into(),
        ));
        out
    }
}

/// Splits the input over the two arms and passes arm A through the memory.
/// Returns the state on `[arm B, late bin]` and the late-bin uuid.
fn through_memory(cfg: &MziConfig, memory: &mut MemoryInstance) -> Result<(DensityState, String)> {
    let trunc = cfg.truncation;
    let arm_a = memory.matching_mode(ARM_A, trunc)?;
    let arm_b = arm_a.clone().with_uuid(ARM_B);
    let split = match cfg.input {
        InputKind::SinglePhoton => {
            let bs = beamsplitter_unitary(0.5, trunc, trunc)?;
            DensityState::fock(1, arm_a)?
                .with_vacuum_mode(arm_b)?
                .apply_unitary(&bs.matrix, &[ARM_A, ARM_B])?
        }
        // a coherent state splits into a product of equal-amplitude arms
        InputKind::Coherent(_) => cfg.input.state(arm_a)?.tensor(&cfg.input.state(arm_b)?)?,
    };
    store_and_retrieve(memory, &split, ARM_A)
}

fn oracle(cfg: &MziConfig, params: &MziParams) -> Result<(f64, f64)> {
    Ok(match (cfg.input, cfg.recombine) {
        (InputKind::SinglePhoton, true) => (single_photon_fringe(params), single_photon_visibility(params)),
        (InputKind::SinglePhoton, false) => (single_photon_unrecombined(params).0, 0.0),
        (InputKind::Coherent(_), true) => (coherent_fringe(params)?, coherent_visibility(params)?),
        (InputKind::Coherent(_), false) => (coherent_unrecombined(params)?.0, 0.0),
    })
}

/// Interferometer with the memory in arm A and the phase in arm B.
///
/// Before recombination both arms are padded to the sum of their
/// truncations so the second beamsplitter is exact on every populated
/// photon-number block.
pub fn run_mzi(cfg: &MziConfig, registry: &Registry) -> Result<MziRun> {
    cfg.validate()?;
    let model = cfg.memory.resolve(registry)?;
    let mut memory = MemoryInstance::new("memory", model, cfg.storage_time, cfg.truncation)?;
    let (state, late) = through_memory(cfg, &mut memory)?;
    let alpha = Complex64::new(cfg.input.amplitude(), 0.0);
    let base = MziParams::from_memory(alpha, &memory, 0.0)?;

    let points: Vec<MziPoint> = if cfg.recombine {
        let total = 2 * cfg.truncation;
        let padded = state.extend_truncation(&late, total)?.extend_truncation(ARM_B, total)?;
        let recombine = beamsplitter_unitary(0.5, total, total)?;
        cfg.phases
            .par_iter()
            .map(|&phi| {
                let s = padded.apply_unitary(&phase_shift(phi, total), &[ARM_B])?;
                let s = s.apply_unitary(&recombine.matrix, &[late.as_str(), ARM_B])?;
                Ok(MziPoint {
                    phi,
                    n_a: s.mean_photon_number(&late)?,
                    n_b: s.mean_photon_number(ARM_B)?,
                    oracle_n_a: oracle(cfg, &base.with_phi(phi))?.0,
                })
            })
            .collect::<Result<_>>()?
    } else {
        // the phase does not change either arm's photon number
        let n_a = state.mean_photon_number(&late)?;
        let n_b = state.mean_photon_number(ARM_B)?;
        let oracle_n_a = oracle(cfg, &base)?.0;
        cfg.phases
            .iter()
            .map(|&phi| MziPoint {
                phi,
                n_a,
                n_b,
                oracle_n_a,
            })
            .collect()
    };

    let fringe: Vec<f64> = points.iter().map(|p| p.n_a).collect();
    let input_tail_mass = match cfg.input {
        InputKind::SinglePhoton => 0.0,
        InputKind::Coherent(_) => coherent_tail_mass(alpha, cfg.truncation),
    };
    Ok(MziRun {
        points,
        visibility: fringe_visibility(&fringe)?,
        oracle_visibility: oracle(cfg, &base)?.1,
        input_tail_mass,
    })
}

/// Single-photon visibility against storage time for several memories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub memories: Vec<MemoryChoice>,
    /// s. When empty, each published memory gets 20 log-spaced points from
    /// 1 ns to ten lifetimes, preceded by zero.
    pub storage_times: Vec<f64>,
    pub truncation: usize,
    pub phases: usize,
}

impl ComparisonConfig {
    pub fn registry_wide(registry: &Registry) -> Self {
        Self {
            memories: registry.names().into_iter().map(MemoryChoice::named).collect(),
            storage_times: Vec::new(),
            truncation: 3,
            phases: 9,
        }
    }

    fn grid(&self, model: &MemoryModel) -> Result<Vec<f64>> {
        if !self.storage_times.is_empty() {
            return Ok(self.storage_times.clone());
        }
        Ok(match model {
            MemoryModel::Published(spec) => {
                let mut grid = vec![0.0];
                grid.extend(log_grid(1e-9, 10.0 * spec.lifetime, 20)?);
                grid
            }
            MemoryModel::Test(_) => vec![0.0],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonPoint {
    pub memory: String,
    pub storage_time: f64,
    pub visibility: f64,
    pub oracle_visibility: f64,
}

impl ComparisonPoint {
    pub fn record(&self) -> ExperimentRecord {
        ExperimentRecord::new()
            .with("memory", self.memory.as_str())
            .with("storage_time", self.storage_time)
            .with("visibility", self.visibility)
            .with("oracle_visibility", self.oracle_visibility)
            .with("abs_err", (self.visibility - self.oracle_visibility).abs())
    }
}

pub fn run_mzi_memory_comparison(cfg: &ComparisonConfig, registry: &Registry) -> Result<Vec<ComparisonPoint>> {
    let mut jobs = Vec::new();
    for choice in &cfg.memories {
        let model = choice.resolve(registry)?;
        for tau in cfg.grid(&model)? {
            jobs.push((choice, tau));
        }
    }
    jobs.par_iter()
        .map(|&(choice, storage_time)| {
            let run = run_mzi(
                &MziConfig {
                    input: InputKind::SinglePhoton,
                    memory: choice.clone(),
                    storage_time,
                    phases: phase_grid(cfg.phases),
                    truncation: cfg.truncation,
                    recombine: true,
                },
                registry,
            )?;
            Ok(ComparisonPoint {
                memory: choice.class_name.clone(),
                storage_time,
                visibility: run.visibility,
                oracle_visibility: run.oracle_visibility,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::TestParams;
    use approx::assert_relative_eq;

    #[test]
    fn perfect_memory_single_photon() {
        let cfg = MziConfig::new(InputKind::SinglePhoton, MemoryChoice::test(TestParams::perfect()), 2);
        let run = run_mzi(&cfg, &Registry::builtin()).unwrap();
        assert_eq!(run.points.len(), 41);
        assert_relative_eq!(run.visibility, 1.0, epsilon = 1e-10);
        // dark output A at zero phase
        assert!(run.points[0].n_a.abs() < 1e-12);
        assert_relative_eq!(run.points[20].n_a, 1.0, epsilon = 1e-12);
        assert!(run.max_abs_err() < 1e-12);
        let records = run.records();
        assert_eq!(records.len(), 42);
        assert_eq!(records[41].get("phi"), Some(&Value::Empty));
    }

    #[test]
    fn lossy_memory_matches_oracle() {
        let params = TestParams::with_transmissivities(0.3, 0.5);
        let cfg = MziConfig {
            phases: phase_grid(7),
            ..MziConfig::new(InputKind::SinglePhoton, MemoryChoice::test(params), 2)
        };
        let run = run_mzi(&cfg, &Registry::builtin()).unwrap();
        assert!(run.max_abs_err() < 1e-12, "{}", run.max_abs_err());
        assert_relative_eq!(run.visibility, run.oracle_visibility, epsilon = 1e-12);
        // without noise the photon-number sum is the transmitted fraction
        for p in &run.points {
            assert_relative_eq!(p.n_a + p.n_b, 0.5 + 0.5 * 0.7 * 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_perfect_memory() {
        let cfg = MziConfig {
            phases: phase_grid(5),
            ..MziConfig::new(InputKind::Coherent(0.5), MemoryChoice::test(TestParams::perfect()), 8)
        };
        let run = run_mzi(&cfg, &Registry::builtin()).unwrap();
        assert!(run.max_abs_err() < 1e-6);
        assert!(!run.truncation_warning());
        let small = MziConfig { truncation: 2, ..cfg };
        assert!(run_mzi(&small, &Registry::builtin()).unwrap().truncation_warning());
    }

    #[test]
    fn unrecombined_is_flat() {
        let cfg = MziConfig {
            recombine: false,
            phases: phase_grid(5),
            ..MziConfig::new(InputKind::SinglePhoton, MemoryChoice::named("Lambda895"), 8)
        };
        let run = run_mzi(&cfg, &Registry::builtin()).unwrap();
        assert_eq!(run.visibility, 0.0);
        assert!(run.max_abs_err() < 1e-10);
        assert_relative_eq!(run.points[0].n_b, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_empty_phase_grid() {
        let cfg = MziConfig {
            phases: Vec::new(),
            ..MziConfig::new(InputKind::SinglePhoton, MemoryChoice::named("Lambda895"), 3)
        };
        assert!(run_mzi(&cfg, &Registry::builtin()).is_err());
    }
}
