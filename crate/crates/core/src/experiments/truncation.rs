use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_storage_time, store_and_retrieve, ExperimentRecord, InputKind, MemoryChoice};
use crate::error::{Error, Result};
use crate::memory::{MemoryInstance, Registry};

/// Successive-change threshold for declaring a truncation converged.
pub const CONVERGENCE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub memory: MemoryChoice,
    pub input: InputKind,
    /// Strictly ascending.
    pub truncations: Vec<usize>,
    /// s
    pub storage_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPoint {
    pub truncation: usize,
    /// Late-bin `⟨n̂⟩`.
    pub mean: f64,
    /// Change to the next truncation in the sweep.
    pub change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSweep {
    pub points: Vec<TruncationPoint>,
    /// Smallest truncation from which every step to the next truncation
    /// changes `⟨n̂⟩` by less than [`CONVERGENCE_STEP`].
    pub converged_at: Option<usize>,
}

impl TruncationSweep {
    pub fn records(&self) -> Vec<ExperimentRecord> {
        self.points
            .iter()
            .map(|p| {
                ExperimentRecord::new()
                    .with("truncation", p.truncation)
                    .with("mean_n", p.mean)
                    .with("change", p.change)
                    .with("converged", p.change.map(|c| c < CONVERGENCE_STEP))
                    .with("converged_at", self.converged_at)
            })
            .collect()
    }
}

fn late_mean(cfg: &TruncationConfig, registry: &Registry, truncation: usize) -> Result<f64> {
    let mut memory = MemoryInstance::new("memory", cfg.memory.resolve(registry)?, cfg.storage_time, truncation)?;
    let input = cfg.input.state(memory.matching_mode("input", truncation)?)?;
    let (out, late) = store_and_retrieve(&mut memory, &input, "input")?;
    out.mean_photon_number(&late)
}

pub fn run_truncation_sweep(cfg: &TruncationConfig, registry: &Registry) -> Result<TruncationSweep> {
    check_storage_time(cfg.storage_time)?;
    if cfg.truncations.is_empty() || cfg.truncations[0] < 1 || cfg.truncations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "truncations must be non-empty, at least 1 and strictly ascending".into(),
        ));
    }
    let means: Vec<f64> = cfg
        .truncations
        .par_iter()
        .map(|&k| late_mean(cfg, registry, k))
        .collect::<Result<_>>()?;
    let points: Vec<TruncationPoint> = cfg
        .truncations
        .iter()
        .enumerate()
        .map(|(i, &truncation)| TruncationPoint {
            truncation,
            mean: means[i],
            change: means.get(i + 1).map(|next| (next - means[i]).abs()),
        })
        .collect();
    let first_converged = points
        .iter()
        .rposition(|p| p.change.is_some_and(|c| c >= CONVERGENCE_STEP))
        .map_or(0, |i| i + 1);
    // the last point has no successor to confirm it
    let converged_at = points[..points.len() - 1].get(first_converged).map(|p| p.truncation);
    Ok(TruncationSweep { points, converged_at })
}
