use std::fmt;

use serde::{Deserialize, Serialize};

use super::spec::{MemoryModel, Registry, TestParams};
use crate::channels::{beamsplitter_unitary, thermal_noise_channel, NoiseChannelParams, ThermalNoiseChannel};
use crate::error::{Error, Result};
use crate::fock::{CMatrix, DensityState, ModeDescriptor, ModeKind, Polarization};

/// Wavelength mismatch tolerated by [`MemoryInstance::compatibility_check`], nm.
pub const WAVELENGTH_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Occupancy {
    Empty,
    Stored,
}

/// First failing compatibility criterion.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    NotLight {
        uuid: String,
    },
    Wavelength {
        state: f64,
        memory: f64,
    },
    Bandwidth {
        state: f64,
        memory: f64,
    },
    Polarization {
        state: Polarization,
        accepted: Vec<Polarization>,
    },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::NotLight { uuid } => write!(f, "mode `{uuid}` is not a light mode"),
            Rejection::Wavelength { state, memory } => write!(
                f,
                "wavelength {state} nm differs from memory {memory} nm by more than {WAVELENGTH_TOLERANCE} nm"
            ),
            Rejection::Bandwidth { state, memory } => {
                write!(f, "bandwidth {state:e} Hz exceeds memory bandwidth {memory:e} Hz")
            }
            Rejection::Polarization { state, accepted } => {
                let list: Vec<String> = accepted.iter().map(ToString::to_string).collect();
                write!(f, "polarization {state} not in accepted set {{{}}}", list.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelQuery {
    Storage { input_mode: String },
    Retrieval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelResponse {
    /// Modes the returned beamsplitter acts on, in operator order.
    pub kraus_state_indices: Vec<String>,
    /// s
    pub operation_time: f64,
    /// s
    pub retrigger_time: f64,
    pub retrigger: bool,
}

/// One step of a storage or retrieval, to be applied in order.
#[derive(Debug, Clone)]
pub enum MemoryOperation {
    /// Append a mode in the vacuum state.
    AddMode(ModeDescriptor),
    Unitary {
        matrix: CMatrix,
        targets: Vec<String>,
    },
    Noise {
        channel: ThermalNoiseChannel,
        target: String,
    },
    TraceOut(String),
}

pub fn apply_operations(state: &DensityState, ops: &[MemoryOperation]) -> Result<DensityState> {
    let mut out = state.clone();
    for op in ops {
        out = match op {
            MemoryOperation::AddMode(mode) => out.with_vacuum_mode(mode.clone())?,
            MemoryOperation::Unitary { matrix, targets } => out.apply_unitary(matrix, targets)?,
            MemoryOperation::Noise { channel, target } => channel.apply(&out, target)?,
            MemoryOperation::TraceOut(uuid) => out.partial_trace(uuid)?,
        };
    }
    Ok(out)
}

/// Settings for [`MemoryInstance::init`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryConfig {
    pub memory_type: String,
    /// s
    pub storage_time: f64,
    pub memory_truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestParams>,
}

/// A configured memory with derived channel parameters and its
/// storage/retrieval state machine.
#[derive(Debug, Clone)]
pub struct MemoryInstance {
    label: String,
    model: MemoryModel,
    storage_time: f64,
    memory_truncation: usize,
    occupancy: Occupancy,
    retrigger_available: bool,
    spinwave: Option<String>,
    stored_input: Option<ModeDescriptor>,
    counter: usize,
}

impl MemoryInstance {
    pub fn new(
        label: impl Into<String>,
        model: MemoryModel,
        storage_time: f64,
        memory_truncation: usize,
    ) -> Result<Self> {
        if !(storage_time >= 0.0) || !storage_time.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "storage time must be ≥ 0, got {storage_time}"
            )));
        }
        if memory_truncation < 1 {
            return Err(Error::InvalidParameter("memory truncation must be at least 1".into()));
        }
        match &model {
            MemoryModel::Published(s) => s.validate()?,
            MemoryModel::Test(t) => t.validate()?,
        }
        Ok(Self {
            label: label.into(),
            model,
            storage_time,
            memory_truncation,
            occupancy: Occupancy::Empty,
            retrigger_available: true,
            spinwave: None,
            stored_input: None,
            counter: 0,
        })
    }

    /// Builds an instance from a registry. An explicit `test` block overrides
    /// the registry's test parameters.
    pub fn init(label: impl Into<String>, registry: &Registry, cfg: &MemoryConfig) -> Result<Self> {
        let model = match (&cfg.test, cfg.memory_type.as_str()) {
            (Some(t), super::TEST_CLASS) => MemoryModel::Test(t.clone()),
            (Some(_), other) => {
                return Err(Error::InvalidParameter(format!(
                    "test parameters given for published memory `{other}`"
                )))
            }
            (None, name) => registry.model(name)?,
        };
        Self::new(label, model, cfg.storage_time, cfg.memory_truncation)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn model(&self) -> &MemoryModel {
        &self.model
    }

    pub fn storage_time(&self) -> f64 {
        self.storage_time
    }

    pub fn memory_truncation(&self) -> usize {
        self.memory_truncation
    }

    pub fn occupancy(&self) -> Occupancy {
        self.occupancy
    }

    pub fn retrigger_available(&self) -> bool {
        self.retrigger_available
    }

    /// Internal efficiency at the configured storage time.
    pub fn eta_int(&self) -> f64 {
        match &self.model {
            MemoryModel::Published(s) => s.eta_int_0 * (-self.storage_time / s.lifetime).exp(),
            MemoryModel::Test(t) => (1.0 - t.t_in) * (1.0 - t.t_out),
        }
    }

    pub fn eta_in(&self) -> f64 {
        1.0 - self.t_in()
    }

    pub fn eta_out(&self) -> f64 {
        1.0 - self.t_out()
    }

    /// Power transmissivity of the read-in beamsplitter.
    pub fn t_in(&self) -> f64 {
        match &self.model {
            MemoryModel::Published(_) => 1.0 - self.eta_int().sqrt(),
            MemoryModel::Test(t) => t.t_in,
        }
    }

    /// Power transmissivity of the read-out beamsplitter.
    pub fn t_out(&self) -> f64 {
        match &self.model {
            MemoryModel::Published(_) => 1.0 - self.eta_int().sqrt(),
            MemoryModel::Test(t) => t.t_out,
        }
    }

    pub fn eta_trans(&self) -> f64 {
        match &self.model {
            MemoryModel::Published(s) => s.eta_trans(),
            MemoryModel::Test(t) => t.kappa_l,
        }
    }

    /// Early-bin noise. Pass-through for published memories.
    pub fn early_noise(&self) -> NoiseChannelParams {
        match &self.model {
            MemoryModel::Published(_) => NoiseChannelParams::identity(),
            MemoryModel::Test(t) => NoiseChannelParams {
                kappa: t.kappa_e,
                n_bar_b: t.n_bar_b_e,
            },
        }
    }

    /// Late-bin noise: `κ_l = η_trans`, `n̄_B = μ1 η_int(τ_s) / (1 − η_trans)`.
    pub fn late_noise(&self) -> NoiseChannelParams {
        match &self.model {
            MemoryModel::Published(s) => {
                let trans = s.eta_trans();
                let n_bar_b = if trans < 1.0 {
                    s.mu_1 * self.eta_int() / (1.0 - trans)
                } else {
                    0.0
                };
                NoiseChannelParams { kappa: trans, n_bar_b }
            }
            MemoryModel::Test(t) => NoiseChannelParams {
                kappa: t.kappa_l,
                n_bar_b: t.n_bar_b_l,
            },
        }
    }

    pub fn retrigger_time(&self) -> f64 {
        self.model.retrigger_time()
    }

    /// Accepts a light mode within 1 nm of the memory wavelength, no wider
    /// than the memory bandwidth and in an accepted polarization. Criteria are
    /// checked in that order.
    pub fn compatibility_check(&self, mode: &ModeDescriptor) -> std::result::Result<(), Rejection> {
        if mode.kind() != ModeKind::Light {
            return Err(Rejection::NotLight {
                uuid: mode.uuid().to_string(),
            });
        }
        let mem_wl = self.model.wavelength();
        if (mode.wavelength() - mem_wl).abs() > WAVELENGTH_TOLERANCE {
            return Err(Rejection::Wavelength {
                state: mode.wavelength(),
                memory: mem_wl,
            });
        }
        let mem_bw = self.model.bandwidth();
        if mode.bandwidth() > mem_bw {
            return Err(Rejection::Bandwidth {
                state: mode.bandwidth(),
                memory: mem_bw,
            });
        }
        let accepted = self.model.polarization();
        if !accepted.contains(&mode.polarization()) {
            return Err(Rejection::Polarization {
                state: mode.polarization(),
                accepted: accepted.to_vec(),
            });
        }
        Ok(())
    }

    /// A light mode this memory accepts, with the first accepted polarization.
    pub fn matching_mode(&self, uuid: impl Into<String>, truncation: usize) -> Result<ModeDescriptor> {
        ModeDescriptor::light(
            uuid,
            self.model.wavelength(),
            self.model.polarization()[0],
            self.model.bandwidth(),
            truncation,
        )
    }

    fn response(&self, indices: Vec<String>, retrigger: bool) -> ChannelResponse {
        ChannelResponse {
            kraus_state_indices: indices,
            operation_time: self.storage_time,
            retrigger_time: self.retrigger_time(),
            retrigger,
        }
    }

    /// Returns the operations for a storage or retrieval and advances the
    /// occupancy state machine.
    pub fn channel_query(
        &mut self,
        state: &DensityState,
        query: &ChannelQuery,
    ) -> Result<(ChannelResponse, Vec<MemoryOperation>)> {
        match query {
            ChannelQuery::Storage { input_mode } => self.storage(state, input_mode),
            ChannelQuery::Retrieval => self.retrieval(state),
        }
    }

    fn storage(&mut self, state: &DensityState, input: &str) -> Result<(ChannelResponse, Vec<MemoryOperation>)> {
        if self.occupancy == Occupancy::Stored {
            return Err(Error::Protocol(format!(
                "memory `{}` already holds a stored state",
                self.label
            )));
        }
        let mode = state.mode(input)?.clone();
        self.compatibility_check(&mode).map_err(Error::Incompatible)?;

        self.counter += 1;
        let spin_uuid = format!("{}.spinwave.{}", self.label, self.counter);
        let spinwave = ModeDescriptor::new(
            spin_uuid.clone(),
            ModeKind::Spinwave,
            self.model.wavelength(),
            mode.polarization(),
            mode.bandwidth(),
            self.memory_truncation,
        )?;
        let bs = beamsplitter_unitary(self.t_in(), mode.truncation(), self.memory_truncation)?;
        let targets = vec![input.to_string(), spin_uuid.clone()];
        let mut ops = vec![
            MemoryOperation::AddMode(spinwave),
            MemoryOperation::Unitary {
                matrix: bs.matrix,
                targets: targets.clone(),
            },
        ];
        let early = self.early_noise();
        if !early.is_identity() {
            ops.push(MemoryOperation::Noise {
                channel: thermal_noise_channel(early.kappa, early.n_bar_b, mode.truncation())?,
                target: input.to_string(),
            });
        }

        self.occupancy = Occupancy::Stored;
        self.retrigger_available = false;
        self.spinwave = Some(spin_uuid);
        self.stored_input = Some(mode);
        Ok((self.response(targets, false), ops))
    }

    fn retrieval(&mut self, state: &DensityState) -> Result<(ChannelResponse, Vec<MemoryOperation>)> {
        let (Some(spin_uuid), Some(input)) = (self.spinwave.clone(), self.stored_input.clone()) else {
            return Err(Error::Protocol(format!("memory `{}` has nothing stored", self.label)));
        };
        let spin = state.mode(&spin_uuid)?;
        let late_uuid = format!("{}.late.{}", self.label, self.counter);
        let late = input.clone().with_uuid(late_uuid.clone());
        let bs = beamsplitter_unitary(self.t_out(), spin.truncation(), late.truncation())?;
        let noise = self.late_noise();
        let targets = vec![spin_uuid.clone(), late_uuid.clone()];
        let mut ops = vec![
            MemoryOperation::AddMode(late.clone()),
            MemoryOperation::Unitary {
                matrix: bs.matrix,
                targets: targets.clone(),
            },
            MemoryOperation::TraceOut(spin_uuid),
        ];
        if !noise.is_identity() {
            ops.push(MemoryOperation::Noise {
                channel: thermal_noise_channel(noise.kappa, noise.n_bar_b, late.truncation())?,
                target: late_uuid,
            });
        }

        self.occupancy = Occupancy::Empty;
        self.retrigger_available = true;
        self.spinwave = None;
        self.stored_input = None;
        Ok((self.response(targets, true), ops))
    }

    /// Storage followed by application of the returned operations. Returns
    /// the new state and the spinwave uuid.
    pub fn store(&mut self, state: &DensityState, input: &str) -> Result<(DensityState, String)> {
        let (resp, ops) = self.channel_query(
            state,
            &ChannelQuery::Storage {
                input_mode: input.to_string(),
            },
        )?;
        Ok((apply_operations(state, &ops)?, resp.kraus_state_indices[1].clone()))
    }

    /// Retrieval followed by application of the returned operations. Returns
    /// the new state and the late-bin uuid.
    pub fn retrieve(&mut self, state: &DensityState) -> Result<(DensityState, String)> {
        let (resp, ops) = self.channel_query(state, &ChannelQuery::Retrieval)?;
        Ok((apply_operations(state, &ops)?, resp.kraus_state_indices[1].clone()))
    }

    /// A second photon passing while a state is stored: the memory does not
    /// act on it and the stored spinwave is untouched.
    pub fn passthrough_during_storage(&self, state: &DensityState, photon: &str) -> Result<DensityState> {
        if self.occupancy != Occupancy::Stored {
            return Err(Error::Protocol(format!(
                "passthrough on memory `{}` requires a stored state",
                self.label
            )));
        }
        state.mode(photon)?;
        Ok(state.clone())
    }
}
