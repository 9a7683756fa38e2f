use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Light,
    Spinwave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    D,
    A,
    R,
    L,
    #[serde(rename = "none")]
    Unpolarized,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::D => "D",
            Polarization::A => "A",
            Polarization::R => "R",
            Polarization::L => "L",
            Polarization::Unpolarized => "none",
        };
        f.write_str(s)
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            "D" | "d" => Ok(Polarization::D),
            "A" | "a" => Ok(Polarization::A),
            "R" | "r" => Ok(Polarization::R),
            "L" | "l" => Ok(Polarization::L),
            "none" => Ok(Polarization::Unpolarized),
            other => Err(Error::InvalidParameter(format!("unknown polarization `{other}`"))),
        }
    }
}

/// One bosonic mode of a [`DensityState`](super::DensityState).
///
/// Wavelength is in nanometres and bandwidth in hertz. The Hilbert space of
/// the mode is spanned by `|0⟩ … |truncation⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDescriptor {
    uuid: String,
    kind: ModeKind,
    wavelength: f64,
    polarization: Polarization,
    bandwidth: f64,
    truncation: usize,
}

impl ModeDescriptor {
    pub fn new(
        uuid: impl Into<String>,
        kind: ModeKind,
        wavelength: f64,
        polarization: Polarization,
        bandwidth: f64,
        truncation: usize,
    ) -> Result<Self> {
        let mode = Self {
            uuid: uuid.into(),
            kind,
            wavelength,
            polarization,
            bandwidth,
            truncation,
        };
        mode.validate()?;
        Ok(mode)
    }

    pub fn light(
        uuid: impl Into<String>,
        wavelength: f64,
        polarization: Polarization,
        bandwidth: f64,
        truncation: usize,
    ) -> Result<Self> {
        Self::new(uuid, ModeKind::Light, wavelength, polarization, bandwidth, truncation)
    }

    /// A light mode with placeholder optical metadata, for tests and
    /// calculations where only the photon-number structure matters.
    pub fn bare(uuid: impl Into<String>, truncation: usize) -> Result<Self> {
        Self::light(uuid, 1.0, Polarization::Unpolarized, 0.0, truncation)
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation < 1 {
            return Err(Error::InvalidParameter(format!(
                "mode `{}`: truncation must be at least 1",
                self.uuid
            )));
        }
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mode `{}`: wavelength must be positive, got {}",
                self.uuid, self.wavelength
            )));
        }
        if !(self.bandwidth >= 0.0) || !self.bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mode `{}`: bandwidth must be non-negative, got {}",
                self.uuid, self.bandwidth
            )));
        }
        Ok(())
    }

    pub fn uuid(&self) -> &str {
        &self.uuid
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Hilbert-space dimension, `truncation + 1`.
    pub fn dim(&self) -> usize {
        self.truncation + 1
    }

    pub fn with_uuid(mut self, uuid: impl Into<String>) -> Self {
        self.uuid = uuid.into();
        self
    }

    pub fn with_truncation(mut self, truncation: usize) -> Result<Self> {
        self.truncation = truncation;
        self.validate()?;
        Ok(self)
    }

    pub fn with_polarization(mut self, polarization: Polarization) -> Self {
        self.polarization = polarization;
        self
    }

    pub fn with_kind(mut self, kind: ModeKind) -> Self {
        self.kind = kind;
        self
    }
}
