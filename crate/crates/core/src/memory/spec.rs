use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Polarization;

/// Class name reserved for user-parameterized memories.
pub const TEST_CLASS: &str = "Test";

const BUILTIN: &str = include_str!("registry.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Lambda,
    Ladder,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Lambda => "lambda",
            Scheme::Ladder => "ladder",
        })
    }
}

/// Published parameters of one memory experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorySpec {
    pub class_name: String,
    pub atomic_species: String,
    /// nm
    pub wavelength: f64,
    pub eta_e2e_0: f64,
    pub eta_int_0: f64,
    /// Setup transmission. Derived as `eta_e2e_0 / eta_int_0` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_trans: Option<f64>,
    pub mu_1: f64,
    /// Hz
    pub bandwidth: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub bandwidth_is_lower_bound: bool,
    /// 1/e storage time, s
    pub lifetime: f64,
    /// s
    pub retrigger_time: f64,
    pub polarization: Vec<Polarization>,
    pub scheme: Scheme,
    pub protocol: String,
}

impl MemorySpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Registry(format!("{}: {msg}", self.class_name)));
        if !(self.eta_e2e_0 > 0.0 && self.eta_e2e_0 <= self.eta_int_0 && self.eta_int_0 <= 1.0) {
            return bad(format!(
                "need 0 < eta_e2e_0 ≤ eta_int_0 ≤ 1, got {} and {}",
                self.eta_e2e_0, self.eta_int_0
            ));
        }
        if let Some(t) = self.eta_trans {
            if !(t > 0.0 && t <= 1.0) {
                return bad(format!("eta_trans must lie in (0, 1], got {t}"));
            }
        }
        if !(self.mu_1 >= 0.0) {
            return bad(format!("mu_1 must be ≥ 0, got {}", self.mu_1));
        }
        if !(self.lifetime > 0.0) {
            return bad(format!("lifetime must be > 0, got {}", self.lifetime));
        }
        if !(self.retrigger_time >= 0.0) {
            return bad(format!("retrigger_time must be ≥ 0, got {}", self.retrigger_time));
        }
        if !(self.wavelength > 0.0) || !(self.bandwidth >= 0.0) {
            return bad("wavelength must be > 0 and bandwidth ≥ 0".into());
        }
        if self.polarization.is_empty() {
            return bad("at least one accepted polarization is required".into());
        }
        Ok(())
    }

    pub fn eta_trans(&self) -> f64 {
        self.eta_trans.unwrap_or(self.eta_e2e_0 / self.eta_int_0)
    }
}

fn default_test_wavelength() -> f64 {
    895.0
}
fn default_test_bandwidth() -> f64 {
    500e6
}
fn default_test_polarization() -> Vec<Polarization> {
    vec![Polarization::H, Polarization::V]
}
fn default_test_retrigger() -> f64 {
    1e-6
}
fn one() -> f64 {
    1.0
}

/// User-supplied operating parameters for a [`TEST_CLASS`] memory. Storage
/// time does not rescale these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    pub t_in: f64,
    pub t_out: f64,
    #[serde(default = "one")]
    pub kappa_e: f64,
    #[serde(default = "one")]
    pub kappa_l: f64,
    #[serde(default)]
    pub n_bar_b_e: f64,
    #[serde(default)]
    pub n_bar_b_l: f64,
    #[serde(default = "default_test_wavelength")]
    pub wavelength: f64,
    #[serde(default = "default_test_bandwidth")]
    pub bandwidth: f64,
    #[serde(default = "default_test_polarization")]
    pub polarization: Vec<Polarization>,
    #[serde(default = "default_test_retrigger")]
    pub retrigger_time: f64,
}

impl TestParams {
    /// Lossless, noiseless memory (full transfer in and out).
    pub fn perfect() -> Self {
        Self::with_transmissivities(0.0, 0.0)
    }

    pub fn with_transmissivities(t_in: f64, t_out: f64) -> Self {
        Self {
            t_in,
            t_out,
            kappa_e: 1.0,
            kappa_l: 1.0,
            n_bar_b_e: 0.0,
            n_bar_b_l: 0.0,
            wavelength: default_test_wavelength(),
            bandwidth: default_test_bandwidth(),
            polarization: default_test_polarization(),
            retrigger_time: default_test_retrigger(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_in", self.t_in),
            ("t_out", self.t_out),
            ("kappa_e", self.kappa_e),
            ("kappa_l", self.kappa_l),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        for (name, v) in [("n_bar_b_e", self.n_bar_b_e), ("n_bar_b_l", self.n_bar_b_l)] {
            if !(v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be ≥ 0, got {v}")));
            }
        }
        if self.polarization.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one accepted polarization is required".into(),
            ));
        }
        Ok(())
    }
}

/// A registry entry: either published parameters or a test memory.
#[derive(Debug, Clone, PartialEq)]
pub enum MemoryModel {
    Published(MemorySpec),
    Test(TestParams),
}

impl MemoryModel {
    pub fn class_name(&self) -> &str {
        match self {
            MemoryModel::Published(s) => &s.class_name,
            MemoryModel::Test(_) => TEST_CLASS,
        }
    }

    pub fn wavelength(&self) -> f64 {
        match self {
            MemoryModel::Published(s) => s.wavelength,
            MemoryModel::Test(t) => t.wavelength,
        }
    }

    pub fn bandwidth(&self) -> f64 {
        match self {
            MemoryModel::Published(s) => s.bandwidth,
            MemoryModel::Test(t) => t.bandwidth,
        }
    }

    pub fn polarization(&self) -> &[Polarization] {
        match self {
            MemoryModel::Published(s) => &s.polarization,
            MemoryModel::Test(t) => &t.polarization,
        }
    }

    pub fn retrigger_time(&self) -> f64 {
        match self {
            MemoryModel::Published(s) => s.retrigger_time,
            MemoryModel::Test(t) => t.retrigger_time,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RegistryFile {
    #[serde(default)]
    memory: Vec<toml::Table>,
}

#[derive(Serialize)]
struct SpecFile<'a> {
    memory: &'a [MemorySpec],
}

/// Named collection of memory parameter sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Registry {
    specs: Vec<MemorySpec>,
    test: Option<TestParams>,
}

impl Registry {
    /// The bundled registry of published memories.
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN).expect("bundled registry is valid")
    }

    /// Parses `[[memory]]` records. A record whose `class_name` is
    /// [`TEST_CLASS`] is read as [`TestParams`].
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: RegistryFile = toml::from_str(text).map_err(|e| Error::Registry(e.to_string()))?;
        let mut reg = Registry::default();
        for table in file.memory {
            let name = table
                .get("class_name")
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::Registry("record without class_name".into()))?
                .to_string();
            if name == TEST_CLASS {
                let params: TestParams = table
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::Registry(format!("{TEST_CLASS}: {e}")))?;
                params.validate()?;
                reg.test = Some(params);
            } else {
                let spec: MemorySpec = table
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::Registry(format!("{name}: {e}")))?;
                spec.validate()?;
                if reg.specs.iter().any(|s| s.class_name == spec.class_name) {
                    return Err(Error::Registry(format!("duplicate class `{name}`")));
                }
                reg.specs.push(spec);
            }
        }
        Ok(reg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Serializes the published entries in the same format.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&SpecFile { memory: &self.specs }).map_err(|e| Error::Registry(e.to_string()))
    }

    /// Adds or replaces entries from another registry.
    pub fn merge(&mut self, other: Registry) {
        for spec in other.specs {
            match self.specs.iter_mut().find(|s| s.class_name == spec.class_name) {
                Some(slot) => *slot = spec,
                None => self.specs.push(spec),
            }
        }
        if other.test.is_some() {
            self.test = other.test;
        }
    }

    pub fn specs(&self) -> &[MemorySpec] {
        &self.specs
    }

    pub fn names(&self) -> Vec<&str> {
        self.specs.iter().map(|s| s.class_name.as_str()).collect()
    }

    pub fn test_params(&self) -> Option<&TestParams> {
        self.test.as_ref()
    }

    pub fn lookup(&self, class_name: &str) -> Result<&MemorySpec> {
        self.specs
            .iter()
            .find(|s| s.class_name == class_name)
            .ok_or_else(|| Error::UnknownMemory {
                name: class_name.to_string(),
                available: self.names().join(", "),
            })
    }

    /// Resolves a class name to a model. [`TEST_CLASS`] resolves to the
    /// loaded test parameters, or a perfect memory if none were loaded.
    pub fn model(&self, class_name: &str) -> Result<MemoryModel> {
        if class_name == TEST_CLASS {
            return Ok(MemoryModel::Test(self.test.clone().unwrap_or_else(TestParams::perfect)));
        }
        self.lookup(class_name).cloned().map(MemoryModel::Published)
    }
}
