use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_storage_time, check_unit, ExperimentRecord, MemoryChoice};
use crate::channels::{lift_two_mode_linear, mode_selector, thermal_noise_channel};
use crate::error::{Error, Result};
use crate::fock::{Count, DensityState, ModeDescriptor, Polarization};
use crate::memory::{MemoryInstance, MemoryModel, Registry};
use crate::metrics::{basis_correctness, composite_correctness, token_correctness, TOKEN_THRESHOLD};

/// Measurement mode-selector angle for the computational basis.
pub const MEASURE_Z: f64 = PI / 2.0;
/// Measurement mode-selector angle for the diagonal basis.
pub const MEASURE_X: f64 = 5.0 * PI / 8.0;

const RAIL_0: &str = "token.0";
const RAIL_1: &str = "token.1";

/// Token encodings. Detector 0 is the correct outcome for `Zero` and `Plus`,
/// detector 1 for `One` and `Minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenState {
    Zero,
    One,
    Plus,
    Minus,
}

impl TokenState {
    pub const ALL: [TokenState; 4] = [TokenState::Zero, TokenState::One, TokenState::Plus, TokenState::Minus];

    /// Mode-selector angle that prepares the state from a photon in rail 0,
    /// up to a global sign.
    pub fn preparation_angle(self) -> f64 {
        match self {
            TokenState::Zero => PI / 2.0,
            TokenState::One => 3.0 * PI / 4.0,
            TokenState::Plus => 5.0 * PI / 8.0,
            TokenState::Minus => 3.0 * PI / 8.0,
        }
    }

    pub fn measurement_angle(self) -> f64 {
        match self {
            TokenState::Zero | TokenState::One => MEASURE_Z,
            TokenState::Plus | TokenState::Minus => MEASURE_X,
        }
    }

    pub fn correct_detector(self) -> usize {
        match self {
            TokenState::Zero | TokenState::Plus => 0,
            TokenState::One | TokenState::Minus => 1,
        }
    }
}

/// Thermal-noise model of a threshold detector's input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub kappa: f64,
    pub n_bar_b: f64,
}

impl Default for DetectorParams {
    /// 25 % efficiency and a dark-count level of 7e-5 per window.
    fn default() -> Self {
        Self {
            kappa: 0.25,
            n_bar_b: 7e-5 / 0.75,
        }
    }
}

impl DetectorParams {
    pub fn perfect() -> Self {
        Self {
            kappa: 1.0,
            n_bar_b: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenConfig {
    pub memory: MemoryChoice,
    /// s
    pub storage_times: Vec<f64>,
    /// Single-photon emission probabilities.
    pub mu_emissions: Vec<f64>,
    /// Photon-number truncation of every light mode and spinwave.
    pub truncation: usize,
    pub detector: DetectorParams,
    /// Time added to the storage time before comparing with the retrigger
    /// time, s.
    pub overhead: f64,
}

impl TokenConfig {
    pub fn new(memory: MemoryChoice) -> Self {
        Self {
            memory,
            storage_times: vec![0.0],
            mu_emissions: vec![1.0],
            truncation: 3,
            detector: DetectorParams::default(),
            overhead: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.storage_times.is_empty() || self.mu_emissions.is_empty() {
            return Err(Error::InvalidParameter("token sweep needs at least one point".into()));
        }
        for &t in &self.storage_times {
            check_storage_time(t)?;
        }
        for &mu in &self.mu_emissions {
            check_unit("emission probability", mu)?;
        }
        check_unit("detector efficiency", self.detector.kappa)?;
        if !(self.detector.n_bar_b >= 0.0) {
            return Err(Error::InvalidParameter("detector noise must be ≥ 0".into()));
        }
        if self.truncation < 1 {
            return Err(Error::InvalidParameter("truncation must be at least 1".into()));
        }
        check_storage_time(self.overhead)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenPoint {
    pub storage_time: f64,
    pub mu_emission: f64,
    pub c0: f64,
    pub c1: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub c_zz: f64,
    pub c_xx: f64,
    pub c: f64,
    /// Composite correctness with detectors only.
    pub c_no_memory: f64,
    pub retrigger_exceeded: bool,
}

impl TokenPoint {
    pub fn above_threshold(&self) -> bool {
        self.c > TOKEN_THRESHOLD
    }

    pub fn record(&self) -> ExperimentRecord {
        ExperimentRecord::new()
            .with("storage_time", self.storage_time)
            .with("mu_emission", self.mu_emission)
            .with("c0", self.c0)
            .with("c1", self.c1)
            .with("c_plus", self.c_plus)
            .with("c_minus", self.c_minus)
            .with("c_zz", self.c_zz)
            .with("c_xx", self.c_xx)
            .with("c", self.c)
            .with("above_threshold", self.above_threshold())
            .with("c_no_memory", self.c_no_memory)
            .with("retrigger_exceeded", self.retrigger_exceeded)
    }
}

fn rails(model: Option<&MemoryModel>, truncation: usize) -> Result<(ModeDescriptor, ModeDescriptor)> {
    let (wavelength, bandwidth, pols) = match model {
        Some(m) => (m.wavelength(), m.bandwidth(), m.polarization().to_vec()),
        None => (1.0, 0.0, vec![Polarization::H, Polarization::V]),
    };
    if pols.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a dual-rail token needs two accepted polarizations, memory accepts {}",
            pols.len()
        )));
    }
    Ok((
        ModeDescriptor::light(RAIL_0, wavelength, pols[0], bandwidth, truncation)?,
        ModeDescriptor::light(RAIL_1, wavelength, pols[1], bandwidth, truncation)?,
    ))
}

/// Click probabilities `(P_0, P_1)` of the two detectors for one prepared
/// token state. With `model = None` the rails go straight to the detectors.
///
/// Rail 0 carries the memory's first accepted polarization, rail 1 the
/// second. Each rail is stored in its own memory instance.
pub fn click_probabilities(
    model: Option<&MemoryModel>,
    storage_time: f64,
    mu_emission: f64,
    state: TokenState,
    truncation: usize,
    detector: &DetectorParams,
) -> Result<(f64, f64)> {
    let (rail_0, rail_1) = rails(model, truncation)?;
    let source = DensityState::number_mixture(&[1.0 - mu_emission, mu_emission], rail_0)?.with_vacuum_mode(rail_1)?;
    let prep = lift_two_mode_linear(&mode_selector(state.preparation_angle()), truncation, truncation)?;
    let prepared = source.apply_unitary(&prep.matrix, &[RAIL_0, RAIL_1])?;

    let (out, out_0, out_1) = match model {
        Some(model) => {
            let mut mem_0 = MemoryInstance::new("memory.0", model.clone(), storage_time, truncation)?;
            let mut mem_1 = MemoryInstance::new("memory.1", model.clone(), storage_time, truncation)?;
            let (s, _) = mem_0.store(&prepared, RAIL_0)?;
            let s = s.partial_trace(RAIL_0)?;
            let (s, _) = mem_1.store(&s, RAIL_1)?;
            let s = s.partial_trace(RAIL_1)?;
            let (s, late_0) = mem_0.retrieve(&s)?;
            let (s, late_1) = mem_1.retrieve(&s)?;
            (s, late_0, late_1)
        }
        None => (prepared, RAIL_0.to_string(), RAIL_1.to_string()),
    };

    // room for every photon of both rails in either output
    let total = 2 * truncation;
    let padded = out.extend_truncation(&out_0, total)?.extend_truncation(&out_1, total)?;
    let measure = lift_two_mode_linear(&mode_selector(state.measurement_angle()), total, total)?;
    let mut s = padded.apply_unitary(&measure.matrix, &[out_0.as_str(), out_1.as_str()])?;
    let noise = thermal_noise_channel(detector.kappa, detector.n_bar_b, total)?;
    for uuid in [&out_0, &out_1] {
        s = noise.apply(&s, uuid)?;
    }
    // rounding can push a certain click a few ulp past 1
    let click =
        |uuid: &str| -> Result<f64> { Ok(s.outcome_probability(&[(uuid, Count::AtLeast(1))])?.clamp(0.0, 1.0)) };
    Ok((click(&out_0)?, click(&out_1)?))
}

/// Probability of the correct outcome given at least one click, for each
/// token state in [`TokenState::ALL`] order.
fn correctness_per_state(
    model: Option<&MemoryModel>,
    storage_time: f64,
    mu_emission: f64,
    truncation: usize,
    detector: &DetectorParams,
) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (slot, state) in out.iter_mut().zip(TokenState::ALL) {
        let (p0, p1) = click_probabilities(model, storage_time, mu_emission, state, truncation, detector)?;
        let (c0, c1) = token_correctness(p0, p1)?;
        *slot = if state.correct_detector() == 0 { c0 } else { c1 };
    }
    Ok(out)
}

fn composite(per_state: &[f64; 4]) -> (f64, f64, f64) {
    let zz = basis_correctness(per_state[0], per_state[1]);
    let xx = basis_correctness(per_state[2], per_state[3]);
    (zz, xx, composite_correctness(xx, zz))
}

/// Correctness over the product of the storage-time and emission-probability
/// sweeps, storage time outermost.
pub fn run_token(cfg: &TokenConfig, registry: &Registry) -> Result<Vec<TokenPoint>> {
    cfg.validate()?;
    let model = cfg.memory.resolve(registry)?;
    let grid: Vec<(f64, f64)> = cfg
        .storage_times
        .iter()
        .flat_map(|&t| cfg.mu_emissions.iter().map(move |&mu| (t, mu)))
        .collect();
    grid.par_iter()
        .map(|&(storage_time, mu)| {
            let with_memory = correctness_per_state(Some(&model), storage_time, mu, cfg.truncation, &cfg.detector)?;
            let bare = correctness_per_state(None, storage_time, mu, cfg.truncation, &cfg.detector)?;
            let (c_zz, c_xx, c) = composite(&with_memory);
            Ok(TokenPoint {
                storage_time,
                mu_emission: mu,
                c0: with_memory[0],
                c1: with_memory[1],
                c_plus: with_memory[2],
                c_minus: with_memory[3],
                c_zz,
                c_xx,
                c,
                c_no_memory: composite(&bare).2,
                retrigger_exceeded: storage_time + cfg.overhead > model.retrigger_time(),
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
    fn perfect_chain_is_always_correct() {
        let cfg = TokenConfig {
            detector: DetectorParams::perfect(),
            truncation: 2,
            ..TokenConfig::new(MemoryChoice::test(TestParams::perfect()))
        };
        let points = run_token(&cfg, &Registry::builtin()).unwrap();
        assert_eq!(points.len(), 1);
        assert_relative_eq!(points[0].c, 1.0, epsilon = 1e-12);
        assert_relative_eq!(points[0].c_no_memory, 1.0, epsilon = 1e-12);
        assert!(points[0].above_threshold());
    }

    #[test]
    fn preparations_hit_their_detector() {
        let det = DetectorParams::perfect();
        for state in TokenState::ALL {
            let (p0, p1) = click_probabilities(None, 0.0, 1.0, state, 2, &det).unwrap();
            let (hit, miss) = if state.correct_detector() == 0 {
                (p0, p1)
            } else {
                (p1, p0)
            };
            assert_relative_eq!(hit, 1.0, epsilon = 1e-12);
            assert!(miss.abs() < 1e-12, "{state:?}: {miss}");
        }
    }

    #[test]
    fn vacuum_source_without_noise_is_undefined() {
        let cfg = TokenConfig {
            detector: DetectorParams::perfect(),
            mu_emissions: vec![0.0],
            truncation: 1,
            ..TokenConfig::new(MemoryChoice::test(TestParams::perfect()))
        };
        assert!(matches!(
            run_token(&cfg, &Registry::builtin()),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn retrigger_flag() {
        let cfg = TokenConfig {
            storage_times: vec![0.0, 20e-6],
            truncation: 1,
            ..TokenConfig::new(MemoryChoice::named("Lambda895"))
        };
        let points = run_token(&cfg, &Registry::builtin()).unwrap();
        assert!(!points[0].retrigger_exceeded);
        assert!(points[1].retrigger_exceeded);
    }

    #[test]
    fn single_polarization_memory_is_rejected() {
        let params = TestParams {
            polarization: vec![Polarization::H],
            ..TestParams::perfect()
        };
        let cfg = TokenConfig::new(MemoryChoice::test(params));
        assert!(run_token(&cfg, &Registry::builtin()).unwrap_err().is_configuration());
    }
}
