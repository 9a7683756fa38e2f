use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_storage_time, lin_grid, store_and_retrieve, ExperimentRecord, InputKind, Value};
use crate::error::{Error, Result};
use crate::fock::fidelity;
use crate::memory::{MemoryInstance, MemoryModel, Registry, TestParams};
use crate::metrics::{snr, CountRecord};

/// Settings shared by the three fidelity studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityConfig {
    /// Coherent amplitude used alongside the single photon.
    pub alpha: f64,
    pub truncation: usize,
    /// Grid size of the efficiency and noise sweeps.
    pub points: usize,
    /// Late-bin transmissivity of the noise study.
    pub kappa: f64,
    /// Upper end of the noise study's thermal photon number.
    pub n_bar_max: f64,
    /// s, for the registry study.
    pub storage_time: f64,
}

impl Default for FidelityConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            truncation: 10,
            points: 21,
            kappa: 0.5,
            n_bar_max: 1.0,
            storage_time: 0.0,
        }
    }
}

impl FidelityConfig {
    pub fn inputs(&self) -> [InputKind; 2] {
        [InputKind::SinglePhoton, InputKind::Coherent(self.alpha)]
    }

    fn validate(&self) -> Result<()> {
        check_storage_time(self.storage_time)?;
        if self.truncation < 1 || self.points < 2 {
            return Err(Error::InvalidParameter(
                "fidelity study needs truncation ≥ 1 and at least 2 points".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.kappa) || !(self.n_bar_max >= 0.0) || !(self.alpha >= 0.0) {
            return Err(Error::InvalidParameter("fidelity study parameters out of range".into()));
        }
        Ok(())
    }
}

/// Output state of a memory and its fidelity with the input. The output is
/// renormalized first, so amplifier truncation loss does not count against
/// the memory.
struct Transfer {
    fidelity: f64,
    mean: f64,
}

fn transfer(model: MemoryModel, storage_time: f64, input: InputKind, truncation: usize) -> Result<Transfer> {
    let mut memory = MemoryInstance::new("memory", model, storage_time, truncation)?;
    let rho_in = input.state(memory.matching_mode("input", truncation)?)?;
    let (out, late) = store_and_retrieve(&mut memory, &rho_in, "input")?;
    let mean = out.mean_photon_number(&late)?;
    let (out, _) = out.normalized()?;
    Ok(Transfer {
        fidelity: fidelity(&out, &rho_in)?,
        mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPoint {
    pub input: InputKind,
    pub eta_int: f64,
    pub fidelity: f64,
}

/// Fidelity against internal efficiency with a lossless, noiseless setup.
/// The efficiency is split evenly between read-in and read-out.
pub fn efficiency_study(input: InputKind, etas: &[f64], truncation: usize) -> Result<Vec<EfficiencyPoint>> {
    etas.par_iter()
        .map(|&eta| {
            super::check_unit("internal efficiency", eta)?;
            let t = 1.0 - eta.sqrt();
            let model = MemoryModel::Test(TestParams::with_transmissivities(t, t));
            Ok(EfficiencyPoint {
                input,
                eta_int: eta,
                fidelity: transfer(model, 0.0, input, truncation)?.fidelity,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePoint {
    pub input: InputKind,
    pub n_bar_b: f64,
    pub fidelity: f64,
    pub snr: f64,
}

/// Fidelity and SNR against the late-bin thermal photon number at unit
/// internal efficiency and transmissivity `kappa`. The noise counts are the
/// output mean for a vacuum input.
pub fn noise_study(input: InputKind, n_bars: &[f64], kappa: f64, truncation: usize) -> Result<Vec<NoisePoint>> {
    n_bars
        .par_iter()
        .map(|&n_bar_b| {
            let params = TestParams {
                kappa_l: kappa,
                n_bar_b_l: n_bar_b,
                ..TestParams::perfect()
            };
            let signal = transfer(MemoryModel::Test(params.clone()), 0.0, input, truncation)?;
            let noise = transfer(MemoryModel::Test(params), 0.0, InputKind::Coherent(0.0), truncation)?;
            let rec = CountRecord::new(signal.mean, noise.mean, input.mean_photon_number())?;
            Ok(NoisePoint {
                input,
                n_bar_b,
                fidelity: signal.fidelity,
                snr: snr(&rec),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistryPoint {
    pub memory: String,
    pub eta_e2e: f64,
    pub mu_1: f64,
    pub fidelity_single: f64,
    pub fidelity_coherent: f64,
}

/// Per-memory fidelity for both inputs, in registry order.
pub fn registry_study(
    registry: &Registry,
    alpha: f64,
    truncation: usize,
    storage_time: f64,
) -> Result<Vec<RegistryPoint>> {
    registry
        .specs()
        .par_iter()
        .map(|spec| {
            let model = MemoryModel::Published(spec.clone());
            let probe = MemoryInstance::new("memory", model.clone(), storage_time, truncation)?;
            Ok(RegistryPoint {
                memory: spec.class_name.clone(),
                eta_e2e: probe.eta_int() * probe.eta_trans(),
                mu_1: spec.mu_1,
                fidelity_single: transfer(model.clone(), storage_time, InputKind::SinglePhoton, truncation)?.fidelity,
                fidelity_coherent: transfer(model, storage_time, InputKind::Coherent(alpha), truncation)?.fidelity,
            })
        })
        .collect()
}

/// Results of all three studies.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySweep {
    pub efficiency: Vec<EfficiencyPoint>,
    pub noise: Vec<NoisePoint>,
    pub registry: Vec<RegistryPoint>,
}

pub fn run_fidelity_sweep(cfg: &FidelityConfig, registry: &Registry) -> Result<FidelitySweep> {
    cfg.validate()?;
    let etas = lin_grid(0.0, 1.0, cfg.points);
    let n_bars = lin_grid(0.0, cfg.n_bar_max, cfg.points);
    let mut efficiency = Vec::new();
    let mut noise = Vec::new();
    for input in cfg.inputs() {
        efficiency.extend(efficiency_study(input, &etas, cfg.truncation)?);
        noise.extend(noise_study(input, &n_bars, cfg.kappa, cfg.truncation)?);
    }
    Ok(FidelitySweep {
        efficiency,
        noise,
        registry: registry_study(registry, cfg.alpha, cfg.truncation, cfg.storage_time)?,
    })
}

impl FidelitySweep {
    /// All studies in one table; cells a study does not define are empty.
    pub fn records(&self) -> Vec<ExperimentRecord> {
        let blank = |study: &str, input: Value| {
            ExperimentRecord::new()
                .with("study", study)
                .with("input", input)
                .with("memory", Value::Empty)
                .with("eta_int", Value::Empty)
                .with("n_bar_b", Value::Empty)
                .with("eta_e2e", Value::Empty)
                .with("fidelity", Value::Empty)
                .with("snr", Value::Empty)
        };
        let mut out = Vec::new();
        for p in &self.efficiency {
            out.push(
                blank("efficiency", p.input.to_string().into())
                    .with("eta_int", p.eta_int)
                    .with("fidelity", p.fidelity),
            );
        }
        for p in &self.noise {
            out.push(
                blank("noise", p.input.to_string().into())
                    .with("n_bar_b", p.n_bar_b)
                    .with("fidelity", p.fidelity)
                    .with("snr", p.snr),
            );
        }
        for p in &self.registry {
            for (input, f) in [("single", p.fidelity_single), ("coherent", p.fidelity_coherent)] {
                out.push(
                    blank("registry", input.into())
                        .with("memory", p.memory.as_str())
                        .with("eta_e2e", p.eta_e2e)
                        .with("fidelity", f),
                );
            }
        }
        out
    }
}

/// Least-squares line through `(x, y)` and its largest absolute residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(
            "linear fit needs two equal-length series of at least 2 points".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Undefined("linear fit with constant abscissa".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).abs())
        .fold(0.0, f64::max);
    Ok(LinearFit {
        slope,
        intercept,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, 2.0, epsilon = 1e-14);
        assert_relative_eq!(fit.intercept, -1.0, epsilon = 1e-14);
        assert!(fit.max_residual < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn single_photon_fidelity_is_efficiency() {
        let pts = efficiency_study(InputKind::SinglePhoton, &[0.0, 0.3, 1.0], 2).unwrap();
        for p in pts {
            assert_relative_eq!(p.fidelity, p.eta_int, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_fidelity_at_partial_efficiency() {
        // a lossy coherent state stays coherent: F = exp(−|α|²(1 − √η)²)
        let eta: f64 = 0.49;
        let p = efficiency_study(InputKind::Coherent(1.0), &[eta], 12).unwrap()[0];
        assert_relative_eq!(p.fidelity, (-(1.0 - eta.sqrt()).powi(2)).exp(), epsilon = 1e-8);
    }

    #[test]
    fn noise_free_point_has_infinite_snr() {
        let pts = noise_study(InputKind::SinglePhoton, &[0.0, 0.5], 0.5, 6).unwrap();
        assert_eq!(pts[0].snr, f64::INFINITY);
        assert_relative_eq!(pts[0].fidelity, 0.5, epsilon = 1e-12);
        assert!(pts[1].snr.is_finite() && pts[1].snr > 0.0);
    }
}
