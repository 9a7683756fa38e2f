//! Closed-form results for amplified coherent states and for the
//! memory-in-one-arm Mach-Zehnder interferometer.
//!
//! The memory enters through one effective amplitude `r` (with
//! `r² = η_in η_out`) followed by loss `τ` and gain `G`. Early-bin noise is
//! not represented.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::memory::MemoryInstance;
use crate::special::{factorial, ScaledLaguerre};

const SERIES_REL_TOL: f64 = 1e-12;
const SERIES_MAX_TERMS: usize = 10_000;

fn check_gain(gain: f64) -> Result<()> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::InvalidParameter(format!("gain must be ≥ 1, got {gain}")));
    }
    Ok(())
}

/// `x^n L_n^{(α)}(z)` with `x = (G−1)/G` and `z = |β|²/(1−G)`, written so
/// that `G = 1` is a regular point.
fn amplifier_series(alpha: f64, beta: Complex64, gain: f64) -> ScaledLaguerre {
    ScaledLaguerre::new(alpha, (gain - 1.0) / gain, -beta.norm_sqr() / gain)
}

/// Sums `term(n, M_n)` until two successive terms fall below the relative
/// tolerance.
fn adaptive_sum(series: ScaledLaguerre, term: impl Fn(usize, f64) -> f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut small = 0;
    for (n, m) in series.enumerate().take(SERIES_MAX_TERMS) {
        let t = term(n, m);
        sum += t;
        if n >= 1 && t.abs() <= SERIES_REL_TOL * sum.abs() {
            small += 1;
            if small == 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Undefined(format!(
        "amplifier series did not converge within {SERIES_MAX_TERMS} terms"
    )))
}

/// Mean photon number of the coherent state `|β⟩` after a quantum-limited
/// amplifier of gain `G`, from the Laguerre series. Equals `G|β|² + G − 1`.
pub fn coherent_gamma(beta: Complex64, gain: f64) -> Result<f64> {
    check_gain(gain)?;
    let pref = (-beta.norm_sqr()).exp() / gain;
    Ok(pref * adaptive_sum(amplifier_series(0.0, beta, gain), |n, m| n as f64 * m)?)
}

/// [`coherent_gamma`] truncated to a fixed number of terms.
pub fn coherent_gamma_terms(beta: Complex64, gain: f64, n_terms: usize) -> Result<f64> {
    check_gain(gain)?;
    let pref = (-beta.norm_sqr()).exp() / gain;
    let sum: f64 = amplifier_series(0.0, beta, gain)
        .take(n_terms)
        .enumerate()
        .map(|(n, m)| n as f64 * m)
        .sum();
    Ok(pref * sum)
}

/// `⟨a†⟩` of the amplified coherent state, from the Laguerre series. Equals
/// `√G β*`.
pub fn coherent_xi(beta: Complex64, gain: f64) -> Result<Complex64> {
    check_gain(gain)?;
    let pref = (-beta.norm_sqr()).exp() / gain * gain.powf(-0.5) * beta.conj();
    Ok(pref * adaptive_sum(amplifier_series(1.0, beta, gain), |_, m| m)?)
}

/// [`coherent_xi`] truncated to a fixed number of terms.
pub fn coherent_xi_terms(beta: Complex64, gain: f64, n_terms: usize) -> Result<Complex64> {
    check_gain(gain)?;
    let pref = (-beta.norm_sqr()).exp() / gain * gain.powf(-0.5) * beta.conj();
    let sum: f64 = amplifier_series(1.0, beta, gain).take(n_terms).sum();
    Ok(pref * sum)
}

/// Density-matrix element `⟨n|ρ|n+m⟩` of `|β⟩` after an amplifier of gain
/// `G`:
/// `(e^{−|β|²}/G) x^n √(n!/(n+m)!) (G^{−1/2} β*)^m L_n^{(m)}(|β|²/(1−G))`.
/// The transposed element is the complex conjugate.
pub fn amplified_coherent_element(n: usize, m: usize, beta: Complex64, gain: f64) -> Result<Complex64> {
    check_gain(gain)?;
    let scaled = amplifier_series(m as f64, beta, gain)
        .nth(n)
        .expect("series is infinite");
    let pref = (-beta.norm_sqr()).exp() / gain * (factorial(n) / factorial(n + m)).sqrt();
    Ok((beta.conj() / gain.sqrt()).powu(m as u32) * (pref * scaled))
}

/// Mean photon number after loss `τ` then gain `G` on an input with mean
/// `n_in`.
pub fn thermal_channel_mean(n_in: f64, tau: f64, gain: f64) -> f64 {
    gain * tau * n_in + gain - 1.0
}

/// Interferometer with a memory in arm A and a phase `φ` in arm B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziParams {
    /// Coherent amplitude per arm (unused for single-photon input).
    pub alpha: Complex64,
    /// Effective memory amplitude, `r² = η_in η_out`.
    pub r: f64,
    pub tau: f64,
    pub gain: f64,
    pub phi: f64,
}

impl MziParams {
    pub fn new(alpha: Complex64, r: f64, tau: f64, gain: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidParameter(format!(
                "need r, τ in [0, 1], got r = {r}, τ = {tau}"
            )));
        }
        check_gain(gain)?;
        Ok(Self {
            alpha,
            r,
            tau,
            gain,
            phi,
        })
    }

    /// Ideal memory: full transfer, no loss, no gain.
    pub fn ideal(alpha: Complex64, phi: f64) -> Self {
        Self {
            alpha,
            r: 1.0,
            tau: 1.0,
            gain: 1.0,
            phi,
        }
    }

    /// Parameters of a configured memory's late-bin channel.
    pub fn from_memory(alpha: Complex64, memory: &MemoryInstance, phi: f64) -> Result<Self> {
        let noise = memory.late_noise();
        Self::new(
            alpha,
            (memory.eta_in() * memory.eta_out()).sqrt(),
            noise.tau(),
            noise.gain(),
            phi,
        )
    }

    pub fn with_phi(self, phi: f64) -> Self {
        Self { phi, ..self }
    }

    /// Amplitude entering the amplifier, `β = √τ r α`.
    pub fn beta(&self) -> Complex64 {
        self.alpha * (self.tau.sqrt() * self.r)
    }
}

/// `⟨n̂⟩` in output A for coherent input `|α⟩` in each arm:
/// `½(γ + |α|² − 2 Re(α e^{iφ} ξ))`.
pub fn coherent_fringe(p: &MziParams) -> Result<f64> {
    let beta = p.beta();
    let gamma = coherent_gamma(beta, p.gain)?;
    let xi = coherent_xi(beta, p.gain)?;
    let cross = (p.alpha * Complex64::from_polar(1.0, p.phi) * xi).re;
    Ok(0.5 * (gamma + p.alpha.norm_sqr() - 2.0 * cross))
}

/// Fringe visibility for coherent input, `2|α ξ| / (γ + |α|²)`.
pub fn coherent_visibility(p: &MziParams) -> Result<f64> {
    let beta = p.beta();
    let gamma = coherent_gamma(beta, p.gain)?;
    let xi = coherent_xi(beta, p.gain)?;
    let denom = gamma + p.alpha.norm_sqr();
    if denom == 0.0 {
        return Err(Error::Undefined("visibility of an empty fringe".into()));
    }
    Ok(2.0 * (p.alpha * xi).norm() / denom)
}

/// Arm means `(⟨n̂_A⟩, ⟨n̂_B⟩)` without the second beamsplitter, coherent
/// input.
pub fn coherent_unrecombined(p: &MziParams) -> Result<(f64, f64)> {
    Ok((coherent_gamma(p.beta(), p.gain)?, p.alpha.norm_sqr()))
}

/// `⟨n̂⟩` in output A for a single photon split over both arms:
/// `(G/2)(1 + τr²/2) − ¼ − (r√(τG)/2) cos φ`.
pub fn single_photon_fringe(p: &MziParams) -> f64 {
    let g = p.gain;
    0.5 * g * (1.0 + p.tau * p.r * p.r / 2.0) - 0.25 - 0.5 * p.r * (p.tau * g).sqrt() * p.phi.cos()
}

/// `r√(τG) / (G(1 + τr²/2) − ½)`.
pub fn single_photon_visibility(p: &MziParams) -> f64 {
    let g = p.gain;
    p.r * (p.tau * g).sqrt() / (g * (1.0 + p.tau * p.r * p.r / 2.0) - 0.5)
}

/// Arm means `(⟨n̂_A⟩, ⟨n̂_B⟩)` without the second beamsplitter, single
/// photon input.
pub fn single_photon_unrecombined(p: &MziParams) -> (f64, f64) {
    (p.gain * (1.0 + p.tau * p.r * p.r / 2.0) - 1.0, 0.5)
}
