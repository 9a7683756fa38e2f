//! Scalar figures of merit.

use crate::error::{Error, Result};

/// Security threshold on the composite token correctness.
pub const TOKEN_THRESHOLD: f64 = 7.0 / 8.0;

/// Mean counts in a retrieval window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    /// Total detected counts.
    pub n_exp: f64,
    /// Noise counts.
    pub n_noise: f64,
    /// Input photons.
    pub n_in: f64,
}

impl CountRecord {
    pub fn new(n_exp: f64, n_noise: f64, n_in: f64) -> Result<Self> {
        if !(n_noise >= 0.0 && n_exp >= n_noise) || !(n_in >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "count record needs n_exp ≥ n_noise ≥ 0 and n_in ≥ 0, got ({n_exp}, {n_noise}, {n_in})"
            )));
        }
        Ok(Self { n_exp, n_noise, n_in })
    }
}

/// `(n_exp − n_noise) / n_noise`; `f64::INFINITY` when there is no noise.
pub fn snr(rec: &CountRecord) -> f64 {
    if rec.n_noise == 0.0 {
        return f64::INFINITY;
    }
    (rec.n_exp - rec.n_noise) / rec.n_noise
}

/// Unconditional noise figure `n_noise / η_int`.
pub fn mu1(rec: &CountRecord, eta_int: f64) -> Result<f64> {
    if !(eta_int > 0.0) {
        return Err(Error::InvalidParameter(format!("η_int must be > 0, got {eta_int}")));
    }
    Ok(rec.n_noise / eta_int)
}

/// The equivalent form `n_in / SNR`.
pub fn mu1_from_snr(rec: &CountRecord) -> f64 {
    rec.n_in / snr(rec)
}

/// `(max − min) / (max + min)`.
pub fn visibility(n_max: f64, n_min: f64) -> Result<f64> {
    if n_max + n_min == 0.0 {
        return Err(Error::Undefined("visibility with both extremes zero".into()));
    }
    if !(n_max >= n_min && n_min >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "visibility needs n_max ≥ n_min ≥ 0, got ({n_max}, {n_min})"
        )));
    }
    Ok((n_max - n_min) / (n_max + n_min))
}

/// Visibility of a sampled fringe from its extremes.
pub fn fringe_visibility(values: &[f64]) -> Result<f64> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        return Err(Error::Undefined("visibility of an empty fringe".into()));
    }
    visibility(max, min.max(0.0))
}

/// Probabilities that only detector "0/+" or only detector "1/−" clicked,
/// conditioned on at least one click:
/// `c0 = P0 (1 − P1) / (1 − (1 − P0)(1 − P1))` and symmetrically for `c1`.
pub fn token_correctness(p0: f64, p1: f64) -> Result<(f64, f64)> {
    for p in [p0, p1] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("click probability {p} outside [0, 1]")));
        }
    }
    let any = 1.0 - (1.0 - p0) * (1.0 - p1);
    if any == 0.0 {
        return Err(Error::Undefined("no detector ever clicks".into()));
    }
    Ok((p0 * (1.0 - p1) / any, p1 * (1.0 - p0) / any))
}

/// Correctness of one basis, the mean of its two outcomes.
pub fn basis_correctness(c0: f64, c1: f64) -> f64 {
    0.5 * (c0 + c1)
}

/// Composite correctness over the two bases.
pub fn composite_correctness(c_xx: f64, c_zz: f64) -> f64 {
    0.5 * (c_xx + c_zz)
}
