#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use qmem_core::fock::{CMatrix, DensityState, ModeDescriptor};

/// `A A† / tr(A A†)` from raw real/imaginary parts.
pub fn state_from_parts(modes: Vec<ModeDescriptor>, parts: &[f64]) -> DensityState {
    let dim: usize = modes.iter().map(ModeDescriptor::dim).product();
    let a = CMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        Complex64::new(parts[k], parts[k + 1])
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace().re;
    DensityState::from_matrix(modes, rho.unscale(tr)).expect("valid random state")
}

pub fn modes(truncs: &[usize]) -> Vec<ModeDescriptor> {
    truncs
        .iter()
        .enumerate()
        .map(|(i, &t)| ModeDescriptor::bare(format!("m{i}"), t).unwrap())
        .collect()
}

/// Random mixed state on modes with the given truncations.
pub fn random_state(truncs: Vec<usize>) -> impl Strategy<Value = DensityState> {
    let dim: usize = truncs.iter().map(|t| t + 1).product();
    prop::collection::vec(-1.0..1.0f64, 2 * dim * dim)
        .prop_filter("non-degenerate", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(move |parts| state_from_parts(modes(&truncs), &parts))
}

/// Random normalized pure state amplitudes.
pub fn random_pure(truncs: Vec<usize>) -> impl Strategy<Value = DensityState> {
    let dim: usize = truncs.iter().map(|t| t + 1).product();
    prop::collection::vec(-1.0..1.0f64, 2 * dim)
        .prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(move |parts| {
            let amps: Vec<Complex64> = parts.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let amps: Vec<Complex64> = amps.iter().map(|a| a / norm).collect();
            DensityState::pure(modes(&truncs), &amps).unwrap()
        })
}
