use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use super::kernel::CMatrix;
use super::state::{DensityState, TRACE_TOL};
use crate::error::{Error, Result};

/// Largest eigenvalue at or above this marks a unit-trace state as pure.
pub const PURITY_THRESHOLD: f64 = 1.0 - 1e-9;

fn hermitian_eigen(m: &CMatrix) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    SymmetricEigen::new((m + m.adjoint()).scale(0.5))
}

/// Dominant eigenvector when the state is rank one within tolerance.
fn pure_vector(m: &CMatrix) -> Option<DVector<Complex64>> {
    let eig = hermitian_eigen(m);
    let (idx, &top) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    (top >= PURITY_THRESHOLD).then(|| eig.eigenvectors.column(idx).into_owned())
}

fn expectation(psi: &DVector<Complex64>, m: &CMatrix) -> f64 {
    (psi.adjoint() * m * psi)[(0, 0)].re
}

fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let eig = hermitian_eigen(m);
    let roots = eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²` between two unit-trace states.
///
/// The states must have the same number of modes with matching truncations
/// position by position; labels may differ, so a retrieved late-bin state can
/// be compared with the input it came from. If either state is pure the
/// overlap `⟨ψ|σ|ψ⟩` is returned directly.
pub fn fidelity(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    let shape = |s: &DensityState| s.modes().iter().map(|m| m.truncation()).collect::<Vec<_>>();
    if shape(rho) != shape(sigma) {
        return Err(Error::ModeMismatch(format!(
            "truncations {:?} vs {:?}",
            shape(rho),
            shape(sigma)
        )));
    }
    for s in [rho, sigma] {
        let tr = s.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized(tr));
        }
    }
    let (a, b) = (rho.matrix(), sigma.matrix());
    if let Some(psi) = pure_vector(a) {
        return Ok(expectation(&psi, b));
    }
    if let Some(phi) = pure_vector(b) {
        return Ok(expectation(&phi, a));
    }
    let root = sqrt_psd(a);
    let inner = &root * b * &root;
    let eig = hermitian_eigen(&inner);
    let s: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(s * s)
}
