use std::collections::HashSet;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{self, CMatrix, SparseRows, Split};
use super::mode::ModeDescriptor;
use crate::error::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;

/// Multi-mode density matrix over individually truncated Fock modes.
///
/// The basis is the mixed-radix tuple `(n_0, …, n_{k-1})` over the mode list,
/// row-major: the first mode is the most significant digit, so the flat index
/// is `((n_0 · d_1 + n_1) · d_2 + n_2) …` with `d_i = truncation_i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    modes: Vec<ModeDescriptor>,
    matrix: CMatrix,
}

/// Photon-count condition on one mode, used by
/// [`DensityState::outcome_probability`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Any,
    Exactly(usize),
    AtLeast(usize),
    AtMost(usize),
}

impl Count {
    pub fn matches(self, n: usize) -> bool {
        match self {
            Count::Any => true,
            Count::Exactly(k) => n == k,
            Count::AtLeast(k) => n >= k,
            Count::AtMost(k) => n <= k,
        }
    }
}

/// Ordered set of same-shaped operators acting on named modes.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
    target_modes: Vec<String>,
}

impl KrausSet {
    pub fn new<S: Into<String>>(operators: Vec<CMatrix>, target_modes: impl IntoIterator<Item = S>) -> Result<Self> {
        let target_modes: Vec<String> = target_modes.into_iter().map(Into::into).collect();
        if target_modes.is_empty() {
            return Err(Error::NoModes);
        }
        if let Some(first) = operators.first() {
            let (r, c) = first.shape();
            if r != c {
                return Err(Error::ShapeMismatch {
                    rows: r,
                    cols: c,
                    expected: r,
                });
            }
            if let Some(bad) = operators.iter().find(|k| k.shape() != (r, c)) {
                return Err(Error::ShapeMismatch {
                    rows: bad.nrows(),
                    cols: bad.ncols(),
                    expected: r,
                });
            }
        }
        Ok(Self {
            operators,
            target_modes,
        })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn target_modes(&self) -> &[String] {
        &self.target_modes
    }

    /// `Σ_i K_i† K_i`.
    pub fn completeness(&self) -> Option<CMatrix> {
        let first = self.operators.first()?;
        let mut acc = CMatrix::zeros(first.nrows(), first.ncols());
        for k in &self.operators {
            acc += k.adjoint() * k;
        }
        Some(acc)
    }

    /// Largest eigenvalue of the completeness operator. At most `1 + 1e-9`
    /// for a physical (trace non-increasing) channel.
    pub fn max_completeness_eigenvalue(&self) -> f64 {
        self.completeness()
            .map(|c| {
                SymmetricEigen::new(hermitize(&c))
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .unwrap_or(0.0)
    }
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn check_unique(modes: &[ModeDescriptor]) -> Result<()> {
    let mut seen = HashSet::new();
    for m in modes {
        if !seen.insert(m.uuid()) {
            return Err(Error::DuplicateMode(m.uuid().to_string()));
        }
    }
    Ok(())
}

/// Truncated coherent-state amplitudes `e^{-|α|²/2} αⁿ/√n!`, `n ≤ truncation`.
fn coherent_amplitudes(alpha: Complex64, truncation: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(truncation + 1);
    let mut a = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(a);
    for n in 1..=truncation {
        a = a * alpha / (n as f64).sqrt();
        amps.push(a);
    }
    amps
}

/// Probability mass of a coherent state beyond the truncation, i.e. one
/// minus the squared norm of the truncated vector.
pub fn coherent_tail_mass(alpha: Complex64, truncation: usize) -> f64 {
    let kept: f64 = coherent_amplitudes(alpha, truncation)
        .iter()
        .map(|a| a.norm_sqr())
        .sum();
    (1.0 - kept).max(0.0)
}

impl DensityState {
    /// Wraps a matrix after checking its shape against the mode list.
    pub fn from_matrix(modes: Vec<ModeDescriptor>, matrix: CMatrix) -> Result<Self> {
        check_unique(&modes)?;
        for m in &modes {
            m.validate()?;
        }
        let dim: usize = modes.iter().map(ModeDescriptor::dim).product();
        if matrix.shape() != (dim, dim) {
            return Err(Error::ShapeMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: dim,
            });
        }
        Ok(Self { modes, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a state vector in the joint basis (not renormalized).
    pub fn pure(modes: Vec<ModeDescriptor>, amplitudes: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(amplitudes);
        let m = &v * v.adjoint();
        Self::from_matrix(modes, m)
    }

    pub fn vacuum(modes: Vec<ModeDescriptor>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::NoModes);
        }
        let dim: usize = modes.iter().map(ModeDescriptor::dim).product();
        let mut m = CMatrix::zeros(dim, dim);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        Self::from_matrix(modes, m)
    }

    pub fn fock(n: usize, mode: ModeDescriptor) -> Result<Self> {
        if n > mode.truncation() {
            return Err(Error::PhotonNumberOutOfRange {
                uuid: mode.uuid().to_string(),
                n,
                truncation: mode.truncation(),
            });
        }
        let dim = mode.dim();
        let mut m = CMatrix::zeros(dim, dim);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Self::from_matrix(vec![mode], m)
    }

    /// Coherent state `|α⟩`, truncated and renormalized to unit trace.
    /// [`coherent_tail_mass`] gives the discarded probability.
    pub fn coherent(alpha: Complex64, mode: ModeDescriptor) -> Result<Self> {
        let amps = coherent_amplitudes(alpha, mode.truncation());
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = amps.iter().map(|a| a / norm).collect();
        Self::pure(vec![mode], &amps)
    }

    /// Diagonal photon-number mixture `Σ p_n |n⟩⟨n|`.
    pub fn number_mixture(weights: &[f64], mode: ModeDescriptor) -> Result<Self> {
        if weights.len() > mode.dim() {
            return Err(Error::PhotonNumberOutOfRange {
                uuid: mode.uuid().to_string(),
                n: weights.len() - 1,
                truncation: mode.truncation(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("mixture weights must be non-negative".into()));
        }
        let dim = mode.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (n, w) in weights.iter().enumerate() {
            m[(n, n)] = Complex64::new(*w, 0.0);
        }
        Self::from_matrix(vec![mode], m)
    }

    pub fn modes(&self) -> &[ModeDescriptor] {
        &self.modes
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(ModeDescriptor::dim).collect()
    }

    pub fn mode(&self, uuid: &str) -> Result<&ModeDescriptor> {
        self.modes
            .iter()
            .find(|m| m.uuid() == uuid)
            .ok_or_else(|| Error::UnknownMode(uuid.to_string()))
    }

    pub fn position(&self, uuid: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.uuid() == uuid)
            .ok_or_else(|| Error::UnknownMode(uuid.to_string()))
    }

    fn positions<S: AsRef<str>>(&self, uuids: &[S]) -> Result<Vec<usize>> {
        let pos = uuids
            .iter()
            .map(|u| self.position(u.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = HashSet::new();
        for (p, u) in pos.iter().zip(uuids) {
            if !seen.insert(*p) {
                return Err(Error::DuplicateMode(u.as_ref().to_string()));
            }
        }
        Ok(pos)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(hermitize(&self.matrix))
            .eigenvalues
            .iter()
            .cloned()
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Checks the density-matrix invariants: Hermitian, PSD and trace ≤ 1.
    pub fn check_physical(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "state is not Hermitian (max deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(Error::NotNormalized(tr));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidParameter(format!(
                "state is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    /// Rescales to unit trace. Returns the state and its previous trace.
    pub fn normalized(&self) -> Result<(Self, f64)> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::NotNormalized(tr));
        }
        let matrix = self.matrix.unscale(tr);
        Ok((
            Self {
                modes: self.modes.clone(),
                matrix,
            },
            tr,
        ))
    }

    /// Kronecker product; modes of `self` come first.
    pub fn tensor(&self, other: &DensityState) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        check_unique(&modes)?;
        Ok(Self {
            modes,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Appends a vacuum mode at the end of the mode list.
    pub fn with_vacuum_mode(&self, mode: ModeDescriptor) -> Result<Self> {
        self.tensor(&DensityState::vacuum(vec![mode])?)
    }

    /// Traces out one mode. Tracing the last mode yields a 1×1 state with
    /// no modes whose single entry is the trace.
    pub fn partial_trace(&self, uuid: &str) -> Result<Self> {
        let pos = self.position(uuid)?;
        let split = Split::new(&self.dims(), &[pos]);
        let matrix = kernel::trace_out(&split, &self.matrix);
        let mut modes = self.modes.clone();
        modes.remove(pos);
        Ok(Self { modes, matrix })
    }

    /// Reduced state on the listed modes, in the listed order.
    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let keep_pos = self.positions(keep)?;
        let drop: Vec<String> = self
            .modes
            .iter()
            .enumerate()
            .filter(|(i, _)| !keep_pos.contains(i))
            .map(|(_, m)| m.uuid().to_string())
            .collect();
        let mut out = self.clone();
        for u in &drop {
            out = out.partial_trace(u)?;
        }
        out.reorder(keep)
    }

    /// Permutes the mode list into `order`, which must name every mode.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if order.len() != self.modes.len() {
            return Err(Error::ModeMismatch(format!(
                "reorder needs all {} modes, got {}",
                self.modes.len(),
                order.len()
            )));
        }
        let pos = self.positions(order)?;
        if pos.iter().enumerate().all(|(i, p)| i == *p) {
            return Ok(self.clone());
        }
        // With every mode as a target, `split.index(t, 0)` maps the index in
        // the new order to the index in the old order.
        let split = Split::new(&self.dims(), &pos);
        let n = self.dim();
        let matrix = CMatrix::from_fn(n, n, |i, j| self.matrix[(split.index(i, 0), split.index(j, 0))]);
        let modes = pos.iter().map(|&p| self.modes[p].clone()).collect();
        Ok(Self { modes, matrix })
    }

    fn target_split<S: AsRef<str>>(&self, targets: &[S], op_dim: usize) -> Result<Split> {
        let pos = self.positions(targets)?;
        let split = Split::new(&self.dims(), &pos);
        if split.target_dim != op_dim {
            return Err(Error::ShapeMismatch {
                rows: op_dim,
                cols: op_dim,
                expected: split.target_dim,
            });
        }
        Ok(split)
    }

    /// `Σ_i (I ⊗ K_i) ρ (I ⊗ K_i)†` with the operators embedded on the
    /// target modes (joint index over targets in the set's order).
    pub fn apply_kraus(&self, ks: &KrausSet) -> Result<Self> {
        let Some(first) = ks.operators.first() else {
            return Ok(Self {
                modes: self.modes.clone(),
                matrix: CMatrix::zeros(self.dim(), self.dim()),
            });
        };
        if first.nrows() != first.ncols() {
            return Err(Error::ShapeMismatch {
                rows: first.nrows(),
                cols: first.ncols(),
                expected: first.nrows(),
            });
        }
        let split = self.target_split(&ks.target_modes, first.nrows())?;
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for k in &ks.operators {
            acc += kernel::conjugate(&SparseRows::new(k), &split, &self.matrix);
        }
        Ok(Self {
            modes: self.modes.clone(),
            matrix: acc,
        })
    }

    /// `U ρ U†` with `U` embedded on the target modes.
    pub fn apply_unitary<S: AsRef<str>>(&self, u: &CMatrix, targets: &[S]) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::ShapeMismatch {
                rows: u.nrows(),
                cols: u.ncols(),
                expected: u.nrows(),
            });
        }
        let split = self.target_split(targets, u.nrows())?;
        let matrix = kernel::conjugate(&SparseRows::new(u), &split, &self.matrix);
        Ok(Self {
            modes: self.modes.clone(),
            matrix,
        })
    }

    /// Raises a mode's truncation, zero-padding the new levels. Exact: the
    /// state is unchanged as an operator.
    pub fn extend_truncation(&self, uuid: &str, truncation: usize) -> Result<Self> {
        let pos = self.position(uuid)?;
        let old = &self.modes[pos];
        if truncation < old.truncation() {
            return Err(Error::InvalidParameter(format!(
                "cannot shrink truncation of `{uuid}` from {} to {truncation}",
                old.truncation()
            )));
        }
        if truncation == old.truncation() {
            return Ok(self.clone());
        }
        let mut modes = self.modes.clone();
        modes[pos] = old.clone().with_truncation(truncation)?;
        let old_dims = self.dims();
        let new_dims: Vec<usize> = modes.iter().map(ModeDescriptor::dim).collect();
        let remap: Vec<usize> = (0..self.dim())
            .map(|i| {
                let mut rem = i;
                let mut digits = vec![0; old_dims.len()];
                for m in (0..old_dims.len()).rev() {
                    digits[m] = rem % old_dims[m];
                    rem /= old_dims[m];
                }
                digits.iter().zip(&new_dims).fold(0, |acc, (d, n)| acc * n + d)
            })
            .collect();
        let n_new: usize = new_dims.iter().product();
        let mut matrix = CMatrix::zeros(n_new, n_new);
        for (j, &nj) in remap.iter().enumerate() {
            for (i, &ni) in remap.iter().enumerate() {
                matrix[(ni, nj)] = self.matrix[(i, j)];
            }
        }
        Ok(Self { modes, matrix })
    }

    /// Photon-number distribution `P(n)` of one mode (unnormalized: sums to
    /// the trace).
    pub fn photon_distribution(&self, uuid: &str) -> Result<Vec<f64>> {
        let pos = self.position(uuid)?;
        let split = Split::new(&self.dims(), &[pos]);
        Ok((0..split.target_dim)
            .map(|n| {
                (0..split.rest_dim)
                    .map(|r| {
                        let i = split.index(n, r);
                        self.matrix[(i, i)].re
                    })
                    .sum()
            })
            .collect())
    }

    pub fn mean_photon_number(&self, uuid: &str) -> Result<f64> {
        Ok(self
            .photon_distribution(uuid)?
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum())
    }

    /// `tr(ρ a)` for the annihilation operator of one mode.
    pub fn mean_annihilation(&self, uuid: &str) -> Result<Complex64> {
        let pos = self.position(uuid)?;
        let split = Split::new(&self.dims(), &[pos]);
        let mut acc = Complex64::new(0.0, 0.0);
        // tr(ρ a) = Σ_n √(n+1) ⟨n+1|ρ|n⟩
        for n in 0..split.target_dim - 1 {
            let amp = ((n + 1) as f64).sqrt();
            for r in 0..split.rest_dim {
                acc += self.matrix[(split.index(n + 1, r), split.index(n, r))] * amp;
            }
        }
        Ok(acc)
    }

    /// Sum of diagonal elements whose photon numbers satisfy every listed
    /// condition. Unlisted modes are unconstrained.
    pub fn outcome_probability(&self, conditions: &[(&str, Count)]) -> Result<f64> {
        let pos: Vec<(usize, Count)> = conditions
            .iter()
            .map(|(u, c)| Ok((self.position(u)?, *c)))
            .collect::<Result<_>>()?;
        let dims = self.dims();
        let mut digits = vec![0usize; dims.len()];
        let mut total = 0.0;
        for i in 0..self.dim() {
            if pos.iter().all(|(p, c)| c.matches(digits[*p])) {
                total += self.matrix[(i, i)].re;
            }
            for m in (0..dims.len()).rev() {
                digits[m] += 1;
                if digits[m] < dims[m] {
                    break;
                }
                digits[m] = 0;
            }
        }
        Ok(total)
    }

    pub fn to_dump(&self) -> StateDump {
        let n = self.dim();
        StateDump {
            modes: self.modes.clone(),
            matrix: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_dump(dump: StateDump) -> Result<Self> {
        let n = dump.matrix.len();
        if dump.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Serialization("state dump matrix is not square".into()));
        }
        let matrix = CMatrix::from_fn(n, n, |i, j| {
            let [re, im] = dump.matrix[i][j];
            Complex64::new(re, im)
        });
        Self::from_matrix(dump.modes, matrix)
    }
}

/// Serializable matrix dump: rows of `[re, im]` pairs in the basis order of
/// the mode list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub modes: Vec<ModeDescriptor>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}
