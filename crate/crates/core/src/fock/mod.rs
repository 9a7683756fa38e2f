//! Truncated Fock-space density-matrix engine.

mod fidelity;
mod kernel;
mod mode;
mod state;

pub use fidelity::{fidelity, PURITY_THRESHOLD};
pub use kernel::{max_abs, CMatrix};
pub use mode::{ModeDescriptor, ModeKind, Polarization};
pub use state::{coherent_tail_mass, Count, DensityState, KrausSet, StateDump, HERMITICITY_TOL, PSD_TOL, TRACE_TOL};
