use thiserror::Error;

use crate::memory::Rejection;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a state needs at least one mode")]
    NoModes,

    #[error("duplicate mode uuid `{0}`")]
    DuplicateMode(String),

    #[error("unknown mode uuid `{0}`")]
    UnknownMode(String),

    #[error("photon number {n} exceeds truncation {truncation} of mode `{uuid}`")]
    PhotonNumberOutOfRange { uuid: String, n: usize, truncation: usize },

    #[error("operator is {rows}x{cols} but the target modes span dimension {expected}")]
    ShapeMismatch { rows: usize, cols: usize, expected: usize },

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode lists differ: {0}")]
    ModeMismatch(String),

    #[error("state is not normalized (trace = {0})")]
    NotNormalized(f64),

    #[error("unknown memory class `{name}`; available classes: {available}")]
    UnknownMemory { name: String, available: String },

    #[error("input mode rejected by memory: {0}")]
    Incompatible(Rejection),

    #[error("memory protocol violation: {0}")]
    Protocol(String),

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("registry format: {0}")]
    Registry(String),

    #[error("record serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user-supplied configuration rather than a
    /// defect in the simulation itself.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::UnknownMemory { .. }
                | Error::Incompatible(_)
                | Error::Registry(_)
                | Error::PhotonNumberOutOfRange { .. }
                | Error::Undefined(_)
        )
    }
}
