//! The memory twin: published parameter registry, configured instances and
//! the storage/retrieval channel-query protocol.

mod instance;
mod spec;

pub use instance::{
    apply_operations, ChannelQuery, ChannelResponse, MemoryConfig, MemoryInstance, MemoryOperation, Occupancy,
    Rejection, WAVELENGTH_TOLERANCE,
};
pub use spec::{MemoryModel, MemorySpec, Registry, Scheme, TestParams, TEST_CLASS};
