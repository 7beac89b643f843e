//! Synchronous reactive DSP pipelines with explicit-state verification.

pub mod dataplane;
pub mod dpm;
pub mod drm;
pub mod gsm;
pub mod kernel;
pub mod verify;
