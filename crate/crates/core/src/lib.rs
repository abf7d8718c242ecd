//! Acoustic rake receivers: image-source room simulation, beamformer designs
//! that combine a source with its early echoes, and the experiment harness.

pub mod geometry;
pub mod numerics;
pub mod acoustics;
pub mod stft;
pub mod beamforming;
pub mod metrics;
pub mod harness;
