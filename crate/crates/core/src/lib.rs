//! Digital twin of a reconfigurable hybrid polarization–OAM photonic
//! circuit: source, gate, detection, tomography and the nonlocal
//! skyrmion texture of the post-selected two-photon state.

// `!(x > 0.0)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod config;
pub mod density;
pub mod measurement;
pub mod optimize;
pub mod pipeline;
pub mod qmath;
pub mod seeding;
pub mod source;
pub mod tomography;
pub mod topology;

pub use density::DensityMatrix;
