//! Synthetic experiment generators with known ground truth.

pub mod clifford;
pub mod decay;
pub mod iq;
pub mod rb;
pub mod transmon;
