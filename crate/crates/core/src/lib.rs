//! Modeling and analysis toolkit for dispersively read-out transmon devices
//! in a tileable, pillar-shunted enclosure.

pub mod band;
pub mod coherence;
pub mod crosstalk;
pub mod dataset;
pub mod error;
pub mod freq;
pub mod fit;
pub mod model;
pub mod oracle;
pub mod rb;
pub mod reference;
pub mod special;
pub mod subset;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
