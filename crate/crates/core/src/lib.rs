//! Molecule-on-waveguide photonics: cross-section modes, emitter coupling
//! rates, 2D FDTD dipole experiments, the saturable single-molecule phase
//! shift and few-photon circuits.

pub mod circuits;
pub mod constants;
pub mod coupling;
pub mod error;
pub mod fdtd;
pub mod materials;
pub mod modes;
pub mod phase;

pub use error::{Error, Result};
