//! Non-Markovian spontaneous emission of a quantum emitter next to a bare or
//! molecular-coated metal nanosphere.
//!
//! The pipeline runs from material permittivities through coated-sphere Mie
//! scattering to the coupling-kernel spectrum, fits it with positive
//! Lorentzian pseudo-modes and solves the emitter amplitude equation by
//! poles and residues. A direct Volterra solver serves as an independent
//! check.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod greens;
pub mod materials;
pub mod mie;
pub mod oracle;
pub mod pseudomode;
pub mod units;
pub mod validate;

pub use error::{Error, Result};
