//! Simulation toolkit for a two-qubit sqrt(swap) gate mediated by a coupled
//! cavity array: chain spectra and coupling identities, excitation-sector
//! Hamiltonians, the effective exchange model, closed and open dynamics, and
//! gate certification.

pub mod dynamics;
pub mod effective;
pub mod error;
pub mod gate;
pub mod hilbert;
pub mod lattice;
pub mod sparse;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
