//! Sub-circuit synthesis, Trotter error bounds and noise analysis for
//! encoded Fermi-Hubbard simulation.

pub mod cost;
pub mod dense;
pub mod encoding;
pub mod error;
pub mod fock;
pub mod noise;
pub mod pauli;
pub mod sim;
pub mod synthesis;
pub mod trotter;

pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, PauliTerm};
