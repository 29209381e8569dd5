//! Spectra of the cubic Dirac operator and its connection family D^t on compact
//! quotients of the four-dimensional oscillator group by basic lattices.

pub mod cli;
pub mod clifford;
pub mod dirac;
pub mod error;
pub mod group;
pub mod linalg;
pub mod lattice;
pub mod reps;
pub mod surd;
pub mod theta;
pub mod verify;

pub use error::Error;
