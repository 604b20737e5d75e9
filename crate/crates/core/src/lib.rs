//! Simulation and reconstruction of quantum channels from average gate
//! fidelities measured against random Clifford gates.

pub mod error;
pub mod linalg;

pub use error::{Error, Result};
pub mod clifford;
pub mod pauli;
pub mod channel;
pub mod schur_weyl;
pub mod moments;
pub mod measurement;
pub mod reconstruction;
pub mod experiments;
