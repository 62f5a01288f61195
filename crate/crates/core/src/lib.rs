//! Chiplet quantum compiler built around a highway of ancillary qubits.

pub mod circuit;
pub mod entanglement;
pub mod error;
pub mod highway;
pub mod metrics;
pub mod router;
pub mod scheduler;
pub mod sim;
pub mod topology;
