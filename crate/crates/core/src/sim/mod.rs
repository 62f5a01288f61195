//! Statevector and stabilizer simulators used as correctness oracles.

mod stabilizer;
mod statevector;
mod verify;

pub use stabilizer::{stabilizer_run, stabilizer_run_from, PauliString, StabilizerRun, Tableau};
pub use statevector::{statevector_run, Outcomes, StateVector, STATEVECTOR_CAP};
pub use verify::{
    check_equivalence, check_equivalence_stabilizer, reduced_fidelity, verify, QubitMap, TrialReport,
    VerifyMode, VerifyReport, VerifyStatus,
};
