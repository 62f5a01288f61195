use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("`{0}` must be at least 1")]
    ZeroDimension(&'static str),
    #[error("cross-chip sparsity {0} is outside (0, 1]")]
    InvalidSparsity(String),
    #[error("chiplets {0} and {1} have no candidate cross-chip link")]
    DisconnectedChiplets(usize, usize),
    #[error("coupling graph is not connected")]
    Disconnected,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("gate {index} uses qubit {qubit} but the circuit has {num_qubits} qubits")]
    QubitOutOfRange {
        index: usize,
        qubit: u32,
        num_qubits: u32,
    },
    #[error("gate {index} repeats qubit {qubit}")]
    RepeatedQubit { index: usize, qubit: u32 },
    #[error("gate {index} reads classical bit c{bit} before it is written")]
    UnwrittenBit { index: usize, bit: u32 },
    #[error("gate {index} uses classical bit c{bit} but the circuit has {num_bits} bits")]
    BitOutOfRange { index: usize, bit: u32, num_bits: u32 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HighwayError {
    #[error("highway period `{0}` must be at least 2")]
    BadPeriod(&'static str),
    #[error("density multiplier must be at least 1")]
    BadDensity,
    #[error("no {0} line placement crosses every chiplet boundary at a kept cross-chip link")]
    NoLinePlacement(&'static str),
    #[error("highway does not reach chiplet {0}")]
    UncoveredChiplet(usize),
    #[error("highway is empty")]
    Empty,
    #[error("highway subgraph is not connected")]
    Disconnected,
    #[error("data node {0} cannot reach the highway")]
    UnreachableData(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntanglementError {
    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("fragment needs at least {0} nodes")]
    TooShort(usize),
    #[error("segment does not alternate backbone and interleave-slot nodes at position {0}")]
    MalformedSegment(usize),
    #[error("entrances {0:?} are not connected through the GHZ resource")]
    DisconnectedEntrances(Vec<usize>),
    #[error("measurement on node {0} has a deterministic outcome; frame cannot be derived")]
    DeterministicMeasurement(usize),
    #[error("construction does not leave nodes {0:?} in a GHZ state")]
    NotGhz(Vec<usize>),
    #[error("control entrance {0} cannot also serve a target")]
    EntranceReuse(usize),
    #[error("edges do not form a tree")]
    NotATree,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("circuit needs {needed} data qubits but only {available} data nodes exist")]
    CapacityExceeded { needed: usize, available: usize },
    #[error("data node {0} cannot reach any highway entrance")]
    UnreachableEntrance(usize),
    #[error("no route between nodes {0} and {1}")]
    NoRoute(usize, usize),
    #[error("gate {0} is not supported by the compiler")]
    UnsupportedGate(String),
    #[error("shuttle {0} could not place any highway component")]
    StalledShuttle(usize),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("gate {index} acts on non-adjacent nodes {a} and {b}")]
    NonAdjacent { index: usize, a: usize, b: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{qubits} qubits exceeds the statevector cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },
    #[error("gate {0} is not Clifford")]
    NonClifford(String),
    #[error("data map has {got} entries but the original circuit has {expected} qubits")]
    MappingMismatch { expected: usize, got: usize },
    #[error("forced outcome {outcome} on qubit {qubit} has zero probability")]
    ImpossibleOutcome { qubit: usize, outcome: bool },
}
