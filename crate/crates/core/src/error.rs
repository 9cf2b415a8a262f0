use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..={max}", max = crate::statevec::MAX_QUBITS)]
    QubitCount(usize),
    #[error("qubit index {index} out of range for {num_qubits}-qubit register")]
    QubitIndex { index: usize, num_qubits: usize },
    #[error("gate uses qubit {0} more than once")]
    DuplicateQubit(usize),
    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("both measurement outcomes have vanishing probability on qubit {0}")]
    CorruptState(usize),
    #[error("invalid channel parameters: {0}")]
    InvalidChannel(String),
    #[error("operation not supported for channel {0}")]
    UnsupportedChannel(String),
    #[error("no Pauli correction restores the inputs for outcome {outcome} ({reason})")]
    InfeasibleOutcome { outcome: String, reason: String },
    #[error("correction table has no entry for outcome {0}")]
    MissingCorrection(String),
    #[error("correction table was derived for {expected}, not {actual}")]
    TableMismatch { expected: String, actual: String },
    #[error("node {0} not in graph")]
    UnknownNode(usize),
    #[error("node {target} unreachable from {source_node}")]
    Unreachable { source_node: usize, target: usize },
    #[error("resource guard exceeded: {0}")]
    ResourceGuard(String),
    #[error("invalid value for {key}: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
