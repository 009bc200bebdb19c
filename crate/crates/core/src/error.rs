use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("gate `{0}` has no matrix form; expand multi-controlled gates first")]
    UnsupportedKind(String),

    #[error("gate `{0}` has no inverse inside the gate vocabulary")]
    NoInverse(String),

    #[error("not a Hadamard-test circuit: {0}")]
    NotHadamardForm(String),

    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("simulation needs {qubits} qubits, capacity is {limit}")]
    Capacity { qubits: usize, limit: usize },

    #[error("no two-qubit calibration for coupling ({0}, {1})")]
    MissingCoupling(usize, usize),

    #[error("no calibration for qubit {0}")]
    MissingQubit(usize),

    #[error("noise attaches to one- and two-qubit gates only, found `{0}`")]
    NonNativeNoisyGate(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
