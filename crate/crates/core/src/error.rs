use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    RepeatedQubit(usize),

    #[error("gate is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("state is not normalised (norm² = {0})")]
    NotNormalized(f64),

    #[error("invalid bipartition mask {mask:#b} for {n_qubits} qubits")]
    InvalidBipartition { mask: u64, n_qubits: usize },

    #[error("balanced bipartitions require even n_q, got {0}")]
    OddQubitCount(usize),

    #[error("{0} out of range")]
    OutOfRange(String),

    #[error("gate kind `{0}` does not accept this noise rule")]
    WrongGateKind(&'static str),

    #[error("at least one noise realization is required")]
    NoRealizations,

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("non-positive value {0} in logarithmic fit")]
    NonPositive(f64),

    #[error("no bracketing grid interval for the threshold crossing at n_q = {n_q}")]
    NoBracket { n_q: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
