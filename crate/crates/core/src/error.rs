//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown Pauli name: {0:?}")]
    UnknownPauli(String),

    #[error("matrix is not Hermitian within tolerance (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary within tolerance (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("rotation generator is not an involution (residual {0:.3e})")]
    NotInvolution(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad target qubits: {0}")]
    BadTargets(String),

    #[error("register of {0} qubits exceeds the {max} qubit limit", max = crate::consts::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("coupling strength {0} outside the admissible range {1}")]
    LambdaOutOfRange(f64, &'static str),

    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i8),

    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),

    #[error("invalid protocol configuration: {0}")]
    InvalidConfig(String),

    #[error("missing sign setting ({sign_a:+}, {sign_b:+})")]
    MissingSetting { sign_a: i8, sign_b: i8 },

    #[error("inconsistent run metadata: {0}")]
    InconsistentMeta(String),

    #[error("counts file violates the schema: {0}")]
    Schema(String),

    #[error("zero shots: nothing to estimate")]
    ZeroShots,

    #[error("indeterminate ratio: conditioning denominator below tolerance")]
    Indeterminate,

    #[error("invalid four-outcome measurement: {0}")]
    InvalidPovm(String),

    #[error("calibration matrix has rank {rank} (singular values {s1:.3e}, {s2:.3e}, {s3:.3e}); need rank 2")]
    BadCalibrationRank {
        rank: usize,
        s1: f64,
        s2: f64,
        s3: f64,
    },

    #[error("auxiliary vector redraw exhausted after {0} attempts")]
    AuxRetryExhausted(usize),

    #[error("degenerate condition: never met over {0} samples")]
    DegenerateCondition(usize),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("grid error: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
