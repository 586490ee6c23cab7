use thiserror::Error;

/// Errors surfaced by the state-vector algebra, the protocol engines and the
/// front-end helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GtpError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("projection needs at least one unmeasured qubit left over")]
    NoResidualQubits,
    #[error("amplitude vector of length {len} does not hold {num_qubits} qubits")]
    BadAmplitudeCount { num_qubits: usize, len: usize },
    #[error("amplitudes must be finite")]
    NonFiniteAmplitude,
    #[error("cannot normalize a zero state")]
    ZeroNorm,
    #[error("state is not normalized: |amps|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("entanglement parameter magnitude {magnitude} exceeds 1")]
    ParamOutOfRange { magnitude: f64 },
    #[error("acceptance set is empty")]
    EmptyAcceptance,
    #[error("channel count mismatch: {left} vs {right}")]
    ChannelCountMismatch { left: usize, right: usize },
    #[error("{0} channels requested; between 1 and 3 are supported")]
    UnsupportedChannelCount(usize),
    #[error("unknown outcome label {0:?}")]
    UnknownOutcomeLabel(String),
    #[error("symmetric-polynomial degree {degree} out of range for {len} values")]
    DegreeOutOfRange { degree: usize, len: usize },
    #[error("channel weight {value} outside [0, 1/2]")]
    WeightOutOfRange { value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, GtpError>;
