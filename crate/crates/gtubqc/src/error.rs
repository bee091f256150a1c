use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("wire {wire} out of range for {num_qubits} qubits")]
    WireOutOfRange { wire: usize, num_qubits: usize },
    #[error("duplicate wire {wire}")]
    DuplicateWire { wire: usize },
    #[error("state not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("matrix not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("empty keep list in partial trace")]
    EmptyKeepList,
    #[error("negative weight {weight}")]
    NegativeWeight { weight: f64 },
    #[error("weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("rotation axes differ: {0:?} vs {1:?}")]
    AxisMismatch(crate::rotations::Axis, crate::rotations::Axis),
    #[error("no table entry for gate {gate} in order {order}")]
    UnlistedTableEntry { gate: String, order: String },
    #[error("unsupported axis {0:?} for frame propagation through controlled rotations")]
    UnsupportedAxis(crate::rotations::Axis),
    #[error("unknown wire {0} in Pauli frame")]
    UnknownFrameWire(usize),
    #[error("unsupported gate '{0}'")]
    UnsupportedGate(String),
    #[error("angle {0} is off the π/4 grid in grid mode")]
    OffGridAngle(f64),
    #[error("plan invariant violated: {0}")]
    PlanInvariant(String),
    #[error("malformed server response: {0}")]
    MalformedResponse(String),
    #[error("protocol aborted: {0}")]
    ProtocolAbort(String),
    #[error("qubit count {0} out of supported range")]
    QubitCountOutOfRange(usize),
    #[error("angle audit requires grid mode")]
    ContinuousModeAudit,
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
