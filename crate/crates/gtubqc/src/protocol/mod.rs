//! The four-party blind computation protocol: plan compilation from named
//! gates to rotation steps, angle encryption, instruction routing to two
//! non-communicating servers, decoys, and output recovery by the client.
//!
//! Parties: a trusted center (prepares the input register and all Bell
//! pairs, holds no keys), the client (holds every key and the Pauli
//! frame), and two servers that only apply delegated rotations, Bell-
//! measure, and report classical outcomes. Qubits flow client→server
//! only; outcomes flow server→client only.

mod plan;
mod session;
mod transcript;

pub use plan::{
    compile_gates, gate_sequence_unitary, plan_unitary, ComputationPlan, Gate, GateParams,
    GateSpec, PlanFile, PlanMode, PlanStep,
};
pub use session::{
    encrypt_angle, recover_output, route_controlled, route_single, run_computation,
    schedule_cancellation, AuditProbe, EncryptedAngle, SessionConfig, SessionOutput,
};
pub use transcript::{Message, MessageBody, PartyRole, SecretRecord, Transcript};
