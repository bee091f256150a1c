//! Session transcripts: the public message log (what servers could see)
//! and the client-only secret section (keys, teleport records, frames).

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pauli_frame::PauliFrame;
use crate::protocol::plan::PlanMode;
use crate::qcore::BellCode;
use crate::rotations::{Angle, Axis};
use crate::teleport::TeleportStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartyRole {
    TrustedCenter,
    Client,
    Server1,
    Server2,
}

impl PartyRole {
    pub fn is_server(self) -> bool {
        matches!(self, PartyRole::Server1 | PartyRole::Server2)
    }

    pub fn other_server(self) -> PartyRole {
        match self {
            PartyRole::Server1 => PartyRole::Server2,
            PartyRole::Server2 => PartyRole::Server1,
            other => other,
        }
    }
}

/// Public message payloads. Qubits are identified by stable labels
/// (`w{i}` data wires, `a{i}` ancilla halves, `d{i}` decoys); the only
/// angle ever present is the encrypted `theta_prime`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MessageBody {
    QubitTransfer { qubits: Vec<String> },
    AngleInstruction { theta_prime: Angle, qubits: Vec<String>, axis: Axis, controlled: bool },
    OutcomeReport { outcomes: Vec<BellCode> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub seq: u64,
    pub sender: PartyRole,
    pub receiver: PartyRole,
    pub body: MessageBody,
}

/// Client-only records: everything a server must never see.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SecretRecord {
    StepKey {
        step: usize,
        wire: usize,
        axis: Axis,
        theta: Angle,
        r1: u8,
        r2: u8,
        xi: Angle,
        k: u8,
    },
    TeleportEvent {
        step: usize,
        event: TeleportStep,
    },
    CancellationMarker {
        step: usize,
        wire: usize,
        axis: Axis,
        xi_ref: usize,
        k: u8,
    },
    CompensationScheduled {
        step: usize,
        wire: usize,
        theta: Angle,
    },
    FrameSnapshot {
        step: usize,
        frame: PauliFrame,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub seed: u64,
    pub mode: PlanMode,
    pub messages: Vec<Message>,
    pub secrets: Vec<SecretRecord>,
    pub final_frame: Option<PauliFrame>,
    next_seq: u64,
}

impl Transcript {
    pub fn new(seed: u64, mode: PlanMode) -> Self {
        Transcript { seed, mode, messages: Vec::new(), secrets: Vec::new(), final_frame: None, next_seq: 0 }
    }

    pub fn send(&mut self, sender: PartyRole, receiver: PartyRole, body: MessageBody) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.messages.push(Message { seq, sender, receiver, body });
    }

    pub fn record_secret(&mut self, record: SecretRecord) {
        self.secrets.push(record);
    }

    /// JSON-lines rendering: one record per line, public messages first,
    /// then (optionally) the client-only section.
    pub fn to_json_lines(&self, include_secrets: bool) -> Result<String, Error> {
        #[derive(Serialize)]
        #[serde(tag = "record", rename_all = "snake_case")]
        enum Line<'a> {
            Header { seed: u64, mode: PlanMode },
            Message(&'a Message),
            Secret(&'a SecretRecord),
            FinalFrame { frame: &'a PauliFrame },
        }
        let mut out = String::new();
        let mut push = |line: &Line| -> Result<(), Error> {
            out.push_str(&serde_json::to_string(line)?);
            out.push('\n');
            Ok(())
        };
        push(&Line::Header { seed: self.seed, mode: self.mode })?;
        for m in &self.messages {
            push(&Line::Message(m))?;
        }
        if include_secrets {
            for s in &self.secrets {
                push(&Line::Secret(s))?;
            }
            if let Some(f) = &self.final_frame {
                push(&Line::FinalFrame { frame: f })?;
            }
        }
        Ok(out)
    }

    /// Messages a server participates in (its entire view of the session).
    pub fn server_view(&self) -> Vec<&Message> {
        self.messages
            .iter()
            .filter(|m| m.sender.is_server() || m.receiver.is_server())
            .collect()
    }

    /// No server→server message; no qubit ever leaves a server.
    pub fn check_unidirectional(&self) -> Result<(), Error> {
        for m in &self.messages {
            if m.sender.is_server() && m.receiver.is_server() {
                return Err(Error::ProtocolAbort(format!(
                    "server-to-server message at seq {}",
                    m.seq
                )));
            }
            if m.sender.is_server() && matches!(m.body, MessageBody::QubitTransfer { .. }) {
                return Err(Error::ProtocolAbort(format!(
                    "qubit transfer from a server at seq {}",
                    m.seq
                )));
            }
        }
        Ok(())
    }

    /// Scan the server-visible projection for key-material field names.
    /// The public schema carries only theta_prime, wires, axes, outcomes.
    pub fn server_view_leaks_secrets(&self) -> bool {
        const FORBIDDEN: [&str; 6] = ["r1", "r2", "xi", "theta", "k", "byproduct"];
        fn scan(v: &serde_json::Value) -> bool {
            match v {
                serde_json::Value::Object(map) => map.iter().any(|(key, val)| {
                    FORBIDDEN.contains(&key.as_str()) || scan(val)
                }),
                serde_json::Value::Array(items) => items.iter().any(scan),
                _ => false,
            }
        }
        self.server_view()
            .iter()
            .map(|m| serde_json::to_value(m).expect("messages serialize"))
            .any(|v| scan(&v))
    }
}
