//! Gate teleportation: prepend a (controlled) rotation, Bell-measure the
//! data wire(s) against fresh ancilla Bell pairs, and extract by-product
//! bits from the ancilla code and the measurement outcome.
//!
//! Wiring: the data wire and the *first* qubit of the ancilla pair are
//! measured; the second ancilla qubit carries the output. The rotation is
//! applied to the incoming data qubit before the Bell measurement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pauli_frame::RotationInstruction;
use crate::qcore::{apply_unitary, bell_measure, bell_state, BellCode, StateVector};
use crate::rotations::{controlled_rotation_matrix, rotation_matrix, Angle, Axis, RotationGate};

/// One teleportation event: ancilla code `s′`, measured outcome `s`, and
/// the induced by-product bits `(s1, s2) = s′ ⊕ s` for `X^{s1}Z^{s2}`.
///
/// `rotation` is the single-wire rotation teleported by this event; the
/// two events of a controlled teleportation carry `None` (the shared
/// controlled rotation is recorded by the caller).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportStep {
    pub ancilla_code: BellCode,
    pub outcome: BellCode,
    pub byproduct: (u8, u8),
    pub rotation: Option<RotationInstruction>,
}

impl TeleportStep {
    fn new(ancilla_code: BellCode, outcome: BellCode, rotation: Option<RotationInstruction>) -> Self {
        let b = ancilla_code.xor(outcome);
        TeleportStep { ancilla_code, outcome, byproduct: (b.b1, b.b2), rotation }
    }
}

/// Result of a single-wire gate teleportation.
pub struct TeleportOutcome {
    pub step: TeleportStep,
    /// Post-measurement state with the measured pair removed.
    pub state: StateVector,
    /// `(old_wire, new_wire)` for every surviving wire, ascending old order.
    pub survivor_map: Vec<(usize, usize)>,
    /// New index of the ancilla qubit now carrying the teleported wire.
    pub output_wire: usize,
}

/// Result of a controlled-rotation teleportation (two Bell measurements).
pub struct ControlledTeleportOutcome {
    /// Control-wire step first, target-wire step second.
    pub steps: [TeleportStep; 2],
    pub state: StateVector,
    /// Composite `(old_wire, new_wire)` map from the input state's wires.
    pub survivor_map: Vec<(usize, usize)>,
    /// New indices of the (control, target) output qubits.
    pub output_wires: (usize, usize),
}

/// Teleport `rotation·(data wire)` through a fresh ancilla Bell pair with
/// code `ancilla_code`. The post-state on the output wire equals
/// `X^{s1}Z^{s2}·R(θ)·(old wire state)` up to global phase.
pub fn teleport_rotation<R: Rng>(
    state: &StateVector,
    data_wire: usize,
    ancilla_code: BellCode,
    rotation: RotationGate,
    rng: &mut R,
) -> Result<TeleportOutcome, Error> {
    let n = state.num_qubits();
    let joined = state.tensor(&bell_state(ancilla_code));
    let rotated = apply_unitary(&joined, &rotation_matrix(&rotation), &[data_wire])?;
    let m = bell_measure(&rotated, (data_wire, n), rng)?;
    let output_wire = lookup(&m.survivor_map, n + 1);
    let survivor_map: Vec<(usize, usize)> =
        m.survivor_map.iter().copied().filter(|&(old, _)| old < n).collect();
    let step = TeleportStep::new(
        ancilla_code,
        m.outcome,
        Some(RotationInstruction { wire: data_wire, gate: rotation }),
    );
    Ok(TeleportOutcome { step, state: m.state, survivor_map, output_wire })
}

/// Teleport a controlled rotation on `(control, target)` through two fresh
/// ancilla Bell pairs. The post-state equals
/// `(X^{s31}Z^{s32} ⊗ X^{s41}Z^{s42})·C-R(θ)·(old state)` up to global
/// phase, with each wire's by-product obeying the XOR law independently.
pub fn teleport_controlled<R: Rng>(
    state: &StateVector,
    wires: (usize, usize),
    ancilla_codes: (BellCode, BellCode),
    axis: Axis,
    angle: Angle,
    rng: &mut R,
) -> Result<ControlledTeleportOutcome, Error> {
    let (control, target) = wires;
    let n = state.num_qubits();
    // Ancilla layout: control pair on wires (n, n+1), target pair on (n+2, n+3).
    let joined = state
        .tensor(&bell_state(ancilla_codes.0))
        .tensor(&bell_state(ancilla_codes.1));
    let rotated = apply_unitary(
        &joined,
        &controlled_rotation_matrix(axis, angle),
        &[control, target],
    )?;
    let m1 = bell_measure(&rotated, (control, n), rng)?;
    let target_mid = lookup(&m1.survivor_map, target);
    let anc_mid = lookup(&m1.survivor_map, n + 2);
    let m2 = bell_measure(&m1.state, (target_mid, anc_mid), rng)?;

    let control_out = lookup(&m2.survivor_map, lookup(&m1.survivor_map, n + 1));
    let target_out = lookup(&m2.survivor_map, lookup(&m1.survivor_map, n + 3));
    let survivor_map: Vec<(usize, usize)> = m1
        .survivor_map
        .iter()
        .filter(|&&(old, _)| old < n && old != target)
        .map(|&(old, mid)| (old, lookup(&m2.survivor_map, mid)))
        .collect();
    let steps = [
        TeleportStep::new(ancilla_codes.0, m1.outcome, None),
        TeleportStep::new(ancilla_codes.1, m2.outcome, None),
    ];
    Ok(ControlledTeleportOutcome {
        steps,
        state: m2.state,
        survivor_map,
        output_wires: (control_out, target_out),
    })
}

fn lookup(map: &[(usize, usize)], old: usize) -> usize {
    map.iter().find(|&&(o, _)| o == old).map(|&(_, n)| n).expect("wire survives measurement")
}
