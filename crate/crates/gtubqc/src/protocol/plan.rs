//! Gate-to-rotation compilation and the direct (unencrypted) plan oracle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::qcore::{apply_unitary, Complex, StateVector, Unitary};
use crate::rotations::{
    controlled_rotation_matrix, named_gate_table, rotation_matrix, Angle, Axis, EulerOrder,
    NamedGate, RotationGate,
};

/// Grid mode restricts every delegated angle to the π/4 grid (the only
/// regime with uniformity guarantees); continuous mode admits arbitrary
/// angles while keeping ξ on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    Grid,
    Continuous,
}

/// The supported gate vocabulary. `CPhase { k }` is the controlled phase
/// `diag(1, e^{2πi/2^k})` on the target conditioned on the control
/// (k = 1 is controlled-Z, k = 2 is controlled-S).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Named { gate: NamedGate, wire: usize },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
    CPhase { k: u32, control: usize, target: usize },
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::Named { wire, .. } => vec![wire],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Swap { a, b } => vec![a, b],
            Gate::CPhase { control, target, .. } => vec![control, target],
        }
    }
}

/// One gate entry of a JSON plan file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateSpec {
    pub name: String,
    #[serde(default)]
    pub wires: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GateParams>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GateParams {
    pub k: u32,
}

/// JSON plan file: `{wires, gates: [{name, wires, params?}], seed?, mode?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub wires: usize,
    pub gates: Vec<GateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl PlanFile {
    pub fn parse_gates(&self) -> Result<Vec<Gate>, Error> {
        self.gates.iter().map(|g| parse_gate_spec(g)).collect()
    }
}

fn parse_gate_spec(spec: &GateSpec) -> Result<Gate, Error> {
    let one = |w: &[usize]| -> Result<usize, Error> {
        w.first().copied().ok_or_else(|| Error::InvalidPlan(format!("gate '{}' needs a wire", spec.name)))
    };
    let two = |w: &[usize]| -> Result<(usize, usize), Error> {
        if w.len() < 2 {
            return Err(Error::InvalidPlan(format!("gate '{}' needs two wires", spec.name)));
        }
        Ok((w[0], w[1]))
    };
    let name = spec.name.to_lowercase();
    match name.as_str() {
        "h" | "s" | "t" | "x" | "y" | "z" => {
            let gate = NamedGate::parse(&name.to_uppercase()).expect("covered above");
            Ok(Gate::Named { gate, wire: one(&spec.wires)? })
        }
        "cnot" | "cx" => {
            let (control, target) = two(&spec.wires)?;
            Ok(Gate::Cnot { control, target })
        }
        "cs" => {
            let (control, target) = two(&spec.wires)?;
            Ok(Gate::CPhase { k: 2, control, target })
        }
        "cz" => {
            let (control, target) = two(&spec.wires)?;
            Ok(Gate::CPhase { k: 1, control, target })
        }
        "swap" => {
            let (a, b) = two(&spec.wires)?;
            Ok(Gate::Swap { a, b })
        }
        "cphase" => {
            let (control, target) = two(&spec.wires)?;
            let k = spec
                .params
                .ok_or_else(|| Error::InvalidPlan("cphase needs params.k".into()))?
                .k;
            Ok(Gate::CPhase { k, control, target })
        }
        other => Err(Error::UnsupportedGate(other.to_string())),
    }
}

/// One compiled step. `Cancellation` never appears in compiled plans: the
/// ξ-removing rotation depends on runtime key material, so cancellation
/// steps are emitted by the session and appear in transcripts, referencing
/// the step (`xi_ref`) whose offset they remove.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlanStep {
    BlindRotation { wire: usize, axis: Axis, theta: Angle },
    BlindControlledRotation { control: usize, target: usize, axis: Axis, theta: Angle },
    Cancellation { wire: usize, axis: Axis, xi_ref: usize, k: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputationPlan {
    pub num_wires: usize,
    pub steps: Vec<PlanStep>,
    /// Global phase (radians) accumulated from the decomposition tables;
    /// the blind execution realizes the plan up to this phase.
    pub global_phase: f64,
    pub mode: PlanMode,
}

/// Compile named gates into blind-rotation steps using the given Euler
/// order for single-qubit gates. Every two-qubit gate reduces to C-Rz
/// plus single-qubit rotations.
pub fn compile_gates(
    gates: &[Gate],
    num_wires: usize,
    order: EulerOrder,
) -> Result<ComputationPlan, Error> {
    if num_wires == 0 || num_wires > 6 {
        return Err(Error::QubitCountOutOfRange(num_wires));
    }
    let mut steps = Vec::new();
    let mut phase = 0.0f64;
    for gate in gates {
        for &w in &gate.wires() {
            if w >= num_wires {
                return Err(Error::WireOutOfRange { wire: w, num_qubits: num_wires });
            }
        }
        compile_one(gate, order, &mut steps, &mut phase)?;
    }
    let mode = if steps.iter().all(|s| match s {
        PlanStep::BlindRotation { theta, .. } => theta.is_grid(),
        PlanStep::BlindControlledRotation { theta, .. } => theta.is_grid(),
        PlanStep::Cancellation { .. } => true,
    }) {
        PlanMode::Grid
    } else {
        PlanMode::Continuous
    };
    Ok(ComputationPlan { num_wires, steps, global_phase: phase, mode })
}

fn compile_one(
    gate: &Gate,
    order: EulerOrder,
    steps: &mut Vec<PlanStep>,
    phase: &mut f64,
) -> Result<(), Error> {
    match *gate {
        Gate::Named { gate, wire } => compile_named(gate, wire, order, steps, phase),
        Gate::Cnot { control, target } => {
            if control == target {
                return Err(Error::DuplicateWire { wire: control });
            }
            // CNOT = (I⊗H) · CZ · (I⊗H), CZ = e^{iπ/4} Rz_c(π/2) · C-Rz(π).
            compile_named(NamedGate::H, target, order, steps, phase)?;
            steps.push(PlanStep::BlindControlledRotation {
                control,
                target,
                axis: Axis::Z,
                theta: Angle::grid(4),
            });
            steps.push(PlanStep::BlindRotation { wire: control, axis: Axis::Z, theta: Angle::grid(2) });
            *phase += PI / 4.0;
            compile_named(NamedGate::H, target, order, steps, phase)
        }
        Gate::CPhase { k, control, target } => {
            if control == target {
                return Err(Error::DuplicateWire { wire: control });
            }
            if !(1..=6).contains(&k) {
                return Err(Error::InvalidPlan(format!("cphase k={k} outside 1..=6")));
            }
            // C-diag(1, e^{iφ}) = e^{iφ/4} Rz_c(φ/2) · C-Rz(φ), φ = 2π/2^k.
            let phi = 2.0 * PI / f64::powi(2.0, k as i32);
            steps.push(PlanStep::BlindControlledRotation {
                control,
                target,
                axis: Axis::Z,
                theta: Angle::from_radians(phi),
            });
            steps.push(PlanStep::BlindRotation {
                wire: control,
                axis: Axis::Z,
                theta: Angle::from_radians(phi / 2.0),
            });
            *phase += phi / 4.0;
            Ok(())
        }
        Gate::Swap { a, b } => {
            if a == b {
                return Err(Error::DuplicateWire { wire: a });
            }
            for &(c, t) in &[(a, b), (b, a), (a, b)] {
                compile_one(&Gate::Cnot { control: c, target: t }, order, steps, phase)?;
            }
            Ok(())
        }
    }
}

fn compile_named(
    gate: NamedGate,
    wire: usize,
    order: EulerOrder,
    steps: &mut Vec<PlanStep>,
    phase: &mut f64,
) -> Result<(), Error> {
    let triple = named_gate_table(gate, order)?;
    let (outer, middle) = triple.order.axes();
    // Temporal order: rightmost matrix factor first.
    for (axis, angle) in [(outer, triple.gamma), (middle, triple.beta), (outer, triple.alpha)] {
        let snapped = Angle::from_radians(angle);
        if snapped.radians().abs() > 1e-12 {
            steps.push(PlanStep::BlindRotation { wire, axis, theta: snapped });
        }
    }
    *phase += triple.phase;
    Ok(())
}

/// Matrix of a single plan step embedded on `num_wires` wires.
fn step_unitary(step: &PlanStep, num_wires: usize) -> Result<Unitary, Error> {
    match *step {
        PlanStep::BlindRotation { wire, axis, theta } => embed(
            &rotation_matrix(&RotationGate::with_angle(axis, theta)),
            &[wire],
            num_wires,
        ),
        PlanStep::BlindControlledRotation { control, target, axis, theta } => {
            embed(&controlled_rotation_matrix(axis, theta), &[control, target], num_wires)
        }
        PlanStep::Cancellation { .. } => Err(Error::InvalidPlan(
            "cancellation steps are execution records, not plan inputs".into(),
        )),
    }
}

/// Embed a small unitary on the given wires into the full register.
fn embed(u: &Unitary, wires: &[usize], num_wires: usize) -> Result<Unitary, Error> {
    let dim = 1usize << num_wires;
    let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let basis = StateVector::basis(num_wires, col);
        let out = apply_unitary(&basis, u, wires)?;
        for (row, amp) in out.amplitudes().iter().enumerate() {
            entries[row * dim + col] = *amp;
        }
    }
    Ok(Unitary::from_entries_unchecked(dim, entries))
}

/// Direct (unencrypted, oracle-mode) simulation of a plan: the product of
/// its step matrices times the tracked global phase.
pub fn plan_unitary(plan: &ComputationPlan) -> Result<Unitary, Error> {
    let dim = 1usize << plan.num_wires;
    let mut u = Unitary::identity(dim);
    for step in &plan.steps {
        u = step_unitary(step, plan.num_wires)?.matmul(&u);
    }
    Ok(u.scale(Complex::from_polar(1.0, plan.global_phase)))
}

/// Independent oracle: the gate sequence evaluated from the gates' own
/// matrices, bypassing the rotation decompositions entirely.
pub fn gate_sequence_unitary(gates: &[Gate], num_wires: usize) -> Result<Unitary, Error> {
    let dim = 1usize << num_wires;
    let mut u = Unitary::identity(dim);
    for gate in gates {
        let g = match *gate {
            Gate::Named { gate, wire } => embed(&gate.matrix(), &[wire], num_wires)?,
            Gate::Cnot { control, target } => {
                let c = |x: f64| Complex::new(x, 0.0);
                let m = Unitary::from_entries_unchecked(
                    4,
                    vec![
                        c(1.0), c(0.0), c(0.0), c(0.0),
                        c(0.0), c(1.0), c(0.0), c(0.0),
                        c(0.0), c(0.0), c(0.0), c(1.0),
                        c(0.0), c(0.0), c(1.0), c(0.0),
                    ],
                );
                embed(&m, &[control, target], num_wires)?
            }
            Gate::Swap { a, b } => {
                let c = |x: f64| Complex::new(x, 0.0);
                let m = Unitary::from_entries_unchecked(
                    4,
                    vec![
                        c(1.0), c(0.0), c(0.0), c(0.0),
                        c(0.0), c(0.0), c(1.0), c(0.0),
                        c(0.0), c(1.0), c(0.0), c(0.0),
                        c(0.0), c(0.0), c(0.0), c(1.0),
                    ],
                );
                embed(&m, &[a, b], num_wires)?
            }
            Gate::CPhase { k, control, target } => {
                let phi = 2.0 * PI / f64::powi(2.0, k as i32);
                let zero = Complex::new(0.0, 0.0);
                let one = Complex::new(1.0, 0.0);
                let mut m = vec![zero; 16];
                m[0] = one;
                m[5] = one;
                m[10] = one;
                m[15] = Complex::from_polar(1.0, phi);
                embed(&Unitary::from_entries_unchecked(4, m), &[control, target], num_wires)?
            }
        };
        u = g.matmul(&u);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{unitaries_equal_up_to_phase, TOL_STRUCTURAL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_gate_list_compiles_to_empty_plan() {
        let plan = compile_gates(&[], 2, EulerOrder::Zyz).unwrap();
        assert!(plan.steps.is_empty());
        assert_eq!(plan.global_phase, 0.0);
        assert_eq!(plan.mode, PlanMode::Grid);
    }

    #[test]
    fn t_gate_compiles_to_single_quarter_rotation_with_phase() {
        let plan =
            compile_gates(&[Gate::Named { gate: NamedGate::T, wire: 0 }], 1, EulerOrder::Zyz)
                .unwrap();
        assert_eq!(
            plan.steps,
            vec![PlanStep::BlindRotation { wire: 0, axis: Axis::Z, theta: Angle::grid(1) }]
        );
        assert!((plan.global_phase - PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn named_gates_reconstruct_exactly_in_zyz() {
        for gate in NamedGate::ALL {
            let gates = [Gate::Named { gate, wire: 0 }];
            let plan = compile_gates(&gates, 1, EulerOrder::Zyz).unwrap();
            let direct = gate_sequence_unitary(&gates, 1).unwrap();
            let compiled = plan_unitary(&plan).unwrap();
            assert!(
                compiled.max_abs_diff(&direct) < TOL_STRUCTURAL,
                "gate {} differs beyond phase tracking",
                gate.name()
            );
        }
    }

    #[test]
    fn named_gates_reconstruct_up_to_phase_in_other_table_orders() {
        for order in [EulerOrder::Yxy, EulerOrder::Zxz] {
            for gate in NamedGate::ALL {
                let gates = [Gate::Named { gate, wire: 0 }];
                let plan = compile_gates(&gates, 1, order).unwrap();
                let direct = gate_sequence_unitary(&gates, 1).unwrap();
                let compiled = plan_unitary(&plan).unwrap();
                assert!(
                    unitaries_equal_up_to_phase(&compiled, &direct, TOL_STRUCTURAL),
                    "gate {} order {}",
                    gate.name(),
                    order.name()
                );
            }
        }
    }

    #[test]
    fn cnot_compiles_to_controlled_z_sequence() {
        let gates = [Gate::Cnot { control: 0, target: 1 }];
        let plan = compile_gates(&gates, 2, EulerOrder::Zyz).unwrap();
        assert!(plan
            .steps
            .iter()
            .any(|s| matches!(s, PlanStep::BlindControlledRotation { axis: Axis::Z, .. })));
        let compiled = plan_unitary(&plan).unwrap();
        let direct = gate_sequence_unitary(&gates, 2).unwrap();
        assert!(compiled.max_abs_diff(&direct) < TOL_STRUCTURAL);
    }

    #[test]
    fn swap_and_cs_match_their_oracles() {
        for gates in [
            vec![Gate::Swap { a: 0, b: 1 }],
            vec![Gate::CPhase { k: 2, control: 0, target: 1 }],
            vec![Gate::CPhase { k: 1, control: 1, target: 0 }],
        ] {
            let plan = compile_gates(&gates, 2, EulerOrder::Zyz).unwrap();
            let compiled = plan_unitary(&plan).unwrap();
            let direct = gate_sequence_unitary(&gates, 2).unwrap();
            assert!(compiled.max_abs_diff(&direct) < TOL_STRUCTURAL, "{gates:?}");
        }
    }

    #[test]
    fn random_sequences_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let mut gates = Vec::new();
            for _ in 0..rng.gen_range(1..12) {
                gates.push(match rng.gen_range(0..8) {
                    0 => Gate::Named { gate: NamedGate::H, wire: rng.gen_range(0..2) },
                    1 => Gate::Named { gate: NamedGate::S, wire: rng.gen_range(0..2) },
                    2 => Gate::Named { gate: NamedGate::T, wire: rng.gen_range(0..2) },
                    3 => Gate::Named { gate: NamedGate::X, wire: rng.gen_range(0..2) },
                    4 => Gate::Named { gate: NamedGate::Y, wire: rng.gen_range(0..2) },
                    5 => Gate::Named { gate: NamedGate::Z, wire: rng.gen_range(0..2) },
                    6 => Gate::Cnot { control: 0, target: 1 },
                    _ => Gate::Cnot { control: 1, target: 0 },
                });
            }
            let plan = compile_gates(&gates, 2, EulerOrder::Zyz).unwrap();
            assert_eq!(plan.mode, PlanMode::Grid);
            let compiled = plan_unitary(&plan).unwrap();
            let direct = gate_sequence_unitary(&gates, 2).unwrap();
            assert!(compiled.max_abs_diff(&direct) < 1e-9, "{gates:?}");
        }
    }

    #[test]
    fn deep_cphase_switches_to_continuous_mode() {
        let gates = [Gate::CPhase { k: 3, control: 0, target: 1 }];
        let plan = compile_gates(&gates, 2, EulerOrder::Zyz).unwrap();
        assert_eq!(plan.mode, PlanMode::Continuous);
        let compiled = plan_unitary(&plan).unwrap();
        let direct = gate_sequence_unitary(&gates, 2).unwrap();
        assert!(compiled.max_abs_diff(&direct) < TOL_STRUCTURAL);
    }

    #[test]
    fn plan_file_round_trip_and_parsing() {
        let json = r#"{
            "wires": 2,
            "gates": [
                {"name": "h", "wires": [0]},
                {"name": "cnot", "wires": [0, 1]},
                {"name": "cphase", "wires": [0, 1], "params": {"k": 2}}
            ],
            "seed": 42,
            "mode": "grid"
        }"#;
        let file: PlanFile = serde_json::from_str(json).unwrap();
        let gates = file.parse_gates().unwrap();
        assert_eq!(gates.len(), 3);
        assert_eq!(gates[2], Gate::CPhase { k: 2, control: 0, target: 1 });
        assert_eq!(file.seed, Some(42));
    }

    #[test]
    fn unsupported_gate_is_rejected() {
        let spec = GateSpec { name: "toffoli".into(), wires: vec![0, 1, 2], params: None };
        let file = PlanFile { wires: 3, gates: vec![spec], seed: None, mode: None };
        assert!(matches!(file.parse_gates(), Err(Error::UnsupportedGate(_))));
    }

    #[test]
    fn out_of_range_wire_is_rejected() {
        let gates = [Gate::Named { gate: NamedGate::H, wire: 5 }];
        assert!(matches!(
            compile_gates(&gates, 2, EulerOrder::Zyz),
            Err(Error::WireOutOfRange { .. })
        ));
    }
}
