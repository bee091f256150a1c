//! Quantum Fourier transform on top of the blind protocol: circuit
//! construction (Hadamards, controlled phases, final swap network),
//! per-gate decompositions into the protocol's rotation vocabulary, and
//! fully blind execution checked against a direct DFT oracle.
//!
//! Convention: wire 0 is the most significant index bit and the trailing
//! swaps are included, so the circuit equals the DFT matrix
//! `(1/√N)·ω^{jk}`, `ω = e^{2πi/N}`, in natural order.

use std::f64::consts::PI;

use crate::error::Error;
use crate::protocol::{
    compile_gates, gate_sequence_unitary, run_computation, Gate, SessionConfig, Transcript,
};
use crate::qcore::{Complex, StateVector, Unitary};
use crate::rotations::{
    abc_decompose, named_gate_table, ABCDecomposition, EulerOrder, EulerTriple, NamedGate,
};

/// Largest register the circuit constructor accepts.
pub const MAX_QFT_WIRES: usize = 6;
/// Largest register run fully blindly (each teleportation carries extra
/// ancilla qubits, so the state-size budget is tighter than construction).
pub const MAX_BLIND_QFT_WIRES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QftGate {
    H { wire: usize },
    /// Controlled `diag(1, e^{2πi/2^k})`.
    CPhase { k: u32, control: usize, target: usize },
    Swap { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QftCircuit {
    pub n: usize,
    pub gates: Vec<QftGate>,
}

impl QftCircuit {
    /// The circuit in the protocol's gate vocabulary.
    pub fn to_protocol_gates(&self) -> Vec<Gate> {
        self.gates
            .iter()
            .map(|g| match *g {
                QftGate::H { wire } => Gate::Named { gate: NamedGate::H, wire },
                QftGate::CPhase { k, control, target } => Gate::CPhase { k, control, target },
                QftGate::Swap { a, b } => Gate::Swap { a, b },
            })
            .collect()
    }

    /// Direct (unencrypted) simulation of the circuit.
    pub fn unitary(&self) -> Result<Unitary, Error> {
        gate_sequence_unitary(&self.to_protocol_gates(), self.n)
    }
}

/// The standard QFT circuit: on each wire a Hadamard followed by phases
/// controlled from every lower wire, then the bit-reversal swaps.
pub fn qft_circuit(n: usize) -> Result<QftCircuit, Error> {
    if n == 0 || n > MAX_QFT_WIRES {
        return Err(Error::QubitCountOutOfRange(n));
    }
    let mut gates = Vec::new();
    for i in 0..n {
        gates.push(QftGate::H { wire: i });
        for j in (i + 1)..n {
            gates.push(QftGate::CPhase { k: (j - i + 1) as u32, control: j, target: i });
        }
    }
    for i in 0..n / 2 {
        gates.push(QftGate::Swap { a: i, b: n - 1 - i });
    }
    Ok(QftCircuit { n, gates })
}

/// The DFT oracle `(1/√N)·ω^{jk}` with `ω = e^{2πi/N}`.
pub fn dft_matrix(n: usize) -> Unitary {
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        for k in 0..dim {
            let phase = 2.0 * PI * (j as f64) * (k as f64) / dim as f64;
            entries[j * dim + k] = Complex::from_polar(scale, phase);
        }
    }
    Unitary::from_entries_unchecked(dim, entries)
}

/// How one circuit gate breaks into the protocol's rotation vocabulary.
#[derive(Debug, Clone)]
pub enum QftGateDecomposition {
    /// `H = e^{iπ/2}·Ry(π/2)·Rz(π)` (z-y-z form with zero leading Rz).
    Hadamard { triple: EulerTriple },
    /// Controlled-phase via the ABC construction: `ABC = I` and
    /// `diag(1, e^{2πi/2^k}) = e^{iα}·A·X·B·X·C` with `γ = 0`,
    /// `β + δ = 2π/2^k`, `|α| = π/2^k`.
    CPhase { k: u32, abc: ABCDecomposition },
    /// Three CNOT blocks.
    Swap { cnots: Vec<Gate> },
}

pub fn decompose_qft_gate(gate: &QftGate) -> Result<QftGateDecomposition, Error> {
    match *gate {
        QftGate::H { .. } => Ok(QftGateDecomposition::Hadamard {
            triple: named_gate_table(NamedGate::H, EulerOrder::Zyz)?,
        }),
        QftGate::CPhase { k, .. } => {
            let phi = 2.0 * PI / (1u64 << k) as f64;
            let u = Unitary::from_entries_unchecked(
                2,
                vec![
                    Complex::new(1.0, 0.0),
                    Complex::new(0.0, 0.0),
                    Complex::new(0.0, 0.0),
                    Complex::from_polar(1.0, phi),
                ],
            );
            Ok(QftGateDecomposition::CPhase { k, abc: abc_decompose(&u)? })
        }
        QftGate::Swap { a, b } => Ok(QftGateDecomposition::Swap {
            cnots: vec![
                Gate::Cnot { control: a, target: b },
                Gate::Cnot { control: b, target: a },
                Gate::Cnot { control: a, target: b },
            ],
        }),
    }
}

/// Run the n-qubit QFT fully blindly and return the recovered output with
/// the session transcript. Plans with every controlled phase on the π/4
/// grid (k ≤ 2, i.e. n ≤ 2) run in grid mode; deeper phases switch the
/// plan to continuous mode.
pub fn run_blind_qft(
    n: usize,
    input: &StateVector,
    seed: u64,
) -> Result<(StateVector, Transcript), Error> {
    if n == 0 || n > MAX_BLIND_QFT_WIRES {
        return Err(Error::QubitCountOutOfRange(n));
    }
    let circuit = qft_circuit(n)?;
    let plan = compile_gates(&circuit.to_protocol_gates(), n, EulerOrder::Zyz)?;
    let out = run_computation(&plan, input, &SessionConfig::new(seed))?;
    Ok((out.output, out.transcript))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{
        apply_unitary, states_equal_up_to_phase, unitaries_equal_up_to_phase, TOL_FIDELITY,
        TOL_STRUCTURAL,
    };
    use crate::rotations::hadamard;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn apply_full(u: &Unitary, state: &StateVector) -> StateVector {
        let wires: Vec<usize> = (0..state.num_qubits()).collect();
        apply_unitary(state, u, &wires).unwrap()
    }

    #[test]
    fn one_qubit_qft_is_hadamard() {
        let c = qft_circuit(1).unwrap();
        assert_eq!(c.gates, vec![QftGate::H { wire: 0 }]);
        assert!(c.unitary().unwrap().max_abs_diff(&hadamard()) < TOL_STRUCTURAL);
    }

    #[test]
    fn gate_counts_follow_the_closed_form() {
        for n in 1..=MAX_QFT_WIRES {
            let c = qft_circuit(n).unwrap();
            let h = c.gates.iter().filter(|g| matches!(g, QftGate::H { .. })).count();
            let p = c.gates.iter().filter(|g| matches!(g, QftGate::CPhase { .. })).count();
            let s = c.gates.iter().filter(|g| matches!(g, QftGate::Swap { .. })).count();
            assert_eq!(h, n);
            assert_eq!(p, n * (n - 1) / 2);
            assert_eq!(s, n / 2);
        }
    }

    #[test]
    fn qft_rejects_out_of_range_sizes() {
        assert!(matches!(qft_circuit(0), Err(Error::QubitCountOutOfRange(0))));
        assert!(matches!(qft_circuit(7), Err(Error::QubitCountOutOfRange(7))));
    }

    #[test]
    fn two_qubit_qft_matches_the_literal_dft4() {
        let m = qft_circuit(2).unwrap().unitary().unwrap();
        let i = Complex::new(0.0, 1.0);
        let one = Complex::new(1.0, 0.0);
        let rows = [
            [one, one, one, one],
            [one, i, -one, -i],
            [one, -one, one, -one],
            [one, -i, -one, i],
        ];
        let mut entries = Vec::new();
        for row in rows {
            for e in row {
                entries.push(e * 0.5);
            }
        }
        let literal = Unitary::from_entries_unchecked(4, entries);
        assert!(m.max_abs_diff(&literal) < TOL_STRUCTURAL);
        assert!(m.max_abs_diff(&dft_matrix(2)) < TOL_STRUCTURAL);
    }

    #[test]
    fn circuit_equals_dft_oracle_up_to_six_wires() {
        for n in 1..=MAX_QFT_WIRES {
            let m = qft_circuit(n).unwrap().unitary().unwrap();
            assert!(m.max_abs_diff(&dft_matrix(n)) < TOL_STRUCTURAL, "n={n}");
        }
    }

    #[test]
    fn hadamard_decomposition_reconstructs_h() {
        let d = decompose_qft_gate(&QftGate::H { wire: 0 }).unwrap();
        let QftGateDecomposition::Hadamard { triple } = d else { panic!("wrong variant") };
        assert!(triple.reconstruct().max_abs_diff(&hadamard()) < TOL_STRUCTURAL);
    }

    #[test]
    fn cphase_abc_construction_holds_for_all_depths() {
        for k in 1..=6u32 {
            let d = decompose_qft_gate(&QftGate::CPhase { k, control: 0, target: 1 }).unwrap();
            let QftGateDecomposition::CPhase { abc, .. } = d else { panic!("wrong variant") };
            let identity = Unitary::identity(2);
            assert!(abc.abc_product().max_abs_diff(&identity) < TOL_STRUCTURAL, "k={k}");
            let phi = 2.0 * PI / (1u64 << k) as f64;
            let target = Unitary::from_entries_unchecked(
                2,
                vec![
                    Complex::new(1.0, 0.0),
                    Complex::new(0.0, 0.0),
                    Complex::new(0.0, 0.0),
                    Complex::from_polar(1.0, phi),
                ],
            );
            assert!(abc.reconstruct().max_abs_diff(&target) < TOL_STRUCTURAL, "k={k}");
            assert!((abc.alpha.abs() - PI / (1u64 << k) as f64).abs() < TOL_STRUCTURAL, "k={k}");
            // γ = 0 in the z-y-z form of a diagonal gate: A and B carry
            // only trivial Ry factors.
            for g in abc.a_seq.iter().chain(&abc.b_seq) {
                if g.axis == crate::rotations::Axis::Y {
                    assert!(g.angle.radians().abs() < TOL_STRUCTURAL, "k={k}");
                }
            }
        }
    }

    #[test]
    fn swap_decomposition_is_three_cnots_equal_to_swap() {
        let d = decompose_qft_gate(&QftGate::Swap { a: 0, b: 1 }).unwrap();
        let QftGateDecomposition::Swap { cnots } = d else { panic!("wrong variant") };
        assert_eq!(cnots.len(), 3);
        let m = gate_sequence_unitary(&cnots, 2).unwrap();
        let mut entries = vec![Complex::new(0.0, 0.0); 16];
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            entries[r * 4 + c] = Complex::new(1.0, 0.0);
        }
        let swap = Unitary::from_entries_unchecked(4, entries);
        assert!(unitaries_equal_up_to_phase(&m, &swap, TOL_STRUCTURAL));
    }

    use crate::protocol::PlanMode;

    #[test]
    fn mode_switches_with_phase_depth() {
        let p2 = compile_gates(&qft_circuit(2).unwrap().to_protocol_gates(), 2, EulerOrder::Zyz)
            .unwrap();
        assert_eq!(p2.mode, PlanMode::Grid);
        let p3 = compile_gates(&qft_circuit(3).unwrap().to_protocol_gates(), 3, EulerOrder::Zyz)
            .unwrap();
        assert_eq!(p3.mode, PlanMode::Continuous);
    }

    #[test]
    fn blind_qft_of_zero_state_is_uniform_superposition() {
        let input = StateVector::basis(2, 0);
        let (out, transcript) = run_blind_qft(2, &input, 5).unwrap();
        let uniform = StateVector::from_amplitudes(
            2,
            vec![Complex::new(0.5, 0.0); 4],
        )
        .unwrap();
        assert!(out.fidelity(&uniform) > 1.0 - TOL_FIDELITY);
        transcript.check_unidirectional().unwrap();
        assert!(!transcript.server_view_leaks_secrets());
    }

    #[test]
    fn blind_qft_of_basis_one_matches_the_dft_column() {
        let input = StateVector::basis(2, 1);
        let (out, _) = run_blind_qft(2, &input, 9).unwrap();
        let i = Complex::new(0.0, 1.0);
        let one = Complex::new(1.0, 0.0);
        let expected = StateVector::from_amplitudes(
            2,
            vec![one * 0.5, i * 0.5, -one * 0.5, -i * 0.5],
        )
        .unwrap();
        assert!(states_equal_up_to_phase(&out, &expected, 1e-9));
    }

    #[test]
    fn blind_qft_matches_the_dft_oracle_on_random_three_qubit_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..5u64 {
            let dim = 8;
            let mut amps: Vec<Complex> = (0..dim)
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            for a in amps.iter_mut() {
                *a /= norm;
            }
            let input = StateVector::from_amplitudes(3, amps).unwrap();
            let (out, _) = run_blind_qft(3, &input, seed).unwrap();
            let expected = apply_full(&dft_matrix(3), &input);
            let f = out.fidelity(&expected);
            assert!(f > 1.0 - TOL_FIDELITY, "seed {seed}: fidelity {f}");
        }
    }

    #[test]
    fn blind_equals_direct_over_seeds() {
        let circuit = qft_circuit(2).unwrap();
        let direct = circuit.unitary().unwrap();
        for seed in 0..10u64 {
            let input = StateVector::basis(2, (seed % 4) as usize);
            let (out, _) = run_blind_qft(2, &input, seed).unwrap();
            let expected = apply_full(&direct, &input);
            assert!(states_equal_up_to_phase(&out, &expected, 1e-9), "seed {seed}");
        }
    }

    #[test]
    fn blind_qft_rejects_large_registers() {
        let input = StateVector::basis(4, 0);
        assert!(matches!(run_blind_qft(4, &input, 0), Err(Error::QubitCountOutOfRange(4))));
    }

    #[test]
    fn hadamard_triple_uses_only_y_and_z_rotations() {
        // The Eq-style form: zero leading Rz, Ry(π/2), Rz(π), phase π/2.
        let triple = named_gate_table(NamedGate::H, EulerOrder::Zyz).unwrap();
        assert!(triple.alpha.abs() < TOL_STRUCTURAL);
        assert!((triple.beta - PI / 2.0).abs() < TOL_STRUCTURAL);
        assert!((triple.gamma - PI).abs() < TOL_STRUCTURAL);
        assert!((triple.phase - PI / 2.0).abs() < TOL_STRUCTURAL);
    }
}
