//! Blind execution of a compiled plan: encryption, routing, teleportation,
//! cancellation, frame maintenance, and output recovery.
//!
//! Per blind rotation the client sends the encrypted angle
//! `θ′ = r1·π + (−1)^{r2}θ + ξ (mod 2π)` (r2 is the frame's adaptive
//! sign), then a same-axis cancellation rotation `±(kπ − ξ)` whose sign
//! adapts to the by-product of the first teleportation; the residues
//! `R(kπ)`, `R(r1π)` are Paulis absorbed into the frame. Controlled
//! rotations use ξ alone (π offsets are not Pauli on a controlled
//! rotation) with cancellation `±(2πk − ξ)`, whose `C-Rz(2π) = Z⊗I`
//! residue is likewise absorbed; frame X-bits on the control additionally
//! owe uncontrolled compensation rotations that re-enter the blind stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::pauli_frame::{push_through_controlled, PauliFrame, RotationInstruction, SignBit};
use crate::protocol::plan::{ComputationPlan, PlanMode, PlanStep};
use crate::protocol::transcript::{MessageBody, PartyRole, SecretRecord, Transcript};
use crate::qcore::{
    apply_unitary, bell_measure, bell_state, reduced_density, BellCode, Complex, DensityMatrix,
    StateVector,
};
use crate::rotations::{pauli_x, pauli_z, rotation_matrix, Angle, Axis, RotationGate};
use crate::teleport::{teleport_controlled, teleport_rotation};

/// The client-side key material of one encrypted angle. Only
/// `theta_prime` is ever transmitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncryptedAngle {
    pub theta_prime: Angle,
    pub r1: u8,
    pub r2: SignBit,
    pub xi: Angle,
}

/// `θ′ = r1·π + (−1)^{r2}θ + ξ (mod 2π)` with r1 a fresh uniform bit and
/// ξ uniform on the π/4 grid. Exact grid arithmetic when θ is on-grid.
pub fn encrypt_angle<R: Rng>(
    theta: Angle,
    r2: SignBit,
    mode: PlanMode,
    rng: &mut R,
) -> Result<EncryptedAngle, Error> {
    if mode == PlanMode::Grid && !theta.is_grid() {
        return Err(Error::OffGridAngle(theta.radians()));
    }
    let r1: u8 = rng.gen_range(0..2);
    let xi = Angle::grid(rng.gen_range(0..8));
    let unreduced = Angle::grid(4 * r1 as i64).add(r2.apply(theta)).add(xi);
    Ok(EncryptedAngle { theta_prime: unreduced.mod_2pi(), r1, r2, xi })
}

/// The same-axis rotation `kπ − ξ` removing the blinding offset ξ
/// (k ∈ {1,2}); composed with the encrypted rotation it leaves only
/// Pauli residues.
pub fn schedule_cancellation(xi: Angle, k: u8) -> Angle {
    Angle::grid(4 * k as i64).add(xi.neg())
}

/// Deterministic alternation for single-qubit steps.
pub fn route_single(counter: usize) -> PartyRole {
    if counter % 2 == 0 {
        PartyRole::Server1
    } else {
        PartyRole::Server2
    }
}

/// Controlled steps go wholly to one random server; the other receives a
/// decoy Bell pair so task routing leaks nothing.
pub fn route_controlled<R: Rng>(rng: &mut R) -> (PartyRole, PartyRole) {
    if rng.gen_range(0..2) == 0 {
        (PartyRole::Server1, PartyRole::Server2)
    } else {
        (PartyRole::Server2, PartyRole::Server1)
    }
}

/// Hooks for the blindness auditors: force the input one-time pad, pin
/// every r1 draw, and capture the executing server's held state at one
/// plan step.
#[derive(Debug, Clone, Copy, Default)]
pub struct AuditProbe {
    pub capture_step: Option<usize>,
    pub fix_r1: Option<u8>,
    /// `(k, j, l, m)` applying `Z^k X^j` on wire 0 and `Z^l X^m` on wire 1.
    pub input_pad: Option<[u8; 4]>,
}

#[derive(Debug, Clone, Copy)]
pub struct SessionConfig {
    pub seed: u64,
    pub probe: Option<AuditProbe>,
}

impl SessionConfig {
    pub fn new(seed: u64) -> Self {
        SessionConfig { seed, probe: None }
    }
}

pub struct SessionOutput {
    /// Frame-corrected, phase-normalized client output.
    pub output: StateVector,
    /// Logical-ordered state before frame recovery.
    pub raw_state: StateVector,
    pub frame: PauliFrame,
    pub transcript: Transcript,
    /// Reduced density of the executing server's received qubits at the
    /// probed step, if a capture was requested.
    pub captured: Option<DensityMatrix>,
}

/// Undo the tracked by-product frame wire by wire and phase-normalize.
pub fn recover_output(state: &StateVector, frame: &PauliFrame) -> Result<StateVector, Error> {
    let mut s = state.clone();
    for wire in 0..frame.num_wires() {
        let u = frame.wire_unitary(wire)?;
        s = apply_unitary(&s, &u.adjoint(), &[wire])?;
    }
    Ok(s.phase_normalized())
}

/// Execute a compiled plan blindly on the given input register.
pub fn run_computation(
    plan: &ComputationPlan,
    input: &StateVector,
    config: &SessionConfig,
) -> Result<SessionOutput, Error> {
    if input.num_qubits() != plan.num_wires {
        return Err(Error::DimensionMismatch {
            expected: plan.num_wires,
            got: input.num_qubits(),
        });
    }
    let mut session = Session::new(plan, input, config)?;
    session.run(plan)?;
    session.finish()
}

struct Session {
    state: StateVector,
    /// Logical wire → physical index in `state`.
    wire_map: Vec<usize>,
    frame: PauliFrame,
    rng: ChaCha8Rng,
    transcript: Transcript,
    probe: Option<AuditProbe>,
    mode: PlanMode,
    step_index: usize,
    single_counter: usize,
    ancilla_counter: usize,
    decoy_counter: usize,
    captured: Option<DensityMatrix>,
}

impl Session {
    fn new(plan: &ComputationPlan, input: &StateVector, config: &SessionConfig) -> Result<Self, Error> {
        let n = plan.num_wires;
        let mut state = input.clone();
        if let Some(probe) = &config.probe {
            if let Some([k, j, l, m]) = probe.input_pad {
                if n < 2 {
                    return Err(Error::QubitCountOutOfRange(n));
                }
                state = apply_pad(&state, 0, k, j)?;
                state = apply_pad(&state, 1, l, m)?;
            }
        }
        let mut transcript = Transcript::new(config.seed, plan.mode);
        transcript.send(
            PartyRole::TrustedCenter,
            PartyRole::Client,
            MessageBody::QubitTransfer {
                qubits: (0..n).map(|w| format!("w{w}")).collect(),
            },
        );
        Ok(Session {
            state,
            wire_map: (0..n).collect(),
            frame: PauliFrame::identity(n),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            transcript,
            probe: config.probe,
            mode: plan.mode,
            step_index: 0,
            single_counter: 0,
            ancilla_counter: 0,
            decoy_counter: 0,
            captured: None,
        })
    }

    fn run(&mut self, plan: &ComputationPlan) -> Result<(), Error> {
        for (i, step) in plan.steps.iter().enumerate() {
            self.step_index = i;
            match *step {
                PlanStep::BlindRotation { wire, axis, theta } => {
                    self.exec_blind_rotation(wire, axis, theta)?;
                }
                PlanStep::BlindControlledRotation { control, target, axis, theta } => {
                    self.exec_controlled(control, target, axis, theta)?;
                }
                PlanStep::Cancellation { .. } => {
                    return Err(Error::InvalidPlan(
                        "cancellation steps are execution records, not plan inputs".into(),
                    ));
                }
            }
            let frame = self.frame.clone();
            self.transcript
                .record_secret(SecretRecord::FrameSnapshot { step: i, frame });
        }
        Ok(())
    }

    fn finish(mut self) -> Result<SessionOutput, Error> {
        self.transcript.final_frame = Some(self.frame.clone());
        self.transcript.check_unidirectional()?;
        let raw_state = self.logical_state();
        let output = recover_output(&raw_state, &self.frame)?;
        Ok(SessionOutput {
            output,
            raw_state,
            frame: self.frame,
            transcript: self.transcript,
            captured: self.captured,
        })
    }

    /// Permute physical wires back into logical order.
    fn logical_state(&self) -> StateVector {
        let n = self.wire_map.len();
        debug_assert_eq!(self.state.num_qubits(), n);
        let dim = 1usize << n;
        let mut amps = vec![Complex::new(0.0, 0.0); dim];
        for (p, amp) in self.state.amplitudes().iter().enumerate() {
            let mut q = 0usize;
            for (logical, &phys) in self.wire_map.iter().enumerate() {
                let bit = (p >> (n - 1 - phys)) & 1;
                q |= bit << (n - 1 - logical);
            }
            amps[q] = *amp;
        }
        StateVector::from_amplitudes(n, amps).expect("permutation preserves norm")
    }

    fn draw_r1(&mut self) -> u8 {
        let drawn: u8 = self.rng.gen_range(0..2);
        match &self.probe {
            Some(p) => p.fix_r1.unwrap_or(drawn),
            None => drawn,
        }
    }

    fn fresh_ancilla(&mut self) -> (BellCode, [String; 2]) {
        let code = BellCode::from_index(self.rng.gen_range(0..4));
        let id = self.ancilla_counter;
        self.ancilla_counter += 2;
        (code, [format!("a{id}"), format!("a{}", id + 1)])
    }

    fn want_capture(&self) -> bool {
        self.captured.is_none()
            && self
                .probe
                .as_ref()
                .and_then(|p| p.capture_step)
                .map_or(false, |s| s == self.step_index)
    }

    /// One fully-encrypted single-wire rotation: encrypted teleportation
    /// followed by its cancellation teleportation, frame updated with all
    /// residues and by-products.
    fn exec_blind_rotation(&mut self, wire: usize, axis: Axis, theta: Angle) -> Result<(), Error> {
        let r2 = self.frame.adaptive_sign(wire, axis)?;
        let r1 = self.draw_r1();
        let xi = Angle::grid(self.rng.gen_range(0..8));
        if self.mode == PlanMode::Grid && !theta.is_grid() {
            return Err(Error::OffGridAngle(theta.radians()));
        }
        let unreduced = Angle::grid(4 * r1 as i64).add(r2.apply(theta)).add(xi);
        let theta_prime = unreduced.mod_2pi();
        let wrap_a = angle_wraps(unreduced, theta_prime);

        let server = route_single(self.single_counter);
        self.single_counter += 1;
        let (ancilla, labels) = self.fresh_ancilla();
        self.transcript.send(
            PartyRole::TrustedCenter,
            PartyRole::Client,
            MessageBody::QubitTransfer { qubits: labels.to_vec() },
        );
        let qubits = vec![format!("w{wire}"), labels[0].clone()];
        self.transcript.send(
            PartyRole::Client,
            server,
            MessageBody::QubitTransfer { qubits: qubits.clone() },
        );
        self.transcript.send(
            PartyRole::Client,
            server,
            MessageBody::AngleInstruction { theta_prime, qubits, axis, controlled: false },
        );
        if self.want_capture() {
            let joined = self.state.tensor(&bell_state(ancilla));
            let n = self.state.num_qubits();
            self.captured = Some(reduced_density(&joined, &[self.wire_map[wire], n])?);
        }
        let out = teleport_rotation(
            &self.state,
            self.wire_map[wire],
            ancilla,
            RotationGate::with_angle(axis, theta_prime),
            &mut self.rng,
        )?;
        self.apply_single_remap(wire, &out.survivor_map, out.output_wire);
        self.state = out.state;
        self.transcript.send(
            server,
            PartyRole::Client,
            MessageBody::OutcomeReport { outcomes: vec![out.step.outcome] },
        );
        let p1 = out.step.byproduct;
        self.transcript.record_secret(SecretRecord::TeleportEvent {
            step: self.step_index,
            event: out.step,
        });

        // Cancellation: slides past the fresh by-product only, so its sign
        // adapts to P1 alone.
        let g = match axis {
            Axis::X => p1.1,
            Axis::Z => p1.0,
            Axis::Y => p1.0 ^ p1.1,
        };
        let k: u8 = self.rng.gen_range(1..=2);
        let c_logical = schedule_cancellation(xi, k);
        let c_unreduced = SignBit::new(g).apply(c_logical);
        let c_sent = c_unreduced.mod_2pi();
        let wrap_b = angle_wraps(c_unreduced, c_sent);

        let server2 = route_single(self.single_counter);
        self.single_counter += 1;
        let (ancilla2, labels2) = self.fresh_ancilla();
        self.transcript.send(
            PartyRole::TrustedCenter,
            PartyRole::Client,
            MessageBody::QubitTransfer { qubits: labels2.to_vec() },
        );
        let qubits2 = vec![format!("w{wire}"), labels2[0].clone()];
        self.transcript.send(
            PartyRole::Client,
            server2,
            MessageBody::QubitTransfer { qubits: qubits2.clone() },
        );
        self.transcript.send(
            PartyRole::Client,
            server2,
            MessageBody::AngleInstruction {
                theta_prime: c_sent,
                qubits: qubits2,
                axis,
                controlled: false,
            },
        );
        let out2 = teleport_rotation(
            &self.state,
            self.wire_map[wire],
            ancilla2,
            RotationGate::with_angle(axis, c_sent),
            &mut self.rng,
        )?;
        self.apply_single_remap(wire, &out2.survivor_map, out2.output_wire);
        self.state = out2.state;
        self.transcript.send(
            server2,
            PartyRole::Client,
            MessageBody::OutcomeReport { outcomes: vec![out2.step.outcome] },
        );
        let p2 = out2.step.byproduct;
        self.transcript.record_secret(SecretRecord::TeleportEvent {
            step: self.step_index,
            event: out2.step,
        });
        self.transcript.record_secret(SecretRecord::StepKey {
            step: self.step_index,
            wire,
            axis,
            theta,
            r1,
            r2: r2.value,
            xi,
            k,
        });
        self.transcript.record_secret(SecretRecord::CancellationMarker {
            step: self.step_index,
            wire,
            axis,
            xi_ref: self.step_index,
            k,
        });

        // Residues, merged innermost-first: R(r1π), R(kπ), then P1, P2.
        if r1 == 1 {
            self.frame.merge_pi_rotation(wire, axis)?;
        }
        if k == 1 {
            self.frame.merge_pi_rotation(wire, axis)?;
        } else {
            self.frame.merge_two_pi_rotation();
        }
        self.frame.merge_byproduct(wire, p1.0, p1.1)?;
        self.frame.merge_byproduct(wire, p2.0, p2.1)?;
        // Each mod-2π reduction of a sent angle flips the state by −1
        // relative to the unreduced algebra; keep the frame phase exact.
        let parity = (wrap_a + wrap_b).rem_euclid(2) as u8;
        self.frame.add_quarter_turns(2 * parity);
        Ok(())
    }

    /// One encrypted controlled-Z rotation with its controlled
    /// cancellation, decoys to the idle server, and any owed compensation
    /// rotations re-entering the blind stream.
    fn exec_controlled(
        &mut self,
        control: usize,
        target: usize,
        axis: Axis,
        theta: Angle,
    ) -> Result<(), Error> {
        if axis != Axis::Z {
            return Err(Error::UnsupportedAxis(axis));
        }
        if self.mode == PlanMode::Grid && !theta.is_grid() {
            return Err(Error::OffGridAngle(theta.radians()));
        }
        let (xt_f, _) = self.frame.bits(target)?;
        let (r2, mut compensations) =
            push_through_controlled(&self.frame, control, target, axis, theta)?;
        // π offsets are not Pauli on a controlled rotation, so ξ alone
        // blinds the angle (ξ is already uniform on the grid).
        let xi = Angle::grid(self.rng.gen_range(0..8));
        let unreduced = r2.apply(theta).add(xi);
        let theta_prime = unreduced.mod_2pi();
        let wrap_a = angle_wraps(unreduced, theta_prime);

        let (p3, p4) = self.delegate_controlled(control, target, theta_prime)?;

        // Controlled cancellation C-Rz(±(2πk − ξ)): the sign adapts to the
        // fresh by-products only; C-Rz(2π) residues are Z on the control.
        let g = p3.0 ^ p4.0;
        let k: u8 = self.rng.gen_range(1..=2);
        let alpha_logical = Angle::grid(8 * k as i64).add(xi.neg());
        let c_unreduced = SignBit::new(g).apply(alpha_logical);
        let c_sent = c_unreduced.mod_2pi();
        let wrap_b = angle_wraps(c_unreduced, c_sent);

        let (p5, p6) = self.delegate_controlled(control, target, c_sent)?;
        self.transcript.record_secret(SecretRecord::StepKey {
            step: self.step_index,
            wire: control,
            axis,
            theta,
            r1: 0,
            r2: r2.value,
            xi,
            k,
        });
        self.transcript.record_secret(SecretRecord::CancellationMarker {
            step: self.step_index,
            wire: control,
            axis,
            xi_ref: self.step_index,
            k,
        });

        // Z_c^K with K = k − (−1)^g·(sent wraps) − (θ′ wraps), then the
        // four by-products, innermost first.
        let kk = k as i64 - (if g == 1 { -1 } else { 1 }) * wrap_b - wrap_a;
        self.frame.merge_byproduct(control, 0, kk.rem_euclid(2) as u8)?;
        self.frame.merge_byproduct(control, p3.0, p3.1)?;
        self.frame.merge_byproduct(target, p4.0, p4.1)?;
        self.frame.merge_byproduct(control, p5.0, p5.1)?;
        self.frame.merge_byproduct(target, p6.0, p6.1)?;

        // The cancellation's slide past an X on the control leaves an
        // uncontrolled Rz(±(2πk−ξ)) owed on the target (sign set by the
        // pre-step frame X-bit on the target).
        if p3.0 == 1 {
            let angle = if xt_f == 1 { alpha_logical.neg() } else { alpha_logical };
            compensations.push(RotationInstruction {
                wire: target,
                gate: RotationGate::with_angle(Axis::Z, angle.mod_2pi()),
            });
        }
        for comp in compensations {
            self.transcript.record_secret(SecretRecord::CompensationScheduled {
                step: self.step_index,
                wire: comp.wire,
                theta: comp.gate.angle,
            });
            self.exec_blind_rotation(comp.wire, comp.gate.axis, comp.gate.angle)?;
        }
        Ok(())
    }

    /// Route one controlled rotation to a random server (decoy to the
    /// other), teleport it, and return the two by-products.
    fn delegate_controlled(
        &mut self,
        control: usize,
        target: usize,
        theta_prime: Angle,
    ) -> Result<((u8, u8), (u8, u8)), Error> {
        let (executor, idle) = route_controlled(&mut self.rng);
        let (code_a, labels_a) = self.fresh_ancilla();
        let (code_b, labels_b) = self.fresh_ancilla();
        self.transcript.send(
            PartyRole::TrustedCenter,
            PartyRole::Client,
            MessageBody::QubitTransfer {
                qubits: vec![
                    labels_a[0].clone(),
                    labels_a[1].clone(),
                    labels_b[0].clone(),
                    labels_b[1].clone(),
                ],
            },
        );
        let qubits = vec![
            format!("w{control}"),
            format!("w{target}"),
            labels_a[0].clone(),
            labels_b[0].clone(),
        ];
        self.transcript.send(
            PartyRole::Client,
            executor,
            MessageBody::QubitTransfer { qubits: qubits.clone() },
        );
        self.transcript.send(
            PartyRole::Client,
            executor,
            MessageBody::AngleInstruction { theta_prime, qubits, axis: Axis::Z, controlled: true },
        );
        if self.want_capture() {
            let joined = self
                .state
                .tensor(&bell_state(code_a))
                .tensor(&bell_state(code_b));
            let n = self.state.num_qubits();
            self.captured = Some(reduced_density(
                &joined,
                &[self.wire_map[control], self.wire_map[target], n, n + 2],
            )?);
        }
        let out = teleport_controlled(
            &self.state,
            (self.wire_map[control], self.wire_map[target]),
            (code_a, code_b),
            Axis::Z,
            theta_prime,
            &mut self.rng,
        )?;
        self.apply_controlled_remap(control, target, &out.survivor_map, out.output_wires);
        self.state = out.state;
        self.transcript.send(
            executor,
            PartyRole::Client,
            MessageBody::OutcomeReport {
                outcomes: vec![out.steps[0].outcome, out.steps[1].outcome],
            },
        );
        for event in out.steps.iter() {
            self.transcript.record_secret(SecretRecord::TeleportEvent {
                step: self.step_index,
                event: event.clone(),
            });
        }
        self.run_decoy(idle)?;
        Ok((out.steps[0].byproduct, out.steps[1].byproduct))
    }

    /// A fresh Bell pair, a grid rotation, and a Bell measurement whose
    /// outcome is discarded — indistinguishable in format from a real
    /// single-qubit instruction.
    fn run_decoy(&mut self, server: PartyRole) -> Result<(), Error> {
        let code = BellCode::from_index(self.rng.gen_range(0..4));
        let angle = Angle::grid(self.rng.gen_range(0..8));
        let id = self.decoy_counter;
        self.decoy_counter += 2;
        let qubits = vec![format!("d{id}"), format!("d{}", id + 1)];
        self.transcript.send(
            PartyRole::TrustedCenter,
            PartyRole::Client,
            MessageBody::QubitTransfer { qubits: qubits.clone() },
        );
        self.transcript.send(
            PartyRole::Client,
            server,
            MessageBody::QubitTransfer { qubits: qubits.clone() },
        );
        self.transcript.send(
            PartyRole::Client,
            server,
            MessageBody::AngleInstruction {
                theta_prime: angle,
                qubits,
                axis: Axis::Z,
                controlled: false,
            },
        );
        let pair = bell_state(code);
        let rotated = apply_unitary(
            &pair,
            &rotation_matrix(&RotationGate::with_angle(Axis::Z, angle)),
            &[0],
        )?;
        let m = bell_measure(&rotated, (0, 1), &mut self.rng)?;
        self.transcript.send(
            server,
            PartyRole::Client,
            MessageBody::OutcomeReport { outcomes: vec![m.outcome] },
        );
        Ok(())
    }

    fn apply_single_remap(&mut self, wire: usize, survivors: &[(usize, usize)], output: usize) {
        for (logical, phys) in self.wire_map.iter_mut().enumerate() {
            if logical == wire {
                *phys = output;
            } else {
                *phys = lookup(survivors, *phys);
            }
        }
    }

    fn apply_controlled_remap(
        &mut self,
        control: usize,
        target: usize,
        survivors: &[(usize, usize)],
        outputs: (usize, usize),
    ) {
        for (logical, phys) in self.wire_map.iter_mut().enumerate() {
            if logical == control {
                *phys = outputs.0;
            } else if logical == target {
                *phys = outputs.1;
            } else {
                *phys = lookup(survivors, *phys);
            }
        }
    }
}

fn lookup(map: &[(usize, usize)], old: usize) -> usize {
    map.iter().find(|&&(o, _)| o == old).map(|&(_, n)| n).expect("wire survives")
}

fn apply_pad(state: &StateVector, wire: usize, z: u8, x: u8) -> Result<StateVector, Error> {
    let mut s = state.clone();
    if x == 1 {
        s = apply_unitary(&s, &pauli_x(), &[wire])?;
    }
    if z == 1 {
        s = apply_unitary(&s, &pauli_z(), &[wire])?;
    }
    Ok(s)
}

/// Number of whole periods removed when reducing `unreduced` to `reduced`.
fn angle_wraps(unreduced: Angle, reduced: Angle) -> i64 {
    match (unreduced, reduced) {
        (Angle::Grid { pi_quarters: u }, Angle::Grid { pi_quarters: r }) => (u - r) / 8,
        _ => {
            let diff = unreduced.radians() - reduced.radians();
            (diff / (2.0 * std::f64::consts::PI)).round() as i64
        }
    }
}
