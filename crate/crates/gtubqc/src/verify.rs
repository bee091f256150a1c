//! Server honesty tests by entanglement swapping, with adversarial server
//! models, plus blindness auditors that check the hiding claims by exact
//! enumeration.
//!
//! The honesty tests never assert a hard-coded outcome relation: an
//! internal oracle computes the exact joint distribution of reported
//! outcomes, honest support is its nonzero set, and detection is support
//! membership of the reported tuple. Blindness is audited two ways:
//! averaging a server's held qubits over the 16 input Pauli pads and both
//! r1 keys must give the maximally mixed state exactly, and exhaustive
//! key enumeration must make the transmitted angle marginal uniform and
//! independent of the plain angle.

use rand::Rng;

use crate::error::Error;
use crate::protocol::{
    run_computation, AuditProbe, ComputationPlan, PartyRole, PlanMode, PlanStep, SessionConfig,
};
use crate::qcore::{
    apply_unitary, bell_measure, BellCode, Complex, DensityMatrix, StateVector, Unitary,
};
use crate::rotations::{controlled_rotation_matrix, rotation_matrix, Angle, Axis, RotationGate};

/// Probabilities below this are treated as exact zeros of the joint
/// distribution (all genuine probabilities here are multiples of 1/256).
const SUPPORT_TOL: f64 = 1e-9;

/// What a (dishonest) server does, applied consistently within a session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdversaryBehavior {
    Honest,
    /// Report outcomes with bit 0 (b1) or bit 1 (b2) flipped.
    FlipOutcomeBit(u8),
    /// Always report this outcome regardless of the measurement.
    FixedOutcome(BellCode),
    /// Silently skip the requested rotation before measuring.
    SkipRotation,
    /// Apply the rotation with this extra offset (radians).
    AngleOffset(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryModel {
    pub behavior: AdversaryBehavior,
    pub target: PartyRole,
}

impl AdversaryModel {
    pub fn honest(target: PartyRole) -> Self {
        AdversaryModel { behavior: AdversaryBehavior::Honest, target }
    }
}

/// Result of a batch of honesty-test trials.
#[derive(Debug, Clone)]
pub struct TestVerdict {
    pub passed: bool,
    pub trials: usize,
    pub failures: usize,
    /// Reported-outcome tuples an honest session can produce.
    pub honest_support: Vec<Vec<BellCode>>,
}

fn behavior_for(adversaries: &[AdversaryModel], server: PartyRole) -> AdversaryBehavior {
    adversaries
        .iter()
        .find(|a| a.target == server)
        .map(|a| a.behavior)
        .unwrap_or(AdversaryBehavior::Honest)
}

/// The physical rotation a server actually applies when asked for `gate`.
fn actual_rotation(gate: &RotationGate, behavior: AdversaryBehavior) -> Option<RotationGate> {
    match behavior {
        AdversaryBehavior::SkipRotation => None,
        AdversaryBehavior::AngleOffset(delta) => Some(RotationGate::with_angle(
            gate.axis,
            gate.angle.add(Angle::free(delta)),
        )),
        _ => Some(*gate),
    }
}

/// The outcome a server reports after measuring `measured`.
fn reported_outcome(measured: BellCode, behavior: AdversaryBehavior) -> BellCode {
    match behavior {
        AdversaryBehavior::FlipOutcomeBit(which) => {
            let mask = if which == 0 { BellCode::new(1, 0) } else { BellCode::new(0, 1) };
            measured.xor(mask)
        }
        AdversaryBehavior::FixedOutcome(code) => code,
        _ => measured,
    }
}

/// Unitary mapping `|b1 b2⟩ ↦ |B(b1,b2)⟩` (columns are the four Bell
/// states in code order).
fn bell_encoder() -> Unitary {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = vec![Complex::new(0.0, 0.0); 16];
    for code in BellCode::all() {
        let col = code.index();
        let state = crate::qcore::bell_state(code);
        for (row, amp) in state.amplitudes().iter().enumerate() {
            entries[row * 4 + col] = *amp;
        }
    }
    debug_assert!((entries[0].re - s).abs() < 1e-15);
    Unitary::from_entries_unchecked(4, entries)
}

/// Product of Bell pairs on the given wire pairs (remaining wires `|0⟩`,
/// of which there are none when the pairs cover every wire).
fn bell_product(num_qubits: usize, pairs: &[((usize, usize), BellCode)]) -> StateVector {
    let enc = bell_encoder();
    let mut state = StateVector::basis(num_qubits, 0);
    for &((p, q), code) in pairs {
        let code_prep = {
            // Load the code bits onto |p q⟩ before encoding.
            let mut entries = vec![Complex::new(0.0, 0.0); 16];
            for c in 0..4usize {
                entries[(c ^ code.index()) * 4 + c] = Complex::new(1.0, 0.0);
            }
            Unitary::from_entries_unchecked(4, entries)
        };
        state = apply_unitary(&state, &code_prep, &[p, q]).expect("valid wires");
        state = apply_unitary(&state, &enc, &[p, q]).expect("valid wires");
    }
    state
}

/// Exact probability that Bell measurements on `pairs` yield `codes`.
fn joint_probability(state: &StateVector, pairs: &[(usize, usize)], codes: &[BellCode]) -> f64 {
    let bells: Vec<((usize, usize), BellCode)> =
        pairs.iter().copied().zip(codes.iter().copied()).collect();
    let basis = bell_product(state.num_qubits(), &bells);
    basis.fidelity(state)
}

/// The frozen pairing table: the two rotations `(op1, op2)` such that
/// `(op1 ⊗ op2)` preserves the given Bell state (up to global phase).
/// Signs by code and axis: φ⁺ → (Z:−, X:−, Y:+); φ⁻ → (Z:−, X:+, Y:−);
/// ψ⁺ → (Z:+, X:−, Y:−); ψ⁻ → (+,+,+), where − means op2 = R(−θ).
pub fn paired_rotation_invariance(
    code: BellCode,
    axis: Axis,
    theta: Angle,
) -> (RotationGate, RotationGate) {
    let negate = match (code.index(), axis) {
        (0, Axis::Z) | (0, Axis::X) => true,
        (0, Axis::Y) => false,
        (1, Axis::Z) | (1, Axis::Y) => true,
        (1, Axis::X) => false,
        (2, Axis::X) | (2, Axis::Y) => true,
        (2, Axis::Z) => false,
        _ => false,
    };
    let second = if negate { theta.neg() } else { theta };
    (RotationGate::with_angle(axis, theta), RotationGate::with_angle(axis, second))
}

/// The four-qubit rotation-test state after the servers' (possibly
/// adversarial) physical rotations. Wires: pair A = (0,1), pair B = (2,3);
/// server 1 holds 0 and 2, server 2 holds 1 and 3.
fn rotation_test_state(
    codes: (BellCode, BellCode),
    axis: Axis,
    theta: Angle,
    adversaries: &[AdversaryModel],
) -> Result<StateVector, Error> {
    let mut state = bell_product(4, &[((0, 1), codes.0), ((2, 3), codes.1)]);
    let (op1, op2) = paired_rotation_invariance(codes.0, axis, theta);
    if let Some(g) = actual_rotation(&op1, behavior_for(adversaries, PartyRole::Server1)) {
        state = apply_unitary(&state, &rotation_matrix(&g), &[0])?;
    }
    if let Some(g) = actual_rotation(&op2, behavior_for(adversaries, PartyRole::Server2)) {
        state = apply_unitary(&state, &rotation_matrix(&g), &[1])?;
    }
    Ok(state)
}

const ROTATION_TEST_PAIRS: [(usize, usize); 2] = [(0, 2), (1, 3)];

/// Reported-outcome tuples with nonzero probability in an honest session.
fn rotation_honest_support(
    codes: (BellCode, BellCode),
    axis: Axis,
    theta: Angle,
) -> Result<Vec<Vec<BellCode>>, Error> {
    let honest = rotation_test_state(codes, axis, theta, &[])?;
    let mut support = Vec::new();
    for o1 in BellCode::all() {
        for o2 in BellCode::all() {
            if joint_probability(&honest, &ROTATION_TEST_PAIRS, &[o1, o2]) > SUPPORT_TOL {
                support.push(vec![o1, o2]);
            }
        }
    }
    Ok(support)
}

/// Run the two-pair honesty test (one rotation per server, then Bell
/// measurements) for `trials` independent rounds.
pub fn rotation_test<R: Rng>(
    codes: (BellCode, BellCode),
    axis: Axis,
    theta: Angle,
    adversaries: &[AdversaryModel],
    trials: usize,
    rng: &mut R,
) -> Result<TestVerdict, Error> {
    let support = rotation_honest_support(codes, axis, theta)?;
    let state = rotation_test_state(codes, axis, theta, adversaries)?;
    let b1 = behavior_for(adversaries, PartyRole::Server1);
    let b2 = behavior_for(adversaries, PartyRole::Server2);
    let mut failures = 0usize;
    for _ in 0..trials {
        let reported = measure_pairs(&state, &ROTATION_TEST_PAIRS, &[b1, b2], rng)?;
        if !support.contains(&reported) {
            failures += 1;
        }
    }
    Ok(TestVerdict { passed: failures == 0, trials, failures, honest_support: support })
}

/// Exact probability that one rotation-test round detects the adversary.
pub fn rotation_detection_probability(
    codes: (BellCode, BellCode),
    axis: Axis,
    theta: Angle,
    adversaries: &[AdversaryModel],
) -> Result<f64, Error> {
    let support = rotation_honest_support(codes, axis, theta)?;
    let state = rotation_test_state(codes, axis, theta, adversaries)?;
    let b1 = behavior_for(adversaries, PartyRole::Server1);
    let b2 = behavior_for(adversaries, PartyRole::Server2);
    let mut detect = 0.0;
    for o1 in BellCode::all() {
        for o2 in BellCode::all() {
            let p = joint_probability(&state, &ROTATION_TEST_PAIRS, &[o1, o2]);
            if p <= SUPPORT_TOL {
                continue;
            }
            let reported = vec![reported_outcome(o1, b1), reported_outcome(o2, b2)];
            if !support.contains(&reported) {
                detect += p;
            }
        }
    }
    Ok(detect.min(1.0))
}

/// Frozen eight-qubit wiring for the controlled test. Pairs A=(0,1),
/// B=(2,3), C=(4,5), D=(6,7). Server 1 holds 0,2 (control, target) and
/// the partners 4,6; server 2 holds 1,3 and the partners 5,7. The
/// measurement pairs swap entanglement across all four Bell pairs.
const CONTROLLED_TEST_PAIRS: [(usize, usize); 4] = [(0, 4), (2, 6), (1, 5), (3, 7)];

fn controlled_test_state(
    codes: [BellCode; 4],
    axis: Axis,
    theta: Angle,
    adversaries: &[AdversaryModel],
) -> Result<StateVector, Error> {
    if axis != Axis::Z {
        return Err(Error::UnsupportedAxis(axis));
    }
    let mut state = bell_product(
        8,
        &[((0, 1), codes[0]), ((2, 3), codes[1]), ((4, 5), codes[2]), ((6, 7), codes[3])],
    );
    let g1 = RotationGate::with_angle(axis, theta);
    let g2 = RotationGate::with_angle(axis, theta.neg());
    if let Some(g) = actual_rotation(&g1, behavior_for(adversaries, PartyRole::Server1)) {
        state = apply_unitary(&state, &controlled_rotation_matrix(g.axis, g.angle), &[0, 2])?;
    }
    if let Some(g) = actual_rotation(&g2, behavior_for(adversaries, PartyRole::Server2)) {
        state = apply_unitary(&state, &controlled_rotation_matrix(g.axis, g.angle), &[1, 3])?;
    }
    Ok(state)
}

fn controlled_honest_support(
    codes: [BellCode; 4],
    axis: Axis,
    theta: Angle,
) -> Result<Vec<Vec<BellCode>>, Error> {
    let honest = controlled_test_state(codes, axis, theta, &[])?;
    let mut support = Vec::new();
    for idx in 0..256usize {
        let outcome: Vec<BellCode> =
            (0..4).map(|i| BellCode::from_index((idx >> (2 * i)) & 3)).collect();
        if joint_probability(&honest, &CONTROLLED_TEST_PAIRS, &outcome) > SUPPORT_TOL {
            support.push(outcome);
        }
    }
    Ok(support)
}

/// Run the four-pair controlled-rotation honesty test (server 1 applies
/// the controlled rotation, server 2 its paired inverse, both Bell-
/// measure across pairs) for `trials` rounds.
pub fn controlled_test<R: Rng>(
    codes: [BellCode; 4],
    axis: Axis,
    theta: Angle,
    adversaries: &[AdversaryModel],
    trials: usize,
    rng: &mut R,
) -> Result<TestVerdict, Error> {
    let support = controlled_honest_support(codes, axis, theta)?;
    let state = controlled_test_state(codes, axis, theta, adversaries)?;
    let b1 = behavior_for(adversaries, PartyRole::Server1);
    let b2 = behavior_for(adversaries, PartyRole::Server2);
    // The first two measurement pairs are server 1's, the last two server 2's.
    let behaviors = [b1, b1, b2, b2];
    let mut failures = 0usize;
    for _ in 0..trials {
        let reported = measure_pairs(&state, &CONTROLLED_TEST_PAIRS, &behaviors, rng)?;
        if !support.contains(&reported) {
            failures += 1;
        }
    }
    Ok(TestVerdict { passed: failures == 0, trials, failures, honest_support: support })
}

/// Exact probability that one controlled-test round detects the adversary.
pub fn controlled_detection_probability(
    codes: [BellCode; 4],
    axis: Axis,
    theta: Angle,
    adversaries: &[AdversaryModel],
) -> Result<f64, Error> {
    let support = controlled_honest_support(codes, axis, theta)?;
    let state = controlled_test_state(codes, axis, theta, adversaries)?;
    let b1 = behavior_for(adversaries, PartyRole::Server1);
    let b2 = behavior_for(adversaries, PartyRole::Server2);
    let behaviors = [b1, b1, b2, b2];
    let mut detect = 0.0;
    for idx in 0..256usize {
        let outcome: Vec<BellCode> =
            (0..4).map(|i| BellCode::from_index((idx >> (2 * i)) & 3)).collect();
        let p = joint_probability(&state, &CONTROLLED_TEST_PAIRS, &outcome);
        if p <= SUPPORT_TOL {
            continue;
        }
        let reported: Vec<BellCode> = outcome
            .iter()
            .zip(behaviors.iter())
            .map(|(&o, &b)| reported_outcome(o, b))
            .collect();
        if !support.contains(&reported) {
            detect += p;
        }
    }
    Ok(detect.min(1.0))
}

/// Bell-measure the listed wire pairs in order (tracking index renaming
/// as measured qubits drop out) and return the reported outcomes.
fn measure_pairs<R: Rng>(
    state: &StateVector,
    pairs: &[(usize, usize)],
    behaviors: &[AdversaryBehavior],
    rng: &mut R,
) -> Result<Vec<BellCode>, Error> {
    let mut current = state.clone();
    let mut pos: Vec<usize> = (0..state.num_qubits()).collect();
    let mut reported = Vec::with_capacity(pairs.len());
    for (&(p, q), &behavior) in pairs.iter().zip(behaviors) {
        let m = bell_measure(&current, (pos[p], pos[q]), rng)?;
        for slot in pos.iter_mut() {
            if let Some(&(_, new)) = m.survivor_map.iter().find(|&&(old, _)| old == *slot) {
                *slot = new;
            }
        }
        reported.push(reported_outcome(m.outcome, behavior));
        current = m.state;
    }
    Ok(reported)
}

/// Average a server's held qubits over all 16 input Pauli pads and both
/// r1 keys at each inspected step; return the maximum trace distance from
/// the maximally mixed state. Requires a two-wire plan (the pad set is
/// two-qubit).
pub fn blindness_audit_inputs(
    plan: &ComputationPlan,
    input: &StateVector,
    steps: &[usize],
    seed: u64,
) -> Result<f64, Error> {
    if plan.num_wires != 2 {
        return Err(Error::QubitCountOutOfRange(plan.num_wires));
    }
    let mut worst: f64 = 0.0;
    for &step in steps {
        let mut captured = Vec::with_capacity(32);
        for pad_idx in 0..16u8 {
            let pad = [pad_idx & 1, (pad_idx >> 1) & 1, (pad_idx >> 2) & 1, (pad_idx >> 3) & 1];
            for r1 in 0..2u8 {
                let config = SessionConfig {
                    seed,
                    probe: Some(AuditProbe {
                        capture_step: Some(step),
                        fix_r1: Some(r1),
                        input_pad: Some(pad),
                    }),
                };
                let out = run_computation(plan, input, &config)?;
                let rho = out.captured.ok_or_else(|| {
                    Error::InvalidPlan(format!("no step {step} to audit"))
                })?;
                captured.push(rho);
            }
        }
        let avg = DensityMatrix::average(&captured)?;
        let mixed = DensityMatrix::maximally_mixed(avg.dim());
        worst = worst.max(avg.trace_distance(&mixed));
    }
    Ok(worst)
}

/// Per-step transmitted-angle statistics from exhaustive key enumeration.
#[derive(Debug, Clone)]
pub struct AngleStepReport {
    pub step: usize,
    pub controlled: bool,
    /// Occurrences of each grid angle θ′ over all keys.
    pub counts: [usize; 8],
}

#[derive(Debug, Clone)]
pub struct AngleAuditReport {
    pub steps: Vec<AngleStepReport>,
    pub uniform: bool,
    /// Largest total-variation distance between any step's θ′ marginal and
    /// any other computed with a different plain angle.
    pub max_total_variation: f64,
}

/// Enumerate the key space per plan step: single steps range over
/// (r1, ξ) ∈ 2×8 keys, controlled steps over ξ alone; the θ′ marginal
/// must be uniform on the grid, hence identical for every plain angle.
pub fn blindness_audit_angles(plan: &ComputationPlan) -> Result<AngleAuditReport, Error> {
    if plan.mode != PlanMode::Grid {
        return Err(Error::ContinuousModeAudit);
    }
    let mut steps = Vec::new();
    let mut max_tv: f64 = 0.0;
    let mut uniform = true;
    for (i, step) in plan.steps.iter().enumerate() {
        let (theta, controlled) = match *step {
            PlanStep::BlindRotation { theta, .. } => (theta, false),
            PlanStep::BlindControlledRotation { theta, .. } => (theta, true),
            PlanStep::Cancellation { .. } => continue,
        };
        let counts = angle_counts(theta, controlled)?;
        let expected = if controlled { 1 } else { 2 };
        if counts != [expected; 8] {
            uniform = false;
        }
        // Compare this step's marginal against other plain angles under the
        // same key space.
        let total: usize = counts.iter().sum();
        for other_q in [1i64, 2, 4] {
            let other = angle_counts(Angle::grid(other_q), controlled)?;
            let tv: f64 = counts
                .iter()
                .zip(other.iter())
                .map(|(&a, &b)| (a as f64 - b as f64).abs() / total as f64)
                .sum::<f64>()
                / 2.0;
            max_tv = max_tv.max(tv);
        }
        steps.push(AngleStepReport { step: i, controlled, counts });
    }
    Ok(AngleAuditReport { steps, uniform, max_total_variation: max_tv })
}

fn angle_counts(theta: Angle, controlled: bool) -> Result<[usize; 8], Error> {
    let theta_q = match theta.mod_2pi() {
        Angle::Grid { pi_quarters } => pi_quarters,
        Angle::Free { rad } => return Err(Error::OffGridAngle(rad)),
    };
    let mut counts = [0usize; 8];
    let r1_values: &[i64] = if controlled { &[0] } else { &[0, 1] };
    // r2 is frame-determined, not a free key; uniformity is independent of
    // its value (negating θ permutes the same uniform marginal), so the
    // r2 = 0 branch is tallied.
    for &r1 in r1_values {
        for xi_q in 0..8i64 {
            let q = (4 * r1 + theta_q + xi_q).rem_euclid(8) as usize;
            counts[q] += 1;
        }
    }
    Ok(counts)
}
