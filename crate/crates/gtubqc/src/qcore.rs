//! Exact dense complex linear algebra for few-qubit states.
//!
//! Wire ordering convention (inherited by every other module): **wire 0 is
//! the most significant index bit**. For an `n`-wire state the amplitude at
//! basis index `i` corresponds to the bit string `b_0 b_1 … b_{n-1}` with
//! `b_w = (i >> (n - 1 - w)) & 1`. So `apply X to wire 0 of |00⟩` yields
//! `|10⟩`, which is amplitude index `2` for two wires.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub type Complex = Complex64;

/// Structural checks (unitarity, hermiticity).
pub const TOL_STRUCTURAL: f64 = 1e-10;
/// Exact numerical equalities (norms, probabilities).
pub const TOL_NUMERIC: f64 = 1e-12;
/// End-to-end fidelities after full protocol runs.
pub const TOL_FIDELITY: f64 = 1e-9;

/// The deterministic RNG used for every seeded run in this crate.
pub fn session_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Two-bit label of a Bell state under the mapping
/// `|φ⁺⟩↔00, |ψ⁺⟩↔10, |φ⁻⟩↔01, |ψ⁻⟩↔11`.
///
/// The first bit marks the bit-flip (X-like) component, the second the
/// phase-flip (Z-like) component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellCode {
    pub b1: u8,
    pub b2: u8,
}

impl BellCode {
    pub fn new(b1: u8, b2: u8) -> Self {
        debug_assert!(b1 <= 1 && b2 <= 1);
        BellCode { b1: b1 & 1, b2: b2 & 1 }
    }

    /// All four codes in index order 00, 01, 10, 11.
    pub fn all() -> [BellCode; 4] {
        [
            BellCode::new(0, 0),
            BellCode::new(0, 1),
            BellCode::new(1, 0),
            BellCode::new(1, 1),
        ]
    }

    pub fn index(self) -> usize {
        (self.b1 as usize) << 1 | self.b2 as usize
    }

    pub fn from_index(i: usize) -> Self {
        BellCode::new((i >> 1) as u8 & 1, i as u8 & 1)
    }

    /// Bitwise XOR, the by-product law `s_{j1}s_{j2} = s'_j ⊕ s_j`.
    pub fn xor(self, other: BellCode) -> BellCode {
        BellCode::new(self.b1 ^ other.b1, self.b2 ^ other.b2)
    }

    pub fn label(self) -> &'static str {
        match (self.b1, self.b2) {
            (0, 0) => "phi+",
            (0, 1) => "phi-",
            (1, 0) => "psi+",
            _ => "psi-",
        }
    }
}

impl std::fmt::Display for BellCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.b1, self.b2)
    }
}

/// Pure state of `num_qubits` wires as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex>,
}

impl StateVector {
    /// Computational basis state |index⟩.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let dim = 1 << num_qubits;
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![Complex::new(0.0, 0.0); dim];
        amplitudes[index] = Complex::new(1.0, 0.0);
        StateVector { num_qubits, amplitudes }
    }

    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex>) -> Result<Self, Error> {
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << num_qubits,
                got: amplitudes.len(),
            });
        }
        let state = StateVector { num_qubits, amplitudes };
        if (state.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm: state.norm() });
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Tensor product `self ⊗ other`; `other`'s wires are appended after
    /// `self`'s (they become the least significant index bits).
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let n = self.num_qubits + other.num_qubits;
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        StateVector { num_qubits: n, amplitudes }
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn inner(&self, other: &StateVector) -> Complex {
        assert_eq!(self.num_qubits, other.num_qubits);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Projector |self⟩⟨self| as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let dim = self.amplitudes.len();
        let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix { dim, entries }
    }

    /// Fix the global phase so the largest-magnitude amplitude is real
    /// and positive.
    pub fn phase_normalized(&self) -> StateVector {
        let (idx, _) = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .unwrap();
        let a = self.amplitudes[idx];
        let phase = a / a.norm();
        let amplitudes = self.amplitudes.iter().map(|x| x / phase).collect();
        StateVector { num_qubits: self.num_qubits, amplitudes }
    }
}

/// Square complex matrix constrained to be unitary (power-of-two dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    entries: Vec<Complex>,
}

impl Unitary {
    pub fn identity(dim: usize) -> Self {
        assert!(dim.is_power_of_two());
        let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex::new(1.0, 0.0);
        }
        Unitary { dim, entries }
    }

    /// Build from row-major entries, checking `U†U = I` within 1e-10.
    pub fn from_entries(dim: usize, entries: Vec<Complex>) -> Result<Self, Error> {
        if !dim.is_power_of_two() || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let u = Unitary { dim, entries };
        let r = u.unitarity_residual();
        if r > TOL_STRUCTURAL {
            return Err(Error::NotUnitary { residual: r });
        }
        Ok(u)
    }

    /// Like `from_entries` but without the unitarity check; used for
    /// intermediate products that are verified by the caller.
    pub fn from_entries_unchecked(dim: usize, entries: Vec<Complex>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Unitary { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    /// Max entrywise magnitude of `U†U − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut s = Complex::new(0.0, 0.0);
                for k in 0..d {
                    s += self.entry(k, i).conj() * self.entry(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn matmul(&self, rhs: &Unitary) -> Unitary {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut entries = vec![Complex::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entry(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * rhs.entry(k, j);
                }
            }
        }
        Unitary { dim: d, entries }
    }

    pub fn adjoint(&self) -> Unitary {
        let d = self.dim;
        let mut entries = vec![Complex::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = self.entry(j, i).conj();
            }
        }
        Unitary { dim: d, entries }
    }

    pub fn scale(&self, c: Complex) -> Unitary {
        Unitary {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    pub fn tensor(&self, other: &Unitary) -> Unitary {
        let d = self.dim * other.dim;
        let mut entries = vec![Complex::new(0.0, 0.0); d * d];
        for i1 in 0..self.dim {
            for j1 in 0..self.dim {
                for i2 in 0..other.dim {
                    for j2 in 0..other.dim {
                        let i = i1 * other.dim + i2;
                        let j = j1 * other.dim + j2;
                        entries[i * d + j] = self.entry(i1, j1) * other.entry(i2, j2);
                    }
                }
            }
        }
        Unitary { dim: d, entries }
    }

    /// Max entrywise magnitude of `self − other`.
    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Mixed state as a dense Hermitian PSD trace-one matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex>,
}

impl DensityMatrix {
    pub fn maximally_mixed(dim: usize) -> Self {
        let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// Trace distance `½‖ρ − σ‖₁` via eigenvalues of the difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let diff: Vec<Complex> = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        let evs = hermitian_eigenvalues(d, &diff);
        0.5 * evs.iter().map(|e| e.abs()).sum::<f64>()
    }

    /// Uniform mixture of equally-sized density matrices.
    pub fn average(items: &[DensityMatrix]) -> Result<DensityMatrix, Error> {
        let dim = match items.first() {
            Some(first) => first.dim,
            None => return Err(Error::EmptyKeepList),
        };
        let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
        let weight = 1.0 / items.len() as f64;
        for item in items {
            if item.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: item.dim });
            }
            for (acc, e) in entries.iter_mut().zip(&item.entries) {
                *acc += e * weight;
            }
        }
        Ok(DensityMatrix { dim, entries })
    }

    /// Eigenvalues of the (Hermitian) matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.dim, &self.entries)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on the
/// complex entries. Dimensions here never exceed a few dozen.
fn hermitian_eigenvalues(dim: usize, entries: &[Complex]) -> Vec<f64> {
    let mut a: Vec<Complex> = entries.to_vec();
    let at = |a: &[Complex], i: usize, j: usize| a[i * dim + j];
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                off += at(&a, i, j).norm_sqr();
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = at(&a, p, q);
                if apq.norm() < 1e-18 {
                    continue;
                }
                let app = at(&a, p, p).re;
                let aqq = at(&a, q, q).re;
                // Unitary 2x2 rotation eliminating the (p,q) element.
                let phi = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                // Columns.
                for i in 0..dim {
                    let aip = at(&a, i, p);
                    let aiq = at(&a, i, q);
                    a[i * dim + p] = aip * c - aiq * phi.conj() * s;
                    a[i * dim + q] = aip * phi * s + aiq * c;
                }
                // Rows.
                for j in 0..dim {
                    let apj = at(&a, p, j);
                    let aqj = at(&a, q, j);
                    a[p * dim + j] = apj * c - aqj * phi * s;
                    a[q * dim + j] = apj * phi.conj() * s + aqj * c;
                }
            }
        }
    }
    let mut evs: Vec<f64> = (0..dim).map(|i| at(&a, i, i).re).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    evs
}

/// The two-qubit Bell state for a code, under the fixed mapping.
///
/// `|b1 b2⟩ ↦ (|0, b1⟩ + (−1)^{b2} |1, 1⊕b1⟩)/√2`.
pub fn bell_state(code: BellCode) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amplitudes = vec![Complex::new(0.0, 0.0); 4];
    amplitudes[code.b1 as usize] = Complex::new(s, 0.0);
    let sign = if code.b2 == 1 { -s } else { s };
    amplitudes[2 | (1 ^ code.b1) as usize] = Complex::new(sign, 0.0);
    StateVector { num_qubits: 2, amplitudes }
}

/// Apply `u` to the ordered wires `targets`, identity elsewhere.
pub fn apply_unitary(state: &StateVector, u: &Unitary, targets: &[usize]) -> Result<StateVector, Error> {
    let n = state.num_qubits;
    let k = targets.len();
    if u.dim != 1 << k {
        return Err(Error::DimensionMismatch { expected: 1 << k, got: u.dim });
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::WireOutOfRange { wire: t, num_qubits: n });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateWire { wire: t });
        }
    }
    // Bit position of wire w in the index (wire 0 most significant).
    let shift = |w: usize| n - 1 - w;
    let dim = 1 << n;
    let mut out = vec![Complex::new(0.0, 0.0); dim];
    let mask: usize = targets.iter().map(|&t| 1usize << shift(t)).sum();
    for base in 0..dim {
        if base & mask != 0 {
            continue;
        }
        // Gather the 2^k sub-block indexed by the target wires in order.
        let mut idx = vec![0usize; 1 << k];
        for sub in 0..(1 << k) {
            let mut full = base;
            for (pos, &t) in targets.iter().enumerate() {
                if (sub >> (k - 1 - pos)) & 1 == 1 {
                    full |= 1 << shift(t);
                }
            }
            idx[sub] = full;
        }
        for (row, &fi) in idx.iter().enumerate() {
            let mut acc = Complex::new(0.0, 0.0);
            for (col, &fj) in idx.iter().enumerate() {
                acc += u.entry(row, col) * state.amplitudes[fj];
            }
            out[fi] = acc;
        }
    }
    Ok(StateVector { num_qubits: n, amplitudes: out })
}

/// Outcome of a Bell measurement: the sampled code, the renormalized
/// post-measurement state with the measured pair removed, and the map from
/// surviving old wire indices to new indices.
pub struct BellMeasurement {
    pub outcome: BellCode,
    pub state: StateVector,
    /// `survivor_map[i] = (old_wire, new_wire)` in ascending old order.
    pub survivor_map: Vec<(usize, usize)>,
}

/// Bell-measure the ordered `pair` of wires, sampling with Born
/// probabilities from `rng`, and remove the measured pair.
pub fn bell_measure<R: Rng>(
    state: &StateVector,
    pair: (usize, usize),
    rng: &mut R,
) -> Result<BellMeasurement, Error> {
    let n = state.num_qubits;
    if n < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: n });
    }
    if pair.0 == pair.1 {
        return Err(Error::DuplicateWire { wire: pair.0 });
    }
    for &w in [pair.0, pair.1].iter() {
        if w >= n {
            return Err(Error::WireOutOfRange { wire: w, num_qubits: n });
        }
    }
    if (state.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm: state.norm() });
    }
    let shift = |w: usize| n - 1 - w;
    let (p0, p1) = pair;
    let survivors: Vec<usize> = (0..n).filter(|&w| w != p0 && w != p1).collect();
    let m = survivors.len();

    // Project onto each Bell state of the pair: residual[c][r] = ⟨bell_c|_pair ψ⟩.
    let mut residuals: Vec<Vec<Complex>> = vec![vec![Complex::new(0.0, 0.0); 1 << m]; 4];
    for (full, amp) in state.amplitudes.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let bp0 = (full >> shift(p0)) & 1;
        let bp1 = (full >> shift(p1)) & 1;
        let mut rest = 0usize;
        for (pos, &w) in survivors.iter().enumerate() {
            rest |= ((full >> shift(w)) & 1) << (m - 1 - pos);
        }
        let pair_idx = bp0 << 1 | bp1;
        for code in BellCode::all() {
            let b = bell_state(code);
            let coeff = b.amplitudes[pair_idx].conj();
            if coeff.norm_sqr() != 0.0 {
                residuals[code.index()][rest] += coeff * amp;
            }
        }
    }
    let probs: Vec<f64> = residuals
        .iter()
        .map(|r| r.iter().map(|a| a.norm_sqr()).sum())
        .collect();

    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = 3;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            chosen = i;
            break;
        }
    }
    let outcome = BellCode::from_index(chosen);
    let norm = probs[chosen].sqrt();
    let amplitudes = residuals[chosen].iter().map(|a| a / norm).collect();
    let survivor_map = survivors.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    Ok(BellMeasurement {
        outcome,
        state: StateVector { num_qubits: m, amplitudes },
        survivor_map,
    })
}

/// Exact Born probabilities of the four Bell outcomes on `pair`, in code
/// index order. Does not disturb the state.
pub fn bell_probabilities(state: &StateVector, pair: (usize, usize)) -> [f64; 4] {
    let n = state.num_qubits;
    let shift = |w: usize| n - 1 - w;
    let (p0, p1) = pair;
    let survivors: Vec<usize> = (0..n).filter(|&w| w != p0 && w != p1).collect();
    let m = survivors.len();
    let mut residuals: Vec<Vec<Complex>> = vec![vec![Complex::new(0.0, 0.0); 1 << m]; 4];
    for (full, amp) in state.amplitudes.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let bp0 = (full >> shift(p0)) & 1;
        let bp1 = (full >> shift(p1)) & 1;
        let mut rest = 0usize;
        for (pos, &w) in survivors.iter().enumerate() {
            rest |= ((full >> shift(w)) & 1) << (m - 1 - pos);
        }
        let pair_idx = bp0 << 1 | bp1;
        for code in BellCode::all() {
            let b = bell_state(code);
            let coeff = b.amplitudes[pair_idx].conj();
            residuals[code.index()][rest] += coeff * amp;
        }
    }
    let mut out = [0.0; 4];
    for (i, r) in residuals.iter().enumerate() {
        out[i] = r.iter().map(|a| a.norm_sqr()).sum();
    }
    out
}

/// Partial trace keeping the listed wires (result wire order follows `keep`
/// in ascending original order).
pub fn partial_trace(rho: &DensityMatrix, num_qubits: usize, keep: &[usize]) -> Result<DensityMatrix, Error> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepList);
    }
    assert_eq!(rho.dim, 1 << num_qubits);
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &w in &keep {
        if w >= num_qubits {
            return Err(Error::WireOutOfRange { wire: w, num_qubits });
        }
    }
    let traced: Vec<usize> = (0..num_qubits).filter(|w| !keep.contains(w)).collect();
    let shift = |w: usize| num_qubits - 1 - w;
    let kd = 1 << keep.len();
    let td = 1 << traced.len();
    let mut entries = vec![Complex::new(0.0, 0.0); kd * kd];
    let compose = |kbits: usize, tbits: usize| -> usize {
        let mut full = 0usize;
        for (pos, &w) in keep.iter().enumerate() {
            full |= ((kbits >> (keep.len() - 1 - pos)) & 1) << shift(w);
        }
        for (pos, &w) in traced.iter().enumerate() {
            full |= ((tbits >> (traced.len().max(1) - 1 - pos)) & 1) << shift(w);
        }
        full
    };
    for i in 0..kd {
        for j in 0..kd {
            let mut s = Complex::new(0.0, 0.0);
            for t in 0..td {
                s += rho.entry(compose(i, t), compose(j, t));
            }
            entries[i * kd + j] = s;
        }
    }
    Ok(DensityMatrix { dim: kd, entries })
}

/// Reduced density matrix of a pure state over the kept wires.
pub fn reduced_density(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix, Error> {
    partial_trace(&state.projector(), state.num_qubits, keep)
}

/// True iff `a = c·b` for some unit phase `c`, chosen from the
/// largest-magnitude entry ratio, within `tol` in max-abs norm.
pub fn states_equal_up_to_phase(a: &StateVector, b: &StateVector, tol: f64) -> bool {
    assert_eq!(a.num_qubits, b.num_qubits);
    vectors_equal_up_to_phase(&a.amplitudes, &b.amplitudes, tol)
}

pub fn unitaries_equal_up_to_phase(a: &Unitary, b: &Unitary, tol: f64) -> bool {
    assert_eq!(a.dim, b.dim);
    vectors_equal_up_to_phase(&a.entries, &b.entries, tol)
}

/// The relative phase `c` (unit modulus) such that `a ≈ c·b`, if any.
pub fn relative_phase(a: &[Complex], b: &[Complex], tol: f64) -> Option<Complex> {
    let (idx, mag) = b
        .iter()
        .enumerate()
        .map(|(i, x)| (i, x.norm()))
        .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
    if mag < tol {
        return None;
    }
    let c = a[idx] / b[idx];
    let c = if c.norm() == 0.0 { Complex::new(1.0, 0.0) } else { c / c.norm() };
    let ok = a
        .iter()
        .zip(b)
        .all(|(x, y)| (x - c * y).norm() <= tol);
    if ok {
        Some(c)
    } else {
        None
    }
}

fn vectors_equal_up_to_phase(a: &[Complex], b: &[Complex], tol: f64) -> bool {
    relative_phase(a, b, tol).is_some()
}

/// Convex combination `Σ wᵢ |ψᵢ⟩⟨ψᵢ|`.
pub fn average_density(states: &[StateVector], weights: &[f64]) -> Result<DensityMatrix, Error> {
    assert_eq!(states.len(), weights.len());
    if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
        return Err(Error::NegativeWeight { weight: w });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > TOL_NUMERIC {
        return Err(Error::WeightsNotNormalized { sum: total });
    }
    let dim = states[0].amplitudes.len();
    let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
    for (s, &w) in states.iter().zip(weights) {
        let p = s.projector();
        for (e, pe) in entries.iter_mut().zip(&p.entries) {
            *e += w * pe;
        }
    }
    Ok(DensityMatrix { dim, entries })
}
