//! Gate definitions, random circuit generation and noiseless density-matrix
//! simulation.
//!
//! Qubit 0 is the most significant bit of a basis index, so on two qubits
//! `|10>` is basis state 2. Gate matrix conventions: `RX(t) = exp(-i t X/2)`
//! (likewise RY/RZ), `T = diag(1, e^{i pi/4})`, `S = diag(1, i)`. Circuits
//! start from `|0...0>` and evolve as `rho <- U rho U†` one gate at a time.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::linalg::{CMat, LinalgError, HERMITIAN_TOL};
use crate::seed::rng_from;

/// Absolute tolerance on `|tr(rho) - 1|` for a valid density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Density-matrix eigenvalues must not drop below `-PSD_TOL`.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("gate {0} expects {1} target(s), got {2}")]
    BadArity(&'static str, usize, usize),
    #[error("target qubit {0} out of range for {1} qubits")]
    TargetOutOfRange(usize, usize),
    #[error("two-qubit gate targets must be distinct, got {0} twice")]
    DuplicateTarget(usize),
    #[error("rotation angle {0} outside [0, 2*pi)")]
    AngleOutOfRange(f64),
    #[error("gate {0} takes no angle")]
    UnexpectedAngle(&'static str),
    #[error("rotation gate {0} requires an angle")]
    MissingAngle(&'static str),
    #[error("random circuits need at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("depth_min {0} exceeds depth_max {1}")]
    BadDepthRange(usize, usize),
    #[error("qubit {0} targeted twice within one layer")]
    LayerCollision(usize),
    #[error("density matrix candidate is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("density matrix candidate has trace {0:.12} (expected 1)")]
    BadTrace(f64),
    #[error("density matrix candidate is not PSD (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("a density matrix must be square with power-of-two dimension, got {0}x{1}")]
    BadDim(usize, usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The twelve supported gate kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    T,
    S,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cz,
    Swap,
}

impl GateKind {
    pub const SINGLE: [GateKind; 9] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::T,
        GateKind::S,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
    ];
    pub const TWO: [GateKind; 3] = [GateKind::Cnot, GateKind::Cz, GateKind::Swap];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::T => "t",
            GateKind::S => "s",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
        }
    }
}

/// One gate application: kind, target qubit(s), and an angle for rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub angle: Option<f64>,
}

impl GateOp {
    pub fn single(kind: GateKind, qubit: usize) -> Self {
        Self {
            kind,
            targets: vec![qubit],
            angle: None,
        }
    }

    pub fn rotation(kind: GateKind, qubit: usize, angle: f64) -> Self {
        Self {
            kind,
            targets: vec![qubit],
            angle: Some(angle),
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Self {
            kind,
            targets: vec![a, b],
            angle: None,
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<(), QuantumError> {
        let arity = self.kind.arity();
        if self.targets.len() != arity {
            return Err(QuantumError::BadArity(
                self.kind.name(),
                arity,
                self.targets.len(),
            ));
        }
        for &t in &self.targets {
            if t >= num_qubits {
                return Err(QuantumError::TargetOutOfRange(t, num_qubits));
            }
        }
        if arity == 2 && self.targets[0] == self.targets[1] {
            return Err(QuantumError::DuplicateTarget(self.targets[0]));
        }
        match (self.kind.is_rotation(), self.angle) {
            (true, None) => return Err(QuantumError::MissingAngle(self.kind.name())),
            (true, Some(a)) if !(0.0..TAU).contains(&a) => {
                return Err(QuantumError::AngleOutOfRange(a))
            }
            (false, Some(_)) => return Err(QuantumError::UnexpectedAngle(self.kind.name())),
            _ => {}
        }
        Ok(())
    }
}

/// An ordered sequence of gate layers over a fixed qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub layers: Vec<Vec<GateOp>>,
    pub seed: u64,
}

impl Circuit {
    pub fn validate(&self) -> Result<(), QuantumError> {
        for layer in &self.layers {
            let mut used = vec![false; self.num_qubits];
            for gate in layer {
                gate.validate(self.num_qubits)?;
                for &t in &gate.targets {
                    if used[t] {
                        return Err(QuantumError::LayerCollision(t));
                    }
                    used[t] = true;
                }
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Human-readable dump, one gate per line (`kind targets [angle]`).
    /// Debugging aid only, not a stability-guaranteed format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qubits {} seed {}", self.num_qubits, self.seed);
        for (i, layer) in self.layers.iter().enumerate() {
            let _ = writeln!(out, "layer {i}");
            for gate in layer {
                let _ = write!(out, "{}", gate.kind.name());
                for &t in &gate.targets {
                    let _ = write!(out, " {t}");
                }
                if let Some(a) = gate.angle {
                    let _ = write!(out, " {a}");
                }
                out.push('\n');
            }
        }
        out
    }
}

/// A validated density matrix: Hermitian, unit trace, PSD within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    mat: CMat,
}

impl DensityMatrix {
    /// Full validation: Hermitian and unit trace within 1e-10, and PSD
    /// (minimum eigenvalue >= -1e-10, checked by eigendecomposition).
    pub fn new(mat: CMat) -> Result<Self, QuantumError> {
        let dm = Self::from_evolved(mat)?;
        let (eigenvalues, _) = dm.mat.hermitize().hermitian_eig()?;
        let min = eigenvalues.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(QuantumError::NotPsd(min));
        }
        Ok(dm)
    }

    /// Cheap validation (Hermitian + trace) for matrices whose positivity is
    /// guaranteed by construction: unitary evolution, Kraus maps, spectral
    /// clipping, or round-trips of previously valid states.
    pub(crate) fn from_evolved(mat: CMat) -> Result<Self, QuantumError> {
        if !mat.is_square() || !mat.rows().is_power_of_two() {
            return Err(QuantumError::BadDim(mat.rows(), mat.cols()));
        }
        let num_qubits = mat.rows().trailing_zeros() as usize;
        let asym = mat.hermitian_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(QuantumError::NotHermitian(asym));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QuantumError::BadTrace(tr.re));
        }
        Ok(Self { num_qubits, mat })
    }

    /// The pure state `|0...0><0...0|`.
    pub fn ground_state(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut mat = CMat::zeros(dim, dim);
        mat.set(0, 0, Complex64::new(1.0, 0.0));
        Self { num_qubits, mat }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2x2 matrix for a single-qubit gate kind.
fn base_single(kind: GateKind, angle: Option<f64>) -> Result<CMat, QuantumError> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let entries: [Complex64; 4] = match kind {
        GateKind::X => [zero, one, one, zero],
        GateKind::Y => [zero, c(0.0, -1.0), c(0.0, 1.0), zero],
        GateKind::Z => [one, zero, zero, c(-1.0, 0.0)],
        GateKind::H => {
            let s = c(1.0 / 2.0_f64.sqrt(), 0.0);
            [s, s, s, -s]
        }
        GateKind::T => [one, zero, zero, Complex64::from_polar(1.0, FRAC_PI_4)],
        GateKind::S => [one, zero, zero, c(0.0, 1.0)],
        GateKind::Rx => {
            let t = angle.ok_or(QuantumError::MissingAngle("rx"))? / 2.0;
            let (s, co) = t.sin_cos();
            [c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
        }
        GateKind::Ry => {
            let t = angle.ok_or(QuantumError::MissingAngle("ry"))? / 2.0;
            let (s, co) = t.sin_cos();
            [c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
        }
        GateKind::Rz => {
            let t = angle.ok_or(QuantumError::MissingAngle("rz"))? / 2.0;
            [
                Complex64::from_polar(1.0, -t),
                zero,
                zero,
                Complex64::from_polar(1.0, t),
            ]
        }
        _ => unreachable!("base_single called with two-qubit kind"),
    };
    Ok(CMat::from_vec(2, 2, entries.to_vec()).expect("gate entries are finite"))
}

/// 4x4 matrix for a two-qubit gate, first target as the high-order bit.
fn base_two(kind: GateKind) -> CMat {
    let mut m = CMat::zeros(4, 4);
    let one = c(1.0, 0.0);
    match kind {
        GateKind::Cnot => {
            m.set(0, 0, one);
            m.set(1, 1, one);
            m.set(2, 3, one);
            m.set(3, 2, one);
        }
        GateKind::Cz => {
            m.set(0, 0, one);
            m.set(1, 1, one);
            m.set(2, 2, one);
            m.set(3, 3, -one);
        }
        GateKind::Swap => {
            m.set(0, 0, one);
            m.set(1, 2, one);
            m.set(2, 1, one);
            m.set(3, 3, one);
        }
        _ => unreachable!("base_two called with single-qubit kind"),
    }
    m
}

#[inline]
fn bit_of(index: usize, qubit: usize, num_qubits: usize) -> usize {
    (index >> (num_qubits - 1 - qubit)) & 1
}

#[inline]
fn with_bit(index: usize, qubit: usize, num_qubits: usize, value: usize) -> usize {
    let shift = num_qubits - 1 - qubit;
    (index & !(1 << shift)) | (value << shift)
}

/// Embed a 2x2 operator on one qubit of an `num_qubits` register, i.e.
/// `I ⊗ ... ⊗ op ⊗ ... ⊗ I`.
pub fn embed_single_qubit(op: &CMat, qubit: usize, num_qubits: usize) -> CMat {
    debug_assert!(op.rows() == 2 && op.cols() == 2);
    debug_assert!(qubit < num_qubits);
    let dim = 1usize << num_qubits;
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let bit = bit_of(col, qubit, num_qubits);
        for new_bit in 0..2 {
            let amp = op.get(new_bit, bit);
            if amp.re != 0.0 || amp.im != 0.0 {
                out.set(with_bit(col, qubit, num_qubits, new_bit), col, amp);
            }
        }
    }
    out
}

fn embed_two_qubit(op: &CMat, a: usize, b: usize, num_qubits: usize) -> CMat {
    debug_assert!(op.rows() == 4 && op.cols() == 4);
    let dim = 1usize << num_qubits;
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let col4 = bit_of(col, a, num_qubits) * 2 + bit_of(col, b, num_qubits);
        for row4 in 0..4 {
            let amp = op.get(row4, col4);
            if amp.re != 0.0 || amp.im != 0.0 {
                let row = with_bit(
                    with_bit(col, a, num_qubits, row4 >> 1),
                    b,
                    num_qubits,
                    row4 & 1,
                );
                out.set(row, col, amp);
            }
        }
    }
    out
}

/// Full `2^n x 2^n` unitary for a gate: the standard gate matrix tensored
/// with identity on all non-target qubits.
pub fn gate_unitary(gate: &GateOp, num_qubits: usize) -> Result<CMat, QuantumError> {
    gate.validate(num_qubits)?;
    match gate.kind.arity() {
        1 => {
            let base = base_single(gate.kind, gate.angle)?;
            Ok(embed_single_qubit(&base, gate.targets[0], num_qubits))
        }
        _ => {
            let base = base_two(gate.kind);
            Ok(embed_two_qubit(
                &base,
                gate.targets[0],
                gate.targets[1],
                num_qubits,
            ))
        }
    }
}

/// Generate a random circuit, a pure function of `(num_qubits, depth bounds,
/// seed)`. Each layer places one uniformly chosen two-qubit gate with
/// probability 1/2, then fills every unoccupied qubit with a uniform
/// single-qubit gate; rotation angles are uniform on `[0, 2*pi)`.
pub fn random_circuit(
    num_qubits: usize,
    depth_min: usize,
    depth_max: usize,
    seed: u64,
) -> Result<Circuit, QuantumError> {
    if num_qubits < 2 {
        return Err(QuantumError::TooFewQubits(num_qubits));
    }
    if depth_min > depth_max {
        return Err(QuantumError::BadDepthRange(depth_min, depth_max));
    }
    let mut rng = rng_from(seed);
    let depth = rng.gen_range(depth_min..=depth_max);
    let mut layers = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut layer = Vec::new();
        let mut occupied = vec![false; num_qubits];
        if rng.gen_bool(0.5) {
            let kind = GateKind::TWO[rng.gen_range(0..GateKind::TWO.len())];
            let a = rng.gen_range(0..num_qubits);
            // Uniform over ordered distinct pairs without a rejection loop.
            let mut b = rng.gen_range(0..num_qubits - 1);
            if b >= a {
                b += 1;
            }
            occupied[a] = true;
            occupied[b] = true;
            layer.push(GateOp::two(kind, a, b));
        }
        for q in 0..num_qubits {
            if occupied[q] {
                continue;
            }
            let kind = GateKind::SINGLE[rng.gen_range(0..GateKind::SINGLE.len())];
            if kind.is_rotation() {
                layer.push(GateOp::rotation(kind, q, rng.gen_range(0.0..TAU)));
            } else {
                layer.push(GateOp::single(kind, q));
            }
        }
        layers.push(layer);
    }
    Ok(Circuit {
        num_qubits,
        layers,
        seed,
    })
}

/// Noiseless simulation: start from `|0...0><0...0|` and conjugate by each
/// gate unitary in layer order.
pub fn simulate_clean(circuit: &Circuit) -> Result<DensityMatrix, QuantumError> {
    circuit.validate()?;
    let mut rho = DensityMatrix::ground_state(circuit.num_qubits).into_mat();
    for layer in &circuit.layers {
        for gate in layer {
            let u = gate_unitary(gate, circuit.num_qubits)?;
            rho = u.matmul(&rho)?.matmul(&u.dagger())?;
        }
    }
    DensityMatrix::from_evolved(rho)
}
